//! Completely positive maps in Kraus form.
//!
//! A [`KrausChannel`] carries its domain projector explicitly: noise on a code is
//! only trace preserving on the code space, `Σ E_i^dag E_i = P`. Maps that are
//! merely completely positive (adjoints, for instance) carry no domain.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{dims, Error, Result};
use crate::operator::{hermitian_eigen, operator_norm, partial_trace_a, tensor, Operator, C64, ZERO};

/// Frobenius tolerance for the trace-preservation invariant.
pub const TP_TOL: f64 = 1e-9;

/// Default operator-norm threshold for [`KrausChannel::prune`].
pub const PRUNE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct KrausChannel {
    kraus: Vec<Operator>,
    dim_in: usize,
    dim_out: usize,
    domain: Option<Operator>,
}

fn check_shapes(kraus: &[Operator]) -> Result<(usize, usize)> {
    let first = kraus.first().ok_or_else(|| Error::Schema("channel has no Kraus operators".into()))?;
    let (r, c) = (first.rows(), first.cols());
    for (k, op) in kraus.iter().enumerate() {
        if op.rows() != r || op.cols() != c {
            return Err(Error::DimensionMismatch {
                context: "Kraus operators",
                expected: dims(r, c),
                found: format!("{} at index {k}", dims(op.rows(), op.cols())),
            });
        }
    }
    Ok((r, c))
}

fn projector_defect(p: &Operator) -> f64 {
    (p * p - p).fro_norm().max((p - p.dagger()).fro_norm())
}

impl KrausChannel {
    /// Validates `Σ E_i^dag E_i = domain` within [`TP_TOL`].
    pub fn new(kraus: Vec<Operator>, domain: Operator) -> Result<Self> {
        let (dim_out, dim_in) = check_shapes(&kraus)?;
        domain.ensure_square(dim_in, "channel domain projector")?;
        let pd = projector_defect(&domain);
        if pd > TP_TOL {
            return Err(Error::Schema(format!(
                "domain is not an orthogonal projector (defect {pd:.3e})"
            )));
        }
        let ch = KrausChannel { kraus, dim_in, dim_out, domain: None };
        let dev = (ch.kraus_sum() - &domain).fro_norm();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving {
                sum: "sum_i E_i^dag E_i",
                deviation: dev,
            });
        }
        Ok(KrausChannel { domain: Some(domain), ..ch })
    }

    /// Infers the domain as `Σ E_i^dag E_i`, which must be a projector.
    pub fn from_kraus(kraus: Vec<Operator>) -> Result<Self> {
        let (dim_out, dim_in) = check_shapes(&kraus)?;
        let ch = KrausChannel { kraus, dim_in, dim_out, domain: None };
        let s = ch.kraus_sum();
        let defect = projector_defect(&s);
        if defect > TP_TOL {
            return Err(Error::NotTracePreserving {
                sum: "sum_i E_i^dag E_i (not a projector)",
                deviation: defect,
            });
        }
        Ok(KrausChannel { domain: Some(s), ..ch })
    }

    /// Completely positive map without a trace-preservation claim.
    pub fn cp_map(kraus: Vec<Operator>) -> Result<Self> {
        let (dim_out, dim_in) = check_shapes(&kraus)?;
        Ok(KrausChannel { kraus, dim_in, dim_out, domain: None })
    }

    fn with_inferred_domain(kraus: Vec<Operator>, dim_in: usize, dim_out: usize) -> Self {
        let mut ch = KrausChannel { kraus, dim_in, dim_out, domain: None };
        let s = ch.kraus_sum();
        if projector_defect(&s) <= TP_TOL {
            ch.domain = Some(s);
        }
        ch
    }

    pub fn identity(d: usize) -> Self {
        KrausChannel {
            kraus: vec![Operator::identity(d)],
            dim_in: d,
            dim_out: d,
            domain: Some(Operator::identity(d)),
        }
    }

    pub fn unitary(u: Operator) -> Result<Self> {
        let d = u.rows();
        let dev = (u.dagger() * &u - Operator::identity(d)).fro_norm();
        if dev > TP_TOL {
            return Err(Error::NotTracePreserving { sum: "U^dag U", deviation: dev });
        }
        Self::new(vec![u], Operator::identity(d))
    }

    pub fn kraus(&self) -> &[Operator] {
        &self.kraus
    }

    pub fn len(&self) -> usize {
        self.kraus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kraus.is_empty()
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn domain(&self) -> Option<&Operator> {
        self.domain.as_ref()
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.domain.is_some()
    }

    /// `Σ E_i^dag E_i`.
    pub fn kraus_sum(&self) -> Operator {
        let mut s = Operator::zeros(self.dim_in, self.dim_in);
        for e in &self.kraus {
            s = s + e.dagger() * e;
        }
        s
    }

    /// `E(ρ) = Σ E_i ρ E_i^dag`.
    pub fn apply(&self, rho: &Operator) -> Result<Operator> {
        rho.ensure_square(self.dim_in, "KrausChannel::apply")?;
        let mut out = DMatrix::<C64>::zeros(self.dim_out, self.dim_out);
        for e in &self.kraus {
            out += e.matrix() * rho.matrix() * e.adjoint();
        }
        Ok(Operator::from(out))
    }

    /// The map with Kraus operators `{E_i^dag}`.
    pub fn adjoint(&self) -> KrausChannel {
        let kraus: Vec<Operator> = self.kraus.iter().map(Operator::dagger).collect();
        KrausChannel::with_inferred_domain(kraus, self.dim_out, self.dim_in)
    }

    /// `outer ∘ inner` with Kraus operators `{O_j I_i}` (no pruning).
    pub fn compose(outer: &KrausChannel, inner: &KrausChannel) -> Result<KrausChannel> {
        if outer.dim_in != inner.dim_out {
            return Err(Error::DimensionMismatch {
                context: "KrausChannel::compose",
                expected: format!("outer input dimension {}", inner.dim_out),
                found: format!("{}", outer.dim_in),
            });
        }
        let mut kraus = Vec::with_capacity(outer.len() * inner.len());
        for o in &outer.kraus {
            for i in &inner.kraus {
                kraus.push(o * i);
            }
        }
        Ok(KrausChannel::with_inferred_domain(kraus, inner.dim_in, outer.dim_out))
    }

    /// Kraus operators `{A_i ⊗ B_j}`.
    pub fn product(fa: &KrausChannel, fb: &KrausChannel) -> KrausChannel {
        let mut kraus = Vec::with_capacity(fa.len() * fb.len());
        for a in &fa.kraus {
            for b in &fb.kraus {
                kraus.push(tensor(a, b));
            }
        }
        let domain = match (&fa.domain, &fb.domain) {
            (Some(pa), Some(pb)) => Some(tensor(pa, pb)),
            _ => None,
        };
        KrausChannel {
            kraus,
            dim_in: fa.dim_in * fb.dim_in,
            dim_out: fa.dim_out * fb.dim_out,
            domain,
        }
    }

    /// Drops Kraus operators with operator norm at or below `threshold`.
    pub fn prune(&self, threshold: f64) -> KrausChannel {
        let mut kraus: Vec<Operator> = self
            .kraus
            .iter()
            .filter(|k| operator_norm(k) > threshold)
            .cloned()
            .collect();
        if kraus.is_empty() {
            kraus.push(Operator::zeros(self.dim_out, self.dim_in));
        }
        KrausChannel { kraus, ..self.clone() }
    }

    /// Restricts the input to the range of `projector`: `E_i ↦ E_i P`.
    pub fn restrict(&self, projector: &Operator) -> Result<KrausChannel> {
        projector.ensure_square(self.dim_in, "KrausChannel::restrict")?;
        let kraus: Vec<Operator> = self.kraus.iter().map(|e| e * projector).collect();
        Ok(KrausChannel::with_inferred_domain(kraus, self.dim_in, self.dim_out))
    }

    /// Unitary remixing `F_j = Σ_i u_ij E_i`; describes the same channel.
    pub fn remix(&self, u: &Operator) -> Result<KrausChannel> {
        u.ensure_square(self.len(), "KrausChannel::remix")?;
        let kraus = (0..self.len())
            .map(|j| {
                let mut f = Operator::zeros(self.dim_out, self.dim_in);
                for (i, e) in self.kraus.iter().enumerate() {
                    f = f + e.scale_c(u[(i, j)]);
                }
                f
            })
            .collect();
        Ok(KrausChannel { kraus, ..self.clone() })
    }

    pub fn choi(&self) -> ChoiMatrix {
        let n = self.dim_in * self.dim_out;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for k in &self.kraus {
            let v = choi_vector(k);
            m += &v * v.adjoint();
        }
        ChoiMatrix {
            matrix: Operator::from(m),
            dim_in: self.dim_in,
            dim_out: self.dim_out,
        }
    }

    /// Minimal Kraus representation obtained from the Choi spectrum.
    pub fn compressed(&self) -> KrausChannel {
        let domain = self.domain.clone();
        let mut ch = self.choi().to_kraus(1e-14);
        ch.domain = domain;
        ch
    }

    /// Frobenius distance between Choi matrices.
    pub fn choi_distance(&self, other: &KrausChannel) -> Result<f64> {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return Err(Error::DimensionMismatch {
                context: "KrausChannel::choi_distance",
                expected: dims(self.dim_out, self.dim_in),
                found: dims(other.dim_out, other.dim_in),
            });
        }
        Ok((self.choi().matrix - other.choi().matrix).fro_norm())
    }

    pub fn same_channel(&self, other: &KrausChannel, tol: f64) -> bool {
        self.choi_distance(other).is_ok_and(|d| d <= tol)
    }

    pub fn to_file(&self) -> ChannelFile {
        ChannelFile {
            dim_in: self.dim_in,
            dim_out: self.dim_out,
            kraus: self.kraus.clone(),
        }
    }
}

/// Column `vec(K)` with the input index major: `vec(K)[m * d_out + o] = K[o, m]`.
fn choi_vector(k: &Operator) -> nalgebra::DVector<C64> {
    let (d_out, d_in) = (k.rows(), k.cols());
    nalgebra::DVector::from_fn(d_in * d_out, |idx, _| k[(idx % d_out, idx / d_out)])
}

/// `J = Σ_{mn} |m><n| ⊗ E(|m><n|)`, input factor first.
#[derive(Clone, Debug)]
pub struct ChoiMatrix {
    pub matrix: Operator,
    pub dim_in: usize,
    pub dim_out: usize,
}

impl ChoiMatrix {
    /// `tr_out J`, which equals `(Σ E_i^dag E_i)^T`.
    pub fn output_trace(&self) -> Operator {
        let d_in = self.dim_in;
        let d_out = self.dim_out;
        Operator::from_fn(d_in, d_in, |i, j| {
            (0..d_out).map(|o| self.matrix[(i * d_out + o, j * d_out + o)]).sum()
        })
    }

    pub fn input_trace(&self) -> Operator {
        partial_trace_a(&self.matrix, self.dim_in, self.dim_out).expect("Choi shape is consistent")
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigen(&self.matrix).map_or(f64::NEG_INFINITY, |e| e.min_eigenvalue())
    }

    /// Eigen-decomposes `J` into Kraus operators, dropping weights below
    /// `rel_tol · λ_max`.
    pub fn to_kraus(&self, rel_tol: f64) -> KrausChannel {
        let eig = crate::operator::hermitian_eigen_unchecked(&self.matrix.hermitian_part());
        let cut = rel_tol * eig.max_eigenvalue().max(0.0);
        let (d_in, d_out) = (self.dim_in, self.dim_out);
        let mut kraus = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= cut || lam <= 0.0 {
                continue;
            }
            let s = lam.sqrt();
            let v = eig.eigenvectors.column(k);
            kraus.push(Operator::from_fn(d_out, d_in, |o, m| v[m * d_out + o] * s));
        }
        if kraus.is_empty() {
            kraus.push(Operator::zeros(d_out, d_in));
        }
        KrausChannel::with_inferred_domain(kraus, d_in, d_out)
    }
}

/// On-disk channel format: `{"dim_in", "dim_out", "kraus": [matrix, ...]}` with
/// each matrix given as row-major rows of `[re, im]` pairs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<Operator>,
}

impl ChannelFile {
    pub fn into_channel(self) -> Result<KrausChannel> {
        for (k, op) in self.kraus.iter().enumerate() {
            if op.rows() != self.dim_out || op.cols() != self.dim_in {
                return Err(Error::Schema(format!(
                    "Kraus operator {k} is {}, declared dim_out x dim_in = {}",
                    dims(op.rows(), op.cols()),
                    dims(self.dim_out, self.dim_in)
                )));
            }
        }
        KrausChannel::from_kraus(self.kraus)
    }
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let file: ChannelFile =
        serde_json::from_str(text).map_err(|e| Error::Schema(format!("channel JSON: {e}")))?;
    file.into_channel()
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string(&ch.to_file()).expect("channel serializes")
}

/// Standard qubit noise models and helpers for lifting them to registers.
pub mod noise {
    use super::*;

    fn check_prob(name: &'static str, p: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(Error::Parameter { name, value: p, reason: "must lie in [0, 1]" });
        }
        Ok(())
    }

    pub fn pauli_i() -> Operator {
        Operator::identity(2)
    }

    pub fn pauli_x() -> Operator {
        Operator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn pauli_y() -> Operator {
        Operator::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => C64::new(0.0, -1.0),
            (1, 0) => C64::new(0.0, 1.0),
            _ => ZERO,
        })
    }

    pub fn pauli_z() -> Operator {
        Operator::diag_real(&[1.0, -1.0])
    }

    /// `{√(1-p) I, √p X}`.
    pub fn bit_flip(p: f64) -> Result<KrausChannel> {
        check_prob("p", p)?;
        KrausChannel::new(
            vec![pauli_i().scale((1.0 - p).sqrt()), pauli_x().scale(p.sqrt())],
            Operator::identity(2),
        )
    }

    /// Pauli channel with the given X, Y, Z probabilities.
    pub fn pauli_channel(px: f64, py: f64, pz: f64) -> Result<KrausChannel> {
        let p0 = 1.0 - px - py - pz;
        for (n, v) in [("px", px), ("py", py), ("pz", pz), ("1-px-py-pz", p0)] {
            check_prob(n, v)?;
        }
        KrausChannel::new(
            vec![
                pauli_i().scale(p0.sqrt()),
                pauli_x().scale(px.sqrt()),
                pauli_y().scale(py.sqrt()),
                pauli_z().scale(pz.sqrt()),
            ],
            Operator::identity(2),
        )
    }

    /// `ρ ↦ (1 - s) ρ + s I/2`.
    pub fn depolarizing(s: f64) -> Result<KrausChannel> {
        check_prob("s", s)?;
        pauli_channel(s / 4.0, s / 4.0, s / 4.0)
    }

    pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
        check_prob("gamma", gamma)?;
        KrausChannel::new(
            vec![
                Operator::diag_real(&[1.0, (1.0 - gamma).sqrt()]),
                Operator::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]]),
            ],
            Operator::identity(2),
        )
    }

    /// Replaces every input on `C^d` by the fixed state `tau`.
    pub fn eraser(tau: &Operator) -> Result<KrausChannel> {
        let d = tau.rows();
        let eig = hermitian_eigen(tau)?;
        if eig.min_eigenvalue() < -crate::operator::PSD_TOL || (tau.trace().re - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState { reason: "eraser target must be a density matrix".into() });
        }
        let mut kraus = Vec::new();
        for (k, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam <= 1e-15 {
                continue;
            }
            let v = eig.vector(k);
            for s in 0..d {
                kraus.push(Operator::from_fn(d, d, |i, j| {
                    if j == s { v[i] * lam.sqrt() } else { ZERO }
                }));
            }
        }
        KrausChannel::new(kraus, Operator::identity(d))
    }

    /// Lifts a single-site operator to site `site` of `n` qubits.
    pub fn on_site(op: &Operator, site: usize, n: usize) -> Operator {
        let mut out = Operator::identity(1);
        for q in 0..n {
            out = if q == site { tensor(&out, op) } else { tensor(&out, &Operator::identity(op.rows())) };
        }
        out
    }

    /// The same single-qubit channel acting independently on each of `n` qubits.
    pub fn independent(ch: &KrausChannel, n: usize) -> KrausChannel {
        let mut out = KrausChannel::identity(1);
        for _ in 0..n {
            out = KrausChannel::product(&out, ch);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::noise::*;
    use super::*;
    use crate::random::{haar_unitary, random_density, seeded_rng, gaussian_matrix};

    #[test]
    fn apply_examples() {
        let rho = Operator::diag_real(&[1.0, 0.0]);
        assert_eq!(KrausChannel::identity(2).apply(&rho).unwrap(), rho);
        let out = bit_flip(0.3).unwrap().apply(&rho).unwrap();
        assert!(out.max_abs_diff(&Operator::diag_real(&[0.7, 0.3])) < 1e-15);
        let mut rng = seeded_rng(1, 0);
        let r = random_density(2, 2, &mut rng);
        let full = depolarizing(1.0).unwrap().apply(&r).unwrap();
        assert!(full.max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn apply_rejects_wrong_dims() {
        let err = bit_flip(0.1).unwrap().apply(&Operator::identity(3));
        assert!(matches!(err, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn construction_enforces_tp() {
        let bad = vec![Operator::identity(2).scale(0.9)];
        assert!(matches!(
            KrausChannel::new(bad.clone(), Operator::identity(2)),
            Err(Error::NotTracePreserving { .. })
        ));
        assert!(matches!(KrausChannel::from_kraus(bad), Err(Error::NotTracePreserving { .. })));
    }

    #[test]
    fn adjoint_examples() {
        let mut rng = seeded_rng(2, 0);
        let u = haar_unitary(3, &mut rng);
        let ch = KrausChannel::unitary(u.clone()).unwrap();
        assert!(ch.adjoint().kraus()[0].max_abs_diff(&u.dagger()) < 1e-15);
        let ad = amplitude_damping(0.3).unwrap();
        let back = ad.adjoint().adjoint();
        for (a, b) in ad.kraus().iter().zip(back.kraus()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn compose_with_identity() {
        let ch = amplitude_damping(0.2).unwrap();
        let id = KrausChannel::identity(2);
        assert!(KrausChannel::compose(&id, &ch).unwrap().same_channel(&ch, 1e-12));
        assert!(KrausChannel::compose(&ch, &id).unwrap().same_channel(&ch, 1e-12));
    }

    #[test]
    fn two_half_bit_flips_dephase_in_x_basis() {
        let b = bit_flip(0.5).unwrap();
        let c = KrausChannel::compose(&b, &b).unwrap();
        assert_eq!(c.len(), 4);
        // Fully dephasing in the X basis equals a single p = 1/2 bit flip.
        assert!(c.same_channel(&b, 1e-12));
        let z = Operator::diag_real(&[1.0, 0.0]);
        let out = c.apply(&z).unwrap();
        assert!(out.max_abs_diff(&Operator::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let a = KrausChannel::identity(2);
        let b = KrausChannel::identity(3);
        assert!(KrausChannel::compose(&a, &b).is_err());
    }

    #[test]
    fn choi_examples() {
        let id = KrausChannel::identity(2).choi();
        let eig = hermitian_eigen(&id.matrix).unwrap();
        assert_eq!(eig.rank(1e-12), 1);
        assert!((eig.max_eigenvalue() - 2.0).abs() < 1e-14);

        let depol = depolarizing(1.0).unwrap().choi();
        let expected = tensor(&Operator::identity(2), &Operator::identity(2).scale(0.5));
        assert!(depol.matrix.max_abs_diff(&expected) < 1e-15);
        assert!(depol.output_trace().max_abs_diff(&Operator::identity(2)) < 1e-15);
    }

    #[test]
    fn choi_to_kraus_round_trip() {
        let ch = KrausChannel::product(&amplitude_damping(0.3).unwrap(), &bit_flip(0.2).unwrap());
        let back = ch.choi().to_kraus(1e-14);
        assert!(back.same_channel(&ch, 1e-12));
        assert!(back.is_trace_preserving());
        assert!(ch.compressed().len() <= 4);
    }

    #[test]
    fn remix_keeps_choi() {
        let mut rng = seeded_rng(3, 0);
        let ch = pauli_channel(0.1, 0.2, 0.05).unwrap();
        let u = haar_unitary(4, &mut rng);
        let mixed = ch.remix(&u).unwrap();
        assert!(mixed.kraus()[0].max_abs_diff(&ch.kraus()[0]) > 1e-3);
        assert!(mixed.choi_distance(&ch).unwrap() < 1e-10);
    }

    #[test]
    fn product_factorizes() {
        let mut rng = seeded_rng(4, 0);
        let ra = random_density(2, 2, &mut rng);
        let rb = random_density(3, 3, &mut rng);
        let fa = bit_flip(0.25).unwrap();
        let prod = KrausChannel::product(&fa, &KrausChannel::identity(3));
        let out = prod.apply(&tensor(&ra, &rb)).unwrap();
        assert!(out.max_abs_diff(&tensor(&fa.apply(&ra).unwrap(), &rb)) < 1e-14);
        let idid = KrausChannel::product(&KrausChannel::identity(2), &KrausChannel::identity(2));
        assert!(idid.same_channel(&KrausChannel::identity(4), 1e-14));
    }

    #[test]
    fn prune_drops_zero_operators() {
        let ch = KrausChannel::compose(&amplitude_damping(0.1).unwrap(), &amplitude_damping(0.1).unwrap())
            .unwrap();
        // A1 * A1 = 0.
        let pruned = ch.prune(PRUNE_TOL);
        assert_eq!(pruned.len(), 3);
        assert!(pruned.same_channel(&ch, 1e-14));
    }

    #[test]
    fn eraser_outputs_fixed_state() {
        let tau = Operator::diag_real(&[0.7, 0.3]);
        let er = eraser(&tau).unwrap();
        let mut rng = seeded_rng(5, 0);
        let r = random_density(2, 1, &mut rng);
        assert!(er.apply(&r).unwrap().max_abs_diff(&tau) < 1e-14);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let ch = amplitude_damping(0.2).unwrap();
        let text = channel_to_json(&ch);
        let back = channel_from_json(&text).unwrap();
        assert!(back.same_channel(&ch, 1e-15));

        let bad = r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
        let err = channel_from_json(bad).unwrap_err();
        assert!(err.to_string().contains("sum_i E_i^dag E_i"), "{err}");

        let ragged = r#"{"dim_in": 2, "dim_out": 2, "kraus": [[[[1,0]],[[0,0],[1,0]]]]}"#;
        assert!(matches!(channel_from_json(ragged), Err(Error::Schema(_))));
    }

    #[test]
    fn restrict_sets_domain() {
        let mut rng = seeded_rng(6, 0);
        let g = gaussian_matrix(4, 1, &mut rng);
        let v = g.scale(1.0 / g.fro_norm());
        let p = &v * v.dagger();
        let ch = independent(&bit_flip(0.1).unwrap(), 2).restrict(&p).unwrap();
        assert!(ch.domain().unwrap().max_abs_diff(&p) < 1e-12);
    }
}
