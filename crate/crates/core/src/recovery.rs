//! Transpose-channel recovery and the perfect/approximate correction conditions.
//!
//! Residuals live in the embedded `d_a·d_b` frame: for Kraus operators `E_i`
//! and code isometry `V`,
//!
//! ```text
//! M_ij = V^dag E_i^dag E(P)^{-1/2} E_j V = I_A ⊗ B_ij + Δ_ij
//! ```
//!
//! with `B_ij = tr_A(M_ij) / d_a`, the Hilbert-Schmidt projection onto
//! operators of the form `I_A ⊗ X`. This choice makes the split unique and
//! minimizes every `‖Δ_ij‖_F`.

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{KrausChannel, TP_TOL};
use crate::code::{validate_density, SubsystemCode};
use crate::error::{Error, Result};
use crate::operator::{
    hermitian_eigen, inv_sqrt_on_support, operator_norm, partial_trace_a, partial_trace_b, sqrt_psd,
    support_projector, tensor, Operator, SUPPORT_TOL,
};

/// Numerical zero for `E(P)`.
const ZERO_SUPPORT: f64 = 1e-14;

/// Checks that the noise acts on the code space and is trace preserving there.
pub fn ensure_noise_on_code(code: &SubsystemCode, noise: &KrausChannel) -> Result<()> {
    if noise.dim_in() != code.d_h() {
        return Err(Error::DimensionMismatch {
            context: "noise input vs code space",
            expected: format!("dim_in = {}", code.d_h()),
            found: format!("dim_in = {}", noise.dim_in()),
        });
    }
    let domain = noise.domain().ok_or_else(|| Error::Precondition {
        operation: "noise on code",
        reason: "noise is not trace preserving on any projector".into(),
    })?;
    let dev = (domain - code.projector()).fro_norm();
    if dev > TP_TOL {
        return Err(Error::Precondition {
            operation: "noise on code",
            reason: format!("noise domain differs from the code projector by {dev:.3e}"),
        });
    }
    Ok(())
}

/// Transpose channel for an arbitrary projector `P`: Kraus `{P E_i^dag E(P)^{-1/2}}`.
pub fn transpose_channel_on(projector: &Operator, noise: &KrausChannel) -> Result<KrausChannel> {
    projector.ensure_square(noise.dim_in(), "transpose_channel_on")?;
    let ep = noise.apply(projector)?;
    if ep.fro_norm() < ZERO_SUPPORT {
        return Err(Error::DegenerateSupport { what: "E(P)" });
    }
    let norm = inv_sqrt_on_support(&ep, SUPPORT_TOL)?;
    let support = support_projector(&ep, SUPPORT_TOL)?;
    let kraus = noise.kraus().iter().map(|e| projector * e.dagger() * &norm).collect();
    KrausChannel::new(kraus, support)
}

/// `R_P = P_C ∘ E^dag ∘ N` with Kraus operators `P E_i^dag E(P)^{-1/2}`.
pub fn transpose_channel(code: &SubsystemCode, noise: &KrausChannel) -> Result<KrausChannel> {
    ensure_noise_on_code(code, noise)?;
    transpose_channel_on(&code.projector(), noise)
}

/// Kraus `{(P_A ⊗ √φ_B) E_i^dag [E(P_A ⊗ φ_B)]^{-1/2}}` (lifted through `V`).
pub fn state_dependent_transpose(
    code: &SubsystemCode,
    noise: &KrausChannel,
    phi_b: &Operator,
) -> Result<KrausChannel> {
    ensure_noise_on_code(code, noise)?;
    phi_b.ensure_square(code.d_b(), "state_dependent_transpose")?;
    validate_density(phi_b, "phi_b")?;
    let id_a = Operator::identity(code.d_a());
    let reference = code.lift(&tensor(&id_a, phi_b))?;
    let prefix = code.lift(&tensor(&id_a, &sqrt_psd(phi_b)?))?;
    let image = noise.apply(&reference)?;
    if image.fro_norm() < ZERO_SUPPORT {
        return Err(Error::DegenerateSupport { what: "E(P_A ⊗ φ_B)" });
    }
    let norm = inv_sqrt_on_support(&image, SUPPORT_TOL)?;
    let support = support_projector(&image, SUPPORT_TOL)?;
    let kraus = noise.kraus().iter().map(|e| &prefix * e.dagger() * &norm).collect();
    KrausChannel::new(kraus, support)
}

/// `I_A ⊗ X` projection of `m` and the orthogonal remainder.
pub fn split_a_identity(m: &Operator, d_a: usize, d_b: usize) -> Result<(Operator, Operator)> {
    let b = partial_trace_a(m, d_a, d_b)?.scale(1.0 / d_a as f64);
    let delta = m - tensor(&Operator::identity(d_a), &b);
    Ok((b, delta))
}

/// `X ⊗ I_B` projection of `m` and the orthogonal remainder.
pub fn split_b_identity(m: &Operator, d_a: usize, d_b: usize) -> Result<(Operator, Operator)> {
    let a = partial_trace_b(m, d_a, d_b)?.scale(1.0 / d_b as f64);
    let delta = m - tensor(&a, &Operator::identity(d_b));
    Ok((a, delta))
}

/// `M_ij = V^dag E_i^dag E(P)^{-1/2} E_j V`, row-major over `(i, j)`.
pub fn normalized_products(code: &SubsystemCode, noise: &KrausChannel) -> Result<Vec<Operator>> {
    ensure_noise_on_code(code, noise)?;
    let ep = noise.apply(&code.projector())?;
    if ep.fro_norm() < ZERO_SUPPORT {
        return Err(Error::DegenerateSupport { what: "E(P)" });
    }
    let norm = inv_sqrt_on_support(&ep, SUPPORT_TOL)?;
    let v = code.embedding();
    let left: Vec<Operator> = noise.kraus().iter().map(|e| e * v).collect();
    let right: Vec<Operator> = left.iter().map(|x| &norm * x).collect();
    Ok(pair_grid(&left, &right))
}

/// `V^dag E_i^dag E_j V`, row-major over `(i, j)`.
fn plain_products(code: &SubsystemCode, noise: &KrausChannel) -> Result<Vec<Operator>> {
    ensure_noise_on_code(code, noise)?;
    let v = code.embedding();
    let left: Vec<Operator> = noise.kraus().iter().map(|e| e * v).collect();
    Ok(pair_grid(&left, &left))
}

fn pair_grid(left: &[Operator], right: &[Operator]) -> Vec<Operator> {
    let n = left.len();
    (0..n * n)
        .into_par_iter()
        .map(|idx| left[idx / n].dagger() * &right[idx % n])
        .collect()
}

/// Per-pair `(B_ij, Δ_ij)` with aggregate norms.
#[derive(Clone, Debug)]
pub struct ResidualDecomposition {
    pub d_a: usize,
    pub d_b: usize,
    pub n_kraus: usize,
    /// Row-major `N x N` grid of `d_b x d_b` operators.
    pub b_ops: Vec<Operator>,
    /// Row-major `N x N` grid of `d_a·d_b` square operators.
    pub deltas: Vec<Operator>,
    /// `‖Σ_ij Δ_ij^dag Δ_ij‖`.
    pub sum_delta_norm: f64,
    pub max_delta_fro: f64,
}

impl ResidualDecomposition {
    fn from_products(products: &[Operator], n_kraus: usize, d_a: usize, d_b: usize) -> Result<Self> {
        let split: Vec<(Operator, Operator)> = products
            .par_iter()
            .map(|m| split_a_identity(m, d_a, d_b))
            .collect::<Result<_>>()?;
        let (b_ops, deltas): (Vec<_>, Vec<_>) = split.into_iter().unzip();
        let mut gram = Operator::zeros(d_a * d_b, d_a * d_b);
        for d in &deltas {
            gram = gram + d.dagger() * d;
        }
        let max_delta_fro = deltas.iter().map(Operator::fro_norm).fold(0.0, f64::max);
        Ok(ResidualDecomposition {
            d_a,
            d_b,
            n_kraus,
            b_ops,
            deltas,
            sum_delta_norm: operator_norm(&gram),
            max_delta_fro,
        })
    }

    pub fn b(&self, i: usize, j: usize) -> &Operator {
        &self.b_ops[i * self.n_kraus + j]
    }

    pub fn delta(&self, i: usize, j: usize) -> &Operator {
        &self.deltas[i * self.n_kraus + j]
    }

    /// `Σ_ij Δ_ij^dag Δ_ij`.
    pub fn delta_gram(&self) -> Operator {
        let n = self.d_a * self.d_b;
        self.deltas.iter().fold(Operator::zeros(n, n), |acc, d| acc + d.dagger() * d)
    }

    pub fn summary(&self, tol: f64) -> ResidualSummary {
        let n = self.n_kraus;
        ResidualSummary {
            per_pair_fro: (0..n).map(|i| (0..n).map(|j| self.delta(i, j).fro_norm()).collect()).collect(),
            sum_delta_norm: self.sum_delta_norm,
            max_delta_fro: self.max_delta_fro,
            tol,
            passed: self.max_delta_fro <= tol,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub per_pair_fro: Vec<Vec<f64>>,
    pub sum_delta_norm: f64,
    pub max_delta_fro: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Residual decomposition of `M_ij` with respect to `I_A ⊗ B_ij`.
pub fn residuals(code: &SubsystemCode, noise: &KrausChannel) -> Result<ResidualDecomposition> {
    let products = normalized_products(code, noise)?;
    ResidualDecomposition::from_products(&products, noise.len(), code.d_a(), code.d_b())
}

/// Residuals with the roles of A and B exchanged: `M_ij = A_ij ⊗ I_B + Δ_ij`.
/// The returned `b_ops` hold the `A_ij` and the deltas are in the `|b, a>` frame.
pub fn residuals_swapped(code: &SubsystemCode, noise: &KrausChannel) -> Result<ResidualDecomposition> {
    if code.d_b() < 2 {
        return Err(Error::Precondition {
            operation: "residuals_swapped",
            reason: "needs d_b >= 2".into(),
        });
    }
    residuals(&code.swapped()?, noise)
}

/// `P E_i^dag E(P)^{-1/2} E_j P = P_A ⊗ B_ij` for all pairs, within `tol`.
pub fn check_perfect_form_a(
    code: &SubsystemCode,
    noise: &KrausChannel,
    tol: f64,
) -> Result<(bool, ResidualDecomposition)> {
    let res = residuals(code, noise)?;
    Ok((res.max_delta_fro <= tol, res))
}

#[derive(Clone, Debug)]
pub struct FormBCheck {
    pub passed: bool,
    /// Row-major `B'_ij` grid.
    pub b_prime: Vec<Operator>,
    pub max_residual: f64,
    pub n_kraus: usize,
}

impl FormBCheck {
    pub fn b_prime(&self, i: usize, j: usize) -> &Operator {
        &self.b_prime[i * self.n_kraus + j]
    }
}

/// `P E_i^dag E_j P = P_A ⊗ B'_ij` for all pairs, within `tol`.
pub fn check_perfect_form_b(code: &SubsystemCode, noise: &KrausChannel, tol: f64) -> Result<FormBCheck> {
    let products = plain_products(code, noise)?;
    let (d_a, d_b) = (code.d_a(), code.d_b());
    let mut b_prime = Vec::with_capacity(products.len());
    let mut max_residual = 0.0_f64;
    for m in &products {
        let (b, delta) = split_a_identity(m, d_a, d_b)?;
        max_residual = max_residual.max(delta.fro_norm());
        b_prime.push(b);
    }
    Ok(FormBCheck {
        passed: max_residual <= tol,
        b_prime,
        max_residual,
        n_kraus: noise.len(),
    })
}

/// Diagonal sector form of a perfectly correctable noise process.
#[derive(Clone, Debug)]
pub struct CanonicalKraus {
    /// Sector weights `d_is`, descending, zero sectors dropped.
    pub d_vals: Vec<f64>,
    /// `V_is` (`d_out x d_a` isometries) with `F_is V = √d_is V_is`.
    pub isometries: Vec<Operator>,
    /// `P_is = V_is V_is^dag`.
    pub projectors: Vec<Operator>,
    /// The `(is), (jt)` matrix `λ = <s|B'_ij|t>`.
    pub lambda: Operator,
    pub lambda_hermiticity: f64,
    /// `‖Σ d_is P_is − E(P)‖_F`.
    pub reconstruction_defect: f64,
    /// `max ‖P_is P_jt − δ P_is‖_F`.
    pub orthogonality_defect: f64,
    /// `‖Σ d_is^{-1/2} P_is − E(P)^{-1/2}‖_F`.
    pub inv_sqrt_defect: f64,
}

/// Sector weight below which a sector is dropped.
const SECTOR_CUTOFF: f64 = 1e-12;

pub fn canonicalize(code: &SubsystemCode, noise: &KrausChannel) -> Result<CanonicalKraus> {
    let form_b = check_perfect_form_b(code, noise, 1e-8)?;
    if !form_b.passed {
        return Err(Error::Precondition {
            operation: "canonicalize",
            reason: format!("noise violates P E_i^dag E_j P = P_A ⊗ B'_ij (max residual {:.3e})", form_b.max_residual),
        });
    }
    let (d_a, d_b, n) = (code.d_a(), code.d_b(), noise.len());
    let dim = n * d_b;
    let lambda = Operator::from_fn(dim, dim, |row, col| {
        let (i, s) = (row / d_b, row % d_b);
        let (j, t) = (col / d_b, col % d_b);
        form_b.b_prime(i, j)[(s, t)]
    });
    let lambda_hermiticity = lambda.hermiticity_defect();
    let eig = hermitian_eigen(&lambda)?;

    // E_is = E_i V (I_A ⊗ |s>), d_out x d_a.
    let v = code.embedding();
    let slots: Vec<Operator> = (0..dim)
        .map(|idx| {
            let (i, s) = (idx / d_b, idx % d_b);
            let pick =
                tensor(&Operator::identity(d_a), &Operator::basis_ket(d_b, s));
            &noise.kraus()[i] * v * pick
        })
        .collect();

    let mut d_vals = Vec::new();
    let mut isometries = Vec::new();
    for (k, &d) in eig.eigenvalues.iter().enumerate() {
        if d <= SECTOR_CUTOFF {
            continue;
        }
        let w = eig.vector(k);
        let mut f = Operator::zeros(noise.dim_out(), d_a);
        for (idx, e) in slots.iter().enumerate() {
            f = f + e.scale_c(w[idx]);
        }
        d_vals.push(d);
        isometries.push(polar_factor(&f));
    }
    let projectors: Vec<Operator> = isometries.iter().map(|iso| iso * iso.dagger()).collect();

    let ep = noise.apply(&code.projector())?;
    let d_out = noise.dim_out();
    let mut recon = Operator::zeros(d_out, d_out);
    let mut inv = Operator::zeros(d_out, d_out);
    for (d, p) in d_vals.iter().zip(&projectors) {
        recon = recon + p.scale(*d);
        inv = inv + p.scale(d.powf(-0.5));
    }
    let mut orthogonality_defect = 0.0_f64;
    for (a, pa) in projectors.iter().enumerate() {
        for (b, pb) in projectors.iter().enumerate() {
            let target = if a == b { pa.clone() } else { Operator::zeros(d_out, d_out) };
            orthogonality_defect = orthogonality_defect.max((pa * pb - target).fro_norm());
        }
    }
    let reconstruction_defect = (&recon - &ep).fro_norm();
    let inv_sqrt_defect = (&inv - inv_sqrt_on_support(&ep, SUPPORT_TOL)?).fro_norm();
    if inv_sqrt_defect > 1e-8 {
        return Err(Error::Precondition {
            operation: "canonicalize",
            reason: format!("sector form does not reproduce E(P)^(-1/2) (defect {inv_sqrt_defect:.3e})"),
        });
    }
    Ok(CanonicalKraus {
        d_vals,
        isometries,
        projectors,
        lambda,
        lambda_hermiticity,
        reconstruction_defect,
        orthogonality_defect,
        inv_sqrt_defect,
    })
}

/// Isometric factor `U W^dag` of the SVD `F = U Σ W^dag`.
fn polar_factor(f: &Operator) -> Operator {
    let svd = f.matrix().clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^dag");
    Operator::from(u * vt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{bitflip3, GalleryParams};
    use crate::random::{haar_unitary, random_density, seeded_rng};

    #[test]
    fn unitary_noise_is_reversed() {
        let mut rng = seeded_rng(11, 0);
        let code = SubsystemCode::random(2, 2, 6, &mut rng).unwrap();
        let u = haar_unitary(6, &mut rng);
        let noise = KrausChannel::unitary(u.clone()).unwrap().restrict(&code.projector()).unwrap();
        let rec = transpose_channel(&code, &noise).unwrap();
        let p = code.projector();
        assert!(rec.kraus()[0].max_abs_diff(&(&p * u.dagger())) < 1e-10);
        let both = KrausChannel::compose(&rec, &noise).unwrap();
        let rho = code.lift(&random_density(4, 4, &mut rng)).unwrap();
        assert!(both.apply(&rho).unwrap().max_abs_diff(&rho) < 1e-10);
    }

    #[test]
    fn identity_noise_gives_projection_map() {
        let mut rng = seeded_rng(12, 0);
        let code = SubsystemCode::random(2, 1, 5, &mut rng).unwrap();
        let p = code.projector();
        let noise = KrausChannel::identity(5).restrict(&p).unwrap();
        let rec = transpose_channel(&code, &noise).unwrap();
        let proj_map = KrausChannel::cp_map(vec![p.clone()]).unwrap();
        assert!(rec.choi_distance(&proj_map).unwrap() < 1e-10);
        let (ok, res) = check_perfect_form_a(&code, &noise, 1e-10).unwrap();
        assert!(ok, "{}", res.max_delta_fro);
    }

    #[test]
    fn transpose_is_tp_on_support() {
        let e = crate::code::gallery("ad4", &GalleryParams::default()).unwrap();
        let rec = transpose_channel(&e.code, &e.noise).unwrap();
        let support = support_projector(&e.noise.apply(&e.code.projector()).unwrap(), SUPPORT_TOL).unwrap();
        assert!((rec.kraus_sum() - support).fro_norm() < 1e-9);
    }

    #[test]
    fn transpose_rejects_mismatched_noise() {
        let (code, _) = bitflip3(0.1).unwrap();
        let err = transpose_channel(&code, &KrausChannel::identity(8)).unwrap_err();
        assert!(matches!(err, Error::Precondition { .. }));
    }

    #[test]
    fn bitflip3_satisfies_both_forms() {
        let (code, noise) = bitflip3(0.1).unwrap();
        let (ok_a, res) = check_perfect_form_a(&code, &noise, 1e-10).unwrap();
        assert!(ok_a);
        assert!(res.deltas.iter().all(|d| d.fro_norm() <= 1e-10));
        assert!(check_perfect_form_b(&code, &noise, 1e-10).unwrap().passed);
    }

    #[test]
    fn single_unitary_form_b_is_scalar() {
        let mut rng = seeded_rng(13, 0);
        let code = SubsystemCode::random(2, 1, 4, &mut rng).unwrap();
        let noise = KrausChannel::unitary(haar_unitary(4, &mut rng)).unwrap().restrict(&code.projector()).unwrap();
        let fb = check_perfect_form_b(&code, &noise, 1e-10).unwrap();
        assert!(fb.passed);
        assert!((fb.b_prime(0, 0)[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ad4_fails_form_a() {
        let e = crate::code::gallery("ad4", &GalleryParams::default()).unwrap();
        let (ok, res) = check_perfect_form_a(&e.code, &e.noise, 1e-8).unwrap();
        assert!(!ok);
        assert!(res.max_delta_fro > 1e-3, "{}", res.max_delta_fro);
    }

    #[test]
    fn canonical_form_of_bitflip3() {
        let p = 0.1;
        let (code, noise) = bitflip3(p).unwrap();
        let can = canonicalize(&code, &noise).unwrap();
        // Λ = diag(1-3p, p, p, p) for the repetition code.
        let mut expected = vec![1.0 - 3.0 * p, p, p, p];
        expected.sort_by(|a, b| b.total_cmp(a));
        assert_eq!(can.d_vals.len(), 4);
        for (d, e) in can.d_vals.iter().zip(&expected) {
            assert!((d - e).abs() < 1e-12);
        }
        assert!((can.d_vals.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(can.reconstruction_defect < 1e-9);
        assert!(can.orthogonality_defect < 1e-9);
        assert!(can.lambda_hermiticity < 1e-12);
    }

    #[test]
    fn canonical_form_of_unitary() {
        let mut rng = seeded_rng(14, 0);
        let code = SubsystemCode::random(2, 1, 4, &mut rng).unwrap();
        let u = haar_unitary(4, &mut rng);
        let noise = KrausChannel::unitary(u.clone()).unwrap().restrict(&code.projector()).unwrap();
        let can = canonicalize(&code, &noise).unwrap();
        assert_eq!(can.d_vals.len(), 1);
        assert!((can.d_vals[0] - 1.0).abs() < 1e-12);
        let target = &u * code.embedding();
        // Same isometry up to a global phase.
        let overlap = target.hs_inner(&can.isometries[0]).norm();
        assert!((overlap - 2.0).abs() < 1e-10);
    }

    #[test]
    fn canonicalize_rejects_uncorrectable() {
        let e = crate::code::gallery("ad4", &GalleryParams::default()).unwrap();
        assert!(matches!(canonicalize(&e.code, &e.noise), Err(Error::Precondition { .. })));
    }

    #[test]
    fn residual_orthogonality() {
        let e = crate::code::gallery("gauge422", &GalleryParams::default()).unwrap();
        let noise = KrausChannel::compose(
            &KrausChannel::from_kraus(crate::channel::noise::independent(
                &crate::channel::noise::amplitude_damping(0.1).unwrap(),
                4,
            ).kraus().to_vec()).unwrap(),
            &e.noise,
        )
        .unwrap();
        let res = residuals(&e.code, &noise).unwrap();
        let mut rng = seeded_rng(15, 0);
        let x = crate::random::gaussian_matrix(2, 2, &mut rng);
        let probe = tensor(&Operator::identity(2), &x);
        for d in &res.deltas {
            assert!(probe.hs_inner(d).norm() < 1e-12);
        }
    }
}
