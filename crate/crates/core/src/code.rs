//! Subsystem codes `H = H_A ⊗ H_B ⊕ K`, code states, and a small gallery of
//! code/noise pairs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::noise::{self, on_site};
use crate::channel::KrausChannel;
use crate::error::{Error, Result};
use crate::operator::{hermitian_eigen, partial_trace_b, tensor, Operator, C64, PSD_TOL};
use crate::random::haar_isometry;

/// Isometric embedding `V: H_A ⊗ H_B → H`.
#[derive(Clone, Debug)]
pub struct SubsystemCode {
    d_a: usize,
    d_b: usize,
    embedding: Operator,
}

impl SubsystemCode {
    pub fn new(d_a: usize, d_b: usize, embedding: Operator) -> Result<Self> {
        if d_a < 2 || d_b < 1 {
            return Err(Error::Schema(format!("need d_a >= 2 and d_b >= 1, got d_a={d_a}, d_b={d_b}")));
        }
        let n = d_a * d_b;
        if embedding.cols() != n || embedding.rows() < n {
            return Err(Error::DimensionMismatch {
                context: "SubsystemCode embedding",
                expected: format!("d_h x {n} with d_h >= {n}"),
                found: format!("{}x{}", embedding.rows(), embedding.cols()),
            });
        }
        let dev = (embedding.dagger() * &embedding - Operator::identity(n)).fro_norm();
        if dev > 1e-10 {
            return Err(Error::NotIsometry { deviation: dev });
        }
        Ok(SubsystemCode { d_a, d_b, embedding })
    }

    /// `d_h = d_a · d_b` with `V = I`.
    pub fn trivial(d_a: usize, d_b: usize) -> Result<Self> {
        Self::new(d_a, d_b, Operator::identity(d_a * d_b))
    }

    /// Haar-random isometry from a seeded generator.
    pub fn random<R: Rng + ?Sized>(d_a: usize, d_b: usize, d_h: usize, rng: &mut R) -> Result<Self> {
        if d_h < d_a * d_b {
            return Err(Error::Schema(format!("d_h = {d_h} is smaller than d_a·d_b = {}", d_a * d_b)));
        }
        Self::new(d_a, d_b, haar_isometry(d_h, d_a * d_b, rng))
    }

    /// Code with the given logical basis vectors `|a, b>` as columns.
    pub fn from_columns(d_a: usize, d_b: usize, columns: &[Vec<f64>]) -> Result<Self> {
        let d_h = columns.first().map_or(0, Vec::len);
        let v = Operator::from_fn(d_h, columns.len(), |i, k| C64::new(columns[k][i], 0.0));
        Self::new(d_a, d_b, v)
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn d_h(&self) -> usize {
        self.embedding.rows()
    }

    /// `d_a · d_b`.
    pub fn dim(&self) -> usize {
        self.d_a * self.d_b
    }

    pub fn embedding(&self) -> &Operator {
        &self.embedding
    }

    /// `P = V V^dag`.
    pub fn projector(&self) -> Operator {
        &self.embedding * self.embedding.dagger()
    }

    /// `V X V^dag` for an operator on `H_A ⊗ H_B`.
    pub fn lift(&self, x: &Operator) -> Result<Operator> {
        x.ensure_square(self.dim(), "SubsystemCode::lift")?;
        Ok(&self.embedding * x * self.embedding.dagger())
    }

    /// `V^dag M V` for an operator on `H`.
    pub fn pull_back(&self, m: &Operator) -> Result<Operator> {
        m.ensure_square(self.d_h(), "SubsystemCode::pull_back")?;
        Ok(self.embedding.dagger() * m * &self.embedding)
    }

    /// `V (ρ_A ⊗ ρ_B) V^dag`.
    pub fn embed(&self, s: &CodeState) -> Result<Operator> {
        s.rho_a.ensure_square(self.d_a, "embed: rho_a")?;
        s.rho_b.ensure_square(self.d_b, "embed: rho_b")?;
        self.lift(&tensor(&s.rho_a, &s.rho_b))
    }

    /// `tr_B(V^dag ρ V)`.
    pub fn logical_state_a(&self, rho: &Operator) -> Result<Operator> {
        partial_trace_b(&self.pull_back(rho)?, self.d_a, self.d_b)
    }

    /// Same code with the roles of A and B exchanged (requires `d_b >= 2`).
    pub fn swapped(&self) -> Result<SubsystemCode> {
        let (d_a, d_b) = (self.d_a, self.d_b);
        let perm = Operator::from_fn(d_a * d_b, d_a * d_b, |row, col| {
            // row indexes |b, a>, col indexes |a, b>.
            let (b, a) = (row / d_a, row % d_a);
            if col == a * d_b + b { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
        });
        SubsystemCode::new(d_b, d_a, &self.embedding * perm.dagger())
    }

    pub fn to_file(&self) -> CodeFile {
        CodeFile {
            d_a: self.d_a,
            d_b: self.d_b,
            d_h: self.d_h(),
            embedding: self.embedding.clone(),
        }
    }
}

/// On-disk code format.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeFile {
    pub d_a: usize,
    pub d_b: usize,
    pub d_h: usize,
    pub embedding: Operator,
}

impl CodeFile {
    pub fn into_code(self) -> Result<SubsystemCode> {
        if self.embedding.rows() != self.d_h {
            return Err(Error::Schema(format!(
                "embedding has {} rows, d_h = {}",
                self.embedding.rows(),
                self.d_h
            )));
        }
        SubsystemCode::new(self.d_a, self.d_b, self.embedding)
    }
}

pub fn code_from_json(text: &str) -> Result<SubsystemCode> {
    let f: CodeFile = serde_json::from_str(text).map_err(|e| Error::Schema(format!("code JSON: {e}")))?;
    f.into_code()
}

pub fn code_to_json(code: &SubsystemCode) -> String {
    serde_json::to_string(&code.to_file()).expect("code serializes")
}

pub(crate) fn validate_density(rho: &Operator, what: &str) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidState { reason: format!("{what} is not square") });
    }
    let eig = hermitian_eigen(rho).map_err(|_| Error::InvalidState {
        reason: format!("{what} is not Hermitian"),
    })?;
    if eig.min_eigenvalue() < -PSD_TOL {
        return Err(Error::InvalidState {
            reason: format!("{what} has eigenvalue {:.3e}", eig.min_eigenvalue()),
        });
    }
    let t = rho.trace();
    if (t.re - 1.0).abs() > 1e-10 || t.im.abs() > 1e-10 {
        return Err(Error::InvalidState { reason: format!("{what} has trace {t}") });
    }
    Ok(())
}

/// Product code state `ρ_A ⊗ ρ_B`.
#[derive(Clone, Debug)]
pub struct CodeState {
    pub rho_a: Operator,
    pub rho_b: Operator,
}

impl CodeState {
    pub fn new(rho_a: Operator, rho_b: Operator) -> Result<Self> {
        validate_density(&rho_a, "rho_a")?;
        validate_density(&rho_b, "rho_b")?;
        Ok(CodeState { rho_a, rho_b })
    }

    pub fn pure(psi_a: &nalgebra::DVector<C64>, phi_b: &nalgebra::DVector<C64>) -> Self {
        CodeState {
            rho_a: Operator::projector_onto(psi_a),
            rho_b: Operator::projector_onto(phi_b),
        }
    }
}

/// Which states of the code a worst case is taken over.
#[derive(Clone, Debug)]
pub enum StateFamily {
    /// All product states `ρ_A ⊗ ρ_B`.
    Full,
    /// `ρ_A ⊗ φ_B` with `φ_B` fixed.
    FixedB(Operator),
}

impl StateFamily {
    /// `C_0`: B fixed at `P_B / d_B`.
    pub fn maximally_mixed_b(code: &SubsystemCode) -> Self {
        StateFamily::FixedB(Operator::identity(code.d_b()).scale(1.0 / code.d_b() as f64))
    }

    pub fn fixed_b(code: &SubsystemCode, phi_b: Operator) -> Result<Self> {
        phi_b.ensure_square(code.d_b(), "StateFamily::fixed_b")?;
        validate_density(&phi_b, "phi_b")?;
        Ok(StateFamily::FixedB(phi_b))
    }

    /// Member state with the given A part.
    pub fn state(&self, code: &SubsystemCode, rho_a: Operator) -> Result<CodeState> {
        match self {
            StateFamily::Full => Err(Error::Precondition {
                operation: "StateFamily::state",
                reason: "the full code has no fixed B state".into(),
            }),
            StateFamily::FixedB(phi) => {
                phi.ensure_square(code.d_b(), "StateFamily::state")?;
                CodeState::new(rho_a, phi.clone())
            }
        }
    }
}

/// Single-factor noise used to assemble product channels.
#[derive(Clone, Debug, PartialEq)]
pub enum FactorSpec {
    Identity,
    BitFlip(f64),
    Depolarizing(f64),
    AmplitudeDamping(f64),
    Dephasing(f64),
    /// Three-qubit repetition code under single bit flips (A side only).
    BitFlip3(f64),
    /// Erases the qubit to `diag(t, 1 - t)`.
    Eraser(f64),
}

impl FactorSpec {
    /// Parses `name[:param]`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((n, p)) => {
                let v: f64 = p
                    .parse()
                    .map_err(|_| Error::Schema(format!("factor parameter '{p}' is not a number")))?;
                (n, Some(v))
            }
            None => (s, None),
        };
        let spec = match name {
            "identity" => FactorSpec::Identity,
            "bitflip" => FactorSpec::BitFlip(param.unwrap_or(0.1)),
            "depolarizing" => FactorSpec::Depolarizing(param.unwrap_or(0.5)),
            "amplitude_damping" => FactorSpec::AmplitudeDamping(param.unwrap_or(0.1)),
            "dephasing" => FactorSpec::Dephasing(param.unwrap_or(0.1)),
            "bitflip3" => FactorSpec::BitFlip3(param.unwrap_or(0.1)),
            "eraser" => FactorSpec::Eraser(param.unwrap_or(0.8)),
            _ => {
                return Err(Error::UnknownName {
                    kind: "factor",
                    name: s.to_string(),
                    known: "identity, bitflip, depolarizing, amplitude_damping, dephasing, bitflip3, eraser"
                        .into(),
                })
            }
        };
        Ok(spec)
    }

    /// The factor's code (trivial qubit unless the factor is itself a code) and
    /// noise restricted to it.
    pub fn build(&self) -> Result<(SubsystemCode, KrausChannel)> {
        let qubit = || SubsystemCode::trivial(2, 1);
        Ok(match *self {
            FactorSpec::Identity => (qubit()?, KrausChannel::identity(2)),
            FactorSpec::BitFlip(p) => (qubit()?, noise::bit_flip(p)?),
            FactorSpec::Depolarizing(s) => (qubit()?, noise::depolarizing(s)?),
            FactorSpec::AmplitudeDamping(g) => (qubit()?, noise::amplitude_damping(g)?),
            FactorSpec::Dephasing(p) => (qubit()?, noise::pauli_channel(0.0, 0.0, p)?),
            FactorSpec::BitFlip3(p) => bitflip3(p)?,
            FactorSpec::Eraser(t) => {
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Parameter { name: "eraser", value: t, reason: "must lie in [0, 1]" });
                }
                (qubit()?, noise::eraser(&Operator::diag_real(&[t, 1.0 - t]))?)
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            FactorSpec::Identity => "identity".into(),
            FactorSpec::BitFlip(p) => format!("bitflip:{p}"),
            FactorSpec::Depolarizing(s) => format!("depolarizing:{s}"),
            FactorSpec::AmplitudeDamping(g) => format!("amplitude_damping:{g}"),
            FactorSpec::Dephasing(p) => format!("dephasing:{p}"),
            FactorSpec::BitFlip3(p) => format!("bitflip3:{p}"),
            FactorSpec::Eraser(t) => format!("eraser:{t}"),
        }
    }
}

/// Runtime parameters of the gallery entries.
#[derive(Clone, Debug, PartialEq)]
pub struct GalleryParams {
    /// Bit-flip probability (`bitflip3`, single-qubit X error of `gauge422`).
    pub p: f64,
    /// Per-qubit damping of `ad4`.
    pub gamma: f64,
    /// Probability of each gauge error in `gauge422`.
    pub gauge_p: f64,
    pub factor_a: FactorSpec,
    pub factor_b: FactorSpec,
    /// Population of `|0>` in the `b_eraser` target state.
    pub tau0: f64,
}

impl Default for GalleryParams {
    fn default() -> Self {
        GalleryParams {
            p: 0.1,
            gamma: 0.1,
            gauge_p: 0.05,
            factor_a: FactorSpec::BitFlip3(0.1),
            factor_b: FactorSpec::Depolarizing(0.5),
            tau0: 0.8,
        }
    }
}

/// Explicit factors of a product channel `F_A ⊗ F_B`.
#[derive(Clone, Debug)]
pub struct ProductFactors {
    pub code_a: SubsystemCode,
    pub fa: KrausChannel,
    pub fb: KrausChannel,
}

#[derive(Clone, Debug)]
pub struct GalleryEntry {
    pub name: &'static str,
    pub code: SubsystemCode,
    pub noise: KrausChannel,
    pub factors: Option<ProductFactors>,
    pub parameters: Vec<(&'static str, String)>,
}

pub const GALLERY_NAMES: [&str; 5] = ["bitflip3", "gauge422", "ad4", "product", "b_eraser"];

pub fn gallery(name: &str, params: &GalleryParams) -> Result<GalleryEntry> {
    match name {
        "bitflip3" => {
            let (code, noise) = bitflip3(params.p)?;
            Ok(GalleryEntry { name: "bitflip3", code, noise, factors: None, parameters: vec![("p", params.p.to_string())] })
        }
        "gauge422" => {
            let (code, noise) = gauge422(params.p, params.gauge_p)?;
            Ok(GalleryEntry {
                name: "gauge422",
                code,
                noise,
                factors: None,
                parameters: vec![("p", params.p.to_string()), ("gauge_p", params.gauge_p.to_string())],
            })
        }
        "ad4" => {
            let (code, noise) = ad4(params.gamma)?;
            Ok(GalleryEntry { name: "ad4", code, noise, factors: None, parameters: vec![("gamma", params.gamma.to_string())] })
        }
        "product" => {
            let (code_a, fa) = params.factor_a.build()?;
            let (_, fb) = params.factor_b.build()?;
            let (code, noise) = product_pair(&code_a, &fa, &fb)?;
            Ok(GalleryEntry {
                name: "product",
                code,
                noise,
                factors: Some(ProductFactors { code_a, fa, fb }),
                parameters: vec![("factor_a", params.factor_a.label()), ("factor_b", params.factor_b.label())],
            })
        }
        "b_eraser" => {
            let t = params.tau0;
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Parameter { name: "tau0", value: t, reason: "must lie in [0, 1]" });
            }
            let code_a = SubsystemCode::trivial(2, 1)?;
            let fa = KrausChannel::identity(2);
            let fb = noise::eraser(&Operator::diag_real(&[t, 1.0 - t]))?;
            let (code, noise) = product_pair(&code_a, &fa, &fb)?;
            Ok(GalleryEntry {
                name: "b_eraser",
                code,
                noise,
                factors: Some(ProductFactors { code_a, fa, fb }),
                parameters: vec![("tau0", t.to_string())],
            })
        }
        _ => Err(Error::UnknownName {
            kind: "gallery entry",
            name: name.to_string(),
            known: GALLERY_NAMES.join(", "),
        }),
    }
}

/// Code `V_A ⊗ I_B` with noise `F_A ⊗ F_B` restricted to it.
pub fn product_pair(code_a: &SubsystemCode, fa: &KrausChannel, fb: &KrausChannel) -> Result<(SubsystemCode, KrausChannel)> {
    if code_a.d_b() != 1 {
        return Err(Error::Precondition { operation: "product_pair", reason: "A factor must be a subspace code".into() });
    }
    if fb.dim_in() != fb.dim_out() {
        return Err(Error::Precondition { operation: "product_pair", reason: "B factor must act on one space".into() });
    }
    let d_b = fb.dim_in();
    let code = SubsystemCode::new(code_a.d_a(), d_b, tensor(code_a.embedding(), &Operator::identity(d_b)))?;
    let noise = KrausChannel::product(fa, fb).restrict(&code.projector())?;
    Ok((code, noise))
}

fn restrict_to_code(code: &SubsystemCode, kraus: Vec<Operator>) -> Result<KrausChannel> {
    let p = code.projector();
    let full = KrausChannel::cp_map(kraus)?;
    KrausChannel::new(full.restrict(&p)?.kraus().to_vec(), p)
}

fn basis_vec(d: usize, idx: &[usize], amp: f64) -> Vec<f64> {
    let mut v = vec![0.0; d];
    for &i in idx {
        v[i] = amp;
    }
    v
}

/// Repetition code `|0> → |000>`, `|1> → |111>` under `{√(1-3p) I, √p X_k}`.
pub fn bitflip3(p: f64) -> Result<(SubsystemCode, KrausChannel)> {
    if !(0.0..=1.0 / 3.0).contains(&p) {
        return Err(Error::Parameter { name: "p", value: p, reason: "bitflip3 needs 0 <= p <= 1/3" });
    }
    let code = SubsystemCode::from_columns(2, 1, &[basis_vec(8, &[0], 1.0), basis_vec(8, &[7], 1.0)])?;
    let mut kraus = vec![Operator::identity(8).scale((1.0 - 3.0 * p).sqrt())];
    for q in 0..3 {
        kraus.push(on_site(&noise::pauli_x(), q, 3).scale(p.sqrt()));
    }
    let noise = restrict_to_code(&code, kraus)?;
    Ok((code, noise))
}

/// Four-qubit code with stabilizers XXXX, ZZZZ: logical qubit A (X̄ = XXII,
/// Z̄ = ZIZI) and gauge qubit B (X̄ = XIXI, Z̄ = ZZII). Noise: an X error on
/// qubit 1 with probability `p` and each gauge operator with probability `g`.
pub fn gauge422(p: f64, g: f64) -> Result<(SubsystemCode, KrausChannel)> {
    let id = 1.0 - p - 2.0 * g;
    if p < 0.0 || g < 0.0 || id < 0.0 {
        return Err(Error::Parameter { name: "p", value: p, reason: "gauge422 needs p, gauge_p >= 0 and p + 2 gauge_p <= 1" });
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // Bit strings are q1 q2 q3 q4 with q1 most significant.
    let pair = |a: usize, b: usize| basis_vec(16, &[a, b], s);
    let code = SubsystemCode::from_columns(
        2,
        2,
        &[pair(0b0000, 0b1111), pair(0b1010, 0b0101), pair(0b1100, 0b0011), pair(0b0110, 0b1001)],
    )?;
    let x = noise::pauli_x();
    let z = noise::pauli_z();
    let x1 = on_site(&x, 0, 4);
    let gauge_x = &x1 * on_site(&x, 2, 4);
    let gauge_z = on_site(&z, 0, 4) * on_site(&z, 1, 4);
    let kraus = vec![
        Operator::identity(16).scale(id.sqrt()),
        x1.scale(p.sqrt()),
        gauge_x.scale(g.sqrt()),
        gauge_z.scale(g.sqrt()),
    ];
    let noise = restrict_to_code(&code, kraus)?;
    Ok((code, noise))
}

/// Four-qubit amplitude-damping code `|0_L> = (|0000> + |1111>)/√2`,
/// `|1_L> = (|0011> + |1100>)/√2` under independent damping on every qubit.
pub fn ad4(gamma: f64) -> Result<(SubsystemCode, KrausChannel)> {
    let code = ad4_code()?;
    let ad = noise::amplitude_damping(gamma)?;
    let full = noise::independent(&ad, 4);
    let noise = restrict_to_code(&code, full.kraus().to_vec())?;
    Ok((code, noise))
}

pub fn ad4_code() -> Result<SubsystemCode> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    SubsystemCode::from_columns(
        2,
        1,
        &[basis_vec(16, &[0b0000, 0b1111], s), basis_vec(16, &[0b0011, 0b1100], s)],
    )
}

/// The logical B operators of `gauge422` lifted to `H`: (X̄_B, Z̄_B).
pub fn gauge422_b_paulis() -> (Operator, Operator) {
    let x = noise::pauli_x();
    let z = noise::pauli_z();
    (on_site(&x, 0, 4) * on_site(&x, 2, 4), on_site(&z, 0, 4) * on_site(&z, 1, 4))
}
