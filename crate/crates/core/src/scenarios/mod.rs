//! Near-optimality scenarios: each runs one family of bounds on a code/noise
//! pair and returns a [`ScenarioOutcome`] of [`BoundReport`]s.
//!
//! Wherever a bound involves the optimal loss `η_op`, the see-saw upper bound
//! `η̂_op` is used. All right-hand sides are increasing in `η_op`, so the
//! replacement can only loosen a check, never produce a false violation.

pub mod config;
pub mod construct;
pub mod delta;

use std::cell::OnceCell;

use nalgebra::DVector;
use rand::Rng;

use crate::channel::{channel_to_json, KrausChannel};
use crate::code::{code_to_json, product_pair, CodeState, ProductFactors, StateFamily, SubsystemCode};
use crate::error::{Error, Result};
use crate::fidelity::{
    estimate_optimal_recovery, estimate_optimal_recovery_seeded, eta_code_on, eta_p_via_deltas, eta_state,
    eta_times_f, FidelityLossResult, RecoveryEstimate,
};
use crate::operator::{tensor, trace_norm_hermitian, Operator, C64};
use crate::random::{random_density, random_unit_vector, seeded_rng};
use crate::recovery::{
    check_perfect_form_a, check_perfect_form_b, ensure_noise_on_code, residuals_swapped, state_dependent_transpose,
    transpose_channel, transpose_channel_on,
};
use crate::report::{digest_parts, BoundReport, ScenarioOutcome};

pub use config::{Samples, ScenarioConfig, Tolerances};
pub use delta::{delta_ratio, estimate_delta, DeltaEstimate, DeltaOptions};

/// Runnable scenarios, in the order `all` runs them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    PerfectCheck,
    Subspace,
    Product,
    MaxMixed,
    StateDependent,
    BCorrectable,
    BScrambling,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::PerfectCheck,
        Scenario::Subspace,
        Scenario::Product,
        Scenario::MaxMixed,
        Scenario::StateDependent,
        Scenario::BCorrectable,
        Scenario::BScrambling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PerfectCheck => "perfect_check",
            Scenario::Subspace => "subspace",
            Scenario::Product => "product",
            Scenario::MaxMixed => "maxmixed",
            Scenario::StateDependent => "state_dependent",
            Scenario::BCorrectable => "b_correctable",
            Scenario::BScrambling => "b_scrambling",
        }
    }

    pub fn parse(name: &str) -> Result<Scenario> {
        Self::ALL.into_iter().find(|s| s.name() == name).ok_or_else(|| Error::UnknownName {
            kind: "scenario",
            name: name.to_string(),
            known: Self::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ") + ", all",
        })
    }

    /// The bound the scenario checks, as printed by `describe`.
    pub fn description(self) -> &'static str {
        match self {
            Scenario::PerfectCheck => {
                "Perfect correction conditions.\n\
                 form A:  V^dag E_i^dag E(P)^{-1/2} E_j V = I_A ⊗ B_ij  (residuals Δ_ij = 0)\n\
                 form B:  V^dag E_i^dag E_j V = I_A ⊗ B'_ij\n\
                 residual identity:  η_P = max_{ψ,φ} <φ| Σ_ij [<ψ|Δ_ij^dag Δ_ij|ψ> − |<ψ|Δ_ij|ψ>|²] |φ>\n\
                 residual bound:  η_P ≤ ‖Σ_ij Δ_ij^dag Δ_ij‖"
            }
            Scenario::Subspace => {
                "Transpose channel near-optimality for subspace codes (d_B = 1).\n\
                 η_op ≤ η_P ≤ η_op · f(η_op; d_A),  f(η; d) = ((d+1) − η) / (1 + (d−1) η)\n\
                 per pure state:  1 − η_op{ψ} ≤ √([1 + (d_A−1) η_op{C}] [1 − η_P{ψ}])"
            }
            Scenario::Product => {
                "Product noise F_A ⊗ F_B on V_A ⊗ I_B.\n\
                 The transpose channel factorizes: R_P = R_{A,P} ⊗ R_{B,P} (Choi equality).\n\
                 Correctability of A depends only on F_A: η_P is the same as for (V_A, F_A) alone,\n\
                 where the subspace bound η_P ≤ η_op · f(η_op; d_A) applies."
            }
            Scenario::MaxMixed => {
                "B maximally mixed, C_0 = {ρ_A ⊗ P_B/d_B}.\n\
                 η_P{C_0} ≤ η_op{C} · f(η_op{C}; d_A)\n\
                 with η_P{C_0} ≤ η_op{C_0} f(η_op{C_0}; d_A), η_op{C_0} ≤ η_op{C},\n\
                 and E(ρ_A ⊗ P_B/d_B) = Ē_A(ρ_A) for Kraus Ē_is = E_i |s_B> / √d_B."
            }
            Scenario::StateDependent => {
                "B fixed in a known state φ_B.\n\
                 η_{P,φ_B}{C_φ_B} ≤ η_op{C_φ_B} · f(η_op{C_φ_B}; d_A)\n\
                 for the transpose channel with Kraus (P_A ⊗ √φ_B) E_i^dag [E(P_A ⊗ φ_B)]^{-1/2}."
            }
            Scenario::BCorrectable => {
                "B perfectly correctable.\n\
                 F²[ψ_A, tr_B R_P E(ψ_A ⊗ ρ_B)] = Σ_ij |<ψ_A|A_ij|ψ_A>|² is independent of ρ_B,\n\
                 hence η_P{C} = η_P{C_0} ≤ η_op{C} · f(η_op{C}; d_A)."
            }
            Scenario::BScrambling => {
                "B scrambled by the noise: ‖E(ρ_A⊗ρ_B) − E(ρ_A⊗P_B/d_B)‖_tr ≤ δ ‖ρ_B − P_B/d_B‖_tr.\n\
                 η_P ≤ (d_A+1) η_op + 3δ + O(δ², η_op², η_op δ)   (first-order form, informational)\n\
                 checked exactly per sampled ψ_A ⊗ ρ_B:\n\
                 η_op{C} + δ ≥ 1 − √([1 + (d_A−1) η_op{C}] [1 − η_P{ψ_A⊗ρ_B} + δ])\n\
                 with η_R{ψ_A⊗ρ_B} ≥ η_R{ψ_A⊗P_B/d_B} − δ and the same with the two B states exchanged."
            }
        }
    }
}

fn cached<T>(cell: &OnceCell<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&T> {
    match cell.get_or_init(f) {
        Ok(v) => Ok(v),
        Err(e) => Err(e.clone()),
    }
}

/// Compact number formatting for substituted inequalities.
fn num(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-4 {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

fn bound_expression(lhs: f64, eta: f64, d: usize, rhs: f64) -> String {
    format!("{} ≤ {}·f({};{d}) = {}", num(lhs), num(eta), num(eta), num(rhs))
}

fn plain_expression(lhs: f64, rhs: f64) -> String {
    format!("{} ≤ {}", num(lhs), num(rhs))
}

/// Report for a sampled inequality: the sample with the smallest slack.
fn worst_sample(name: &str, samples: &[(f64, f64)], tol: f64, digest: &str) -> BoundReport {
    let (k, &(lhs, rhs)) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 .1 - a.1 .0).total_cmp(&(b.1 .1 - b.1 .0)))
        .expect("at least one sample");
    BoundReport::new(name, lhs, rhs, tol, digest)
        .with_expression(plain_expression(lhs, rhs))
        .with_meta("samples", samples.len())
        .with_meta("worst_sample", k)
}

fn pure_state(psi: &DVector<C64>, rho_b: &Operator) -> CodeState {
    CodeState { rho_a: Operator::projector_onto(psi), rho_b: rho_b.clone() }
}

fn rank_cycle<R: Rng + ?Sized>(d: usize, k: usize, rng: &mut R) -> Operator {
    random_density(d, 1 + k % d, rng)
}

// Stream identifiers keep every sampling purpose on its own random stream.
const STREAM_PURE: u64 = 0x5ab5_0001;
const STREAM_SPREAD: u64 = 0x5ab5_0002;
const STREAM_SCRAMBLE: u64 = 0x5ab5_0003;
const STREAM_CHANNEL: u64 = 0x5ab5_0004;

/// One code/noise pair with its configuration. Heavy intermediate results
/// (transpose channel, `η_P`, see-saw estimate over the full code) are
/// computed once and shared between scenarios.
pub struct Workbench<'a> {
    code: &'a SubsystemCode,
    noise: &'a KrausChannel,
    cfg: &'a ScenarioConfig,
    inputs: String,
    transpose: OnceCell<Result<KrausChannel>>,
    eta_p: OnceCell<Result<FidelityLossResult>>,
    seesaw: OnceCell<Result<RecoveryEstimate>>,
}

impl<'a> Workbench<'a> {
    pub fn new(code: &'a SubsystemCode, noise: &'a KrausChannel, cfg: &'a ScenarioConfig) -> Result<Self> {
        ensure_noise_on_code(code, noise)?;
        let inputs = digest_parts(&[&code_to_json(code), &channel_to_json(noise), &cfg.to_json()]);
        Ok(Workbench {
            code,
            noise,
            cfg,
            inputs,
            transpose: OnceCell::new(),
            eta_p: OnceCell::new(),
            seesaw: OnceCell::new(),
        })
    }

    pub fn code(&self) -> &SubsystemCode {
        self.code
    }

    /// Digest of code, noise, configuration, scenario name and any extra input.
    pub fn digest(&self, scenario: &str, extra: &str) -> String {
        digest_parts(&[&self.inputs, scenario, extra])
    }

    pub fn transpose(&self) -> Result<&KrausChannel> {
        cached(&self.transpose, || transpose_channel(self.code, self.noise))
    }

    /// `η_P{C}` over the full code.
    pub fn eta_p(&self) -> Result<&FidelityLossResult> {
        cached(&self.eta_p, || {
            eta_code_on(self.code, self.noise, self.transpose()?, &StateFamily::Full, &self.cfg.optimizer())
        })
    }

    /// See-saw estimate of the optimal recovery for the full code.
    pub fn optimal(&self) -> Result<&RecoveryEstimate> {
        cached(&self.seesaw, || estimate_optimal_recovery(self.code, self.noise, &StateFamily::Full, &self.cfg.seesaw()))
    }

    fn require_d_b(&self, operation: &'static str, min: usize, max: Option<usize>) -> Result<()> {
        let d_b = self.code.d_b();
        let ok = d_b >= min && max.is_none_or(|m| d_b <= m);
        if ok {
            return Ok(());
        }
        let reason = match max {
            Some(m) if m == min => format!("needs d_b = {min}, the code has d_b = {d_b}"),
            _ => format!("needs d_b >= {min}, the code has d_b = {d_b}"),
        };
        Err(Error::Precondition { operation, reason })
    }

    fn eta_meta(r: &FidelityLossResult) -> serde_json::Value {
        serde_json::to_value(&r.meta).unwrap_or_default()
    }

    fn seesaw_meta(e: &RecoveryEstimate) -> serde_json::Value {
        serde_json::json!({
            "eta_upper": e.eta_upper,
            "rounds": e.meta.rounds,
            "converged": e.meta.converged,
            "stop_reason": e.meta.stop_reason,
            "seed_etas": e.meta.seed_etas,
            "improvements": e.meta.improvements,
            "worst_case": e.worst_case.meta,
        })
    }

    pub fn perfect_check(&self) -> Result<ScenarioOutcome> {
        let name = Scenario::PerfectCheck.name();
        let digest = self.digest(name, "");
        let tol = &self.cfg.tolerances;
        let (ok_a, res) = check_perfect_form_a(self.code, self.noise, tol.perfect)?;
        let form_b = check_perfect_form_b(self.code, self.noise, tol.perfect)?;
        let eta_p = self.eta_p()?;
        let via = eta_p_via_deltas(&res, &self.cfg.optimizer());
        let summary = res.summary(tol.perfect);

        let mut exact = BoundReport::new("perfect.transpose_exact", eta_p.eta, 0.0, tol.order, &digest)
            .with_relation("η_P = 0 when the conditions hold")
            .with_expression(plain_expression(eta_p.eta, 0.0));
        if !ok_a {
            exact = exact.informational();
        }
        let reports = vec![
            BoundReport::new("perfect.form_a", res.max_delta_fro, 0.0, tol.perfect, &digest)
                .with_relation("max_ij ‖Δ_ij‖_F = 0")
                .with_expression(plain_expression(res.max_delta_fro, 0.0))
                .with_meta("per_pair_fro", &summary.per_pair_fro)
                .with_meta("n_kraus", res.n_kraus),
            BoundReport::new("perfect.form_b", form_b.max_residual, 0.0, tol.perfect, &digest)
                .with_relation("max_ij ‖V^dag E_i^dag E_j V − I_A ⊗ B'_ij‖_F = 0")
                .with_expression(plain_expression(form_b.max_residual, 0.0)),
            exact.with_meta("optimizer", Self::eta_meta(eta_p)),
            BoundReport::new("perfect.residual_identity", (eta_p.eta - via.eta).abs(), 0.0, tol.residual_identity, &digest)
                .with_relation("|η_P − η_P(Δ)| = 0")
                .with_expression(format!("|{} − {}| ≤ 0", num(eta_p.eta), num(via.eta)))
                .with_meta("eta_p", eta_p.eta)
                .with_meta("eta_p_residual_form", via.eta)
                .with_meta("optimizer", Self::eta_meta(&via)),
            BoundReport::new("perfect.residual_bound", eta_p.eta, res.sum_delta_norm, tol.residual_bound, &digest)
                .with_relation("η_P ≤ ‖Σ_ij Δ_ij^dag Δ_ij‖")
                .with_expression(plain_expression(eta_p.eta, res.sum_delta_norm)),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }

    pub fn subspace(&self) -> Result<ScenarioOutcome> {
        let name = Scenario::Subspace.name();
        self.require_d_b("scenario subspace", 1, Some(1))?;
        let digest = self.digest(name, "");
        let tol = &self.cfg.tolerances;
        let d_a = self.code.d_a();
        let eta_p = self.eta_p()?;
        let est = self.optimal()?;
        let eta_hat = est.eta_upper;
        let rhs = eta_times_f(eta_hat, d_a)?;

        let one = Operator::identity(1);
        let mut rng = seeded_rng(self.cfg.seed, STREAM_PURE);
        let mut psis: Vec<DVector<C64>> =
            (0..self.cfg.samples.pure_states).map(|_| random_unit_vector(d_a, &mut rng)).collect();
        psis.push(eta_p.psi_a());
        psis.push(est.worst_case.psi_a());
        let weight = 1.0 + (d_a as f64 - 1.0) * eta_hat;
        let mut samples = Vec::with_capacity(psis.len());
        for psi in &psis {
            let s = pure_state(psi, &one);
            let loss_hat = eta_state(self.code, self.noise, &est.recovery, &s)?;
            let loss_p = eta_state(self.code, self.noise, self.transpose()?, &s)?;
            samples.push((1.0 - loss_hat, (weight * (1.0 - loss_p).max(0.0)).sqrt()));
        }

        let reports = vec![
            BoundReport::new("subspace.optimal_below_transpose", eta_hat, eta_p.eta, tol.order, &digest)
                .with_relation("η̂_op ≤ η_P")
                .with_expression(plain_expression(eta_hat, eta_p.eta))
                .with_meta("seesaw", Self::seesaw_meta(est)),
            BoundReport::new("subspace.transpose_near_optimal", eta_p.eta, rhs, tol.bound, &digest)
                .with_relation("η_P ≤ η̂_op·f(η̂_op; d_A)")
                .with_expression(bound_expression(eta_p.eta, eta_hat, d_a, rhs))
                .with_meta("eta_p", eta_p.eta)
                .with_meta("eta_op_upper", eta_hat)
                .with_meta("optimizer", Self::eta_meta(eta_p)),
            worst_sample("subspace.pure_state", &samples, tol.sample, &digest)
                .with_relation("1 − η̂_op{ψ} ≤ √([1 + (d_A−1)η̂_op{C}][1 − η_P{ψ}])"),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }

    /// Bounds on `C_0`, the code with B maximally mixed. Accepts `d_b = 1`, where `C_0 = C`.
    pub fn maxmixed(&self) -> Result<ScenarioOutcome> {
        let name = Scenario::MaxMixed.name();
        let digest = self.digest(name, "");
        let tol = &self.cfg.tolerances;
        let (d_a, d_b) = (self.code.d_a(), self.code.d_b());
        let c0 = StateFamily::maximally_mixed_b(self.code);
        let opt = self.cfg.optimizer();
        let eta_p0 = eta_code_on(self.code, self.noise, self.transpose()?, &c0, &opt)?;
        let est = self.optimal()?;
        let rhs = eta_times_f(est.eta_upper, d_a)?;

        let c_on_c0 = eta_code_on(self.code, self.noise, &est.recovery, &c0, &opt)?;
        let est0 =
            estimate_optimal_recovery_seeded(self.code, self.noise, &c0, &self.cfg.seesaw(), std::slice::from_ref(&est.recovery))?;
        let rhs0 = eta_times_f(est0.eta_upper, d_a)?;

        let reduced_dev = self.reduced_channel_defect()?;

        let reports = vec![
            BoundReport::new("maxmixed.transpose_near_optimal", eta_p0.eta, rhs, tol.bound, &digest)
                .with_relation("η_P{C_0} ≤ η̂_op{C}·f(η̂_op{C}; d_A)")
                .with_expression(bound_expression(eta_p0.eta, est.eta_upper, d_a, rhs))
                .with_meta("d_b", d_b)
                .with_meta("optimizer", Self::eta_meta(&eta_p0))
                .with_meta("seesaw", Self::seesaw_meta(est)),
            BoundReport::new("maxmixed.c0_near_optimal", eta_p0.eta, rhs0, tol.bound, &digest)
                .with_relation("η_P{C_0} ≤ η̂_op{C_0}·f(η̂_op{C_0}; d_A)")
                .with_expression(bound_expression(eta_p0.eta, est0.eta_upper, d_a, rhs0))
                .with_meta("seesaw", Self::seesaw_meta(&est0)),
            BoundReport::new("maxmixed.smaller_family", est0.eta_upper, c_on_c0.eta, tol.order, &digest)
                .with_relation("η̂_op{C_0} ≤ η_{R̂_op{C}}{C_0}")
                .with_expression(plain_expression(est0.eta_upper, c_on_c0.eta)),
            BoundReport::new("maxmixed.reduced_channel", reduced_dev, 0.0, tol.channel, &digest)
                .with_relation("‖E(ρ_A ⊗ P_B/d_B) − Ē_A(ρ_A)‖ = 0 and Ē_A trace preserving")
                .with_expression(plain_expression(reduced_dev, 0.0)),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }

    /// Largest deviation of `Ē_A` from the channel on `ρ_A ⊗ P_B/d_B`, together
    /// with its trace-preservation defect.
    fn reduced_channel_defect(&self) -> Result<f64> {
        let (d_a, d_b) = (self.code.d_a(), self.code.d_b());
        let v = self.code.embedding();
        let inv = 1.0 / (d_b as f64).sqrt();
        let id_a = Operator::identity(d_a);
        let mut kraus = Vec::with_capacity(self.noise.len() * d_b);
        for e in self.noise.kraus() {
            let ev = e * v;
            for s in 0..d_b {
                kraus.push((&ev * tensor(&id_a, &Operator::basis_ket(d_b, s))).scale(inv));
            }
        }
        let reduced = KrausChannel::cp_map(kraus)?;
        let mut dev = (reduced.kraus_sum() - &id_a).fro_norm();
        let mixed_b = Operator::identity(d_b).scale(1.0 / d_b as f64);
        let mut rng = seeded_rng(self.cfg.seed, STREAM_CHANNEL);
        for k in 0..4 {
            let rho_a = rank_cycle(d_a, k, &mut rng);
            let full = self.noise.apply(&self.code.embed(&CodeState { rho_a: rho_a.clone(), rho_b: mixed_b.clone() })?)?;
            dev = dev.max(full.max_abs_diff(&reduced.apply(&rho_a)?));
        }
        Ok(dev)
    }

    pub fn state_dependent(&self, phi_b: &Operator) -> Result<ScenarioOutcome> {
        let name = Scenario::StateDependent.name();
        let digest = self.digest(name, &serde_json::to_string(phi_b).expect("operator serializes"));
        let tol = &self.cfg.tolerances;
        let d_a = self.code.d_a();
        let fam = StateFamily::fixed_b(self.code, phi_b.clone())?;
        let r_phi = state_dependent_transpose(self.code, self.noise, phi_b)?;
        let lhs = eta_code_on(self.code, self.noise, &r_phi, &fam, &self.cfg.optimizer())?;
        let est = estimate_optimal_recovery_seeded(self.code, self.noise, &fam, &self.cfg.seesaw(), &[r_phi])?;
        let rhs = eta_times_f(est.eta_upper, d_a)?;
        let reports = vec![
            BoundReport::new("state_dependent.transpose_near_optimal", lhs.eta, rhs, tol.bound, &digest)
                .with_relation("η_{P,φ_B}{C_φ_B} ≤ η̂_op{C_φ_B}·f(η̂_op{C_φ_B}; d_A)")
                .with_expression(bound_expression(lhs.eta, est.eta_upper, d_a, rhs))
                .with_meta("optimizer", Self::eta_meta(&lhs))
                .with_meta("seesaw", Self::seesaw_meta(&est)),
            BoundReport::new("state_dependent.optimal_below_transpose", est.eta_upper, lhs.eta, tol.order, &digest)
                .with_relation("η̂_op{C_φ_B} ≤ η_{P,φ_B}{C_φ_B}")
                .with_expression(plain_expression(est.eta_upper, lhs.eta)),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }

    /// Fails with the swapped-role residual when B is not perfectly correctable.
    pub fn check_b_correctable(&self) -> Result<f64> {
        self.require_d_b("scenario b_correctable", 2, None)?;
        let sw = residuals_swapped(self.code, self.noise)?;
        if sw.max_delta_fro > self.cfg.tolerances.perfect {
            return Err(Error::Precondition {
                operation: "scenario b_correctable",
                reason: format!(
                    "B is not perfectly correctable: swapped-role residual max ‖Δ‖_F = {:.3e} exceeds {:.0e}",
                    sw.max_delta_fro, self.cfg.tolerances.perfect
                ),
            });
        }
        Ok(sw.max_delta_fro)
    }

    pub fn b_correctable(&self) -> Result<ScenarioOutcome> {
        let name = Scenario::BCorrectable.name();
        let residual = self.check_b_correctable()?;
        let sw = residuals_swapped(self.code, self.noise)?;
        let digest = self.digest(name, "");
        let tol = &self.cfg.tolerances;
        let (d_a, d_b) = (self.code.d_a(), self.code.d_b());
        let rp = self.transpose()?;

        let mut rng = seeded_rng(self.cfg.seed, STREAM_SPREAD);
        let psis: Vec<DVector<C64>> =
            (0..self.cfg.samples.spread_psi.max(1)).map(|_| random_unit_vector(d_a, &mut rng)).collect();
        let rhos: Vec<Operator> =
            (0..self.cfg.samples.spread_rho.max(1)).map(|k| rank_cycle(d_b, k, &mut rng)).collect();
        let mut spread: f64 = 0.0;
        let mut closed_dev: f64 = 0.0;
        for psi in &psis {
            let mut closed = 0.0;
            for i in 0..sw.n_kraus {
                for j in 0..sw.n_kraus {
                    closed += psi.dotc(&(&**sw.b(i, j) * psi)).norm_sqr();
                }
            }
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for rho in &rhos {
                let f2 = 1.0 - eta_state(self.code, self.noise, rp, &pure_state(psi, rho))?;
                lo = lo.min(f2);
                hi = hi.max(f2);
                closed_dev = closed_dev.max((f2 - closed).abs());
            }
            spread = spread.max(hi - lo);
        }

        let eta_p = self.eta_p()?;
        let c0 = StateFamily::maximally_mixed_b(self.code);
        let eta_p0 = eta_code_on(self.code, self.noise, rp, &c0, &self.cfg.optimizer())?;
        let est = self.optimal()?;
        let rhs = eta_times_f(est.eta_upper, d_a)?;
        let gap = (eta_p.eta - eta_p0.eta).abs();
        let reports = vec![
            BoundReport::new("b_correctable.spread", spread, 0.0, tol.spread, &digest)
                .with_relation("max_ψ [max_ρ − min_ρ] F²[ψ, tr_B R_P E(ψ ⊗ ρ_B)] = 0")
                .with_expression(plain_expression(spread, 0.0))
                .with_meta("psi_samples", psis.len())
                .with_meta("rho_samples", rhos.len())
                .with_meta("swapped_residual", residual),
            BoundReport::new("b_correctable.closed_form", closed_dev, 0.0, tol.closed_form, &digest)
                .with_relation("|F² − Σ_ij |<ψ|A_ij|ψ>|²| = 0")
                .with_expression(plain_expression(closed_dev, 0.0)),
            BoundReport::new("b_correctable.b_independence", gap, 0.0, tol.sample, &digest)
                .with_relation("η_P{C} = η_P{C_0}")
                .with_expression(format!("|{} − {}| ≤ 0", num(eta_p.eta), num(eta_p0.eta))),
            BoundReport::new("b_correctable.transpose_near_optimal", eta_p.eta, rhs, tol.bound, &digest)
                .with_relation("η_P{C} ≤ η̂_op{C}·f(η̂_op{C}; d_A)")
                .with_expression(bound_expression(eta_p.eta, est.eta_upper, d_a, rhs))
                .with_meta("optimizer", Self::eta_meta(eta_p))
                .with_meta("seesaw", Self::seesaw_meta(est)),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }

    pub fn b_scrambling(&self) -> Result<ScenarioOutcome> {
        let name = Scenario::BScrambling.name();
        self.require_d_b("scenario b_scrambling", 2, None)?;
        let digest = self.digest(name, "");
        let tol = &self.cfg.tolerances;
        let (d_a, d_b) = (self.code.d_a(), self.code.d_b());
        let samples_cfg = &self.cfg.samples;
        let delta = estimate_delta(
            self.code,
            self.noise,
            &DeltaOptions {
                restarts: samples_cfg.delta_restarts,
                mixed_samples: samples_cfg.delta_mixed,
                seed: self.cfg.seed,
                ..Default::default()
            },
        )?;
        let rp = self.transpose()?;
        let eta_p = self.eta_p()?;
        let est = self.optimal()?;
        let eta_hat = est.eta_upper;
        let weight = 1.0 + (d_a as f64 - 1.0) * eta_hat;

        let mut rng = seeded_rng(self.cfg.seed, STREAM_SCRAMBLE);
        let mut psis: Vec<DVector<C64>> =
            (0..samples_cfg.scrambling_psi).map(|_| random_unit_vector(d_a, &mut rng)).collect();
        psis.push(eta_p.psi_a());
        psis.push(est.worst_case.psi_a());
        let mut rhos: Vec<Operator> =
            (0..samples_cfg.scrambling_rho).map(|k| rank_cycle(d_b, k, &mut rng)).collect();
        for phi in [eta_p.phi_b(), est.worst_case.phi_b()].into_iter().flatten() {
            rhos.push(Operator::projector_onto(&phi));
        }
        let mixed_b = Operator::identity(d_b).scale(1.0 / d_b as f64);

        let mut chain = Vec::new();
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut pure = Vec::new();
        let mut delta_s_max: f64 = 0.0;
        for psi in &psis {
            let s_mix = pure_state(psi, &mixed_b);
            let out_mix = self.noise.apply(&self.code.embed(&s_mix)?)?;
            let hat_mix = eta_state(self.code, self.noise, &est.recovery, &s_mix)?;
            let p_mix = eta_state(self.code, self.noise, rp, &s_mix)?;
            pure.push((1.0 - hat_mix, (weight * (1.0 - p_mix).max(0.0)).sqrt()));
            for rho in &rhos {
                let s = pure_state(psi, rho);
                let out = self.noise.apply(&self.code.embed(&s)?)?;
                let delta_s = 0.5 * trace_norm_hermitian(&(out - &out_mix));
                delta_s_max = delta_s_max.max(delta_s);
                let du = delta.delta.max(delta_s);
                let hat = eta_state(self.code, self.noise, &est.recovery, &s)?;
                let p = eta_state(self.code, self.noise, rp, &s)?;
                let inner = (weight * (1.0 - p + du).max(0.0)).sqrt();
                chain.push(((1.0 - inner).max(0.0), eta_hat + du));
                lower.push((hat_mix, hat + du));
                lower.push((p_mix, p + du));
                upper.push((hat, hat_mix + du));
                upper.push((p, p_mix + du));
            }
        }

        let first_order = ((d_a as f64 + 1.0) * eta_hat + 3.0 * delta.delta).min(1.0);
        let reports = vec![
            worst_sample("b_scrambling.chain", &chain, tol.sample, &digest)
                .with_relation("1 − √([1 + (d_A−1)η̂_op{C}][1 − η_P{ψ⊗ρ_B} + δ]) ≤ η̂_op{C} + δ")
                .with_meta("delta_estimate", &delta)
                .with_meta("delta_sample_max", delta_s_max)
                .with_meta("eta_op_upper", eta_hat)
                .with_meta("seesaw", Self::seesaw_meta(est)),
            worst_sample("b_scrambling.mixing_lower", &lower, tol.sample, &digest)
                .with_relation("η_R{ψ⊗P_B/d_B} ≤ η_R{ψ⊗ρ_B} + δ  (R = R̂_op, R_P)"),
            worst_sample("b_scrambling.mixing_upper", &upper, tol.sample, &digest)
                .with_relation("η_R{ψ⊗ρ_B} ≤ η_R{ψ⊗P_B/d_B} + δ  (R = R̂_op, R_P)"),
            worst_sample("b_scrambling.maxmixed_pure_state", &pure, tol.sample, &digest)
                .with_relation("1 − η̂_op{ψ⊗P_B/d_B} ≤ √([1 + (d_A−1)η̂_op{C}][1 − η_P{ψ⊗P_B/d_B}])"),
            BoundReport::new("b_scrambling.first_order", eta_p.eta, first_order, 0.0, &digest)
                .with_relation("η_P ≤ (d_A+1)η̂_op + 3δ̂  (remainder terms dropped)")
                .with_expression(format!(
                    "{} ≤ {}·{} + 3·{} = {}",
                    num(eta_p.eta),
                    d_a + 1,
                    num(eta_hat),
                    num(delta.delta),
                    num(first_order)
                ))
                .with_meta("delta_estimate", delta.delta)
                .informational(),
        ];
        Ok(ScenarioOutcome::new(name, reports))
    }
}

pub fn scenario_perfect_check(code: &SubsystemCode, noise: &KrausChannel, cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    Workbench::new(code, noise, cfg)?.perfect_check()
}

pub fn scenario_subspace(code: &SubsystemCode, noise: &KrausChannel, cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    Workbench::new(code, noise, cfg)?.subspace()
}

pub fn scenario_maxmixed_b(code: &SubsystemCode, noise: &KrausChannel, cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    let bench = Workbench::new(code, noise, cfg)?;
    bench.require_d_b("scenario maxmixed", 2, None)?;
    bench.maxmixed()
}

pub fn scenario_state_dependent(
    code: &SubsystemCode,
    noise: &KrausChannel,
    phi_b: &Operator,
    cfg: &ScenarioConfig,
) -> Result<ScenarioOutcome> {
    Workbench::new(code, noise, cfg)?.state_dependent(phi_b)
}

pub fn scenario_b_correctable(code: &SubsystemCode, noise: &KrausChannel, cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    Workbench::new(code, noise, cfg)?.b_correctable()
}

pub fn scenario_b_scrambling(code: &SubsystemCode, noise: &KrausChannel, cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    Workbench::new(code, noise, cfg)?.b_scrambling()
}

/// Product noise `F_A ⊗ F_B` on `V_A ⊗ I_B`. `fa` must act on the A code and
/// `fb` must be trace preserving on all of `H_B`.
pub fn scenario_product_channel(
    code_a: &SubsystemCode,
    fa: &KrausChannel,
    fb: &KrausChannel,
    cfg: &ScenarioConfig,
) -> Result<ScenarioOutcome> {
    let name = Scenario::Product.name();
    let (code, noise) = product_pair(code_a, fa, fb)?;
    let full = Workbench::new(&code, &noise, cfg)?;
    let sub = Workbench::new(code_a, fa, cfg)?;
    let digest = full.digest(name, &channel_to_json(fb));
    let tol = &cfg.tolerances;

    let id_b = Operator::identity(fb.dim_in());
    let product_of_transposes = KrausChannel::product(sub.transpose()?, &transpose_channel_on(&id_b, fb)?);
    let dist = full.transpose()?.choi_distance(&product_of_transposes)?;

    let eta_full = full.eta_p()?.eta;
    let eta_a = sub.eta_p()?.eta;
    let mut reports = vec![
        BoundReport::new("product.factorization", dist, 0.0, tol.factorization, &digest)
            .with_relation("‖J(R_P) − J(R_{A,P} ⊗ R_{B,P})‖_F = 0")
            .with_expression(plain_expression(dist, 0.0)),
        BoundReport::new("product.b_independence", (eta_full - eta_a).abs(), 0.0, tol.sample, &digest)
            .with_relation("η_P(V_A ⊗ I_B, F_A ⊗ F_B) = η_P(V_A, F_A)")
            .with_expression(format!("|{} − {}| ≤ 0", num(eta_full), num(eta_a))),
    ];
    for mut r in sub.subspace()?.reports {
        r.name = r.name.replacen("subspace.", "product.a_", 1);
        r.inputs_digest = digest.clone();
        reports.push(r);
    }
    Ok(ScenarioOutcome::new(name, reports))
}

/// Inputs of a dispatch run.
pub struct RunInputs<'a> {
    pub code: &'a SubsystemCode,
    pub noise: &'a KrausChannel,
    pub factors: Option<&'a ProductFactors>,
    pub phi_b: Option<&'a Operator>,
    pub cfg: &'a ScenarioConfig,
}

/// Runs one scenario. Precondition failures are errors.
pub fn run_scenario(s: Scenario, inputs: &RunInputs) -> Result<ScenarioOutcome> {
    let bench = Workbench::new(inputs.code, inputs.noise, inputs.cfg)?;
    run_on(&bench, s, inputs)
}

fn default_phi_b(d_b: usize) -> Operator {
    Operator::projector_onto(&DVector::from_fn(d_b, |i, _| if i == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
}

/// Checks everything that can be checked without heavy computation.
pub fn validate(s: Scenario, inputs: &RunInputs) -> Result<()> {
    ensure_noise_on_code(inputs.code, inputs.noise)?;
    let d_b = inputs.code.d_b();
    let fail = |reason: String| Err(Error::Precondition { operation: "scenario dispatch", reason });
    match s {
        Scenario::Subspace if d_b != 1 => fail(format!("subspace needs d_b = 1, the code has d_b = {d_b}")),
        Scenario::MaxMixed | Scenario::BScrambling | Scenario::BCorrectable if d_b < 2 => {
            fail(format!("{} needs d_b >= 2, the code has d_b = {d_b}", s.name()))
        }
        Scenario::Product if inputs.factors.is_none() => {
            fail("product needs the noise given as explicit factors (use the product or b_eraser gallery entry)".into())
        }
        Scenario::StateDependent => match inputs.phi_b {
            Some(phi) => StateFamily::fixed_b(inputs.code, phi.clone()).map(|_| ()),
            None => Ok(()),
        },
        Scenario::BCorrectable => Workbench::new(inputs.code, inputs.noise, inputs.cfg)?.check_b_correctable().map(|_| ()),
        _ => Ok(()),
    }
}

fn run_on(bench: &Workbench, s: Scenario, inputs: &RunInputs) -> Result<ScenarioOutcome> {
    validate(s, inputs)?;
    match s {
        Scenario::PerfectCheck => bench.perfect_check(),
        Scenario::Subspace => bench.subspace(),
        Scenario::Product => {
            let f = inputs.factors.expect("validated");
            scenario_product_channel(&f.code_a, &f.fa, &f.fb, inputs.cfg)
        }
        Scenario::MaxMixed => bench.maxmixed(),
        Scenario::StateDependent => {
            let phi = inputs.phi_b.cloned().unwrap_or_else(|| default_phi_b(inputs.code.d_b()));
            bench.state_dependent(&phi)
        }
        Scenario::BCorrectable => bench.b_correctable(),
        Scenario::BScrambling => bench.b_scrambling(),
    }
}

/// Every scenario in order; inapplicable ones are returned as skipped with the
/// precondition message. The perfect-condition reports are informational here,
/// since an approximate pair is expected to fail them.
pub fn run_all(inputs: &RunInputs) -> Result<Vec<ScenarioOutcome>> {
    let bench = Workbench::new(inputs.code, inputs.noise, inputs.cfg)?;
    let mut out = Vec::new();
    for s in Scenario::ALL {
        match run_on(&bench, s, inputs) {
            Ok(o) if s == Scenario::PerfectCheck => out.push(o.demote()),
            Ok(o) => out.push(o),
            Err(Error::Precondition { reason, .. }) => out.push(ScenarioOutcome::skipped(s.name(), reason)),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{gallery, GalleryParams};

    fn quick() -> ScenarioConfig {
        let mut cfg = ScenarioConfig::with_seed(1);
        cfg.restarts = 8;
        cfg.seesaw_rounds = 20;
        cfg.samples.delta_restarts = 8;
        cfg.samples.delta_mixed = 50;
        cfg
    }

    #[test]
    fn bitflip3_subspace_is_tight_at_zero() {
        let e = gallery("bitflip3", &GalleryParams::default()).unwrap();
        let o = scenario_subspace(&e.code, &e.noise, &quick()).unwrap();
        assert!(o.all_satisfied(), "{o:?}");
        let r = o.report("subspace.transpose_near_optimal").unwrap();
        assert!(r.lhs.abs() < 1e-9 && r.rhs.abs() < 1e-9);
    }

    #[test]
    fn subspace_rejects_subsystem_codes() {
        let e = gallery("gauge422", &GalleryParams::default()).unwrap();
        assert!(matches!(scenario_subspace(&e.code, &e.noise, &quick()), Err(Error::Precondition { .. })));
    }

    #[test]
    fn perfect_check_on_bitflip3() {
        let e = gallery("bitflip3", &GalleryParams::default()).unwrap();
        let o = scenario_perfect_check(&e.code, &e.noise, &quick()).unwrap();
        assert!(o.all_satisfied(), "{o:?}");
        assert!(o.report("perfect.form_a").unwrap().lhs < 1e-10);
    }

    #[test]
    fn gauge422_maxmixed_has_zero_lhs() {
        let e = gallery("gauge422", &GalleryParams::default()).unwrap();
        let o = scenario_maxmixed_b(&e.code, &e.noise, &quick()).unwrap();
        assert!(o.all_satisfied(), "{o:?}");
        assert!(o.report("maxmixed.transpose_near_optimal").unwrap().lhs.abs() < 1e-9);
    }

    #[test]
    fn eraser_scrambling_is_trivial() {
        let e = gallery("b_eraser", &GalleryParams::default()).unwrap();
        let o = scenario_b_scrambling(&e.code, &e.noise, &quick()).unwrap();
        assert!(o.all_satisfied(), "{o:?}");
    }

    #[test]
    fn product_identity_factor() {
        let qubit = SubsystemCode::trivial(2, 1).unwrap();
        let fb = crate::channel::noise::depolarizing(0.4).unwrap();
        let o = scenario_product_channel(&qubit, &KrausChannel::identity(2), &fb, &quick()).unwrap();
        assert!(o.all_satisfied(), "{o:?}");
    }

    #[test]
    fn all_marks_inapplicable_scenarios_skipped() {
        let e = gallery("gauge422", &GalleryParams::default()).unwrap();
        let cfg = quick();
        let inputs = RunInputs { code: &e.code, noise: &e.noise, factors: None, phi_b: None, cfg: &cfg };
        let out = run_all(&inputs).unwrap();
        assert_eq!(out.len(), Scenario::ALL.len());
        let skipped: Vec<&str> = out.iter().filter(|o| o.skipped.is_some()).map(|o| o.scenario.as_str()).collect();
        assert!(skipped.contains(&"subspace") && skipped.contains(&"product"), "{skipped:?}");
        assert!(out.iter().all(|o| o.all_satisfied()));
    }
}
