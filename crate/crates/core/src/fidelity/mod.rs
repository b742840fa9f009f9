//! Fidelity loss `η_R{ρ} = 1 − F²(tr_B ρ, tr_B (R∘E)(ρ))`, its worst case over a
//! code, and estimates of the optimal recovery.

pub mod objective;
pub mod optimizer;
pub mod seesaw;

use nalgebra::DVector;
use serde::Serialize;

use crate::channel::KrausChannel;
use crate::code::{CodeState, StateFamily, SubsystemCode};
use crate::error::{Error, Result};
use crate::operator::{fidelity, C64};
use crate::recovery::ResidualDecomposition;

pub use objective::ProductObjective;
pub use optimizer::{LocalMax, OptimizerOptions};
pub use seesaw::{estimate_optimal_recovery, estimate_optimal_recovery_seeded, RecoveryEstimate, SeeSawOptions};

/// `η_R{ρ}` by direct simulation of `R ∘ E` on `V (ρ_A ⊗ ρ_B) V^dag`.
pub fn eta_state(code: &SubsystemCode, noise: &KrausChannel, rec: &KrausChannel, s: &CodeState) -> Result<f64> {
    let rho = code.embed(s)?;
    let out = rec.apply(&noise.apply(&rho)?)?;
    let sigma = code.logical_state_a(&out)?;
    let f = fidelity(&s.rho_a, &sigma.hermitian_part())?;
    Ok(1.0 - f * f)
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimizerMeta {
    pub restarts: usize,
    pub seed: u64,
    pub best_restart: usize,
    /// Iterations summed over restarts.
    pub iterations: usize,
    pub best_iterations: usize,
    /// Riemannian gradient norm at the returned maximizer.
    pub convergence_residual: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelityLossResult {
    pub eta: f64,
    pub argmax_psi_a: Vec<C64>,
    /// `None` when the B state is fixed by the family.
    pub argmax_phi_b: Option<Vec<C64>>,
    pub meta: OptimizerMeta,
}

impl FidelityLossResult {
    fn from_runs(runs: &[LocalMax], opts: &OptimizerOptions, fixed_b: bool) -> Self {
        let best = optimizer::best_of(runs);
        FidelityLossResult {
            eta: best.eta,
            argmax_psi_a: best.psi.iter().copied().collect(),
            argmax_phi_b: (!fixed_b).then(|| best.phi.iter().copied().collect()),
            meta: OptimizerMeta {
                restarts: runs.len(),
                seed: opts.seed,
                best_restart: best.restart,
                iterations: runs.iter().map(|r| r.iterations).sum(),
                best_iterations: best.iterations,
                convergence_residual: best.residual,
                converged: best.converged,
            },
        }
    }

    pub fn psi_a(&self) -> DVector<C64> {
        DVector::from_vec(self.argmax_psi_a.clone())
    }

    pub fn phi_b(&self) -> Option<DVector<C64>> {
        self.argmax_phi_b.clone().map(DVector::from_vec)
    }

    /// The maximizing code state; `family` supplies the B part when it is fixed.
    pub fn witness_state(&self, code: &SubsystemCode, family: &StateFamily) -> Result<CodeState> {
        match (family, self.phi_b()) {
            (StateFamily::Full, Some(phi)) => Ok(CodeState::pure(&self.psi_a(), &phi)),
            (StateFamily::FixedB(_), _) => {
                family.state(code, crate::operator::Operator::projector_onto(&self.psi_a()))
            }
            (StateFamily::Full, None) => Err(Error::Precondition {
                operation: "witness_state",
                reason: "result carries no B witness".into(),
            }),
        }
    }
}

/// The objective whose maximum is `η_R` over `family`.
pub fn family_objective(
    code: &SubsystemCode,
    noise: &KrausChannel,
    rec: &KrausChannel,
    family: &StateFamily,
) -> Result<ProductObjective> {
    match family {
        StateFamily::Full => objective::direct_objective(code, noise, rec),
        StateFamily::FixedB(rho_b) => objective::fixed_b_objective(code, noise, rec, rho_b),
    }
}

/// Worst-case η over pure product states of the whole code.
pub fn eta_code(
    code: &SubsystemCode,
    noise: &KrausChannel,
    rec: &KrausChannel,
    opts: &OptimizerOptions,
) -> Result<FidelityLossResult> {
    eta_code_on(code, noise, rec, &StateFamily::Full, opts)
}

/// Worst-case η over pure `ψ_A` and, for the full family, pure `φ_B`.
pub fn eta_code_on(
    code: &SubsystemCode,
    noise: &KrausChannel,
    rec: &KrausChannel,
    family: &StateFamily,
    opts: &OptimizerOptions,
) -> Result<FidelityLossResult> {
    Ok(eta_code_detailed(code, noise, rec, family, opts)?.0)
}

/// Worst-case result together with every restart's local maximum.
pub fn eta_code_detailed(
    code: &SubsystemCode,
    noise: &KrausChannel,
    rec: &KrausChannel,
    family: &StateFamily,
    opts: &OptimizerOptions,
) -> Result<(FidelityLossResult, Vec<LocalMax>)> {
    let obj = family_objective(code, noise, rec, family)?;
    let runs = optimizer::maximize_all(&obj, opts);
    let fixed = matches!(family, StateFamily::FixedB(_));
    Ok((FidelityLossResult::from_runs(&runs, opts, fixed), runs))
}

/// Maximizes the residual expression
/// `<φ| Σ_ij [<ψ|Δ^dag Δ|ψ> − <ψ|Δ^dag|ψ><ψ|Δ|ψ>] |φ>` over pure product states.
pub fn eta_p_via_deltas(res: &ResidualDecomposition, opts: &OptimizerOptions) -> FidelityLossResult {
    let obj = objective::delta_objective(res);
    let runs = optimizer::maximize_all(&obj, opts);
    FidelityLossResult::from_runs(&runs, opts, false)
}

/// `f(η; d) = ((d+1) − η) / (1 + (d−1) η)`.
pub fn f_bound(eta: f64, d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::Domain {
            function: "f_bound",
            value: d as f64,
            reason: "d must be at least 1",
        });
    }
    if !(-1e-9..=1.0 + 1e-9).contains(&eta) || !eta.is_finite() {
        return Err(Error::Domain {
            function: "f_bound",
            value: eta,
            reason: "eta must lie in [0, 1]",
        });
    }
    let eta = eta.clamp(0.0, 1.0);
    let d = d as f64;
    Ok(((d + 1.0) - eta) / (1.0 + (d - 1.0) * eta))
}

/// `η · f(η; d)`, the right-hand side shape shared by every near-optimality bound.
pub fn eta_times_f(eta: f64, d: usize) -> Result<f64> {
    Ok(eta.clamp(0.0, 1.0) * f_bound(eta, d)?)
}
