use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fidelity::{OptimizerOptions, SeeSawOptions};

/// Tolerances applied to each family of checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `η_P ≤ η̂·f(η̂; d_A)` and its variants.
    pub bound: f64,
    /// Orderings between worst-case losses, such as `η̂_op ≤ η_P`.
    pub order: f64,
    /// Per-sample inequalities evaluated from sampled states.
    pub sample: f64,
    /// Residual norms of the perfect-correction conditions.
    pub perfect: f64,
    /// Agreement between the residual and direct forms of `η_P`.
    pub residual_identity: f64,
    /// `η_P ≤ ‖Σ Δ^dag Δ‖`.
    pub residual_bound: f64,
    /// Choi distance between the product transpose channel and the product of transposes.
    pub factorization: f64,
    /// Spread of the fidelity over B states when B is correctable.
    pub spread: f64,
    /// Closed form of that fidelity against simulation.
    pub closed_form: f64,
    /// Reduced A channel against the full channel on `ρ_A ⊗ P_B/d_B`.
    pub channel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bound: 1e-7,
            order: 1e-9,
            sample: 1e-6,
            perfect: 1e-8,
            residual_identity: 1e-6,
            residual_bound: 1e-9,
            factorization: 1e-9,
            spread: 1e-8,
            closed_form: 1e-9,
            channel: 1e-10,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 10] = [
        "bound",
        "order",
        "sample",
        "perfect",
        "residual_identity",
        "residual_bound",
        "factorization",
        "spread",
        "closed_form",
        "channel",
    ];

    fn slot(&mut self, name: &str) -> Option<&mut f64> {
        Some(match name {
            "bound" => &mut self.bound,
            "order" => &mut self.order,
            "sample" => &mut self.sample,
            "perfect" => &mut self.perfect,
            "residual_identity" => &mut self.residual_identity,
            "residual_bound" => &mut self.residual_bound,
            "factorization" => &mut self.factorization,
            "spread" => &mut self.spread,
            "closed_form" => &mut self.closed_form,
            "channel" => &mut self.channel,
            _ => return None,
        })
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Parameter { name: "tolerance", value, reason: "must be finite and non-negative" });
        }
        let slot = self.slot(name).ok_or_else(|| Error::UnknownName {
            kind: "tolerance",
            name: name.to_string(),
            known: Self::NAMES.join(", "),
        })?;
        *slot = value;
        Ok(())
    }
}

/// Sampling budgets of the scenarios.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Samples {
    /// Random pure A states for the per-state subspace inequality.
    pub pure_states: usize,
    pub spread_psi: usize,
    pub spread_rho: usize,
    pub delta_restarts: usize,
    pub delta_mixed: usize,
    pub scrambling_psi: usize,
    pub scrambling_rho: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            pure_states: 20,
            spread_psi: 10,
            spread_rho: 10,
            delta_restarts: 64,
            delta_mixed: 1000,
            scrambling_psi: 8,
            scrambling_rho: 4,
        }
    }
}

/// Everything a scenario run depends on besides the code and noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Restarts of every worst-case search.
    pub restarts: usize,
    pub max_iters: usize,
    pub seesaw_rounds: usize,
    pub seesaw_tol: f64,
    pub seesaw_patience: usize,
    pub tolerances: Tolerances,
    pub samples: Samples,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let o = OptimizerOptions::default();
        let s = SeeSawOptions::default();
        ScenarioConfig {
            seed: 0,
            restarts: o.restarts,
            max_iters: o.max_iters,
            seesaw_rounds: s.max_rounds,
            seesaw_tol: s.tol,
            seesaw_patience: s.patience,
            tolerances: Tolerances::default(),
            samples: Samples::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn with_seed(seed: u64) -> Self {
        ScenarioConfig { seed, ..Self::default() }
    }

    pub fn optimizer(&self) -> OptimizerOptions {
        OptimizerOptions { restarts: self.restarts, max_iters: self.max_iters, seed: self.seed, ..Default::default() }
    }

    pub fn seesaw(&self) -> SeeSawOptions {
        SeeSawOptions {
            max_rounds: self.seesaw_rounds,
            tol: self.seesaw_tol,
            patience: self.seesaw_patience,
            eval: self.optimizer(),
            ..Default::default()
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
