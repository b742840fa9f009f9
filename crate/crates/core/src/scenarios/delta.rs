//! Lower-bound estimate of the B contraction factor
//! `δ = sup ‖E(ρ_A ⊗ ρ_B) − E(ρ_A ⊗ P_B/d_B)‖_tr / ‖ρ_B − P_B/d_B‖_tr`.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::KrausChannel;
use crate::code::SubsystemCode;
use crate::error::{Error, Result};
use crate::fidelity::optimizer::{best_of, maximize_all, SphereObjective};
use crate::fidelity::OptimizerOptions;
use crate::operator::{hermitian_eigen_unchecked, partial_trace_b, tensor, tensor_vec, trace_norm_hermitian, Operator, C64};
use crate::random::{random_density, seeded_rng};
use crate::recovery::ensure_noise_on_code;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeltaOptions {
    pub restarts: usize,
    pub mixed_samples: usize,
    pub seed: u64,
    /// Iteration cap of each pure-state ascent; the objective is only piecewise smooth.
    pub max_iters: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        DeltaOptions { restarts: 64, mixed_samples: 1000, seed: 0, max_iters: 300 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    /// Largest ratio found. The true δ is a supremum, so this is a lower bound.
    pub delta: f64,
    pub witness_rho_a: Operator,
    pub witness_rho_b: Operator,
    /// Number of evaluated candidates (pure ascents plus mixed samples).
    pub samples: usize,
    pub lower_bound: bool,
    pub pure_delta: f64,
    pub mixed_delta: f64,
}

/// Channel pulled back to the logical frame: `Ẽ_e = E_e V`.
struct Pulled {
    kraus: Vec<Operator>,
    d_a: usize,
    d_b: usize,
}

impl Pulled {
    fn new(code: &SubsystemCode, noise: &KrausChannel) -> Self {
        Pulled {
            kraus: noise.kraus().iter().map(|e| e * code.embedding()).collect(),
            d_a: code.d_a(),
            d_b: code.d_b(),
        }
    }

    fn apply(&self, x: &Operator) -> Operator {
        let d_out = self.kraus[0].rows();
        let mut y = Operator::zeros(d_out, d_out);
        for k in &self.kraus {
            y = y + k * x * k.dagger();
        }
        y.hermitian_part()
    }

    /// `‖Ẽ(ρ_A ⊗ (ρ_B − I/d_B))‖_tr`.
    fn numerator(&self, rho_a: &Operator, rho_b: &Operator) -> f64 {
        let diff = rho_b - Operator::identity(self.d_b).scale(1.0 / self.d_b as f64);
        trace_norm_hermitian(&self.apply(&tensor(rho_a, &diff)))
    }

    fn ratio(&self, rho_a: &Operator, rho_b: &Operator) -> Option<f64> {
        let diff = rho_b - Operator::identity(self.d_b).scale(1.0 / self.d_b as f64);
        let den = trace_norm_hermitian(&diff);
        (den > 1e-8).then(|| self.numerator(rho_a, rho_b) / den)
    }
}

/// Ratio at pure `ψ_A ⊗ φ_B`, whose denominator is the constant `2(d_B−1)/d_B`.
struct PureRatio<'a> {
    pulled: &'a Pulled,
    scale: f64,
}

impl SphereObjective for PureRatio<'_> {
    fn dims(&self) -> (usize, usize) {
        (self.pulled.d_a, self.pulled.d_b)
    }

    fn value(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> f64 {
        let p = self.pulled;
        p.numerator(&Operator::projector_onto(psi), &Operator::projector_onto(phi)) * self.scale
    }

    fn value_and_grad(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> (f64, DVector<C64>, DVector<C64>) {
        // With S = sign(Y) the trace norm equals tr(S Y) = tr(W X), W = Σ Ẽ^dag S Ẽ,
        // which is differentiated as a quadratic form away from sign changes.
        let p = self.pulled;
        let (d_a, d_b) = (p.d_a, p.d_b);
        let inv_d = 1.0 / d_b as f64;
        let x_mat = tensor(
            &Operator::projector_onto(psi),
            &(Operator::projector_onto(phi) - Operator::identity(d_b).scale(inv_d)),
        );
        let y = p.apply(&x_mat);
        let eig = hermitian_eigen_unchecked(&y);
        let value: f64 = eig.eigenvalues.iter().map(|l| l.abs()).sum();
        let sign = eig.map_spectrum(f64::signum);
        let mut w = Operator::zeros(d_a * d_b, d_a * d_b);
        for k in &p.kraus {
            w = w + k.dagger() * &sign * k;
        }
        let x = tensor_vec(psi, phi);
        let wx = &*w * &x;
        let w_a = partial_trace_b(&w, d_a, d_b).expect("square");
        let mut g_psi = DVector::<C64>::zeros(d_a);
        let mut g_phi = DVector::<C64>::zeros(d_b);
        for a in 0..d_a {
            for b in 0..d_b {
                let v = wx[a * d_b + b];
                g_psi[a] += phi[b].conj() * v;
                g_phi[b] += psi[a].conj() * v;
            }
        }
        g_psi -= (&*w_a * psi) * C64::new(inv_d, 0.0);
        let s = C64::new(self.scale, 0.0);
        (value * self.scale, g_psi * s, g_phi * s)
    }
}

/// Multi-start ascent over pure states plus random mixed samples.
pub fn estimate_delta(code: &SubsystemCode, noise: &KrausChannel, opts: &DeltaOptions) -> Result<DeltaEstimate> {
    ensure_noise_on_code(code, noise)?;
    let d_b = code.d_b();
    if d_b < 2 {
        return Err(Error::Precondition { operation: "estimate_delta", reason: "needs d_b >= 2".into() });
    }
    let pulled = Pulled::new(code, noise);
    let obj = PureRatio { pulled: &pulled, scale: d_b as f64 / (2.0 * (d_b as f64 - 1.0)) };
    let ascent = OptimizerOptions {
        restarts: opts.restarts.max(1),
        max_iters: opts.max_iters,
        seed: opts.seed,
        ..Default::default()
    };
    let runs = maximize_all(&obj, &ascent);
    let best = best_of(&runs);
    let mut estimate = DeltaEstimate {
        delta: best.eta,
        witness_rho_a: Operator::projector_onto(&best.psi),
        witness_rho_b: Operator::projector_onto(&best.phi),
        samples: runs.len() + opts.mixed_samples,
        lower_bound: true,
        pure_delta: best.eta,
        mixed_delta: 0.0,
    };

    let d_a = code.d_a();
    let mixed: Vec<Option<(f64, Operator, Operator)>> = (0..opts.mixed_samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = seeded_rng(opts.seed ^ 0xde17a, k as u64);
            let rank_a = 1 + (k % d_a);
            let rank_b = 1 + (k / d_a) % d_b;
            let rho_a = random_density(d_a, rank_a, &mut rng);
            let rho_b = random_density(d_b, rank_b, &mut rng);
            pulled.ratio(&rho_a, &rho_b).map(|r| (r, rho_a, rho_b))
        })
        .collect();
    for (r, rho_a, rho_b) in mixed.into_iter().flatten() {
        estimate.mixed_delta = estimate.mixed_delta.max(r);
        if r > estimate.delta {
            estimate.delta = r;
            estimate.witness_rho_a = rho_a;
            estimate.witness_rho_b = rho_b;
        }
    }
    Ok(estimate)
}

/// Ratio attained by a specific pair, or `None` when `ρ_B` is the reference.
pub fn delta_ratio(code: &SubsystemCode, noise: &KrausChannel, rho_a: &Operator, rho_b: &Operator) -> Option<f64> {
    Pulled::new(code, noise).ratio(rho_a, rho_b)
}
