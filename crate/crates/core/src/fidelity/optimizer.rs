//! Multi-start projected gradient ascent on a product of complex unit spheres.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::objective::ProductObjective;
use crate::operator::C64;
use crate::random::{random_unit_vector, seeded_rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Stop once the Riemannian gradient norm falls below this.
    pub grad_tol: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    pub initial_step: f64,
    pub max_backtracks: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 32,
            max_iters: 1000,
            seed: 0,
            grad_tol: 1e-8,
            armijo: 1e-4,
            initial_step: 1.0,
            max_backtracks: 50,
        }
    }
}

impl OptimizerOptions {
    pub fn with_seed(seed: u64) -> Self {
        OptimizerOptions { seed, ..Self::default() }
    }
}

/// Result of one restart.
#[derive(Clone, Debug)]
pub struct LocalMax {
    pub restart: usize,
    pub eta: f64,
    pub psi: DVector<C64>,
    pub phi: DVector<C64>,
    pub iterations: usize,
    /// Riemannian gradient norm at the returned point.
    pub residual: f64,
    pub converged: bool,
}

fn normalized(v: DVector<C64>) -> DVector<C64> {
    let n = v.norm();
    v.unscale(n)
}

/// A smooth real function on the product of unit spheres in `C^d_a` and `C^d_b`.
pub trait SphereObjective: Sync {
    fn dims(&self) -> (usize, usize);
    fn value(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> f64;
    /// Value and the Wirtinger gradients `∂f/∂ψ̄`, `∂f/∂φ̄`.
    fn value_and_grad(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> (f64, DVector<C64>, DVector<C64>);
}

impl SphereObjective for ProductObjective {
    fn dims(&self) -> (usize, usize) {
        (self.d_a(), self.d_b())
    }
    fn value(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> f64 {
        ProductObjective::value(self, psi, phi)
    }
    fn value_and_grad(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> (f64, DVector<C64>, DVector<C64>) {
        ProductObjective::value_and_grad(self, psi, phi)
    }
}

/// Euclidean ascent direction `2 ∂f/∂z̄` projected onto the sphere's tangent space.
fn tangent(g: DVector<C64>, z: &DVector<C64>) -> DVector<C64> {
    let g = g * C64::new(2.0, 0.0);
    let radial = z.dotc(&g).re;
    g - z * C64::new(radial, 0.0)
}

/// Local ascent from the given start.
pub fn ascend<O: SphereObjective + ?Sized>(
    obj: &O,
    mut psi: DVector<C64>,
    mut phi: DVector<C64>,
    opts: &OptimizerOptions,
    restart: usize,
) -> LocalMax {
    let move_phi = obj.dims().1 > 1;
    let mut iterations = 0;
    let mut converged = false;
    let (mut f, mut g_psi, mut g_phi) = obj.value_and_grad(&psi, &phi);
    let mut residual;
    loop {
        let d_psi = tangent(g_psi, &psi);
        let d_phi = if move_phi { tangent(g_phi, &phi) } else { DVector::zeros(phi.len()) };
        let norm2 = d_psi.norm_squared() + d_phi.norm_squared();
        residual = norm2.sqrt();
        if residual < opts.grad_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        let mut t = opts.initial_step;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let cand_psi = normalized(&psi + &d_psi * C64::new(t, 0.0));
            let cand_phi = if move_phi { normalized(&phi + &d_phi * C64::new(t, 0.0)) } else { phi.clone() };
            let fc = obj.value(&cand_psi, &cand_phi);
            if fc >= f + opts.armijo * t * norm2 {
                accepted = Some((cand_psi, cand_phi));
                break;
            }
            t *= 0.5;
        }
        let Some((np, nf)) = accepted else {
            // No step increases the objective at machine resolution.
            converged = residual < opts.grad_tol.sqrt();
            break;
        };
        psi = np;
        phi = nf;
        (f, g_psi, g_phi) = obj.value_and_grad(&psi, &phi);
        iterations += 1;
    }
    LocalMax {
        restart,
        eta: f,
        psi,
        phi,
        iterations,
        residual,
        converged,
    }
}

/// Haar-random start for restart `r`; each restart has its own stream.
pub fn start_point(d_a: usize, d_b: usize, seed: u64, r: usize) -> (DVector<C64>, DVector<C64>) {
    let mut rng = seeded_rng(seed, r as u64);
    let psi = random_unit_vector(d_a, &mut rng);
    let phi = random_unit_vector(d_b, &mut rng);
    (psi, phi)
}

/// All restarts in restart order.
pub fn maximize_all<O: SphereObjective + ?Sized>(obj: &O, opts: &OptimizerOptions) -> Vec<LocalMax> {
    let restarts = opts.restarts.max(1);
    let (d_a, d_b) = obj.dims();
    (0..restarts)
        .into_par_iter()
        .map(|r| {
            let (psi, phi) = start_point(d_a, d_b, opts.seed, r);
            ascend(obj, psi, phi, opts, r)
        })
        .collect()
}

/// Values closer than this are treated as ties.
const TIE_TOL: f64 = 1e-14;

/// Best restart; ties keep the lowest restart index.
pub fn best_of(results: &[LocalMax]) -> &LocalMax {
    let mut best = &results[0];
    for r in &results[1..] {
        if r.eta > best.eta + TIE_TOL {
            best = r;
        }
    }
    best
}
