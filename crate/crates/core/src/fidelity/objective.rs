//! Fidelity-loss objectives on pure product states `x = ψ ⊗ φ`.
//!
//! Every objective here has the form
//!
//! ```text
//! η(ψ, φ) = x^dag H x − Σ_k |ψ^dag G_k x|²
//! ```
//!
//! where `G_k` are `d_a x d_a·d_b` operators and `H` defaults to the identity.
//! Gradients are Wirtinger derivatives with respect to `ψ̄` and `φ̄`.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::channel::{ChoiMatrix, KrausChannel};
use crate::code::SubsystemCode;
use crate::error::Result;
use crate::operator::{hermitian_eigen, tensor_vec, Operator, C64, ZERO};
use crate::recovery::ResidualDecomposition;

/// Relative Choi eigenvalue cutoff when compressing Kraus lists.
const COMPRESS_TOL: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct ProductObjective {
    pub(crate) d_a: usize,
    pub(crate) d_b: usize,
    quadratic: Option<Operator>,
    ops: Vec<Operator>,
}

impl ProductObjective {
    pub fn new(d_a: usize, d_b: usize, quadratic: Option<Operator>, ops: Vec<Operator>) -> Self {
        ProductObjective { d_a, d_b, quadratic, ops }
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    pub fn ops(&self) -> &[Operator] {
        &self.ops
    }

    pub fn value(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> f64 {
        let x = tensor_vec(psi, phi);
        let q = match &self.quadratic {
            Some(h) => x.dotc(&(h.matrix() * &x)).re,
            None => x.norm_squared(),
        };
        let s: f64 = self.ops.iter().map(|g| psi.dotc(&(g.matrix() * &x)).norm_sqr()).sum();
        q - s
    }

    /// Value and Wirtinger gradients `(∂η/∂ψ̄, ∂η/∂φ̄)`.
    pub fn value_and_grad(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> (f64, DVector<C64>, DVector<C64>) {
        let x = tensor_vec(psi, phi);
        let (q, hx) = match &self.quadratic {
            Some(h) => {
                let hx = h.matrix() * &x;
                (x.dotc(&hx).re, hx)
            }
            None => (x.norm_squared(), x.clone()),
        };
        let mut g_psi = contract_b(&hx, phi, self.d_a, self.d_b);
        let mut g_phi = contract_a(&hx, psi, self.d_a, self.d_b);
        let mut s = 0.0;
        for g in &self.ops {
            let gx = g.matrix() * &x;
            let c = psi.dotc(&gx);
            s += c.norm_sqr();
            let gd_psi = g.matrix().ad_mul(psi);
            g_psi -= gx * c.conj() + contract_b(&gd_psi, phi, self.d_a, self.d_b) * c;
            g_phi -= contract_a(&gd_psi, psi, self.d_a, self.d_b) * c;
        }
        (q - s, g_psi, g_phi)
    }
}

/// `(I_A ⊗ φ^dag) v`.
fn contract_b(v: &DVector<C64>, phi: &DVector<C64>, d_a: usize, d_b: usize) -> DVector<C64> {
    DVector::from_fn(d_a, |a, _| (0..d_b).map(|b| phi[b].conj() * v[a * d_b + b]).sum())
}

/// `(ψ^dag ⊗ I_B) v`.
fn contract_a(v: &DVector<C64>, psi: &DVector<C64>, d_a: usize, d_b: usize) -> DVector<C64> {
    DVector::from_fn(d_b, |b, _| (0..d_a).map(|a| psi[a].conj() * v[a * d_b + b]).sum())
}

/// Choi matrix of `x ↦ Σ_k G_k x x^dag G_k^dag` accumulated in a fixed order.
fn accumulate_choi(ops: impl Iterator<Item = Operator>, d_in: usize, d_out: usize) -> Operator {
    let n = d_in * d_out;
    let mut j = nalgebra::DMatrix::<C64>::zeros(n, n);
    for g in ops {
        let v = DVector::from_fn(n, |idx, _| g[(idx % d_out, idx / d_out)]);
        j.gerc(C64::new(1.0, 0.0), &v, &v, C64::new(1.0, 0.0));
    }
    Operator::from(j)
}

fn compress(choi: Operator, d_in: usize, d_out: usize) -> Vec<Operator> {
    ChoiMatrix { matrix: choi, dim_in: d_in, dim_out: d_out }
        .to_kraus(COMPRESS_TOL)
        .kraus()
        .to_vec()
}

/// Minimal Kraus list of `ρ ↦ tr_B[V^dag (R ∘ E)(V ρ V^dag) V]`, a map from
/// `H_A ⊗ H_B` to `H_A`.
pub fn logical_kraus(code: &SubsystemCode, noise: &KrausChannel, rec: &KrausChannel) -> Result<Vec<Operator>> {
    let (d_a, d_b) = (code.d_a(), code.d_b());
    let d = code.dim();
    let v = code.embedding();
    if rec.dim_in() != noise.dim_out() {
        return Err(crate::error::Error::DimensionMismatch {
            context: "logical_kraus: recovery input vs noise output",
            expected: format!("{}", noise.dim_out()),
            found: format!("{}", rec.dim_in()),
        });
    }
    code.embedding().ensure_shape(noise.dim_in(), d, "logical_kraus")?;
    rec.kraus()[0].ensure_shape(code.d_h(), rec.dim_in(), "logical_kraus: recovery output")?;

    let inner: Vec<Operator> = noise.kraus().iter().map(|e| e * v).collect();
    let partial: Vec<Operator> = rec
        .kraus()
        .par_iter()
        .map(|r| {
            let left = v.dagger() * r;
            let ops = inner.iter().flat_map(|m| {
                let full = &left * m;
                (0..d_b).map(move |b| Operator::from_fn(d_a, d, |a, col| full[(a * d_b + b, col)]))
            });
            accumulate_choi(ops, d, d_a)
        })
        .collect();
    let n = d * d_a;
    let choi = partial.into_iter().fold(Operator::zeros(n, n), |acc, j| acc + j);
    Ok(compress(choi, d, d_a))
}

/// η of a recovery over all pure product states.
pub fn direct_objective(code: &SubsystemCode, noise: &KrausChannel, rec: &KrausChannel) -> Result<ProductObjective> {
    let ops = logical_kraus(code, noise, rec)?;
    Ok(ProductObjective::new(code.d_a(), code.d_b(), None, ops))
}

/// η of a recovery over `ψ ⊗ ρ_B` with `ρ_B` fixed; an objective on `ψ` alone.
pub fn fixed_b_objective(
    code: &SubsystemCode,
    noise: &KrausChannel,
    rec: &KrausChannel,
    rho_b: &Operator,
) -> Result<ProductObjective> {
    let ops = logical_kraus(code, noise, rec)?;
    fix_b(&ops, code.d_a(), code.d_b(), rho_b)
}

/// Contracts the B input with the spectral decomposition of `ρ_B`.
pub(crate) fn fix_b(ops: &[Operator], d_a: usize, d_b: usize, rho_b: &Operator) -> Result<ProductObjective> {
    rho_b.ensure_square(d_b, "fixed_b_objective")?;
    let eig = hermitian_eigen(rho_b)?;
    let mut out = Vec::new();
    for (m, &p) in eig.eigenvalues.iter().enumerate() {
        if p <= 1e-14 {
            continue;
        }
        let phi = eig.vector(m);
        let w = C64::new(p.sqrt(), 0.0);
        for g in ops {
            out.push(Operator::from_fn(d_a, d_a, |a, a2| {
                let mut acc = ZERO;
                for b in 0..d_b {
                    acc += g[(a, a2 * d_b + b)] * phi[b];
                }
                acc * w
            }));
        }
    }
    let choi = accumulate_choi(out.into_iter(), d_a, d_a);
    Ok(ProductObjective::new(d_a, 1, None, compress(choi, d_a, d_a)))
}

/// The residual form `x^dag (Σ Δ^dag Δ) x − Σ_ijb |<ψ, b|Δ_ij|ψ, φ>|²`.
pub fn delta_objective(res: &ResidualDecomposition) -> ProductObjective {
    let (d_a, d_b) = (res.d_a, res.d_b);
    let d = d_a * d_b;
    let ops = res.deltas.iter().flat_map(|delta| {
        (0..d_b).map(move |b| Operator::from_fn(d_a, d, |a, col| delta[(a * d_b + b, col)]))
    });
    let choi = accumulate_choi(ops, d, d_a);
    ProductObjective::new(d_a, d_b, Some(res.delta_gram()), compress(choi, d, d_a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian_matrix, random_psd, random_unit_vector, seeded_rng};

    fn random_objective(seed: u64, d_a: usize, d_b: usize, with_h: bool) -> ProductObjective {
        let mut rng = seeded_rng(seed, 0);
        let h = with_h.then(|| random_psd(d_a * d_b, &mut rng));
        let ops = (0..3).map(|_| gaussian_matrix(d_a, d_a * d_b, &mut rng).scale(0.3)).collect();
        ProductObjective::new(d_a, d_b, h, ops)
    }

    /// Central differences along real and imaginary directions give `2 Re ∂/∂z̄`.
    #[test]
    fn gradient_matches_finite_differences() {
        for (seed, with_h) in [(1, false), (2, true)] {
            let obj = random_objective(seed, 3, 2, with_h);
            let mut rng = seeded_rng(seed, 1);
            let psi = random_unit_vector(3, &mut rng);
            let phi = random_unit_vector(2, &mut rng);
            let (_, g_psi, g_phi) = obj.value_and_grad(&psi, &phi);
            let h = 1e-6;
            for k in 0..3 {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut p = psi.clone();
                    let mut m = psi.clone();
                    p[k] += dir * h;
                    m[k] -= dir * h;
                    let fd = (obj.value(&p, &phi) - obj.value(&m, &phi)) / (2.0 * h);
                    let analytic = 2.0 * (g_psi[k].conj() * dir).re;
                    assert!((fd - analytic).abs() < 1e-6, "psi[{k}] {fd} vs {analytic}");
                }
            }
            for k in 0..2 {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut p = phi.clone();
                    let mut m = phi.clone();
                    p[k] += dir * h;
                    m[k] -= dir * h;
                    let fd = (obj.value(&psi, &p) - obj.value(&psi, &m)) / (2.0 * h);
                    let analytic = 2.0 * (g_phi[k].conj() * dir).re;
                    assert!((fd - analytic).abs() < 1e-6, "phi[{k}] {fd} vs {analytic}");
                }
            }
        }
    }

    #[test]
    fn value_and_grad_agree_on_value() {
        let obj = random_objective(3, 2, 3, true);
        let mut rng = seeded_rng(3, 1);
        let psi = random_unit_vector(2, &mut rng);
        let phi = random_unit_vector(3, &mut rng);
        assert!((obj.value(&psi, &phi) - obj.value_and_grad(&psi, &phi).0).abs() < 1e-14);
    }
}
