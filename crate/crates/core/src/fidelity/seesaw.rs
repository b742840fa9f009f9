//! Upper bound on the optimal fidelity loss by alternating between worst-case states and recoveries.
//!
//! Without loss of generality a recovery maps the support of `E(P)` into
//! `H_A ⊗ |0>_B`: the figure of merit only sees `tr_B V^dag R(·) V`, and
//! completing a trace-decreasing map to a channel can only raise fidelity.
//! With `W` an orthonormal basis of that support and `X = W^dag E(ρ) W`, a
//! recovery is a channel `C^r → H_A` with Kraus operators `K_l`, and for pure
//! `ψ_A` the recovered fidelity is `F² = Σ_l <ψ|K_l X K_l^dag|ψ>`.
//!
//! Stacking `r·d_a` Kraus operators gives an `r·d_a² x r` matrix `M`, and
//! trace preservation is exactly `M^dag M = I`. Each round maximizes a softmin
//! of `F²` over the accumulated witness states by Riemannian gradient ascent
//! on this Stiefel manifold, then searches for new worst-case states.
//! The transpose channel is always one of the seeds, so the returned bound
//! never exceeds its worst-case loss.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::optimizer::{LocalMax, OptimizerOptions};
use super::{eta_code_detailed, FidelityLossResult};
use crate::channel::{ChoiMatrix, KrausChannel};
use crate::code::{StateFamily, SubsystemCode};
use crate::error::Result;
use crate::operator::{
    hermitian_eigen_unchecked, inv_sqrt_on_support, sqrt_psd, support_basis, tensor, Operator, C64, SUPPORT_TOL, ZERO,
};
use crate::random::{gaussian_matrix, seeded_rng};
use crate::recovery::{ensure_noise_on_code, transpose_channel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeeSawOptions {
    pub max_rounds: usize,
    /// Stop when the worst-case loss changes by less than this between rounds.
    pub tol: f64,
    /// Stop after this many rounds without improving the best bound.
    pub patience: usize,
    /// New witness states taken from each worst-case search.
    pub witnesses_per_round: usize,
    /// Softmin sharpness schedule for the recovery subproblem.
    pub betas: Vec<f64>,
    pub steps_per_beta: usize,
    /// Size of the random kick that lets the Kraus rank grow.
    pub perturbation: f64,
    /// Options for every worst-case search.
    pub eval: OptimizerOptions,
}

impl Default for SeeSawOptions {
    fn default() -> Self {
        SeeSawOptions {
            max_rounds: 200,
            tol: 1e-7,
            patience: 5,
            witnesses_per_round: 3,
            betas: vec![1e2, 1e3, 1e4],
            steps_per_beta: 60,
            perturbation: 1e-3,
            eval: OptimizerOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeeSawMeta {
    pub rounds: usize,
    pub converged: bool,
    pub stop_reason: String,
    pub witnesses: usize,
    /// Worst-case loss of each seed, transpose channel first.
    pub seed_etas: Vec<f64>,
    pub best_seed: usize,
    pub improvements: usize,
}

#[derive(Clone, Debug)]
pub struct RecoveryEstimate {
    pub recovery: KrausChannel,
    /// Worst-case loss of `recovery`; an upper bound on the optimal loss.
    pub eta_upper: f64,
    /// Best bound after each round, starting with the best seed.
    pub history: Vec<f64>,
    pub worst_case: FidelityLossResult,
    pub meta: SeeSawMeta,
}

/// See-saw search seeded with the transpose channel.
pub fn estimate_optimal_recovery(
    code: &SubsystemCode,
    noise: &KrausChannel,
    family: &StateFamily,
    opts: &SeeSawOptions,
) -> Result<RecoveryEstimate> {
    estimate_optimal_recovery_seeded(code, noise, family, opts, &[])
}

/// See-saw search seeded with the transpose channel and `seeds`.
pub fn estimate_optimal_recovery_seeded(
    code: &SubsystemCode,
    noise: &KrausChannel,
    family: &StateFamily,
    opts: &SeeSawOptions,
    seeds: &[KrausChannel],
) -> Result<RecoveryEstimate> {
    let red = Reduced::new(code, noise)?;
    let mut candidates = vec![transpose_channel(code, noise)?];
    candidates.extend(seeds.iter().cloned());

    let mut witnesses = WitnessSet::default();
    let mut seed_etas = Vec::with_capacity(candidates.len());
    let mut best: Option<(usize, KrausChannel, FidelityLossResult)> = None;
    for (idx, cand) in candidates.into_iter().enumerate() {
        let (res, runs) = eta_code_detailed(code, noise, &cand, family, &opts.eval)?;
        witnesses.absorb(&red, family, &runs, opts.witnesses_per_round);
        seed_etas.push(res.eta);
        if best.as_ref().is_none_or(|(_, _, b)| res.eta < b.eta) {
            best = Some((idx, cand, res));
        }
    }
    let (best_seed, mut best_rec, mut best_res) = best.expect("at least the transpose seed");
    let mut best_kraus = red.normalize(&red.reduce(&best_rec)?)?;
    let mut history = vec![best_res.eta];
    let mut prev_eta = best_res.eta;
    let mut stall = 0;
    let mut improvements = 0;
    let mut rounds = 0;
    let mut stop_reason = "max_rounds".to_string();
    let mut converged = false;

    while rounds < opts.max_rounds {
        rounds += 1;
        let improved = red.improve(&best_kraus, &witnesses.items, opts, rounds as u64);
        let kraus = red.normalize(&improved)?;
        let rec = red.embed(&kraus)?;
        let (res, runs) = eta_code_detailed(code, noise, &rec, family, &opts.eval)?;
        witnesses.absorb(&red, family, &runs, opts.witnesses_per_round);
        let change = (res.eta - prev_eta).abs();
        prev_eta = res.eta;
        if res.eta < best_res.eta {
            best_kraus = kraus;
            best_rec = rec;
            best_res = res;
            stall = 0;
            improvements += 1;
        } else {
            stall += 1;
        }
        history.push(best_res.eta);
        if change < opts.tol {
            stop_reason = "converged".into();
            converged = true;
            break;
        }
        if stall >= opts.patience {
            stop_reason = "patience".into();
            converged = true;
            break;
        }
    }

    Ok(RecoveryEstimate {
        recovery: best_rec,
        eta_upper: best_res.eta,
        history,
        worst_case: best_res,
        meta: SeeSawMeta {
            rounds,
            converged,
            stop_reason,
            witnesses: witnesses.items.len(),
            seed_etas,
            best_seed,
            improvements,
        },
    })
}

/// A pure `ψ_A` and the reduced noisy state `X = W^dag E(ψψ^dag ⊗ ρ_B) W`.
struct Witness {
    psi: DVector<C64>,
    x: Operator,
}

#[derive(Default)]
struct WitnessSet {
    states: Vec<(DVector<C64>, DVector<C64>)>,
    items: Vec<Witness>,
}

impl WitnessSet {
    fn contains(&self, psi: &DVector<C64>, phi: &DVector<C64>) -> bool {
        self.states.iter().any(|(p, f)| {
            let o = psi.dotc(p).norm_sqr() * phi.dotc(f).norm_sqr();
            o > 1.0 - 1e-8
        })
    }

    /// Adds the highest distinct local maxima.
    fn absorb(&mut self, red: &Reduced<'_>, family: &StateFamily, runs: &[LocalMax], k: usize) {
        let mut order: Vec<usize> = (0..runs.len()).collect();
        order.sort_by(|&a, &b| runs[b].eta.total_cmp(&runs[a].eta));
        let mut added = 0;
        for idx in order {
            if added >= k {
                break;
            }
            let run = &runs[idx];
            let (phi, rho_b) = match family {
                StateFamily::Full => (run.phi.clone(), Operator::projector_onto(&run.phi)),
                StateFamily::FixedB(rho) => (DVector::from_element(1, C64::new(1.0, 0.0)), rho.clone()),
            };
            if self.contains(&run.psi, &phi) {
                continue;
            }
            self.items.push(red.witness(&run.psi, &rho_b));
            self.states.push((run.psi.clone(), phi));
            added += 1;
        }
    }
}

/// Noise and recoveries expressed on an orthonormal basis `W` of `supp E(P)`.
struct Reduced<'a> {
    code: &'a SubsystemCode,
    w: Operator,
    e_tilde: Vec<Operator>,
    r: usize,
}

impl<'a> Reduced<'a> {
    fn new(code: &'a SubsystemCode, noise: &KrausChannel) -> Result<Self> {
        ensure_noise_on_code(code, noise)?;
        let ep = noise.apply(&code.projector())?;
        let w = support_basis(&ep, SUPPORT_TOL)?;
        let e_tilde = noise.kraus().iter().map(|e| w.dagger() * e * code.embedding()).collect();
        let r = w.cols();
        Ok(Reduced { code, w, e_tilde, r })
    }

    fn d_a(&self) -> usize {
        self.code.d_a()
    }

    /// Number of stacked Kraus operators; enough for any channel `C^r → H_A`.
    fn n_kraus(&self) -> usize {
        self.r * self.d_a()
    }

    fn witness(&self, psi: &DVector<C64>, rho_b: &Operator) -> Witness {
        let rho = tensor(&Operator::projector_onto(psi), rho_b);
        let mut x = Operator::zeros(self.r, self.r);
        for e in &self.e_tilde {
            x = x + e * &rho * e.dagger();
        }
        Witness { psi: psi.clone(), x }
    }

    /// Kraus operators `V (K ⊗ |0>_B) W^dag` of a full recovery.
    fn embed(&self, kraus: &[Operator]) -> Result<KrausChannel> {
        let pick = Operator::basis_ket(self.code.d_b(), 0);
        let v = self.code.embedding();
        let wd = self.w.dagger();
        let full = kraus.iter().map(|k| v * tensor(k, &pick) * &wd).collect();
        KrausChannel::new(full, &self.w * &wd)
    }

    /// Reduced Kraus list `(I ⊗ <b|) V^dag R_i W`, completed to trace preservation.
    fn reduce(&self, rec: &KrausChannel) -> Result<Vec<Operator>> {
        let (d_a, d_b) = (self.code.d_a(), self.code.d_b());
        let v = self.code.embedding();
        let mut out = Vec::new();
        for r in rec.kraus() {
            let full = v.dagger() * r * &self.w;
            for b in 0..d_b {
                out.push(Operator::from_fn(d_a, self.r, |a, m| full[(a * d_b + b, m)]));
            }
        }
        self.complete(&mut out)?;
        Ok(out)
    }

    /// Appends `|0><m| √(I − Σ K^dag K)` so the list is trace preserving.
    fn complete(&self, kraus: &mut Vec<Operator>) -> Result<()> {
        let s = kraus_sum(kraus, self.r);
        let deficit = hermitian_eigen_unchecked(&(Operator::identity(self.r) - s).hermitian_part())
            .map_spectrum(|l| l.max(0.0));
        if deficit.fro_norm() < 1e-14 {
            return Ok(());
        }
        let root = sqrt_psd(&deficit)?;
        for m in 0..self.r {
            kraus.push(Operator::from_fn(self.d_a(), self.r, |a, c| if a == 0 { root[(m, c)] } else { ZERO }));
        }
        Ok(())
    }

    /// Minimal Kraus list of the same map, renormalized as `K S^{-1/2}` to be
    /// exactly trace preserving.
    fn normalize(&self, kraus: &[Operator]) -> Result<Vec<Operator>> {
        let choi = KrausChannel::cp_map(kraus.to_vec())?.choi();
        let ch = ChoiMatrix { matrix: choi.matrix.hermitian_part(), dim_in: self.r, dim_out: self.d_a() }.to_kraus(1e-13);
        let mut out = ch.kraus().to_vec();
        let s = kraus_sum(&out, self.r).hermitian_part();
        if hermitian_eigen_unchecked(&s).min_eigenvalue() > 1e-6 {
            let norm = inv_sqrt_on_support(&s, SUPPORT_TOL)?;
            for k in out.iter_mut() {
                *k = &*k * &norm;
            }
        } else {
            self.complete(&mut out)?;
        }
        Ok(out)
    }

    fn stack(&self, kraus: &[Operator]) -> Operator {
        let d_a = self.d_a();
        let n = self.n_kraus();
        debug_assert!(kraus.len() <= n);
        Operator::from_fn(n * d_a, self.r, |row, c| {
            let (l, a) = (row / d_a, row % d_a);
            kraus.get(l).map_or(ZERO, |k| k[(a, c)])
        })
    }

    fn unstack(&self, m: &Operator) -> Vec<Operator> {
        let d_a = self.d_a();
        (0..self.n_kraus())
            .map(|l| Operator::from_fn(d_a, self.r, |a, c| m[(l * d_a + a, c)]))
            .filter(|k| k.fro_norm() > 1e-14)
            .collect()
    }

    /// The stacked Kraus entries rearranged as `T[(a, c), l] = K_l[a, c]`, so
    /// that `T T^dag` is the Choi matrix of the reduced recovery.
    fn choi_factor(&self, m: &Operator) -> DMatrix<C64> {
        let (d_a, r) = (self.d_a(), self.r);
        DMatrix::from_fn(d_a * r, self.n_kraus(), |row, l| m[(l * d_a + row / r, row % r)])
    }

    /// Inverse rearrangement of [`Self::choi_factor`].
    fn kraus_from_choi_factor(&self, t: &DMatrix<C64>) -> Operator {
        let (d_a, r) = (self.d_a(), self.r);
        Operator::from_fn(self.n_kraus() * d_a, r, |row, c| t[((row % d_a) * r + c, row / d_a)])
    }

    /// `F² = Σ_l ψ^dag K_l X K_l^dag ψ = tr(Q J)` with `Q = ψψ^dag ⊗ X^T` and
    /// `J` the Choi matrix; only the `d_a²` blocks of `J` are contracted with `X`.
    fn fidelity_from_choi(&self, j: &DMatrix<C64>, w: &Witness) -> f64 {
        let (d_a, r) = (self.d_a(), self.r);
        let mut total = ZERO;
        for a in 0..d_a {
            for b in 0..d_a {
                let coef = w.psi[b] * w.psi[a].conj();
                let block = j.view((a * r, b * r), (r, r));
                let dot: C64 = block.iter().zip(w.x.iter()).map(|(u, v)| u * v).sum();
                total += coef * dot;
            }
        }
        total.re
    }

    fn fidelities(&self, m: &Operator, witnesses: &[Witness]) -> Vec<f64> {
        let t = self.choi_factor(m);
        let j = &t * t.adjoint();
        witnesses.iter().map(|w| self.fidelity_from_choi(&j, w)).collect()
    }

    #[cfg(test)]
    fn fidelity(&self, m: &Operator, w: &Witness) -> f64 {
        self.fidelities(m, std::slice::from_ref(w))[0]
    }

    /// Softmin of the witness fidelities and its Wirtinger gradient
    /// `∂/∂T̄ = (Σ_k w_k ψ_kψ_k^dag ⊗ X_k^T) T`, returned in the stacked layout.
    fn softmin_and_grad(&self, m: &Operator, witnesses: &[Witness], beta: f64) -> (f64, f64, Operator) {
        let (d_a, r) = (self.d_a(), self.r);
        let t = self.choi_factor(m);
        let j = &t * t.adjoint();
        let fids: Vec<f64> = witnesses.iter().map(|w| self.fidelity_from_choi(&j, w)).collect();
        let (value, weights) = softmin(&fids, beta);
        let mut q = DMatrix::<C64>::zeros(d_a * r, d_a * r);
        for (w, &wt) in witnesses.iter().zip(&weights) {
            if wt < 1e-300 {
                continue;
            }
            for a in 0..d_a {
                for b in 0..d_a {
                    let coef = w.psi[a] * w.psi[b].conj() * wt;
                    let mut block = q.view_mut((a * r, b * r), (r, r));
                    for c in 0..r {
                        for c2 in 0..r {
                            block[(c, c2)] += coef * w.x[(c2, c)];
                        }
                    }
                }
            }
        }
        let grad = self.kraus_from_choi_factor(&(q * t));
        let min = fids.iter().copied().fold(f64::INFINITY, f64::min);
        (value, min, grad)
    }

    fn softmin_value(&self, m: &Operator, witnesses: &[Witness], beta: f64) -> (f64, f64) {
        let fids = self.fidelities(m, witnesses);
        let min = fids.iter().copied().fold(f64::INFINITY, f64::min);
        (softmin(&fids, beta).0, min)
    }

    /// Raises the smallest witness fidelity starting from `kraus0`.
    fn improve(&self, kraus0: &[Operator], witnesses: &[Witness], opts: &SeeSawOptions, round: u64) -> Vec<Operator> {
        let m0 = self.stack(kraus0);
        let mut best = m0.clone();
        let mut best_min = self.softmin_value(&m0, witnesses, 1.0).1;
        // A small random kick so that zero Kraus slots can become active.
        let mut rng = seeded_rng(opts.eval.seed ^ 0x005e_e5a3, round);
        let kick = gaussian_matrix(m0.rows(), m0.cols(), &mut rng).scale(opts.perturbation);
        let mut m = polar(&(&m0 + kick));
        let mut step: f64 = 1.0;
        for &beta in &opts.betas {
            let (mut value, mut min, mut grad) = self.softmin_and_grad(&m, witnesses, beta);
            for _ in 0..opts.steps_per_beta {
                if min > best_min {
                    best_min = min;
                    best = m.clone();
                }
                let dir = stiefel_tangent(&m, &grad);
                let nd2 = dir.fro_norm().powi(2);
                if nd2.sqrt() < 1e-12 {
                    break;
                }
                let mut t = (2.0 * step).min(1e3);
                let mut accepted = None;
                for _ in 0..40 {
                    let cand = polar(&(&m + dir.scale(t)));
                    let (cv, _) = self.softmin_value(&cand, witnesses, beta);
                    if cv >= value + 1e-4 * t * nd2 {
                        accepted = Some(cand);
                        break;
                    }
                    t *= 0.5;
                }
                let Some(cand) = accepted else { break };
                m = cand;
                step = t;
                (value, min, grad) = self.softmin_and_grad(&m, witnesses, beta);
            }
            if min > best_min {
                best_min = min;
                best = m.clone();
            }
        }
        self.unstack(&best)
    }
}

fn kraus_sum(kraus: &[Operator], r: usize) -> Operator {
    kraus.iter().fold(Operator::zeros(r, r), |acc, k| acc + k.dagger() * k)
}

/// Ascent direction `2G` projected onto the tangent space of `M^dag M = I`.
fn stiefel_tangent(m: &Operator, grad: &Operator) -> Operator {
    let g = grad.scale(2.0);
    let mg = (m.dagger() * &g).hermitian_part();
    g - m * mg
}

/// Isometric factor `A (A^dag A)^{-1/2}`.
fn polar(a: &Operator) -> Operator {
    let gram = (a.dagger() * a).hermitian_part();
    let inv = hermitian_eigen_unchecked(&gram).map_spectrum(|l| if l > 1e-300 { l.powf(-0.5) } else { 0.0 });
    a * inv
}

/// `−(1/β) ln Σ exp(−β f_k)` and its weights.
fn softmin(values: &[f64], beta: f64) -> (f64, Vec<f64>) {
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = values.iter().map(|v| (-beta * (v - m)).exp()).collect();
    let z: f64 = exps.iter().sum();
    (m - z.ln() / beta, exps.into_iter().map(|e| e / z).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::noise;
    use crate::code::{bitflip3, gallery, CodeState, GalleryParams};
    use crate::fidelity::{eta_code_on, eta_state};
    use crate::random::random_unit_vector;

    fn quick() -> SeeSawOptions {
        SeeSawOptions {
            max_rounds: 20,
            eval: OptimizerOptions { restarts: 12, ..OptimizerOptions::default() },
            ..SeeSawOptions::default()
        }
    }

    #[test]
    fn softmin_limits() {
        let (v, w) = softmin(&[0.3, 0.5, 0.9], 1e4);
        assert!((v - 0.3).abs() < 1e-3);
        assert!(w[0] > 0.999);
        let (v, _) = softmin(&[0.4, 0.4], 10.0);
        assert!((v - (0.4 - 2f64.ln() / 10.0)).abs() < 1e-12);
    }

    #[test]
    fn stacked_kraus_are_isometries() {
        let e = gallery("ad4", &GalleryParams::default()).unwrap();
        let red = Reduced::new(&e.code, &e.noise).unwrap();
        let mut rng = seeded_rng(31, 0);
        let m = polar(&gaussian_matrix(red.n_kraus() * 2, red.r, &mut rng));
        assert!((m.dagger() * &m - Operator::identity(red.r)).fro_norm() < 1e-12);
        let kraus = red.normalize(&red.unstack(&m)).unwrap();
        let rec = red.embed(&kraus).unwrap();
        assert!(rec.is_trace_preserving());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let e = gallery("ad4", &GalleryParams::default()).unwrap();
        let red = Reduced::new(&e.code, &e.noise).unwrap();
        let mut rng = seeded_rng(33, 0);
        let ws: Vec<Witness> = (0..3)
            .map(|_| red.witness(&random_unit_vector(2, &mut rng), &Operator::identity(1)))
            .collect();
        let m = gaussian_matrix(red.n_kraus() * 2, red.r, &mut rng).scale(0.2);
        let beta = 30.0;
        let (_, _, g) = red.softmin_and_grad(&m, &ws, beta);
        let h = 1e-6;
        for (row, col) in [(0, 0), (3, 2), (7, 5)] {
            for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                let mut p = m.clone();
                let mut q = m.clone();
                p[(row, col)] += dir * h;
                q[(row, col)] -= dir * h;
                let fd = (red.softmin_value(&p, &ws, beta).0 - red.softmin_value(&q, &ws, beta).0) / (2.0 * h);
                let analytic = 2.0 * (g[(row, col)].conj() * dir).re;
                assert!((fd - analytic).abs() < 1e-6, "{fd} vs {analytic}");
            }
        }
    }

    #[test]
    fn witness_fidelity_matches_simulation() {
        let e = gallery("ad4", &GalleryParams::default()).unwrap();
        let red = Reduced::new(&e.code, &e.noise).unwrap();
        let rec = transpose_channel(&e.code, &e.noise).unwrap();
        let kraus = red.normalize(&red.reduce(&rec).unwrap()).unwrap();
        let m = red.stack(&kraus);
        let mut rng = seeded_rng(32, 0);
        let psi = random_unit_vector(2, &mut rng);
        let f2 = red.fidelity(&m, &red.witness(&psi, &Operator::identity(1)));
        let s = CodeState::pure(&psi, &DVector::from_element(1, C64::new(1.0, 0.0)));
        let eta = eta_state(&e.code, &e.noise, &rec, &s).unwrap();
        assert!((1.0 - f2 - eta).abs() < 1e-10);
    }

    #[test]
    fn reduce_then_embed_preserves_performance() {
        let e = gallery("ad4", &GalleryParams::default()).unwrap();
        let red = Reduced::new(&e.code, &e.noise).unwrap();
        let rec = transpose_channel(&e.code, &e.noise).unwrap();
        let back = red.embed(&red.normalize(&red.reduce(&rec).unwrap()).unwrap()).unwrap();
        let opts = OptimizerOptions::default();
        let a = eta_code_on(&e.code, &e.noise, &rec, &StateFamily::Full, &opts).unwrap();
        let b = eta_code_on(&e.code, &e.noise, &back, &StateFamily::Full, &opts).unwrap();
        assert!((a.eta - b.eta).abs() < 1e-10);
    }

    #[test]
    fn perfect_pair_stays_at_zero() {
        let (code, noise) = bitflip3(0.1).unwrap();
        let est = estimate_optimal_recovery(&code, &noise, &StateFamily::Full, &quick()).unwrap();
        assert!(est.eta_upper.abs() < 1e-9);
    }

    #[test]
    fn bound_never_exceeds_transpose_and_history_decreases() {
        let e = gallery("ad4", &GalleryParams::default()).unwrap();
        let opts = quick();
        let est = estimate_optimal_recovery(&e.code, &e.noise, &StateFamily::Full, &opts).unwrap();
        let rp = transpose_channel(&e.code, &e.noise).unwrap();
        let eta_p = eta_code_on(&e.code, &e.noise, &rp, &StateFamily::Full, &opts.eval).unwrap().eta;
        assert!(est.eta_upper <= eta_p + 1e-9);
        assert!(est.eta_upper < eta_p - 1e-3, "{} vs {eta_p}", est.eta_upper);
        for w in est.history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9);
        }
        assert!(est.recovery.is_trace_preserving());
    }

    #[test]
    fn amplitude_damped_qubit() {
        // For a bare qubit under amplitude damping the best worst-case recovery
        // beats the transpose channel.
        let code = SubsystemCode::trivial(2, 1).unwrap();
        let ch = noise::amplitude_damping(0.3).unwrap();
        let est = estimate_optimal_recovery(&code, &ch, &StateFamily::Full, &quick()).unwrap();
        assert!(est.eta_upper <= est.meta.seed_etas[0] + 1e-12);
        assert!(est.history.len() >= 2);
    }
}
