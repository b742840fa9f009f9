//! Acceptance suite: each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::cell::OnceCell;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aqec::channel::noise;
use aqec::code::{ad4, ad4_code, bitflip3, gallery, gauge422, product_pair, GalleryParams};
use aqec::fidelity::{eta_code, eta_p_via_deltas, eta_state, OptimizerOptions};
use aqec::random::{seeded_rng, SeededRng};
use aqec::recovery::{check_perfect_form_a, check_perfect_form_b, residuals, transpose_channel};
use aqec::scenarios::construct::{
    amplitude_damping_on_code, gauge422_with_b_depolarizing, random_b_correctable_noise, random_correctable_noise,
    random_noise_on_code,
};
use aqec::scenarios::{estimate_delta, DeltaOptions, Scenario, ScenarioConfig, Workbench};
use aqec::{CodeState, KrausChannel, Operator, ScenarioOutcome, SubsystemCode, C64};
use nalgebra::DVector;
use rand::Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Verdict { passed, detail: detail.into() }
    }
}

fn within_budget(v: Verdict, elapsed: Duration, budget: Option<Duration>) -> Verdict {
    match budget {
        Some(b) if elapsed > b => Verdict::new(false, format!("{}; over the {:?} budget", v.detail, b)),
        _ => v,
    }
}

fn opts(seed: u64) -> OptimizerOptions {
    OptimizerOptions { seed, ..Default::default() }
}

fn perfect_equivalence() -> Verdict {
    let mut cases: Vec<(String, SubsystemCode, KrausChannel)> = Vec::new();
    let (c, n) = bitflip3(0.1).unwrap();
    cases.push(("bitflip3".into(), c, n));
    for k in 0..50u64 {
        let mut rng = seeded_rng(1000 + k, 0);
        let d_a = rng.random_range(2..=3);
        let d_b = rng.random_range(1..=2);
        let sectors = rng.random_range(1..=3);
        let per_sector = rng.random_range(1..=3);
        let d_h = sectors * d_a * d_b + rng.random_range(0..=2);
        let code = SubsystemCode::random(d_a, d_b, d_h, &mut rng).unwrap();
        let noise = random_correctable_noise(&code, sectors, per_sector, &mut rng).unwrap();
        cases.push((format!("random #{k}"), code, noise));
    }
    let mut worst_a: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut worst_eta: f64 = 0.0;
    let mut failures = Vec::new();
    for (label, code, noise) in &cases {
        let (pass_a, res) = check_perfect_form_a(code, noise, 1e-8).unwrap();
        let form_b = check_perfect_form_b(code, noise, 1e-8).unwrap();
        let rp = transpose_channel(code, noise).unwrap();
        let eta = eta_code(code, noise, &rp, &opts(7)).unwrap().eta;
        worst_a = worst_a.max(res.max_delta_fro);
        worst_b = worst_b.max(form_b.max_residual);
        worst_eta = worst_eta.max(eta.abs());
        if !pass_a || !form_b.passed || eta.abs() > 1e-9 {
            failures.push(label.clone());
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "{} pairs; max form-A residual {worst_a:.1e}, form-B {worst_b:.1e}, |η_P| {worst_eta:.1e}; failures {failures:?}",
            cases.len()
        ),
    )
}

/// The instances shared by the residual-identity and residual-bound criteria.
fn residual_instances() -> Vec<(SubsystemCode, KrausChannel)> {
    (0..100u64)
        .map(|k| {
            let mut rng = seeded_rng(2000 + k, 0);
            let d_a = rng.random_range(2..=3);
            let d_b = rng.random_range(2..=3);
            let d_h = d_a * d_b + 2 * rng.random_range(0..=1);
            let n = rng.random_range(2..=4);
            let code = SubsystemCode::random(d_a, d_b, d_h, &mut rng).unwrap();
            let noise = random_noise_on_code(&code, n, d_h, &mut rng).unwrap();
            (code, noise)
        })
        .collect()
}

struct ResidualRow {
    direct: f64,
    via: f64,
    norm: f64,
}

fn residual_rows(instances: &[(SubsystemCode, KrausChannel)]) -> Vec<ResidualRow> {
    instances
        .iter()
        .enumerate()
        .map(|(k, (code, noise))| {
            let rp = transpose_channel(code, noise).unwrap();
            let direct = eta_code(code, noise, &rp, &opts(k as u64)).unwrap().eta;
            let res = residuals(code, noise).unwrap();
            let via = eta_p_via_deltas(&res, &opts(k as u64)).eta;
            ResidualRow { direct, via, norm: res.sum_delta_norm }
        })
        .collect()
}

fn residual_identity(rows: &[ResidualRow]) -> Verdict {
    let worst = rows.iter().map(|r| (r.direct - r.via).abs()).fold(0.0, f64::max);
    let bad = rows.iter().filter(|r| (r.direct - r.via).abs() > 1e-6).count();
    Verdict::new(bad == 0, format!("{} instances; max |η_P − η_Δ| {worst:.1e}; {bad} above 1e-6", rows.len()))
}

fn residual_bound(rows: &[ResidualRow]) -> Verdict {
    let bad = rows.iter().filter(|r| r.via > r.norm + 1e-9).count();
    let min_slack = rows.iter().map(|r| r.norm - r.via).fold(f64::INFINITY, f64::min);
    Verdict::new(bad == 0, format!("{} instances; min slack {min_slack:.3e}; {bad} violations", rows.len()))
}

fn subspace_near_optimality() -> Verdict {
    let cfg = ScenarioConfig::with_seed(11);
    let mut violations = Vec::new();
    let mut min_order: f64 = f64::INFINITY;
    let mut min_bound: f64 = f64::INFINITY;
    let mut count = 0;
    for k in 0..20u64 {
        let mut rng = seeded_rng(3000 + k, 0);
        let code = SubsystemCode::random(2, 1, 8, &mut rng).unwrap();
        for gamma in [0.05, 0.1, 0.2] {
            let noise = amplitude_damping_on_code(&code, gamma).unwrap();
            let bench = Workbench::new(&code, &noise, &cfg).unwrap();
            let eta_p = bench.eta_p().unwrap().eta;
            let est = bench.optimal().unwrap();
            let eta_hat = est.eta_upper;
            let f_rhs = aqec::fidelity::eta_times_f(eta_hat, 2).unwrap();
            min_order = min_order.min(eta_p - eta_hat);
            min_bound = min_bound.min(f_rhs - eta_p);
            if eta_hat > eta_p + 1e-9 || eta_p > f_rhs + 1e-7 {
                violations.push(format!("code {k}, γ {gamma}"));
            }
            count += 1;
        }
    }
    Verdict::new(
        violations.is_empty(),
        format!("{count} pairs; min (η_P − η̂_op) {min_order:.3e}, min (η̂_op·f − η_P) {min_bound:.3e}; violations {violations:?}"),
    )
}

fn b_correctable_independence() -> Verdict {
    let cfg = ScenarioConfig::with_seed(5);
    let mut worst_spread: f64 = 0.0;
    let mut worst_closed: f64 = 0.0;
    for k in 0..10u64 {
        let mut rng = seeded_rng(4000 + k, 0);
        let sectors = 1 + (k as usize % 2);
        let d_h = 4 * sectors + (k as usize % 3);
        let code = SubsystemCode::random(2, 2, d_h, &mut rng).unwrap();
        let noise = random_b_correctable_noise(&code, sectors, 2, &mut rng).unwrap();
        let out = Workbench::new(&code, &noise, &cfg).unwrap().b_correctable().unwrap();
        worst_spread = worst_spread.max(out.report("b_correctable.spread").unwrap().lhs);
        worst_closed = worst_closed.max(out.report("b_correctable.closed_form").unwrap().lhs);
    }
    Verdict::new(
        worst_spread <= 1e-8 && worst_closed <= 1e-9,
        format!("10 pairs, 10×10 samples each; max spread {worst_spread:.1e}, max closed-form deviation {worst_closed:.1e}"),
    )
}

fn worst_enforced_slack(outcome: &ScenarioOutcome) -> f64 {
    outcome.reports.iter().filter(|r| r.enforced()).map(|r| r.slack).fold(f64::INFINITY, f64::min)
}

fn b_scrambling_sweep() -> Verdict {
    let cfg = ScenarioConfig::with_seed(3);
    let strengths = [0.5, 0.8, 0.95];
    let (g_code, g_base) = gauge422(0.1, 0.0).unwrap();
    let ad4_c = ad4_code().unwrap();
    let (_, ad4_n) = ad4(0.1).unwrap();
    let qubit = SubsystemCode::trivial(2, 1).unwrap();
    let qubit_ad = noise::amplitude_damping(0.1).unwrap();

    let mut configs: Vec<(String, SubsystemCode, KrausChannel)> = Vec::new();
    for &s in &strengths {
        let n = gauge422_with_b_depolarizing(&g_code, &g_base, s).unwrap();
        configs.push((format!("gauge422+depol({s})"), g_code.clone(), n));
    }
    for &s in &strengths {
        let (c, n) = product_pair(&ad4_c, &ad4_n, &noise::depolarizing(s).unwrap()).unwrap();
        configs.push((format!("ad4⊗depol({s})"), c, n));
    }
    for &s in &strengths {
        let (c, n) = product_pair(&qubit, &qubit_ad, &noise::depolarizing(s).unwrap()).unwrap();
        configs.push((format!("ad⊗depol({s})"), c, n));
    }

    let mut worst: f64 = f64::INFINITY;
    let mut failures = Vec::new();
    for (label, code, noise) in &configs {
        let bench = Workbench::new(code, noise, &cfg).unwrap();
        let mm = bench.maxmixed().unwrap();
        let sc = bench.b_scrambling().unwrap();
        let slack = worst_enforced_slack(&mm).min(worst_enforced_slack(&sc));
        worst = worst.min(slack);
        if slack < -1e-6 {
            failures.push(label.clone());
        }
    }

    let eraser = gallery("b_eraser", &GalleryParams::default()).unwrap();
    let delta = estimate_delta(&eraser.code, &eraser.noise, &DeltaOptions { seed: 3, ..Default::default() })
        .unwrap()
        .delta;
    Verdict::new(
        failures.is_empty() && delta <= 1e-9,
        format!(
            "{} configurations; worst enforced slack {worst:+.3e}; failures {failures:?}; b_eraser δ̂ {delta:.1e}",
            configs.len()
        ),
    )
}

fn product_factorization() -> Verdict {
    let mut worst: f64 = 0.0;
    for k in 0..20u64 {
        let mut rng = seeded_rng(5000 + k, 0);
        let d_a = 2;
        let d_h_a = rng.random_range(2..=4);
        let code_a = SubsystemCode::random(d_a, 1, d_h_a, &mut rng).unwrap();
        let fa = random_noise_on_code(&code_a, rng.random_range(1..=3).max(1), d_h_a, &mut rng).unwrap();
        let d_b = rng.random_range(2..=3);
        let code_b = SubsystemCode::trivial(d_b, 1).unwrap();
        let fb = random_noise_on_code(&code_b, rng.random_range(1..=3), d_b, &mut rng).unwrap();
        let (code, noise) = product_pair(&code_a, &fa, &fb).unwrap();
        let joint = transpose_channel(&code, &noise).unwrap();
        let ra = transpose_channel(&code_a, &fa).unwrap();
        let rb = transpose_channel(&code_b, &fb).unwrap();
        let split = KrausChannel::product(&ra, &rb);
        worst = worst.max(joint.choi_distance(&split).unwrap());
    }
    Verdict::new(worst <= 1e-9, format!("20 factor pairs; max Choi distance {worst:.1e}"))
}

/// Fibonacci lattice of 400 points plus both poles.
fn bloch_grid() -> Vec<DVector<C64>> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut zs: Vec<(f64, f64)> = (0..400).map(|k| (1.0 - (2 * k + 1) as f64 / 400.0, k as f64 * golden)).collect();
    zs.push((1.0, 0.0));
    zs.push((-1.0, 0.0));
    zs.into_iter()
        .map(|(z, phi)| {
            let theta = z.clamp(-1.0, 1.0).acos();
            DVector::from_vec(vec![
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            ])
        })
        .collect()
}

fn grid_oracle() -> Verdict {
    let grid = bloch_grid();
    let one = Operator::identity(1);
    let mut worst: f64 = 0.0;
    for k in 0..10u64 {
        let mut rng: SeededRng = seeded_rng(6000 + k, 0);
        let code = SubsystemCode::random(2, 1, 8, &mut rng).unwrap();
        let gamma = rng.random_range(0.05..0.3);
        let noise = amplitude_damping_on_code(&code, gamma).unwrap();
        let rp = transpose_channel(&code, &noise).unwrap();
        let opt = eta_code(&code, &noise, &rp, &opts(k)).unwrap().eta;
        let grid_max = grid
            .iter()
            .map(|psi| {
                let s = CodeState { rho_a: Operator::projector_onto(psi), rho_b: one.clone() };
                eta_state(&code, &noise, &rp, &s).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((opt - grid_max).abs());
    }
    Verdict::new(worst <= 2e-3, format!("10 instances, {} grid points; max |optimizer − grid| {worst:.2e}", grid.len()))
}

fn determinism() -> Verdict {
    let mut cfg = ScenarioConfig::with_seed(21);
    cfg.restarts = 16;
    let params = GalleryParams::default();
    let mut compared = 0;
    let mut worst: f64 = 0.0;
    for name in ["bitflip3", "gauge422", "product", "b_eraser"] {
        let entry = gallery(name, &params).unwrap();
        for s in Scenario::ALL {
            let inputs = aqec::scenarios::RunInputs {
                code: &entry.code,
                noise: &entry.noise,
                factors: entry.factors.as_ref(),
                phi_b: None,
                cfg: &cfg,
            };
            let (Ok(a), Ok(b)) = (aqec::scenarios::run_scenario(s, &inputs), aqec::scenarios::run_scenario(s, &inputs))
            else {
                continue;
            };
            for (ra, rb) in a.reports.iter().zip(&b.reports) {
                worst = worst.max((ra.lhs - rb.lhs).abs()).max((ra.rhs - rb.rhs).abs());
                compared += 1;
            }
        }
    }
    Verdict::new(worst <= 1e-12 && compared > 0, format!("{compared} reports re-run; max difference {worst:.1e}"))
}

fn main() -> ExitCode {
    let started = Instant::now();
    let mut all_passed = true;
    let mut report = |id: usize, title: &str, budget: Option<u64>, run: &dyn Fn() -> Verdict| {
        let t = Instant::now();
        let verdict = run();
        let elapsed = t.elapsed();
        let verdict = within_budget(verdict, elapsed, budget.map(Duration::from_secs));
        all_passed &= verdict.passed;
        let mark = if verdict.passed { "PASS" } else { "FAIL" };
        println!("criterion {id} {mark} [{:>7.2}s] {title}: {}", elapsed.as_secs_f64(), verdict.detail);
    };

    report(1, "perfect-correction equivalence", Some(10), &perfect_equivalence);
    // Criteria 2 and 3 share instances; the computation is timed under criterion 2.
    let rows = OnceCell::new();
    let shared_rows = || rows.get_or_init(|| residual_rows(&residual_instances()));
    report(2, "residual formula for the transpose-channel loss", Some(120), &|| residual_identity(shared_rows()));
    report(3, "residual norm bound", None, &|| residual_bound(shared_rows()));
    report(4, "subspace near-optimality", Some(300), &subspace_near_optimality);
    report(5, "B-correctable independence", None, &b_correctable_independence);
    report(6, "maximally mixed and scrambled B sweep", None, &b_scrambling_sweep);
    report(7, "product-channel factorization", None, &product_factorization);
    report(8, "optimizer against Bloch-sphere grid", None, &grid_oracle);
    report(9, "determinism under a fixed seed", None, &determinism);

    println!(
        "acceptance: {} in {:.1}s",
        if all_passed { "all criteria passed" } else { "FAILED" },
        started.elapsed().as_secs_f64()
    );
    if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
