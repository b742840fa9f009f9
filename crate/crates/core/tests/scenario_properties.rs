use aqec::channel::noise;
use aqec::code::product_pair;
use aqec::random::seeded_rng;
use aqec::scenarios::construct::random_noise_on_code;
use aqec::scenarios::{estimate_delta, run_all, run_scenario, DeltaOptions, RunInputs, Scenario, ScenarioConfig, Workbench};
use aqec::{KrausChannel, Operator, ScenarioOutcome, SubsystemCode};
use proptest::prelude::*;

fn quick(seed: u64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::with_seed(seed);
    cfg.restarts = 8;
    cfg.seesaw_rounds = 10;
    cfg.samples.delta_restarts = 8;
    cfg.samples.delta_mixed = 100;
    cfg.samples.pure_states = 8;
    cfg.samples.spread_psi = 4;
    cfg.samples.spread_rho = 4;
    cfg
}

fn instance(seed: u64, d_b: usize, extra: usize) -> (SubsystemCode, KrausChannel) {
    let mut rng = seeded_rng(seed, 0);
    let d_h = 2 * d_b + extra;
    let code = SubsystemCode::random(2, d_b, d_h, &mut rng).unwrap();
    let noise = random_noise_on_code(&code, 3, d_h.div_ceil(3).max(2), &mut rng).unwrap();
    (code, noise)
}

fn inputs<'a>(code: &'a SubsystemCode, noise: &'a KrausChannel, cfg: &'a ScenarioConfig) -> RunInputs<'a> {
    RunInputs { code, noise, factors: None, phi_b: None, cfg }
}

fn values(outcomes: &[ScenarioOutcome]) -> Vec<(String, f64, f64)> {
    outcomes.iter().flat_map(|o| &o.reports).map(|r| (r.name.clone(), r.lhs, r.rhs)).collect()
}

fn random_qubit_channel(seed: u64) -> KrausChannel {
    let mut rng = seeded_rng(seed, 3);
    let code = SubsystemCode::trivial(2, 1).unwrap();
    random_noise_on_code(&code, 2, 2, &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn scenarios_are_deterministic(seed in any::<u64>(), d_b in 1usize..3, extra in 0usize..2) {
        let (code, noise) = instance(seed, d_b, extra);
        let cfg = quick(seed);
        let a = values(&run_all(&inputs(&code, &noise, &cfg)).unwrap());
        let b = values(&run_all(&inputs(&code, &noise, &cfg)).unwrap());
        prop_assert_eq!(a.len(), b.len());
        for ((na, la, ra), (nb, lb, rb)) in a.iter().zip(&b) {
            prop_assert_eq!(na, nb);
            prop_assert!((la - lb).abs() <= 1e-12 && (ra - rb).abs() <= 1e-12, "{na}");
        }
    }

    #[test]
    fn report_values_stay_in_range(seed in any::<u64>(), d_b in 1usize..3, extra in 0usize..2) {
        let (code, noise) = instance(seed, d_b, extra);
        let cfg = quick(seed);
        let top = code.d_a() as f64 + 2.0;
        for o in run_all(&inputs(&code, &noise, &cfg)).unwrap() {
            for r in &o.reports {
                // Loss estimates that are exactly zero can come out at −1e-16.
                prop_assert!((-1e-12..=top).contains(&r.lhs), "{} lhs {}", r.name, r.lhs);
                prop_assert!((-1e-12..=top).contains(&r.rhs), "{} rhs {}", r.name, r.rhs);
            }
        }
    }

    #[test]
    fn maxmixed_reduces_to_subspace_for_trivial_b(seed in any::<u64>(), extra in 0usize..3) {
        let (code, noise) = instance(seed, 1, extra);
        let cfg = quick(seed);
        let bench = Workbench::new(&code, &noise, &cfg).unwrap();
        let sub = bench.subspace().unwrap();
        let mm = bench.maxmixed().unwrap();
        let s = sub.report("subspace.transpose_near_optimal").unwrap();
        let m = mm.report("maxmixed.transpose_near_optimal").unwrap();
        prop_assert!((s.lhs - m.lhs).abs() <= 1e-9, "{} vs {}", s.lhs, m.lhs);
        prop_assert!((s.rhs - m.rhs).abs() <= 1e-9, "{} vs {}", s.rhs, m.rhs);
    }

    #[test]
    fn maximally_mixed_reference_matches_maxmixed(seed in any::<u64>(), extra in 0usize..2) {
        let (code, noise) = instance(seed, 2, extra);
        let cfg = quick(seed);
        let bench = Workbench::new(&code, &noise, &cfg).unwrap();
        let sd = bench.state_dependent(&Operator::identity(2).scale(0.5)).unwrap();
        let mm = bench.maxmixed().unwrap();
        let a = sd.report("state_dependent.transpose_near_optimal").unwrap().lhs;
        let b = mm.report("maxmixed.transpose_near_optimal").unwrap().lhs;
        prop_assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
    }

    #[test]
    fn delta_decreases_towards_full_depolarization(seed in any::<u64>()) {
        let qubit = SubsystemCode::trivial(2, 1).unwrap();
        let base = random_qubit_channel(seed);
        let opts = DeltaOptions { restarts: 16, mixed_samples: 200, seed, ..Default::default() };
        let mut prev = f64::INFINITY;
        for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let fb = KrausChannel::compose(&noise::depolarizing(s).unwrap(), &base).unwrap();
            let (code, pair_noise) = product_pair(&qubit, &noise::bit_flip(0.1).unwrap(), &fb).unwrap();
            let delta = estimate_delta(&code, &pair_noise, &opts).unwrap().delta;
            prop_assert!(delta <= prev + 2e-3, "s = {s}: {delta} > {prev}");
            prev = delta;
        }
        prop_assert!(prev <= 1e-9);
    }
}

#[test]
fn single_scenario_matches_run_all() {
    let (code, noise) = instance(17, 2, 1);
    let cfg = quick(17);
    let all = run_all(&inputs(&code, &noise, &cfg)).unwrap();
    let single = run_scenario(Scenario::MaxMixed, &inputs(&code, &noise, &cfg)).unwrap();
    let from_all = all.iter().find(|o| o.scenario == "maxmixed").unwrap();
    assert_eq!(values(std::slice::from_ref(from_all)), values(&[single]));
}
