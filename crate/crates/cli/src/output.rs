use aqec::report::to_csv;
use aqec::ScenarioOutcome;
use serde::Serialize;

use crate::config::{Format, RunConfig};

#[derive(Serialize)]
struct JsonReport<'a> {
    code: &'a str,
    noise: &'a str,
    scenario: &'a str,
    seed: u64,
    all_satisfied: bool,
    outcomes: &'a [ScenarioOutcome],
}

pub fn render(cfg: &RunConfig, outcomes: &[ScenarioOutcome]) -> String {
    match cfg.format {
        Format::Json => {
            let report = JsonReport {
                code: &cfg.code,
                noise: &cfg.noise,
                scenario: &cfg.scenario,
                seed: cfg.scenario_config.seed,
                all_satisfied: outcomes.iter().all(ScenarioOutcome::all_satisfied),
                outcomes,
            };
            let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => to_csv(outcomes),
        Format::Human => human(cfg, outcomes),
    }
}

fn human(cfg: &RunConfig, outcomes: &[ScenarioOutcome]) -> String {
    let mut out = format!("code {}, noise {}, seed {}\n", cfg.code, cfg.noise, cfg.scenario_config.seed);
    for o in outcomes {
        out.push('\n');
        match &o.skipped {
            Some(reason) => out.push_str(&format!("[{}] skipped: {reason}\n", o.scenario)),
            None => {
                out.push_str(&format!("[{}]\n", o.scenario));
                for r in &o.reports {
                    out.push_str("  ");
                    out.push_str(&r.human_line());
                    out.push('\n');
                }
            }
        }
    }
    out.push('\n');
    out.push_str(&summary(outcomes));
    out.push('\n');
    out
}

pub fn summary(outcomes: &[ScenarioOutcome]) -> String {
    let enforced: Vec<_> = outcomes.iter().flat_map(|o| &o.reports).filter(|r| r.enforced()).collect();
    let violated = enforced.iter().filter(|r| !r.satisfied).count();
    let skipped = outcomes.iter().filter(|o| o.skipped.is_some()).count();
    format!(
        "{} bounds checked, {violated} violated, {skipped} scenario(s) skipped",
        enforced.len()
    )
}
