//! `aqec`: run bound scenarios on gallery or file inputs and print reports.

mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aqec::channel::channel_from_json;
use aqec::code::{code_from_json, gallery, GalleryParams, ProductFactors, GALLERY_NAMES};
use aqec::scenarios::{run_all, run_scenario, validate, RunInputs, Scenario};
use aqec::{KrausChannel, Operator, ScenarioOutcome, SubsystemCode};
use clap::{Parser, Subcommand};

use config::{parse_tol_pair, rewrite_tol_flags, FileConfig, FlagConfig, Format, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "aqec", version, about = "Check approximate error-correction bounds on subsystem codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (or all of them) and report every bound.
    Run(Box<RunArgs>),
    /// Describe a gallery entry or a scenario.
    Describe {
        name: String,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Gallery name or path to a code JSON file.
    #[arg(long)]
    code: Option<String>,
    /// Gallery name or path to a channel JSON file (defaults to the code's gallery noise).
    #[arg(long)]
    noise: Option<String>,
    /// Scenario name or `all`.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance override, also accepted as `--tol.NAME VALUE`.
    #[arg(long = "tol", value_name = "NAME=VALUE", value_parser = parse_tol_pair)]
    tol: Vec<(String, f64)>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Random restarts of every maximization.
    #[arg(long)]
    restarts: Option<usize>,
    /// Damping parameter of `ad4`.
    #[arg(long)]
    gamma: Option<f64>,
    /// Bit-flip probability of `bitflip3` and `gauge422`.
    #[arg(long)]
    p: Option<f64>,
    /// Gauge error probability of `gauge422`.
    #[arg(long)]
    gauge_p: Option<f64>,
    /// `|0>` population of the `b_eraser` target state.
    #[arg(long)]
    tau0: Option<f64>,
    /// A factor of `product`, e.g. `bitflip3:0.1`.
    #[arg(long)]
    factor_a: Option<String>,
    /// B factor of `product`, e.g. `depolarizing:0.5`.
    #[arg(long)]
    factor_b: Option<String>,
    /// JSON density matrix of the fixed B state for `state_dependent`.
    #[arg(long)]
    phi_b: Option<PathBuf>,
}

impl RunArgs {
    fn into_flags(self) -> (Option<PathBuf>, FlagConfig) {
        let flags = FlagConfig {
            code: self.code,
            noise: self.noise,
            scenario: self.scenario,
            seed: self.seed,
            restarts: self.restarts,
            out: self.out,
            format: self.format,
            phi_b: self.phi_b,
            tolerances: self.tol,
            p: self.p,
            gamma: self.gamma,
            gauge_p: self.gauge_p,
            tau0: self.tau0,
            factor_a: self.factor_a,
            factor_b: self.factor_b,
        };
        (self.config, flags)
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.tag());
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<ExitCode, CliError> {
    let args = rewrite_tol_flags(std::env::args().collect())?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return Ok(ExitCode::from(code));
        }
    };
    match cli.command {
        Command::Describe { name } => {
            println!("{}", describe(&name)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let (config_path, flags) = args.into_flags();
            let file = match config_path {
                Some(p) => FileConfig::load(&p)?,
                None => FileConfig::default(),
            };
            let env_seed = std::env::var("AQEC_SEED").ok();
            let cfg = RunConfig::resolve(flags, file, env_seed.as_deref())?;
            run(&cfg)
        }
    }
}

struct Inputs {
    code: SubsystemCode,
    noise: KrausChannel,
    factors: Option<ProductFactors>,
    phi_b: Option<Operator>,
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn is_gallery(name: &str) -> bool {
    GALLERY_NAMES.contains(&name)
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let params: &GalleryParams = &cfg.gallery;
    let (code, gallery_entry) = if is_gallery(&cfg.code) {
        let entry = gallery(&cfg.code, params)?;
        (entry.code.clone(), Some(entry))
    } else {
        let path = Path::new(&cfg.code);
        let code = code_from_json(&read(path)?).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        (code, None)
    };

    let (noise, factors) = if is_gallery(&cfg.noise) {
        match gallery_entry {
            Some(entry) if entry.name == cfg.noise => (entry.noise, entry.factors),
            Some(entry) => {
                return Err(CliError::Usage(format!(
                    "gallery noise '{}' is defined on its own code, not on '{}'; pass a channel file instead",
                    cfg.noise, entry.name
                )))
            }
            None => {
                return Err(CliError::Usage(format!(
                    "gallery noise '{}' cannot be combined with a code file; pass a channel file",
                    cfg.noise
                )))
            }
        }
    } else {
        let path = Path::new(&cfg.noise);
        let ch = channel_from_json(&read(path)?).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
        if ch.dim_in() != code.d_h() {
            return Err(CliError::Schema(format!(
                "{}: channel acts on dimension {}, the code space has dimension {}",
                path.display(),
                ch.dim_in(),
                code.d_h()
            )));
        }
        (ch.restrict(&code.projector())?, None)
    };

    let phi_b = match &cfg.phi_b {
        Some(path) => {
            let text = read(path)?;
            let op: Operator = serde_json::from_str(&text)
                .map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))?;
            Some(op)
        }
        None => None,
    };
    Ok(Inputs { code, noise, factors, phi_b })
}

fn run(cfg: &RunConfig) -> Result<ExitCode, CliError> {
    let selected = match cfg.scenario.as_str() {
        "all" => None,
        name => Some(Scenario::parse(name)?),
    };
    let inputs = load_inputs(cfg)?;
    let run_inputs = RunInputs {
        code: &inputs.code,
        noise: &inputs.noise,
        factors: inputs.factors.as_ref(),
        phi_b: inputs.phi_b.as_ref(),
        cfg: &cfg.scenario_config,
    };

    let outcomes: Vec<ScenarioOutcome> = match selected {
        Some(s) => {
            validate(s, &run_inputs)?;
            vec![run_scenario(s, &run_inputs)?]
        }
        None => run_all(&run_inputs)?,
    };

    let text = output::render(cfg, &outcomes);
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            eprintln!("{}", output::summary(&outcomes));
        }
        None => print!("{text}"),
    }
    let ok = outcomes.iter().all(ScenarioOutcome::all_satisfied);
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn describe(name: &str) -> Result<String, CliError> {
    if is_gallery(name) {
        let entry = gallery(name, &GalleryParams::default())?;
        let c = &entry.code;
        let mut out = format!("{}: d_a={}, d_b={}, d_h={}, N={}", entry.name, c.d_a(), c.d_b(), c.d_h(), entry.noise.len());
        if !entry.parameters.is_empty() {
            let params: Vec<String> = entry.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("\nparameters: {}", params.join(", ")));
        }
        return Ok(out);
    }
    match Scenario::parse(name) {
        Ok(s) => Ok(format!("{}: {}", s.name(), s.description())),
        Err(_) => Err(CliError::Usage(format!(
            "unknown name '{name}' (gallery: {}; scenarios: {})",
            GALLERY_NAMES.join(", "),
            Scenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
        ))),
    }
}
