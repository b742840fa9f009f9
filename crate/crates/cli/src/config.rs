//! Run configuration: defaults, then the TOML file, then command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aqec::code::{FactorSpec, GalleryParams};
use aqec::scenarios::{Samples, ScenarioConfig, Tolerances};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Human,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub code: Option<String>,
    pub noise: Option<String>,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    /// Path to a JSON operator for the fixed B state.
    pub phi_b: Option<PathBuf>,
    #[serde(default)]
    pub gallery: GalleryFile,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub samples: Option<Samples>,
    pub seesaw_rounds: Option<usize>,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GalleryFile {
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub gauge_p: Option<f64>,
    pub tau0: Option<f64>,
    pub factor_a: Option<String>,
    pub factor_b: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Schema(format!("config {}: {e}", path.display())))
    }
}

/// Flag values; `None` means "not given on the command line".
#[derive(Debug, Default)]
pub struct FlagConfig {
    pub code: Option<String>,
    pub noise: Option<String>,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub restarts: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub phi_b: Option<PathBuf>,
    pub tolerances: Vec<(String, f64)>,
    pub p: Option<f64>,
    pub gamma: Option<f64>,
    pub gauge_p: Option<f64>,
    pub tau0: Option<f64>,
    pub factor_a: Option<String>,
    pub factor_b: Option<String>,
}

/// Fully resolved configuration of one `run`.
#[derive(Debug)]
pub struct RunConfig {
    pub code: String,
    pub noise: String,
    pub scenario: String,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub phi_b: Option<PathBuf>,
    pub gallery: GalleryParams,
    pub scenario_config: ScenarioConfig,
}

impl RunConfig {
    /// Flags override the file, which overrides the defaults. The seed falls
    /// back to `env_seed` (the `AQEC_SEED` variable) when neither gives one.
    pub fn resolve(flags: FlagConfig, file: FileConfig, env_seed: Option<&str>) -> Result<Self, CliError> {
        let code = flags
            .code
            .or(file.code)
            .ok_or_else(|| CliError::Usage("no code given: pass --code <gallery name or file>".into()))?;
        let noise = flags.noise.or(file.noise).unwrap_or_else(|| code.clone());
        let scenario = flags.scenario.or(file.scenario).unwrap_or_else(|| "all".into());

        let seed = match flags.seed.or(file.seed) {
            Some(s) => s,
            None => match env_seed {
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Usage(format!("AQEC_SEED='{v}' is not an unsigned integer")))?,
                None => 0,
            },
        };

        let mut sc = ScenarioConfig::with_seed(seed);
        if let Some(r) = flags.restarts.or(file.restarts) {
            if r == 0 {
                return Err(CliError::Usage("--restarts must be at least 1".into()));
            }
            sc.restarts = r;
        }
        if let Some(s) = file.samples {
            sc.samples = s;
        }
        if let Some(r) = file.seesaw_rounds {
            sc.seesaw_rounds = r;
        }
        if let Some(m) = file.max_iters {
            sc.max_iters = m;
        }
        let mut tol = Tolerances::default();
        for (name, value) in file.tolerances.iter().map(|(k, v)| (k.as_str(), *v)).chain(flags.tolerances.iter().map(|(k, v)| (k.as_str(), *v))) {
            tol.set(name, value)?;
        }
        sc.tolerances = tol;

        let g = file.gallery;
        let mut gallery = GalleryParams::default();
        if let Some(v) = flags.p.or(g.p) {
            gallery.p = v;
        }
        if let Some(v) = flags.gamma.or(g.gamma) {
            gallery.gamma = v;
        }
        if let Some(v) = flags.gauge_p.or(g.gauge_p) {
            gallery.gauge_p = v;
        }
        if let Some(v) = flags.tau0.or(g.tau0) {
            gallery.tau0 = v;
        }
        if let Some(s) = flags.factor_a.or(g.factor_a) {
            gallery.factor_a = FactorSpec::parse(&s)?;
        }
        if let Some(s) = flags.factor_b.or(g.factor_b) {
            gallery.factor_b = FactorSpec::parse(&s)?;
        }

        Ok(RunConfig {
            code,
            noise,
            scenario,
            out: flags.out.or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Human),
            phi_b: flags.phi_b.or(file.phi_b),
            gallery,
            scenario_config: sc,
        })
    }
}

/// Rewrites `--tol.NAME VALUE` and `--tol.NAME=VALUE` into `--tol NAME=VALUE`,
/// which clap can parse.
pub fn rewrite_tol_flags(args: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut out = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(rest) = arg.strip_prefix("--tol.") else {
            out.push(arg);
            continue;
        };
        let pair = match rest.split_once('=') {
            Some((name, value)) => format!("{name}={value}"),
            None => {
                let value = it
                    .next()
                    .ok_or_else(|| CliError::Usage(format!("--tol.{rest} needs a value")))?;
                format!("{rest}={value}")
            }
        };
        out.push("--tol".into());
        out.push(pair);
    }
    Ok(out)
}

pub fn parse_tol_pair(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got '{s}'"))?;
    let v: f64 = value.parse().map_err(|_| format!("tolerance '{value}' is not a number"))?;
    Ok((name.to_string(), v))
}
