//! `dronerad` command-line front end: simulation runs, dwell sweeps and
//! sizing calculators.

mod run;
mod size;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dronerad::atr::ClassifierConfig;
use dronerad::reference;
use dronerad::scenario::{load_scenario, Scenario};

/// Environment variable naming the default configuration directory.
pub const CONFIG_DIR_ENV: &str = "DRONERAD_CONFIG_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "dronerad",
    version,
    about = "Pulse-Doppler drone radar simulator and trade-study tool"
)]
struct Cli {
    /// Machine-readable CSV on stdout instead of aligned text.
    #[arg(long, global = true)]
    csv: bool,
    /// Directory for written artifacts.
    #[arg(long, global = true, default_value = ".")]
    output_dir: PathBuf,
    /// Override the scenario noise seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the classify-while-scan pipeline over a scenario.
    Run(run::RunArgs),
    /// Micro-Doppler visibility against CPI length.
    Sweep(run::SweepArgs),
    /// Radar-equation, latency and resolution calculators.
    Size {
        #[command(subcommand)]
        calc: size::SizeCommand,
    },
    /// Print a built-in reference scenario or the default classifier
    /// thresholds as JSON.
    Reference {
        #[arg(value_enum)]
        name: ReferenceName,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReferenceName {
    SixTarget,
    QuadRotor,
    Classifier,
}

/// Failure with a dedicated exit status.
#[derive(Debug)]
struct MissingPath(PathBuf);

impl std::fmt::Display for MissingPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "no such file: {}", self.0.display())
    }
}

impl std::error::Error for MissingPath {}

/// Resolve a config path: as given, then under `$DRONERAD_CONFIG_DIR`.
pub fn resolve(path: &Path) -> Result<PathBuf> {
    if path.exists() {
        return Ok(path.to_path_buf());
    }
    if path.is_relative() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let p = Path::new(&dir).join(path);
            if p.exists() {
                return Ok(p);
            }
        }
    }
    Err(MissingPath(path.to_path_buf()).into())
}

/// Scenario from a file, or a built-in one named `@six-target` / `@quad-rotor`.
pub fn scenario_from(spec: &Path, seed: Option<u64>) -> Result<Scenario> {
    let mut sc = match spec.to_str() {
        Some("@six-target") => reference::six_target_scenario(),
        Some("@quad-rotor") => reference::quad_rotor_scenario(),
        _ => {
            let path = resolve(spec)?;
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            load_scenario(&text).with_context(|| format!("scenario {}", path.display()))?
        }
    };
    if let Some(s) = seed {
        sc.noise_seed = s;
    }
    Ok(sc)
}

/// Classifier thresholds from `--classifier`, else `classifier.json` in
/// the config directory, else the defaults.
pub fn classifier_from(path: Option<&Path>) -> Result<ClassifierConfig> {
    let file = match path {
        Some(p) => Some(resolve(p)?),
        None => std::env::var_os(CONFIG_DIR_ENV)
            .map(|d| Path::new(&d).join("classifier.json"))
            .filter(|p| p.exists()),
    };
    match file {
        Some(p) => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            ClassifierConfig::from_json(&text).with_context(|| format!("classifier {}", p.display()))
        }
        None => Ok(ClassifierConfig::default()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => run::cmd_run(&args, &cli.output_dir, cli.seed, cli.csv),
        Command::Sweep(args) => run::cmd_sweep(&args, &cli.output_dir, cli.seed, cli.csv),
        Command::Size { calc } => {
            print!("{}", size::cmd_size(&calc, cli.csv)?);
            Ok(())
        }
        Command::Reference { name } => {
            let text = match name {
                ReferenceName::SixTarget => reference::six_target_scenario().to_json(),
                ReferenceName::QuadRotor => reference::quad_rotor_scenario().to_json(),
                ReferenceName::Classifier => {
                    let mut s = serde_json::to_string_pretty(&ClassifierConfig::default())?;
                    s.push('\n');
                    s
                }
            };
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<MissingPath>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

/// Fail early on a non-positive numeric flag.
pub fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        bail!("--{name} must be a positive number, got {v}")
    }
}
