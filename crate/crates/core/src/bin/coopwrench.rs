use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use coopwrench::config::{self, load_scenario, to_toml};
use coopwrench::error::{ConfigError, RunError};
use coopwrench::export::write_all;
use coopwrench::runner::run_scenario;
use coopwrench::Mode;

const EXIT_IO: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    version,
    about = "Cooperative manipulator task capability along a trajectory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K0/K1 along the scenario trajectory and write result files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// baseline | improved-fixed-alpha | improved-joint | both
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        cycles: Option<u32>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a built-in scenario file (stdout unless --out is given).
    Reference {
        #[arg(long, value_enum, default_value_t = Variant::Circle)]
        variant: Variant,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Circle,
    StaticHold,
    Asymmetric,
}

fn config_failure(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        ConfigError::Io { .. } => ExitCode::from(EXIT_IO),
        _ => ExitCode::from(EXIT_INVALID),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Validate { config } => match load_scenario(&config) {
            Ok(c) => {
                println!(
                    "{}: ok ({} manipulators, mode {})",
                    config.display(),
                    c.manipulators.len(),
                    c.mode.as_str()
                );
                ExitCode::SUCCESS
            }
            Err(e) => config_failure(&e),
        },
        Command::Reference { variant, out } => {
            let scenario = match variant {
                Variant::Circle => config::reference_scenario(),
                Variant::StaticHold => config::static_hold_scenario(),
                Variant::Asymmetric => config::asymmetric_scenario(),
            };
            let text = to_toml(&scenario);
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(EXIT_IO);
                    }
                    ExitCode::SUCCESS
                }
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
            }
        }
        Command::Run {
            config,
            mode,
            dt,
            cycles,
            out,
        } => {
            let mut scenario = match load_scenario(&config) {
                Ok(c) => c,
                Err(e) => return config_failure(&e),
            };
            if let Some(m) = mode {
                scenario.mode = m;
            }
            if let Some(dt) = dt {
                scenario.dt = dt;
            }
            if let Some(n) = cycles {
                scenario.cycles = n;
            }
            let result = match run_scenario(&scenario) {
                Ok(r) => r,
                Err(RunError::Config(e)) => return config_failure(&e),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_RUNTIME);
                }
            };
            let files = match write_all(&result, &out) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(EXIT_IO);
                }
            };
            let s = &result.summary;
            println!("mode: {}", scenario.mode.as_str());
            println!("samples: {}", result.samples.len());
            if let (Some(k0), Some(k1)) = (s.k0, s.k1) {
                println!(
                    "K0 min/mean/max: {:.6} {:.6} {:.6}",
                    k0.min, k0.mean, k0.max
                );
                println!(
                    "K1 min/mean/max: {:.6} {:.6} {:.6}",
                    k1.min, k1.mean, k1.max
                );
            }
            if let Some(p) = s.improvement_percent {
                println!("improvement: {p:.4} %");
            }
            println!("flagged steps: {}", s.flagged_steps);
            println!(
                "wrote {}, {}, {}",
                files.csv.display(),
                files.json.display(),
                files.plot.display()
            );
            ExitCode::SUCCESS
        }
    }
}
