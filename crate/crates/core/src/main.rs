use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ulam_core::cli::config::Mode;
use ulam_core::cli::run::EXIT_CONFIG;
use ulam_core::cli::{execute, parse_config, RunConfig};

/// Certified stabilization of approximate solutions of f(φ(x)) = g(x)·f(x).
#[derive(Parser)]
#[command(name = "ulam", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover the exact solution near an approximate one at each point.
    Stabilize { config: PathBuf },
    /// Report the defect of the configured function at each point.
    Verify { config: PathBuf },
    /// Run the mode named in the config (stabilize by default).
    Run { config: PathBuf },
    /// Built-in scenarios.
    Demo {
        #[command(subcommand)]
        scenario: Demo,
    },
}

#[derive(Subcommand)]
enum Demo {
    /// digamma with f = ψ + 2^(-x) and budget 2^(-x-1).
    Digamma {
        #[arg(long, default_value_t = 1e-9, allow_negative_numbers = true)]
        tol: f64,
        /// Comma-separated evaluation points.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 3.7, 10.0])]
        points: Vec<f64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

fn load(path: &PathBuf, mode: Option<Mode>) -> Result<RunConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut cfg = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(mode) = mode {
        cfg.mode = mode;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG as u8 } else { 0 });
        }
    };
    let cfg = match cli.command {
        Command::Stabilize { config } => load(&config, Some(Mode::Stabilize)),
        Command::Verify { config } => load(&config, Some(Mode::Verify)),
        Command::Run { config } => load(&config, None),
        Command::Demo { scenario: Demo::Digamma { tol, points, threads } } => {
            let mut cfg = RunConfig::digamma_demo(points, tol);
            cfg.threads = threads;
            if tol > 0.0 {
                Ok(cfg)
            } else {
                Err("`tol`: tol must be positive".to_string())
            }
        }
    };
    let mut cfg = match cfg {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    if let Err(e) = cfg.apply_env(|k| std::env::var(k).ok()) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_CONFIG as u8);
    }
    match execute(&cfg) {
        Ok(report) => {
            print!("{}", report.csv);
            eprintln!("{}", report.summary);
            ExitCode::from(report.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
