use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use qnormal_cli::{parse_config, run, CliError, Format, Mode, Overrides, ScenarioConfig};

/// Q-metric experiments on non-hermitian diagonalizable Hamiltonians.
#[derive(Debug, Parser)]
#[command(name = "qnormal", version)]
struct Args {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON scenario file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    hbar: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    format: Option<Format>,
    /// Exit nonzero when any reported invariant fails its tolerance.
    #[arg(long, global = true)]
    strict: bool,
}

fn load(args: &Args) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config(&text)?
        }
        None => ScenarioConfig::default(),
    };
    cfg.apply(&Overrides {
        mode: Some(args.mode),
        seed: args.seed,
        hbar: args.hbar,
        out: args.out.clone(),
        format: args.format,
    });
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let start = Instant::now();
    let result = load(&args).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("check failed: {} = {:.3e} > {:.1e}", c.name, c.value, c.tolerance);
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "{} checks, {} failed, {:.3} s",
                report.checks.len(),
                report.failures(),
                start.elapsed().as_secs_f64()
            );
            if args.strict && report.failures() > 0 {
                let err = CliError::Strict(report.failures());
                eprintln!("error: {err}");
                return ExitCode::from(err.exit_code() as u8);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
