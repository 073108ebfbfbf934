use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use openchannel::config::parse_config;
use openchannel::run::{run, Subcommand, EXIT_CONFIG};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Coupled flow and heat solve.
    Solve,
    /// Solve, then estimate constants and evaluate the smallness and uniqueness conditions.
    Certify,
    /// Corner spectrum of the wall/open-end junction.
    Spectrum,
    /// Manufactured-solution convergence studies.
    Mms,
}

/// Steady buoyancy-driven channel flow with viscous heating.
#[derive(Debug, Parser)]
#[command(name = "openchannel", version)]
struct Cli {
    command: Command,
    /// Line-based configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `[output] dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed for constant estimation (overrides `[certify] seed`).
    #[arg(long)]
    seed: Option<u64>,
}

fn threads_from_env() -> Result<(), String> {
    let Ok(v) = std::env::var("OPENCHANNEL_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("OPENCHANNEL_THREADS must be a positive integer, got '{v}'"))?;
    if n == 0 {
        return Err("OPENCHANNEL_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = |c: i32| ExitCode::from(c as u8);
    if let Err(m) = threads_from_env() {
        eprintln!("error: {m}");
        return code(EXIT_CONFIG);
    }
    let text = match fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return code(EXIT_CONFIG);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            eprintln!("{}: invalid configuration", cli.config.display());
            for e in &errors.0 {
                eprintln!("  {e}");
            }
            return code(EXIT_CONFIG);
        }
    };
    if let Some(out) = cli.out {
        config.output.dir = out;
    }
    if let Some(seed) = cli.seed {
        config.certify.seed = seed;
    }
    let sub = match cli.command {
        Command::Solve => Subcommand::Solve,
        Command::Certify => Subcommand::Certify,
        Command::Spectrum => Subcommand::Spectrum,
        Command::Mms => Subcommand::Mms,
    };
    let outcome = run(sub, &config);
    for path in &outcome.artifacts {
        println!("wrote {}", path.display());
    }
    if outcome.code == 0 {
        println!("{}", outcome.message);
    } else {
        eprintln!("error (exit {}): {}", outcome.code, outcome.message);
    }
    code(outcome.code)
}
