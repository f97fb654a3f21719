use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use relbundle_cli::{check, green, parse_config, reduce, run, CliError, ConfigError, RunConfig};

#[derive(Parser)]
#[command(name = "relbundle", version, about = "Relativistic wave equations on a 1D lattice, in bundle form")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; overrides `[output] directory`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized property suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Multiplies every check tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the configured state and write report and state CSVs.
    Run { config: PathBuf },
    /// Run an invariant suite (algebra, grid, reduction, evolution, bundle, green, all).
    Check { suite: String },
    /// Build the retarded kernel between time.start and time.end and export it.
    Green { config: PathBuf },
    /// Dump the first-order Hamiltonian structure of the configured equation.
    Reduce { config: PathBuf },
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ConfigError::new(0, 0, format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| {
        ConfigError::new(e.line, e.column, format!("{}: {}", path.display(), e.message)).into()
    })
}

fn out_dir(cli: &Cli, config: &RunConfig) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.directory))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tolerance_scale.is_finite() && cli.tolerance_scale > 0.0) {
        return Err(ConfigError::new(0, 0, "--tolerance-scale must be positive").into());
    }
    match &cli.command {
        Command::Run { config } => {
            let config = load(config)?;
            let report = run(&config, &out_dir(cli, &config))?;
            print!("{}", report.summary());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Check { suite } => {
            let lines = check(suite, cli.seed, cli.tolerance_scale)?;
            for l in &lines {
                println!("{l}");
            }
            let failed = lines.iter().filter(|l| !l.passed()).count();
            if failed > 0 {
                return Err(CliError::Invariant { failed });
            }
        }
        Command::Green { config } => {
            let config = load(config)?;
            let report = green(&config, &out_dir(cli, &config), cli.tolerance_scale)?;
            let (tp, t) = report.kernel.times();
            println!(
                "{} kernel t' = {tp}, t = {t}: duality residual {:.3e} (tolerance {:.1e})",
                report.kernel.equation(),
                report.duality_residual,
                report.tolerance
            );
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            if !(report.duality_residual <= report.tolerance) {
                return Err(CliError::Invariant { failed: 1 });
            }
        }
        Command::Reduce { config } => {
            let config = load(config)?;
            let (structure, files) = reduce(&config, &out_dir(cli, &config))?;
            print!("{structure}");
            for f in &files {
                println!("wrote {}", f.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
