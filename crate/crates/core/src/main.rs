use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fading_bc::cli::{
    cmd_analyze, cmd_verify, power_grid, sweep, to_canonical_json, write_sweep_csv, CliError,
    Config, RateUnit, VerifySource,
};

#[derive(Parser)]
#[command(
    name = "fading-bc",
    version,
    about = "Secrecy-rate bounds for a fading broadcast channel with a constant eavesdropper"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyze one channel and print a canonical JSON record.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Write the record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report rates in nats instead of bits.
        #[arg(long)]
        nats: bool,
    },
    /// Analyze the channel over a grid of power constraints; CSV on stdout.
    Sweep(SweepArgs),
    /// Check every closed form against its numerical oracle.
    Verify {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        config: Option<PathBuf>,
        /// Number of random channels to verify.
        #[arg(long, requires = "seed")]
        random: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    q_min: f64,
    #[arg(long)]
    q_max: f64,
    #[arg(long)]
    points: usize,
    /// Space the grid logarithmically.
    #[arg(long)]
    log: bool,
}

fn write_output(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.display().to_string(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Analyze { config, out, nats } => {
            let units = if nats { RateUnit::Nats } else { RateUnit::Bits };
            let record = cmd_analyze(&Config::load(&config)?, units)?;
            write_output(out.as_ref(), &record.to_json())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let config = Config::load(&args.config)?;
            let grid = power_grid(args.q_min, args.q_max, args.points, args.log)?;
            let rows = sweep(&config, &grid);
            write_sweep_csv(&rows, std::io::stdout().lock())
                .map_err(|e| CliError::Sweep(format!("cannot write CSV: {e}")))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            config,
            random,
            seed,
        } => {
            let source = match (config, random) {
                (Some(path), _) => VerifySource::Config(Config::load(&path)?),
                (None, Some(trials)) => VerifySource::Random {
                    trials,
                    seed: seed.expect("clap enforces --seed with --random"),
                },
                (None, None) => unreachable!("clap requires --config or --random"),
            };
            let summary = cmd_verify(&source)?;
            let value = serde_json::to_value(&summary).expect("summary serializes");
            write_output(None, &to_canonical_json(&value))?;
            Ok(if summary.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprint!("{}", e.to_json_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
