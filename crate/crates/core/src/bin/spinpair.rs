use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spinpair::cli::{self, EXIT_NUMERIC, EXIT_OK};
use spinpair::verify::{report, Verifier};
use spinpair::{Error, Result, RunConfig};

#[derive(Parser)]
#[command(name = "spinpair", version, about = "Radical-ion-pair spin dynamics: master equations, trajectories, entropy diagnostics")]
struct Args {
    /// Worker threads for trajectory ensembles (0 = all cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Suppress progress messages on stderr.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation and write the diagnostics CSV.
    Evolve {
        config: PathBuf,
        /// Output CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a trajectory ensemble; writes the averaged diagnostics and an event log.
    Trajectories {
        config: PathBuf,
        /// Ensemble CSV (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Event log CSV (default: `<out stem>_events.csv` next to --out).
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Regenerate the datasets of one figure (1, 2, 3, 4, 7 or 8).
    Figure {
        id: u32,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run the oracle and ensemble self-check suite.
    Verify,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(args: &Args) -> Result<i32> {
    let note = |msg: String| {
        if !args.quiet {
            eprintln!("{msg}");
        }
    };
    match &args.command {
        Command::Evolve { config, out } => {
            let cfg = RunConfig::from_path(config)?;
            emit(out.as_deref(), &cli::evolve_csv(&cfg)?)?;
        }
        Command::Trajectories { config, out, events } => {
            let cfg = RunConfig::from_path(config)?;
            let output = cli::trajectories_csv(&cfg)?;
            emit(out.as_deref(), &output.ensemble_csv)?;
            match events.clone().or_else(|| out.as_deref().map(cli::default_events_path)) {
                Some(path) => {
                    std::fs::write(&path, &output.events_csv)?;
                    note(format!("events written to {}", path.display()));
                }
                None => note("event log not written (pass --events or --out)".into()),
            }
        }
        Command::Figure { id, out } => {
            for path in cli::write_figure(*id, out)? {
                note(format!("wrote {}", path.display()));
            }
        }
        Command::Verify => {
            let checks = Verifier::default().run();
            print!("{}", report(&checks));
            if checks.iter().any(|c| !c.passed) {
                return Ok(EXIT_NUMERIC);
            }
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.threads).build();
    let result = match pool {
        Ok(pool) => pool.install(|| run(&args)),
        Err(e) => Err(Error::Config(format!("thread pool: {e}"))),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("{}", cli::failure_line(&err));
            ExitCode::from(cli::exit_code(&err) as u8)
        }
    }
}
