use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dawkit::project::commands::{cmd_check_sum, cmd_pair, cmd_render, CliError, PairOptions};
use dawkit::project::pair::Weights;
use dawkit::project::Overrides;

/// Offline renderer for dawkit project files.
#[derive(Parser)]
#[command(name = "dawkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a project, writing one float32 WAV per recorded node.
    Render {
        project: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Engine sample rate, overriding the project.
        #[arg(long)]
        sr: Option<f64>,
        /// Block size in frames, overriding the project.
        #[arg(long)]
        block: Option<usize>,
    },
    /// Rank a cappella / instrumental pairings by tempo and key distance.
    Pair {
        #[arg(long)]
        acapellas: PathBuf,
        #[arg(long)]
        instrumentals: PathBuf,
        /// Write one mashup project per pairing into this directory.
        #[arg(long)]
        emit_projects: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        w_tempo: f64,
        #[arg(long, default_value_t = 1.0)]
        w_key: f64,
    },
    /// Check that recorded buses equal the weighted sum of their recorded
    /// inputs, rendering the project or reading previously rendered WAVs.
    CheckSum {
        project: PathBuf,
        /// Directory holding `<node>.wav` files from `dawkit render`.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Render {
            project,
            out,
            sr,
            block,
        } => {
            let overrides = Overrides {
                sample_rate: sr,
                block_size: block,
            };
            for path in cmd_render(&project, &out, overrides)? {
                println!("{}", path.display());
            }
        }
        Command::Pair {
            acapellas,
            instrumentals,
            emit_projects,
            w_tempo,
            w_key,
        } => {
            let options = PairOptions {
                weights: Weights {
                    tempo: w_tempo,
                    key: w_key,
                },
                emit_projects,
            };
            let report = cmd_pair(&acapellas, &instrumentals, &options)?;
            print!("{}", report.table());
            for p in &report.projects {
                println!("wrote {}", p.display());
            }
        }
        Command::CheckSum { project, dir } => {
            let checks = cmd_check_sum(&project, dir.as_deref(), Overrides::default())?;
            let mut failed = Vec::new();
            for c in &checks {
                let status = if c.passed() { "ok" } else { "MISMATCH" };
                println!(
                    "{}: {} stems, max abs error {:e} {status}",
                    c.bus,
                    c.stems.len(),
                    c.max_error
                );
                if !c.passed() {
                    failed.push(c.bus.clone());
                }
            }
            if !failed.is_empty() {
                return Err(CliError::Invalid(format!("bus/stem mismatch in {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = e.exit_code();
            eprintln!("error: {:#}", anyhow::Error::new(e));
            ExitCode::from(code as u8)
        }
    }
}
