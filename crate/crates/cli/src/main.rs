use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thzsim::config::ExperimentConfig;
use thzsim::sweep::{run_sweep, write_csv, CellResult};

#[derive(Parser)]
#[command(name = "thzsim", version, about = "Beam misalignment sweeps for indoor THz links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every cell of an experiment config and write one CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Directory receiving the CSV named by the config's `output` key.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// Added to every configured seed.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
}

const EXIT_INVALID: u8 = 1;
const EXIT_PARTIAL: u8 = 2;

fn exit_code(rows: &[CellResult]) -> ExitCode {
    if rows.iter().all(|r| r.outcome.is_ok()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_PARTIAL)
    }
}

fn run(config: &Path, out: &Path, workers: usize, seed_offset: u64) -> thzsim::Result<Vec<CellResult>> {
    let cfg = ExperimentConfig::load(config)?;
    if workers == 0 {
        return Err(thzsim::Error::Validation {
            key: "workers".into(),
            message: "must be >= 1".into(),
        });
    }
    let rows = run_sweep(&cfg, seed_offset, workers)?;
    fs::create_dir_all(out)?;
    let path = out.join(&cfg.output);
    let file = fs::File::create(&path).map_err(|e| thzsim::Error::Io(format!("{}: {e}", path.display())))?;
    write_csv(BufWriter::new(file), &cfg, seed_offset, &rows)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    eprintln!("wrote {} rows to {} ({failed} failed)", rows.len(), path.display());
    for r in rows.iter().filter(|r| r.outcome.is_err()) {
        let c = &r.cell;
        eprintln!(
            "cell beamwidth={} alpha={} strategy={} service={} seed={} failed: {}",
            c.beamwidth,
            c.alpha,
            c.strategy,
            c.service,
            c.seed,
            r.outcome.as_ref().unwrap_err()
        );
    }
    Ok(rows)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            seed_offset,
        } => match run(&config, &out, workers, seed_offset) {
            Ok(rows) => exit_code(&rows),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_INVALID)
            }
        },
    }
}
