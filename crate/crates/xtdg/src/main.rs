use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use xtdg::runner::{
    run_full, run_probe, run_snapshot, run_sparse, single_mesh, write_probe_file,
    write_snapshot_file, write_study,
};
use xtdg::{meshio, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "xtdg",
    version,
    about = "Space-time DG solver for the 2D acoustic wave system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Full,
    Sparse,
}

#[derive(Subcommand)]
enum Command {
    /// Convergence study over the configured levels.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value = "full")]
        mode: Scheme,
    },
    /// Point samples of the solution at a slab boundary.
    Snapshot {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        grid: usize,
    },
    /// Signal recorded on the element containing the probe point.
    Probe {
        #[arg(long)]
        config: PathBuf,
    },
    /// Writes the spatial mesh of the last configured level.
    Mesh {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, mode } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let dir = cfg.output_dir();
            let (rows, tag) = match mode {
                Scheme::Full => (run_full(&cfg)?, "full"),
                Scheme::Sparse => {
                    let levels = run_sparse(&cfg)?;
                    for s in levels.iter().filter(|s| !s.within(3.0)) {
                        eprintln!(
                            "warning: sparse level {} error exceeds 3x the largest detail error",
                            s.row.level
                        );
                    }
                    (levels.into_iter().map(|s| s.row).collect(), "sparse")
                }
            };
            print!("{}", xtdg::tables::convergence_markdown(&rows));
            let path = write_study(&dir, &cfg, tag, &rows)?;
            eprintln!("wrote {}", path.display());
        }
        Command::Snapshot { config, t, grid } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let samples = run_snapshot(&cfg, t, grid)?;
            let path = write_snapshot_file(&cfg.output_dir(), &cfg, t, &samples)?;
            eprintln!("wrote {} samples to {}", samples.len(), path.display());
        }
        Command::Probe { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let (series, check) = run_probe(&cfg)?;
            let path = write_probe_file(&cfg.output_dir(), &cfg, &series)?;
            eprintln!("wrote {}", path.display());
            println!(
                "element {}: baseline {:.3e}, {} lobes above {}x baseline",
                series.element, check.baseline, check.lobes, cfg.probe_factor
            );
            if !check.passed(cfg.probe_min_lobes) {
                return Err(CliError::Gate(format!(
                    "expected at least {} signal lobes, found {}",
                    cfg.probe_min_lobes, check.lobes
                )));
            }
        }
        Command::Mesh { config, output } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let text = meshio::dump_mesh(&single_mesh(&cfg, &cfg.problem())?);
            match output {
                Some(path) => std::fs::write(&path, text).map_err(|e| CliError::Io(path, e))?,
                None => print!("{text}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
