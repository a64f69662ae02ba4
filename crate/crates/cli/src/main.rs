use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ucls::agents::AGENT_NAMES;
use ucls::envs::ENV_NAMES;
use ucls::harness::{run_experiment, run_sweep, write_outputs, write_sweep_summary, ExperimentConfig, Stat, SweepGrid};
use ucls::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_ALL_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "ucls", version, about = "Run exploration experiments and parameter sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a configuration over every cell of a parameter grid.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        /// Directory receiving `sweep.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List environment names.
    ListEnvs,
    /// List agent names.
    ListAgents,
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

fn out_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> PathBuf {
    flag.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("results"))
}

fn fmt(s: &Stat) -> String {
    format!("{:.4} ± {:.4}", s.mean, s.stderr)
}

fn execute(cmd: Command) -> Result<u8, Error> {
    match cmd {
        Command::ListEnvs => ENV_NAMES.iter().for_each(|n| println!("{n}")),
        Command::ListAgents => AGENT_NAMES.iter().for_each(|n| println!("{n}")),
        Command::Run { config, out, workers } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let dir = out_dir(out, &cfg);
            let result = run_experiment(&cfg, workers)?;
            write_outputs(&result, &dir)?;
            let s = &result.summary;
            println!("{} / {}: {} = {} over {} runs ({} failed)", s.env, s.agent, s.metric, fmt(&s.value), s.runs, s.failures);
            for f in &s.failed_runs {
                eprintln!("run {} failed: {}", f.run, f.error);
            }
            println!("wrote {}", dir.display());
            if result.all_failed() {
                return Ok(EXIT_ALL_FAILED);
            }
        }
        Command::Sweep { config, grid, out, workers } => {
            let cfg = ExperimentConfig::from_json(&read(&config)?)?;
            let grid = SweepGrid::from_json(&read(&grid)?)?;
            let path = out_dir(out, &cfg).join("sweep.csv");
            let result = run_sweep(&cfg, &grid, workers)?;
            write_sweep_summary(&result, &path)?;
            for row in &result.rows {
                let cell: Vec<String> = result.names.iter().zip(&row.values).map(|(k, v)| format!("{k}={v}")).collect();
                println!("{}: {} = {:.4} ± {:.4} ({} failed)", cell.join(" "), row.metric, row.mean, row.stderr, row.failures);
            }
            println!("wrote {}", path.display());
            if result.cells.iter().all(|c| c.all_failed()) {
                return Ok(EXIT_ALL_FAILED);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { EXIT_CONFIG } else { EXIT_FAILURE })
        }
    }
}
