use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nls_virial_cli::cache::cache_dir;
use nls_virial_cli::run::{run, run_file};
use nls_virial_cli::scenario::{Experiment, GridSpec, Options, ParamsSpec, Scenario, SCHEMA};
use nls_virial_cli::Failure;
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "nls-virial", version, about = "Ground states, dichotomy and virial bounds for the focusing power NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenario files.
    Run {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Output directory; with several scenarios each gets DIR/<file stem>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Scenarios run concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Solve (or load from the cache) a ground state and export it.
    Groundstate {
        #[arg(long = "N")]
        dim: usize,
        #[arg(long)]
        p: f64,
        /// Half-length of the periodic box.
        #[arg(long = "L")]
        half_len: f64,
        /// Grid points per axis (a power of two).
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn report(label: &str, r: Result<nls_virial_cli::run::Summary, Failure>) -> i32 {
    match r {
        Ok(s) => {
            println!("{label}: {} ({})", s.headline, s.out_dir.display());
            0
        }
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cache = cache_dir();
    let code = match cli.command {
        Command::Run { scenarios, out, jobs } => {
            let batch = scenarios.len() > 1;
            let target = |path: &PathBuf| {
                out.as_ref().map(|d| {
                    if batch {
                        d.join(path.file_stem().unwrap_or_default())
                    } else {
                        d.clone()
                    }
                })
            };
            let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("thread pool: {e}");
                    return ExitCode::from(1);
                }
            };
            let results: Vec<_> = pool.install(|| {
                scenarios.par_iter().map(|p| run_file(p, target(p).as_deref(), &cache)).collect()
            });
            scenarios
                .iter()
                .zip(results)
                .map(|(p, r)| report(&p.display().to_string(), r))
                .max()
                .unwrap_or(0)
        }
        Command::Groundstate { dim, p, half_len, points, out } => {
            let scenario = Scenario {
                schema: SCHEMA,
                params: ParamsSpec { dim, p },
                grid: GridSpec { half_len, points },
                initial_data: None,
                experiment: Experiment::Groundstate,
                options: Options::default(),
                output: Some(out.clone()),
            };
            let text = serde_json::to_string_pretty(&scenario).expect("scenario serializes");
            let r = nls_virial_cli::scenario::parse(&text, std::path::Path::new("<arguments>"))
                .and_then(|v| run(&v, &out, &cache));
            report("groundstate", r)
        }
    };
    ExitCode::from(code as u8)
}
