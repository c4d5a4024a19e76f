use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use stablelim::harness::{self, canned_experiments, ExperimentConfig, HarnessError};
use stablelim::Verdict;

#[derive(Parser)]
#[command(
    name = "stablelim",
    version,
    about = "Monte Carlo checks of stable limit theorems for heavy-tailed sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its reports and curves.
    Run {
        config: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Override the output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and check a configuration without running it.
    Validate { config: PathBuf },
    /// List the canned experiments.
    ListExperiments {
        /// Also write each canned configuration as `<name>.json` here.
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Config {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_json(&text)
}

fn fail(err: HarnessError) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        HarnessError::Config { .. } => ExitCode::from(EXIT_CONFIG),
        _ => ExitCode::from(EXIT_FAILURE),
    }
}

fn run(
    path: &Path,
    seed: Option<u64>,
    reps: Option<usize>,
    out_dir: Option<PathBuf>,
    workers: Option<usize>,
) -> ExitCode {
    let mut config = match load(path) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(r) = reps {
        config.replications = r;
    }
    if let Some(dir) = out_dir {
        config.output_dir = dir;
    }
    if let Err(e) = config.validate() {
        return fail(e);
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        pool = pool.num_threads(w);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let summary = match pool.install(|| harness::run(&config)) {
        Ok(s) => s,
        Err(e) => return fail(e),
    };
    for r in &summary.reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let reference = r.reference.map_or("-".to_string(), |x| format!("{x:.6}"));
        println!(
            "{:<20} {:<40} {:>12.6} ± {:<10.6} ref {:>10} {:?}",
            r.condition,
            params.join(" "),
            r.estimate,
            r.stderr,
            reference,
            r.verdict
        );
    }
    println!(
        "{} reports in {}",
        summary.reports.len(),
        config.output_dir.join("reports").display()
    );
    let all_inconclusive =
        !summary.reports.is_empty() && summary.reports.iter().all(|r| r.verdict == Verdict::Inconclusive);
    if all_inconclusive {
        ExitCode::from(EXIT_INCONCLUSIVE)
    } else {
        ExitCode::SUCCESS
    }
}

fn list(write: Option<PathBuf>) -> anyhow::Result<()> {
    if let Some(dir) = &write {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for c in canned_experiments() {
        println!("{:<20} {}", c.name, c.description);
        if let Some(dir) = &write {
            let path = dir.join(format!("{}.json", c.name));
            std::fs::write(&path, c.config.to_json()).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            reps,
            out_dir,
            workers,
        } => run(&config, seed, reps, out_dir, workers),
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                println!("ok: {} experiment, {} replications", c.kind, c.replications);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Command::ListExperiments { write } => match list(write) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(EXIT_FAILURE)
            }
        },
    }
}
