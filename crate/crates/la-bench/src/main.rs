//! `labench`: run scenarios, compare KPI series, train checkpoints, sweep
//! scenario directories.

use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use la_bench::checkpoint::Checkpoint;
use la_bench::compare::compare;
use la_bench::error::BenchError;
use la_bench::kpi;
use la_bench::runner::{run_scenario, RunOptions};
use la_bench::scenario::{ControllerKind, Scenario};
use la_bench::trainer::{train, TrainConfig};

#[derive(Parser)]
#[command(
    name = "labench",
    about = "Link adaptation simulation harness",
    long_about = "Runs link-level scenarios with either the OLLA baseline or the \
                  learned agent, writes 100 ms KPI CSVs plus a JSON summary, and \
                  trains agent checkpoints.\n\nLog verbosity: set LA_LOG (or RUST_LOG), \
                  e.g. LA_LOG=debug."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file and write KPI artifacts.
    Run {
        scenario: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Agent checkpoint (required for agent scenarios).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Record per-decision wall-clock latency percentiles.
        #[arg(long)]
        timing: bool,
        /// Read extra directives from stdin as `<t_ms> <directive>` lines.
        #[arg(long)]
        stdin_directives: bool,
    },
    /// Compare two KPI CSVs (A vs baseline B).
    Compare { csv_a: PathBuf, csv_b: PathBuf },
    /// Train a checkpoint on a scenario mix.
    Train {
        scenario: PathBuf,
        /// Environment steps (TTIs).
        #[arg(long, default_value_t = 200_000)]
        steps: u64,
        /// Checkpoint output path.
        #[arg(long)]
        out: PathBuf,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every scenario file in a directory.
    Sweep {
        dir: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new()
            .filter_or("LA_LOG", std::env::var("RUST_LOG").unwrap_or_else(|_| "info".into())),
    )
    .init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), BenchError> {
    match command {
        Command::Run {
            scenario,
            seed,
            out,
            checkpoint,
            timing,
            stdin_directives,
        } => cmd_run(&scenario, seed, &out, checkpoint.as_deref(), timing, stdin_directives),
        Command::Compare { csv_a, csv_b } => cmd_compare(&csv_a, &csv_b),
        Command::Train {
            scenario,
            steps,
            out,
            seed,
        } => cmd_train(&scenario, steps, &out, seed),
        Command::Sweep {
            dir,
            out,
            checkpoint,
        } => cmd_sweep(&dir, &out, checkpoint.as_deref()),
    }
}

fn load_checkpoint_if_needed(
    scenario: &Scenario,
    path: Option<&Path>,
) -> Result<Option<Checkpoint>, BenchError> {
    match (scenario.controller, path) {
        (ControllerKind::Agent, Some(p)) => Ok(Some(Checkpoint::load(p)?)),
        (ControllerKind::Agent, None) => Err(BenchError::CheckpointMissing(
            "pass --checkpoint for agent scenarios".into(),
        )),
        (ControllerKind::Olla, _) => Ok(None),
    }
}

fn cmd_run(
    scenario_path: &Path,
    seed: Option<u64>,
    out_dir: &Path,
    checkpoint: Option<&Path>,
    timing: bool,
    stdin_directives: bool,
) -> Result<(), BenchError> {
    let mut scenario = Scenario::load(scenario_path)?;
    if let Some(s) = seed {
        scenario = scenario.with_seed(s);
    }
    if stdin_directives {
        let stdin = std::io::stdin();
        for line in stdin.lock().lines() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (t, rest) = trimmed
                .split_once(' ')
                .ok_or_else(|| BenchError::InvalidScenario(format!("bad stdin line `{trimmed}`")))?;
            let t_ms: f64 = t
                .parse()
                .map_err(|_| BenchError::InvalidScenario(format!("bad time `{t}`")))?;
            la_core::agent::parse_directive(rest)
                .map_err(|e| BenchError::InvalidScenario(e.to_string()))?;
            scenario.events.push(la_bench::scenario::TimedEvent {
                t_ms,
                directive: rest.to_string(),
            });
        }
        scenario
            .events
            .sort_by(|a, b| a.t_ms.partial_cmp(&b.t_ms).unwrap());
    }
    let ck = load_checkpoint_if_needed(&scenario, checkpoint)?;
    let opts = RunOptions {
        timing,
        trace_windowed_bler: false,
    };
    let result = run_scenario(&scenario, ck.as_ref(), &opts)?;

    std::fs::create_dir_all(out_dir)?;
    let stem = format!("{}_seed{}", scenario.name, scenario.seed);
    let csv_path = out_dir.join(format!("{stem}.csv"));
    kpi::write_csv(&result.samples, &csv_path)?;
    let summary_path = out_dir.join(format!("{stem}.summary.json"));
    std::fs::write(
        &summary_path,
        serde_json::to_string_pretty(&result.summary).expect("serializable summary"),
    )?;
    log::info!(
        "wrote {} and {}",
        csv_path.display(),
        summary_path.display()
    );
    println!(
        "{}",
        serde_json::to_string(&result.summary).expect("serializable summary")
    );
    Ok(())
}

fn cmd_compare(csv_a: &Path, csv_b: &Path) -> Result<(), BenchError> {
    let a = kpi::read_csv(csv_a)?;
    let b = kpi::read_csv(csv_b)?;
    let report = compare(&a, &b)?;
    print!("{}", report.render_text());
    println!("{}", serde_json::to_string(&report).expect("serializable report"));
    Ok(())
}

fn cmd_train(
    scenario_path: &Path,
    steps: u64,
    out: &Path,
    seed: Option<u64>,
) -> Result<(), BenchError> {
    let mut scenario = Scenario::load(scenario_path)?;
    if let Some(s) = seed {
        scenario = scenario.with_seed(s);
    }
    let cfg = TrainConfig {
        steps,
        seed: scenario.seed,
        ..TrainConfig::default()
    };
    let (checkpoint, report) = train(&scenario, &cfg)?;
    checkpoint.save(out)?;
    log::info!(
        "trained {} env steps, {} updates, ranker top-1 {:.3}",
        report.env_steps,
        report.q_updates,
        report.imitation_top1
    );
    println!(
        "{}",
        serde_json::json!({
            "checkpoint": out.display().to_string(),
            "env_steps": report.env_steps,
            "q_updates": report.q_updates,
            "final_epsilon": report.final_epsilon,
            "imitation_top1": report.imitation_top1,
            "ranker_trained": checkpoint.ranker_trained,
        })
    );
    Ok(())
}

fn cmd_sweep(dir: &Path, out: &Path, checkpoint: Option<&Path>) -> Result<(), BenchError> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "toml").unwrap_or(false))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(BenchError::InvalidScenario(format!(
            "no .toml scenarios under {}",
            dir.display()
        )));
    }
    let ck = match checkpoint {
        Some(p) => Some(Checkpoint::load(p)?),
        None => None,
    };
    std::fs::create_dir_all(out)?;
    // Fan out over a small worker pool; runs are fully isolated.
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(files.len());
    let results: Vec<Result<String, BenchError>> = std::thread::scope(|scope| {
        let chunks: Vec<Vec<PathBuf>> = (0..workers)
            .map(|w| {
                files
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i % workers == w)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| {
                let ck = ck.clone();
                scope.spawn(move || {
                    let mut lines = Vec::new();
                    for path in chunk {
                        lines.push(run_one_for_sweep(&path, out, ck.as_ref()));
                    }
                    lines
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut failed = false;
    for r in results {
        match r {
            Ok(line) => println!("{line}"),
            Err(e) => {
                failed = true;
                eprintln!("{}", e.to_json());
            }
        }
    }
    if failed {
        return Err(BenchError::Sim("one or more sweep runs failed".into()));
    }
    Ok(())
}

fn run_one_for_sweep(
    path: &Path,
    out: &Path,
    ck: Option<&Checkpoint>,
) -> Result<String, BenchError> {
    let scenario = Scenario::load(path)?;
    let ck_ref = match (scenario.controller, ck) {
        (ControllerKind::Agent, Some(c)) => Some(c),
        (ControllerKind::Agent, None) => {
            return Err(BenchError::CheckpointMissing(
                format!("{} needs --checkpoint", path.display()).into(),
            ))
        }
        (ControllerKind::Olla, _) => None,
    };
    let result = run_scenario(&scenario, ck_ref, &RunOptions::default())?;
    let stem = format!("{}_seed{}", scenario.name, scenario.seed);
    kpi::write_csv(&result.samples, &out.join(format!("{stem}.csv")))?;
    std::fs::write(
        out.join(format!("{stem}.summary.json")),
        serde_json::to_string_pretty(&result.summary).expect("serializable summary"),
    )?;
    Ok(serde_json::to_string(&result.summary).expect("serializable summary"))
}
