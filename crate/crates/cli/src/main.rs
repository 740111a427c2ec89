//! `aqboost`: train boosted stump ensembles, run repeated benchmarks and
//! solve QUBO files from the command line.
//!
//! Exit codes: 0 on success, 2 for usage, configuration or input errors,
//! 3 when training degenerates (no usable stump or no non-empty ensemble).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aqboost::bench::run_benchmark;
use aqboost::boosting::train;
use aqboost::config::RunConfig;
use aqboost::data::split;
use aqboost::metrics::{accuracy, f1};
use aqboost::qubo::{QuboJson, QuboProblem};
use aqboost::solve::{AnnealConfig, QuboSolver, SolverConfig};
use aqboost::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "aqboost", version, about = "QUBO-selected boosted decision stumps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model per configured mode on a single split
    Train(RunArgs),
    /// Train and test every configured mode over repeated splits
    Benchmark {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        repeats: Option<usize>,
    },
    /// Minimize a QUBO given as {n_vars, offset, entries: [[i, j, c], ...]}
    SolveQubo {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Backend::Exhaustive)]
        backend: Backend,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Overrides `base_seed`
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    backend: Option<Backend>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Backend {
    Exhaustive,
    Anneal,
}

impl Backend {
    /// Keeps an existing anneal schedule when switching to `anneal`.
    fn apply(self, current: &SolverConfig) -> SolverConfig {
        match (self, current) {
            (Backend::Exhaustive, _) => SolverConfig::Exhaustive,
            (Backend::Anneal, SolverConfig::Anneal(a)) => SolverConfig::Anneal(a.clone()),
            (Backend::Anneal, SolverConfig::Exhaustive) => SolverConfig::default(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Train(run) => cmd_train(&run),
        Command::Benchmark { run, repeats } => cmd_benchmark(&run, repeats),
        Command::SolveQubo { path, backend, seed } => cmd_solve_qubo(&path, backend, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_training_degeneracy() { 3 } else { 2 })
        }
    }
}

fn load_config(run: &RunArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&run.config)?;
    if let Some(dir) = &run.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(seed) = run.seed {
        cfg.base_seed = seed;
    }
    if let Some(b) = run.backend {
        cfg.boost.solver = b.apply(&cfg.boost.solver);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

fn cmd_train(run: &RunArgs) -> Result<()> {
    let cfg = load_config(run)?;
    let data = cfg.dataset.load()?;
    let (tr, val, test) = split(&data, &cfg.split_for(cfg.base_seed))?;
    write(&cfg.out_dir, "config.json", &cfg.resolved().to_json())?;
    for &mode in &cfg.modes {
        let (model, trace) = train(&cfg.boost_for(mode, cfg.base_seed), &tr, &val)?;
        let pred = model.predict(&test)?;
        write(&cfg.out_dir, &format!("{mode}.model.json"), &serde_json::to_string_pretty(&model)?)?;
        write(&cfg.out_dir, &format!("{mode}.trace.json"), &serde_json::to_string_pretty(&trace)?)?;
        println!(
            "{mode}: members={} val_error={:.4} test_accuracy={:.4} test_f1={:.4}",
            model.len(),
            model.metadata.val_error.unwrap_or(f64::NAN),
            accuracy(test.labels(), &pred)?,
            f1(test.labels(), &pred)?,
        );
    }
    Ok(())
}

fn cmd_benchmark(run: &RunArgs, repeats: Option<usize>) -> Result<()> {
    let mut cfg = load_config(run)?;
    if let Some(r) = repeats {
        cfg.repeats = r;
        cfg.validate()?;
    }
    let data = cfg.dataset.load()?;
    let report = run_benchmark(&cfg, &data)?;
    let summary = report.summary_csv();
    write(&cfg.out_dir, "report.json", &report.to_json())?;
    write(&cfg.out_dir, "summary.csv", &summary)?;
    print!("{summary}");
    Ok(())
}

fn cmd_solve_qubo(path: &Path, backend: Backend, seed: u64) -> Result<()> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read `{}`: {e}", path.display())))?;
    let json: QuboJson = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    let q = QuboProblem::from_json(&json)?;
    let solver = match backend {
        Backend::Exhaustive => SolverConfig::Exhaustive,
        Backend::Anneal => SolverConfig::Anneal(AnnealConfig {
            seed,
            ..AnnealConfig::default()
        }),
    };
    let result = solver.solve(&q)?;
    let bits: Vec<u8> = result.assignment.iter().map(|&b| u8::from(b)).collect();
    println!(
        "{}",
        serde_json::json!({
            "assignment": bits,
            "energy": result.energy,
            "seed": seed,
            "backend": match backend { Backend::Exhaustive => "exhaustive", Backend::Anneal => "anneal" },
        })
    );
    Ok(())
}
