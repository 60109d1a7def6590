//! Command-line front end for experiments and oracle checks.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use duelopt::harness::{
    borda_unbiasedness_gap, load_config, measure_oracle, prepare_output_dir, run_experiment, sweep_cost_ratio, write_outputs,
    ExperimentConfig, ExperimentResult,
};
use duelopt::oracles::{Benchmark, DuelingOracle, OracleSettings};

#[derive(Parser)]
#[command(name = "duelopt", version, about = "Cost-aware optimization with labels and duels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every policy, budget, cost and seed in a configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (falls back to the file's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides the file's master seed.
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Repeat a configuration over label/comparison cost ratios.
    SweepRatio {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ratios, each at least 1.
        #[arg(long, value_delimiter = ',', required = true)]
        ratios: Vec<f64>,
        /// Output directory (falls back to the file's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Print bias and Lipschitz estimates for a benchmark oracle.
    VerifyOracle {
        #[arg(long)]
        benchmark: Benchmark,
        /// Monte Carlo duels per arm for the Borda check.
        #[arg(long, default_value_t = 4000)]
        duels: usize,
    },
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn output_dir(flag: Option<PathBuf>, cfg: &ExperimentConfig) -> duelopt::Result<PathBuf> {
    flag.or_else(|| cfg.output.clone())
        .ok_or_else(|| duelopt::Error::InvalidArgument("no output directory: pass --out or set `output`".into()))
}

fn summarize(result: &ExperimentResult) {
    if let Some(m) = result.measured {
        println!("measured zeta={} l1={} l2={}", m.zeta, m.l1, m.l2);
    }
    println!("policy,budget,cost_ratio,mean_simple_regret,std_error");
    for a in &result.aggregates {
        println!(
            "{},{},{},{:.6},{:.6}",
            a.label, a.budget, a.cost_ratio, a.mean_simple_regret, a.std_error
        );
    }
}

fn execute(cli: Cli) -> duelopt::Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            workers,
            master_seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = master_seed {
                cfg.master_seed = s;
            }
            let out = output_dir(out, &cfg)?;
            prepare_output_dir(&out)?;
            let result = run_experiment(&cfg, workers.unwrap_or_else(default_workers))?;
            write_outputs(&result, &cfg, &out)?;
            summarize(&result);
        }
        Command::SweepRatio {
            config,
            ratios,
            out,
            workers,
            master_seed,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = master_seed {
                cfg.master_seed = s;
            }
            let out = output_dir(out, &cfg)?;
            prepare_output_dir(&out)?;
            let result = sweep_cost_ratio(&cfg, &ratios, workers.unwrap_or_else(default_workers))?;
            cfg.costs.comparison_cost = None;
            cfg.costs.ratios = Some(ratios);
            write_outputs(&result, &cfg, &out)?;
            summarize(&result);
        }
        Command::VerifyOracle { benchmark, duels } => {
            let oracle = DuelingOracle::for_benchmark(benchmark, &OracleSettings::default())?;
            let target = oracle.target_optimum();
            let comp = oracle.comparison_optimum();
            println!("benchmark {benchmark}");
            println!("target max {} at {:?}", target.value, target.argmax);
            println!("comparison max {} at {:?}", comp.value, comp.argmax);
            println!("label noise {} link temperature {}", oracle.noise(), oracle.link().temperature);
            let m = measure_oracle(&oracle)?;
            println!("zeta_hat {}", m.zeta);
            println!("l1_hat {}", m.l1);
            println!("l2_hat {}", m.l2);
            let (gap, se) = borda_unbiasedness_gap(&oracle, 16, duels, 0)?;
            println!("borda win-rate gap {gap} (one-duel standard error bound {se})");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
