//! Grid execution of (policy, budget, cost, seed) runs and their summaries.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, Measured};
use super::seeds::{run_seed, RunIndexSpace};
use crate::accounting::{CostModel, QueryKind, RegretTrace};
use crate::algorithms::{run, AlgConfig, Policy};
use crate::error::{Error, Result};
use crate::oracles::{verify_assumption1, verify_assumption2, Benchmark, BordaTruth, DuelingOracle};
use crate::special::halton;

/// Tensor grids are used up to this dimension, low-discrepancy points beyond.
const MAX_GRID_DIM: usize = 2;
const BIAS_GRID_PER_AXIS: usize = 50;
const BIAS_QMC_POINTS: usize = 10_000;
const LIPSCHITZ_GRID_PER_AXIS: usize = 30;
const LIPSCHITZ_QMC_POINTS: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct RunKey {
    pub policy_index: usize,
    pub policy: Policy,
    pub label: String,
    pub budget: f64,
    pub cost_ratio: f64,
    pub costs: CostModel,
    pub seed_index: usize,
    pub run_seed: u64,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub key: RunKey,
    pub trace: RegretTrace,
    pub simple_regret: f64,
    pub spent: f64,
    pub comparisons: usize,
    pub labels: usize,
    pub phase_two_start: Option<usize>,
    pub infeasible_fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub label: String,
    pub policy: Policy,
    pub budget: f64,
    pub cost_ratio: f64,
    pub costs: CostModel,
    pub seeds: usize,
    pub mean_simple_regret: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub benchmark: Benchmark,
    pub dim: usize,
    pub measured: Option<Measured>,
    pub runs: Vec<RunRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Estimates the bias bound and Lipschitz constants of a benchmark oracle.
pub fn measure_oracle(oracle: &DuelingOracle) -> Result<Measured> {
    let domain = oracle.domain();
    let dim = domain.dim();
    let sample = |per_axis: usize, qmc: usize| -> Vec<Vec<f64>> {
        if dim <= MAX_GRID_DIM {
            domain.grid(per_axis)
        } else {
            halton(qmc, dim).iter().map(|u| domain.from_unit(u)).collect()
        }
    };
    let zeta = verify_assumption1(oracle, &sample(BIAS_GRID_PER_AXIS, BIAS_QMC_POINTS))?;
    let bt = BordaTruth::new(oracle);
    let lip = verify_assumption2(&bt, &sample(LIPSCHITZ_GRID_PER_AXIS, LIPSCHITZ_QMC_POINTS))?;
    Ok(Measured {
        zeta,
        l1: lip.l1,
        l2: lip.l2,
    })
}

/// Largest gap between Monte Carlo win rates against uniform opponents and the
/// quadrature Borda score, over `points` random arms. Returns `(gap, standard error)`.
pub fn borda_unbiasedness_gap(oracle: &DuelingOracle, points: usize, duels: usize, seed: u64) -> Result<(f64, f64)> {
    if points == 0 || duels == 0 {
        return Err(Error::invalid("need at least one point and one duel"));
    }
    let bt = BordaTruth::new(oracle);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domain = oracle.domain();
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let x = domain.sample_uniform(&mut rng);
        let mut wins = 0usize;
        for _ in 0..duels {
            let opp = domain.sample_uniform(&mut rng);
            if oracle.compare(&x, &opp, &mut rng)? {
                wins += 1;
            }
        }
        worst = worst.max((wins as f64 / duels as f64 - bt.value(&x)?).abs());
    }
    Ok((worst, 0.5 / (duels as f64).sqrt()))
}

fn needs_measurement(config: &ExperimentConfig) -> bool {
    config.policies.iter().any(|p| match p.policy {
        Policy::CompGpUcb => p.zeta.is_none() || p.l2.is_none(),
        Policy::CompGpUcbAdaptive => p.zeta0.is_none() || p.zeta_max.is_none() || p.l2.is_none(),
        Policy::GpUcb | Policy::ComparisonOnly => false,
    })
}

/// Runs every (policy, budget, cost, seed) combination on up to `workers` threads.
/// Output order follows the index space, whatever the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: usize) -> Result<ExperimentResult> {
    config.validate()?;
    let oracle = DuelingOracle::for_benchmark(config.benchmark, &config.oracle)?;
    let measured = if needs_measurement(config) {
        Some(measure_oracle(&oracle)?)
    } else {
        None
    };
    let filler = measured.unwrap_or(Measured {
        zeta: 0.0,
        l1: 1.0,
        l2: 1.0,
    });
    let alg_configs: Vec<AlgConfig> = config
        .policies
        .iter()
        .map(|p| p.resolve(&filler, config.warm_start, config.epsilon_heur))
        .collect();
    for (i, c) in alg_configs.iter().enumerate() {
        c.validate().map_err(|e| Error::config(format!("policies[{i}]"), e.to_string()))?;
    }
    let ratios = config.costs.comparison_costs()?;
    let space = RunIndexSpace {
        policies: config.policies.len(),
        budgets: config.budgets.len(),
        costs: ratios.len(),
        seeds: config.seeds,
    };
    let mut keys = Vec::with_capacity(space.len());
    for (pi, spec) in config.policies.iter().enumerate() {
        let label = spec.label(&config.policies, pi);
        for (bi, &budget) in config.budgets.iter().enumerate() {
            for (ci, &(ratio, cc)) in ratios.iter().enumerate() {
                let costs = CostModel::new(config.costs.label_cost, cc, budget)?;
                for si in 0..config.seeds {
                    keys.push(RunKey {
                        policy_index: pi,
                        policy: spec.policy,
                        label: label.clone(),
                        budget,
                        cost_ratio: ratio,
                        costs,
                        seed_index: si,
                        run_seed: run_seed(config.master_seed, space.flatten(pi, bi, ci, si)),
                    });
                }
            }
        }
    }
    let execute = |key: &RunKey| -> Result<RunRecord> {
        let outcome = run(&alg_configs[key.policy_index], &oracle, &key.costs, key.run_seed)?;
        Ok(RunRecord {
            simple_regret: outcome.trace.simple_regret().unwrap_or(f64::NAN),
            spent: outcome.ledger.spent(),
            comparisons: outcome.trace.count(QueryKind::Comp),
            labels: outcome.trace.count(QueryKind::Label),
            phase_two_start: outcome.phase_two_start,
            infeasible_fallbacks: outcome.infeasible_fallbacks,
            trace: outcome.trace,
            key: key.clone(),
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let runs: Vec<RunRecord> = pool.install(|| keys.par_iter().map(execute).collect::<Result<Vec<_>>>())?;
    let aggregates = aggregate(&runs);
    Ok(ExperimentResult {
        benchmark: config.benchmark,
        dim: oracle.domain().dim(),
        measured,
        runs,
        aggregates,
    })
}

/// Runs the experiment once per label/comparison cost ratio.
pub fn sweep_cost_ratio(config: &ExperimentConfig, ratios: &[f64], workers: usize) -> Result<ExperimentResult> {
    let mut swept = config.clone();
    swept.costs.comparison_cost = None;
    swept.costs.ratios = Some(ratios.to_vec());
    run_experiment(&swept, workers)
}

/// Mean and standard error of final simple regret per (policy, budget, cost) cell.
/// Runs of one cell are contiguous, so cells appear in run order.
pub fn aggregate(runs: &[RunRecord]) -> Vec<AggregateRow> {
    let mut rows = Vec::new();
    let mut start = 0;
    while start < runs.len() {
        let k = &runs[start].key;
        let end = start
            + runs[start..]
                .iter()
                .take_while(|r| {
                    r.key.policy_index == k.policy_index && r.key.budget == k.budget && r.key.cost_ratio == k.cost_ratio
                })
                .count();
        let values: Vec<f64> = runs[start..end].iter().map(|r| r.simple_regret).collect();
        let (mean, se) = mean_and_std_error(&values);
        rows.push(AggregateRow {
            label: k.label.clone(),
            policy: k.policy,
            budget: k.budget,
            cost_ratio: k.cost_ratio,
            costs: k.costs,
            seeds: values.len(),
            mean_simple_regret: mean,
            std_error: se,
        });
        start = end;
    }
    rows
}

/// Sample mean and standard error (n - 1 denominator; zero for a single value).
pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}
