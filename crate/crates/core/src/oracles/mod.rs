//! Simulated environments: benchmark functions, noisy labels, duels and
//! ground-truth Borda scores.

mod benchmarks;
mod borda;
mod link;
mod oracle;
mod verify;

pub use benchmarks::{
    benchmark_data, borehole_domain, eval_borehole, eval_currin, eval_synthetic, Benchmark, BenchmarkData, Fidelity,
};
pub use borda::{borda_truth, BordaTruth, DEFAULT_NODES_PER_AXIS, DEFAULT_QMC_POINTS};
pub use link::{link_eval, LinkFamily, LinkFunction};
pub use oracle::{
    estimate_range, true_optimum, DuelingOracle, OracleSettings, Optimum, ScalarFn, NOISE_RANGE_FRACTION,
    OPTIMUM_SEARCH_EVALS, RANGE_SAMPLES, TEMPERATURE_RANGE_FRACTION,
};
pub use verify::{verify_assumption1, verify_assumption2, LipschitzEstimate, MIN_GAP};
