//! Experiment driver: configuration files, seeded run grids, cost-ratio sweeps and CSV output.

mod config;
mod experiment;
mod output;
mod seeds;

pub use config::{load_config, CostSpec, ExperimentConfig, Measured, PolicySpec, DEFAULT_EPSILON_HEUR, DEFAULT_SEEDS, DEFAULT_WARM_START};
pub use experiment::{
    aggregate, borda_unbiasedness_gap, mean_and_std_error, measure_oracle, run_experiment, sweep_cost_ratio,
    AggregateRow, ExperimentResult, RunKey, RunRecord,
};
pub use output::{
    aggregate_csv, parse_csv, prepare_output_dir, runs_csv, steps_csv, write_outputs, CsvTable, AGGREGATE_FILE, AGGREGATE_SCHEMA,
    CONFIG_FILE, RUNS_FILE, RUNS_SCHEMA, STEPS_FILE, STEPS_SCHEMA,
};
pub use seeds::{run_seed, splitmix64, RunIndexSpace};
