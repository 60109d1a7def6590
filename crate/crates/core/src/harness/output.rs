//! CSV tables. Each file starts with a `#schema=` line naming its layout and version.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::ExperimentConfig;
use super::experiment::{AggregateRow, ExperimentResult, RunRecord};
use crate::error::{Error, Result};

pub const STEPS_SCHEMA: &str = "duelopt-steps/1";
pub const RUNS_SCHEMA: &str = "duelopt-runs/1";
pub const AGGREGATE_SCHEMA: &str = "duelopt-aggregate/1";
pub const STEPS_FILE: &str = "steps.csv";
pub const RUNS_FILE: &str = "runs.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";
pub const CONFIG_FILE: &str = "config.toml";

fn schema_line(out: &mut String, schema: &str) {
    let _ = writeln!(out, "#schema={schema}");
}

/// One row per query of every run.
pub fn steps_csv(result: &ExperimentResult) -> String {
    let d = result.dim;
    let mut out = String::new();
    schema_line(&mut out, STEPS_SCHEMA);
    let mut header = vec![
        "benchmark".to_string(),
        "policy".into(),
        "budget".into(),
        "cost_ratio".into(),
        "seed_index".into(),
        "run_seed".into(),
        "t".into(),
        "kind".into(),
        "warm_start".into(),
        "cost".into(),
        "cumulative_cost".into(),
    ];
    header.extend((0..d).map(|j| format!("x{j}")));
    header.extend((0..d).map(|j| format!("x2_{j}")));
    header.push("regret".into());
    header.push("simple_regret".into());
    let _ = writeln!(out, "{}", header.join(","));
    for r in &result.runs {
        let k = &r.key;
        for e in &r.trace.entries {
            let _ = write!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                result.benchmark.name(),
                k.label,
                k.budget,
                k.cost_ratio,
                k.seed_index,
                k.run_seed,
                e.t,
                e.kind.as_str(),
                e.warm_start as u8,
                e.cost,
                e.cumulative_cost
            );
            for v in &e.x {
                let _ = write!(out, ",{v}");
            }
            match &e.x2 {
                Some(x2) => x2.iter().for_each(|v| {
                    let _ = write!(out, ",{v}");
                }),
                None => out.push_str(&",".repeat(d)),
            }
            let _ = writeln!(out, ",{},{}", e.regret, e.simple_regret);
        }
    }
    out
}

/// One row per run with its final simple regret.
pub fn runs_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    schema_line(&mut out, RUNS_SCHEMA);
    out.push_str(
        "benchmark,policy,budget,cost_ratio,seed_index,run_seed,simple_regret,spent,comparisons,labels,\
         phase_two_start,infeasible_fallbacks\n",
    );
    for r in &result.runs {
        push_run(&mut out, result, r);
    }
    out
}

fn push_run(out: &mut String, result: &ExperimentResult, r: &RunRecord) {
    let k = &r.key;
    let p2 = r.phase_two_start.map(|t| t.to_string()).unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        result.benchmark.name(),
        k.label,
        k.budget,
        k.cost_ratio,
        k.seed_index,
        k.run_seed,
        r.simple_regret,
        r.spent,
        r.comparisons,
        r.labels,
        p2,
        r.infeasible_fallbacks
    );
}

/// One row per (policy, budget, cost) cell.
pub fn aggregate_csv(result: &ExperimentResult) -> String {
    let mut out = String::new();
    schema_line(&mut out, AGGREGATE_SCHEMA);
    out.push_str(
        "benchmark,policy,budget,cost_ratio,label_cost,comparison_cost,seeds,mean_simple_regret,std_error\n",
    );
    for a in &result.aggregates {
        push_aggregate(&mut out, result, a);
    }
    out
}

fn push_aggregate(out: &mut String, result: &ExperimentResult, a: &AggregateRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        result.benchmark.name(),
        a.label,
        a.budget,
        a.cost_ratio,
        a.costs.label_cost,
        a.costs.comparison_cost,
        a.seeds,
        a.mean_simple_regret,
        a.std_error
    );
}

/// Creates `dir` and checks that files can be written there.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

/// Writes the three tables plus the configuration that produced them into `dir`.
pub fn write_outputs(result: &ExperimentResult, config: &ExperimentConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        (STEPS_FILE, steps_csv(result)),
        (RUNS_FILE, runs_csv(result)),
        (AGGREGATE_FILE, aggregate_csv(result)),
        (CONFIG_FILE, config.to_toml_string()?),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// A parsed table: the schema tag, the header and the raw cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric cells of a column; empty cells become `None`.
    pub fn numbers(&self, name: &str) -> Result<Vec<Option<f64>>> {
        let c = self
            .column(name)
            .ok_or_else(|| Error::invalid(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                let cell = r[c].as_str();
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::invalid(format!("`{cell}` in column `{name}` is not a number")))
                }
            })
            .collect()
    }
}

/// Parses a table written by this module (no quoting, comma separated).
pub fn parse_csv(text: &str) -> Result<CsvTable> {
    let mut lines = text.lines();
    let schema = lines
        .next()
        .and_then(|l| l.strip_prefix("#schema="))
        .ok_or_else(|| Error::invalid("missing #schema= line"))?
        .to_string();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::invalid("missing header"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(Error::invalid(format!(
                "row {} has {} cells, header has {}",
                i + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { schema, header, rows })
}
