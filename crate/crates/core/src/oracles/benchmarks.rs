//! Two-fidelity benchmark functions and a one-dimensional synthetic target.
//!
//! Constants live in `data/benchmarks.toml` so that a change to them is a
//! visible, versioned data edit rather than a silent code edit.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::global_opt::BoxDomain;

const DATA: &str = include_str!("../../data/benchmarks.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkData {
    pub version: u32,
    pub currin: CurrinData,
    pub borehole: BoreholeData,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurrinData {
    pub stencil: f64,
    pub high_numerator: [f64; 4],
    pub high_denominator: [f64; 4],
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoreholeData {
    pub names: [String; 8],
    pub lower: [f64; 8],
    pub upper: [f64; 8],
    pub high: BoreholeFidelity,
    pub low: BoreholeFidelity,
}

/// `numerator * Tu (Hu - Hl) / (ln(r/rw) (offset + 2 L Tu / (ln(r/rw) rw^2 Kw) + Tu/Tl))`
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoreholeFidelity {
    pub numerator: f64,
    pub offset: f64,
}

/// Parsed contents of the shipped constants file.
pub fn benchmark_data() -> &'static BenchmarkData {
    static DATA_CELL: OnceLock<BenchmarkData> = OnceLock::new();
    DATA_CELL.get_or_init(|| toml::from_str(DATA).expect("shipped benchmark data parses"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    High,
    Low,
}

fn currin_high_unchecked(x1: f64, x2: f64) -> f64 {
    let c = &benchmark_data().currin;
    let factor = if x2 <= 0.0 { 1.0 } else { 1.0 - (-1.0 / (2.0 * x2)).exp() };
    let cubic = |k: &[f64; 4]| ((k[0] * x1 + k[1]) * x1 + k[2]) * x1 + k[3];
    factor * cubic(&c.high_numerator) / cubic(&c.high_denominator)
}

fn currin_low_unchecked(x1: f64, x2: f64) -> f64 {
    let h = benchmark_data().currin.stencil;
    let down = (x2 - h).max(0.0);
    0.25 * (currin_high_unchecked(x1 + h, x2 + h)
        + currin_high_unchecked(x1 + h, down)
        + currin_high_unchecked(x1 - h, x2 + h)
        + currin_high_unchecked(x1 - h, down))
}

/// Currin exponential function on `[0, 1]^2`.
pub fn eval_currin(x: &[f64], fidelity: Fidelity) -> Result<f64> {
    check_dim(2, x.len())?;
    if !x.iter().all(|v| (0.0..=1.0).contains(v)) {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    Ok(match fidelity {
        Fidelity::High => currin_high_unchecked(x[0], x[1]),
        Fidelity::Low => currin_low_unchecked(x[0], x[1]),
    })
}

pub fn borehole_domain() -> BoxDomain {
    let b = &benchmark_data().borehole;
    BoxDomain::new(b.lower.to_vec(), b.upper.to_vec()).expect("borehole bounds are valid")
}

fn borehole_unchecked(x: &[f64], fid: &BoreholeFidelity) -> f64 {
    let [rw, r, tu, hu, tl, hl, l, kw] = [x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]];
    let log_ratio = (r / rw).ln();
    fid.numerator * tu * (hu - hl) / (log_ratio * (fid.offset + 2.0 * l * tu / (log_ratio * rw * rw * kw) + tu / tl))
}

/// Borehole water-flow function over its physical parameter box.
pub fn eval_borehole(x: &[f64], fidelity: Fidelity) -> Result<f64> {
    check_dim(8, x.len())?;
    let b = &benchmark_data().borehole;
    if !borehole_domain().contains(x) {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    Ok(match fidelity {
        Fidelity::High => borehole_unchecked(x, &b.high),
        Fidelity::Low => borehole_unchecked(x, &b.low),
    })
}

/// Bumps of the synthetic target: (center, height, width).
const SYNTHETIC_BUMPS: [(f64, f64, f64); 3] = [(0.62, 1.0, 0.02), (0.25, 0.7, 0.08), (0.9, 0.5, 0.05)];

/// Sum of squared-exponential bumps on `[0, 1]` with one narrow dominant peak.
pub fn eval_synthetic(x: &[f64]) -> Result<f64> {
    check_dim(1, x.len())?;
    if !(0.0..=1.0).contains(&x[0]) {
        return Err(Error::OutOfDomain { point: x.to_vec() });
    }
    Ok(synthetic_unchecked(x[0]))
}

fn synthetic_unchecked(x: f64) -> f64 {
    SYNTHETIC_BUMPS
        .iter()
        .map(|&(c, h, w)| h * (-(x - c) * (x - c) / (2.0 * w * w)).exp())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    /// High fidelity is the target, low fidelity drives comparisons.
    CurrinExp,
    /// High fidelity is the target, low fidelity drives comparisons.
    Borehole,
    /// Unbiased duels: comparisons use the target itself.
    Synthetic1d,
}

impl Benchmark {
    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::CurrinExp => "currin_exp",
            Benchmark::Borehole => "borehole",
            Benchmark::Synthetic1d => "synthetic1d",
        }
    }

    pub fn domain(&self) -> BoxDomain {
        match self {
            Benchmark::CurrinExp => BoxDomain::unit(2),
            Benchmark::Borehole => borehole_domain(),
            Benchmark::Synthetic1d => BoxDomain::unit(1),
        }
    }

    /// Function whose maximum is sought.
    pub fn target(&self, x: &[f64]) -> f64 {
        match self {
            Benchmark::CurrinExp => currin_high_unchecked(x[0], x[1]),
            Benchmark::Borehole => borehole_unchecked(x, &benchmark_data().borehole.high),
            Benchmark::Synthetic1d => synthetic_unchecked(x[0]),
        }
    }

    /// Function that generates comparison outcomes.
    pub fn comparison(&self, x: &[f64]) -> f64 {
        match self {
            Benchmark::CurrinExp => currin_low_unchecked(x[0], x[1]),
            Benchmark::Borehole => borehole_unchecked(x, &benchmark_data().borehole.low),
            Benchmark::Synthetic1d => synthetic_unchecked(x[0]),
        }
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "currin_exp" | "currin" => Ok(Benchmark::CurrinExp),
            "borehole" => Ok(Benchmark::Borehole),
            "synthetic1d" => Ok(Benchmark::Synthetic1d),
            other => Err(Error::invalid(format!("unknown benchmark `{other}`"))),
        }
    }
}
