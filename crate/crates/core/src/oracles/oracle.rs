//! Simulated environment answering noisy labels and duels.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::benchmarks::Benchmark;
use super::link::{LinkFamily, LinkFunction};
use crate::error::{Error, Result};
use crate::global_opt::{direct_maximize, BoxDomain};

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Budget of the dividing-rectangles pass inside [`true_optimum`].
pub const OPTIMUM_SEARCH_EVALS: usize = 100_000;
/// Samples used to estimate function ranges for default noise and temperature.
pub const RANGE_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub argmax: Vec<f64>,
    pub value: f64,
}

#[derive(Clone)]
pub struct DuelingOracle {
    target: ScalarFn,
    comparison: ScalarFn,
    link: LinkFunction,
    noise: f64,
    domain: BoxDomain,
    target_opt: OnceLock<Optimum>,
    comparison_opt: OnceLock<Optimum>,
}

impl fmt::Debug for DuelingOracle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DuelingOracle")
            .field("link", &self.link)
            .field("noise", &self.noise)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// How to build an oracle around a named benchmark. `None` fields take range-based defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSettings {
    pub link: LinkFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
}

impl Default for OracleSettings {
    fn default() -> Self {
        OracleSettings {
            link: LinkFamily::Logistic,
            temperature: None,
            noise: None,
        }
    }
}

/// Default label noise half-width as a fraction of the target's range.
pub const NOISE_RANGE_FRACTION: f64 = 0.05;
/// Default link temperature as a fraction of the comparison function's range.
pub const TEMPERATURE_RANGE_FRACTION: f64 = 0.25;

impl DuelingOracle {
    pub fn new(target: ScalarFn, comparison: ScalarFn, link: LinkFunction, noise: f64, domain: BoxDomain) -> Result<Self> {
        link.validate()?;
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(Error::invalid(format!("label noise must be nonnegative, got {noise}")));
        }
        Ok(DuelingOracle {
            target,
            comparison,
            link,
            noise,
            domain,
            target_opt: OnceLock::new(),
            comparison_opt: OnceLock::new(),
        })
    }

    pub fn for_benchmark(benchmark: Benchmark, settings: &OracleSettings) -> Result<Self> {
        let domain = benchmark.domain();
        let noise = match settings.noise {
            Some(n) => n,
            None => NOISE_RANGE_FRACTION * estimate_range(&|x: &[f64]| benchmark.target(x), &domain),
        };
        let temperature = match settings.temperature {
            Some(t) => t,
            None => TEMPERATURE_RANGE_FRACTION * estimate_range(&|x: &[f64]| benchmark.comparison(x), &domain),
        };
        let oracle = DuelingOracle::new(
            Arc::new(move |x: &[f64]| benchmark.target(x)),
            Arc::new(move |x: &[f64]| benchmark.comparison(x)),
            LinkFunction::new(settings.link, temperature)?,
            noise,
            domain,
        )?;
        let _ = oracle.target_opt.set(cached_optimum(benchmark, true, &oracle));
        let _ = oracle.comparison_opt.set(cached_optimum(benchmark, false, &oracle));
        Ok(oracle)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn link(&self) -> &LinkFunction {
        &self.link
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn target_value(&self, x: &[f64]) -> f64 {
        (self.target)(x)
    }

    pub fn comparison_value(&self, x: &[f64]) -> f64 {
        (self.comparison)(x)
    }

    pub(crate) fn comparison_fn(&self) -> &ScalarFn {
        &self.comparison
    }

    /// Probability that `x` beats `x2`.
    pub fn win_probability(&self, x: &[f64], x2: &[f64]) -> f64 {
        self.link.eval(self.comparison_value(x) - self.comparison_value(x2))
    }

    /// Noisy label `f(x) + e` with `e` uniform on `[-noise, noise]`.
    pub fn label_query<R: Rng + ?Sized>(&self, x: &[f64], rng: &mut R) -> Result<f64> {
        self.domain.check_contains(x)?;
        let u: f64 = rng.random();
        Ok(self.target_value(x) + self.noise * (2.0 * u - 1.0))
    }

    /// Duel outcome: `true` when `x` wins against `x2`.
    pub fn compare<R: Rng + ?Sized>(&self, x: &[f64], x2: &[f64], rng: &mut R) -> Result<bool> {
        self.domain.check_contains(x)?;
        self.domain.check_contains(x2)?;
        let p = self.win_probability(x, x2);
        let u: f64 = rng.random();
        Ok(u < p)
    }

    /// Maximizer and maximum of the target, computed once.
    pub fn target_optimum(&self) -> &Optimum {
        self.target_opt.get_or_init(|| true_optimum(&*self.target, &self.domain))
    }

    /// Maximizer and maximum of the comparison function, computed once.
    pub fn comparison_optimum(&self) -> &Optimum {
        self.comparison_opt.get_or_init(|| true_optimum(&*self.comparison, &self.domain))
    }
}

fn cached_optimum(benchmark: Benchmark, target: bool, oracle: &DuelingOracle) -> Optimum {
    static CACHE: OnceLock<Mutex<HashMap<(Benchmark, bool), Optimum>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("optimum cache poisoned").get(&(benchmark, target)) {
        return hit.clone();
    }
    let f: &(dyn Fn(&[f64]) -> f64 + Send + Sync) = if target { &*oracle.target } else { &*oracle.comparison };
    let opt = true_optimum(f, &oracle.domain);
    cache
        .lock()
        .expect("optimum cache poisoned")
        .entry((benchmark, target))
        .or_insert(opt)
        .clone()
}

/// Spread `max - min` of `f` over a fixed pseudo-random sample of the domain.
pub fn estimate_range(f: &dyn Fn(&[f64]) -> f64, domain: &BoxDomain) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_7a96e);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..RANGE_SAMPLES {
        let v = f(&domain.sample_uniform(&mut rng));
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

/// High-budget global maximization followed by coordinate-wise golden-section polishing.
pub fn true_optimum(f: &(dyn Fn(&[f64]) -> f64 + Send + Sync), domain: &BoxDomain) -> Optimum {
    let coarse = direct_maximize(|x| f(x), domain, OPTIMUM_SEARCH_EVALS).expect("positive budget");
    let mut x = coarse.argmax;
    let mut best = coarse.value;
    for _sweep in 0..3 {
        for i in 0..domain.dim() {
            let width = 0.01 * (domain.upper()[i] - domain.lower()[i]);
            let lo = (x[i] - width).max(domain.lower()[i]);
            let hi = (x[i] + width).min(domain.upper()[i]);
            let mut probe = x.clone();
            let mut along = |v: f64| {
                probe[i] = v;
                f(&probe)
            };
            let (arg, val) = golden_section_max(&mut along, lo, hi, 80);
            if val > best {
                best = val;
                x[i] = arg;
            }
        }
    }
    Optimum { argmax: x, value: best }
}

/// Maximizes a unimodal-ish scalar function on `[lo, hi]`; endpoints are probed too.
fn golden_section_max(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for end in [lo, hi] {
        let v = f(end);
        if v > best.1 {
            best = (end, v);
        }
    }
    best
}
