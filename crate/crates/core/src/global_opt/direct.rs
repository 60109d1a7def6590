//! Dividing-rectangles (DIRECT) search.
//!
//! The box is normalized to the unit cube. Every iteration picks the
//! potentially-optimal rectangles (lower-right convex hull of best value per
//! diameter, filtered by Jones' epsilon test) and trisects them along their
//! longest sides. The new centers of an iteration are evaluated as one batch in
//! a fixed order and the budget cuts that sequence exactly, so a larger budget
//! always evaluates a superset of a smaller one.
//!
//! Hard constraints are handled by ranking infeasible centers below every
//! feasible one; for the hull they receive a surrogate value ten ranges below
//! the worst feasible value seen so far.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use super::BoxDomain;
use crate::error::{Error, Result};

/// Jones' epsilon, relative to the best value.
pub const DEFAULT_EPSILON: f64 = 1e-4;

/// Levels beyond this no longer shrink a side in double precision.
const MAX_LEVEL: u32 = 33;

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub evals_used: usize,
    /// `false` only for constrained searches that never evaluated a feasible point.
    pub feasible: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct DirectSearch {
    pub max_evals: usize,
    pub epsilon: f64,
}

impl DirectSearch {
    pub fn new(max_evals: usize) -> Self {
        DirectSearch {
            max_evals,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn maximize<F>(&self, domain: &BoxDomain, mut objective: F) -> Result<OptResult>
    where
        F: FnMut(&[f64]) -> f64,
    {
        self.run(domain, |xs: &[Vec<f64>], out: &mut Vec<(f64, f64)>| {
            out.extend(xs.iter().map(|x| (objective(x), 0.0)))
        })
    }

    /// Maximizes `objective` over `{x : constraint(x) >= 0}`.
    pub fn maximize_constrained<F, G>(&self, domain: &BoxDomain, mut objective: F, mut constraint: G) -> Result<OptResult>
    where
        F: FnMut(&[f64]) -> f64,
        G: FnMut(&[f64]) -> f64,
    {
        self.run(domain, |xs: &[Vec<f64>], out: &mut Vec<(f64, f64)>| {
            out.extend(xs.iter().map(|x| {
                let c = constraint(x);
                (objective(x), c)
            }))
        })
    }

    /// Like [`maximize`](Self::maximize), but hands every iteration's new centers
    /// to `objective` at once; it must push one value per point onto `out`.
    /// The result equals the one-at-a-time search for a pure objective.
    pub fn maximize_batch<F>(&self, domain: &BoxDomain, mut objective: F) -> Result<OptResult>
    where
        F: FnMut(&[Vec<f64>], &mut Vec<f64>),
    {
        let mut values = Vec::new();
        self.run(domain, |xs: &[Vec<f64>], out: &mut Vec<(f64, f64)>| {
            values.clear();
            objective(xs, &mut values);
            out.extend(values.iter().map(|&v| (v, 0.0)));
        })
    }

    /// Batched constrained search; `eval` pushes one `(objective, constraint)` pair per point.
    pub fn maximize_constrained_batch<E>(&self, domain: &BoxDomain, eval: E) -> Result<OptResult>
    where
        E: FnMut(&[Vec<f64>], &mut Vec<(f64, f64)>),
    {
        self.run(domain, eval)
    }

    fn run<E>(&self, domain: &BoxDomain, eval: E) -> Result<OptResult>
    where
        E: FnMut(&[Vec<f64>], &mut Vec<(f64, f64)>),
    {
        if self.max_evals == 0 {
            return Err(Error::invalid("max_evals must be at least 1"));
        }
        let mut state = Search::new(domain, eval, self.max_evals);
        state.start();
        while !state.exhausted() {
            let selected = state.potentially_optimal(self.epsilon);
            if selected.is_empty() {
                break;
            }
            state.divide_all(&selected);
        }
        Ok(state.result())
    }
}

/// Maximizes `objective` over `domain` with at most `max_evals` evaluations.
pub fn direct_maximize<F>(objective: F, domain: &BoxDomain, max_evals: usize) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
{
    DirectSearch::new(max_evals).maximize(domain, objective)
}

/// Maximizes `objective` subject to `constraint(x) >= 0`.
pub fn constrained_maximize<F, G>(objective: F, constraint: G, domain: &BoxDomain, max_evals: usize) -> Result<OptResult>
where
    F: FnMut(&[f64]) -> f64,
    G: FnMut(&[f64]) -> f64,
{
    DirectSearch::new(max_evals).maximize_constrained(domain, objective, constraint)
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    value: f64,
    constraint: f64,
}

impl Sample {
    fn feasible(&self) -> bool {
        self.constraint >= 0.0 && !self.value.is_nan()
    }

    /// Total order: feasible before infeasible, then larger value (or
    /// smaller violation) first.
    fn rank(&self, other: &Sample) -> Ordering {
        match (self.feasible(), other.feasible()) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (true, true) => other.value.total_cmp(&self.value),
            (false, false) => nan_low(other.constraint).total_cmp(&nan_low(self.constraint)),
        }
    }
}

fn nan_low(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy)]
struct RankKey {
    sample: Sample,
    idx: usize,
}

impl PartialEq for RankKey {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for RankKey {}
impl PartialOrd for RankKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RankKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sample.rank(&other.sample).then(self.idx.cmp(&other.idx))
    }
}

struct Rect {
    center: Vec<f64>,
    levels: Vec<u32>,
    sample: Sample,
    size_key: u64,
}

struct Search<'a, E> {
    domain: &'a BoxDomain,
    eval: E,
    budget: usize,
    evals: usize,
    rects: Vec<Rect>,
    /// diameter bits -> rectangles of that diameter, best first
    groups: BTreeMap<u64, BTreeSet<RankKey>>,
    best_feasible: Option<(Vec<f64>, f64)>,
    best_any: Option<(Vec<f64>, f64)>,
    feasible_min: f64,
    feasible_max: f64,
}

fn diameter(levels: &[u32]) -> f64 {
    let mut sorted = levels.to_vec();
    sorted.sort_unstable();
    let sum: f64 = sorted.iter().map(|&k| 9f64.powi(-(k as i32))).sum();
    0.5 * sum.sqrt()
}

impl<'a, E> Search<'a, E>
where
    E: FnMut(&[Vec<f64>], &mut Vec<(f64, f64)>),
{
    fn new(domain: &'a BoxDomain, eval: E, budget: usize) -> Self {
        Search {
            domain,
            eval,
            budget,
            evals: 0,
            rects: Vec::new(),
            groups: BTreeMap::new(),
            best_feasible: None,
            best_any: None,
            feasible_min: f64::INFINITY,
            feasible_max: f64::NEG_INFINITY,
        }
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.budget
    }

    /// Evaluates unit-cube points in order, at most up to the budget.
    fn sample_all(&mut self, units: &[Vec<f64>]) -> Vec<Sample> {
        let take = units.len().min(self.budget - self.evals);
        let xs: Vec<Vec<f64>> = units[..take].iter().map(|u| self.domain.from_unit(u)).collect();
        let mut raw = Vec::with_capacity(take);
        (self.eval)(&xs, &mut raw);
        assert_eq!(raw.len(), take, "batch objective returned the wrong number of values");
        self.evals += take;
        let mut out = Vec::with_capacity(take);
        for (x, (value, constraint)) in xs.into_iter().zip(raw) {
            let s = Sample { value, constraint };
            if !value.is_nan() && self.best_any.as_ref().is_none_or(|(_, v)| value > *v) {
                self.best_any = Some((x.clone(), value));
            }
            if s.feasible() {
                self.feasible_min = self.feasible_min.min(value);
                self.feasible_max = self.feasible_max.max(value);
                if self.best_feasible.as_ref().is_none_or(|(_, v)| value > *v) {
                    self.best_feasible = Some((x, value));
                }
            }
            out.push(s);
        }
        out
    }

    fn insert(&mut self, center: Vec<f64>, levels: Vec<u32>, sample: Sample) {
        let size_key = diameter(&levels).to_bits();
        let idx = self.rects.len();
        self.groups.entry(size_key).or_default().insert(RankKey { sample, idx });
        self.rects.push(Rect {
            center,
            levels,
            sample,
            size_key,
        });
    }

    fn start(&mut self) {
        let d = self.domain.dim();
        let c = vec![0.5; d];
        let s = self.sample_all(std::slice::from_ref(&c))[0];
        self.insert(c, vec![0; d], s);
    }

    /// Value used for the hull: feasible points keep their value, infeasible
    /// ones sit below the feasible range, ordered by violation.
    fn hull_value(&self, s: &Sample) -> f64 {
        if s.feasible() {
            return s.value;
        }
        let violation = -nan_low(s.constraint);
        let graded = if violation.is_finite() { violation / (1.0 + violation) } else { 1.0 };
        if self.feasible_min.is_finite() {
            let range = self.feasible_max - self.feasible_min;
            let range = if range > 0.0 { range } else { self.feasible_max.abs().max(1.0) };
            self.feasible_min - 10.0 * range - 10.0 * range * graded
        } else {
            -graded
        }
    }

    fn potentially_optimal(&self, epsilon: f64) -> Vec<usize> {
        // (diameter, minimization value, rect index), ascending diameter
        let pts: Vec<(f64, f64, usize)> = self
            .groups
            .iter()
            .filter_map(|(&key, set)| {
                let best = set.iter().next()?;
                let rect = &self.rects[best.idx];
                if rect.levels.iter().all(|&k| k >= MAX_LEVEL) {
                    return None;
                }
                Some((f64::from_bits(key), -self.hull_value(&best.sample), best.idx))
            })
            .collect();
        if pts.is_empty() {
            return Vec::new();
        }
        let g_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        // largest diameter among those attaining the minimum
        let start = pts.iter().rposition(|p| p.1 == g_min).unwrap_or(0);
        let mut hull: Vec<usize> = Vec::new();
        for i in start..pts.len() {
            while hull.len() >= 2 {
                let (o, a) = (pts[hull[hull.len() - 2]], pts[hull[hull.len() - 1]]);
                let b = pts[i];
                let cross = (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
                if cross < 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        let threshold = g_min - epsilon * g_min.abs();
        let mut out = Vec::with_capacity(hull.len());
        for (h, &i) in hull.iter().enumerate() {
            let (d, g, idx) = pts[i];
            let keep = match hull.get(h + 1) {
                None => true,
                Some(&j) => {
                    let (d2, g2, _) = pts[j];
                    let k = (g2 - g) / (d2 - d);
                    g - k * d <= threshold
                }
            };
            if keep {
                out.push(idx);
            }
        }
        out
    }

    /// Trisection plan of a rectangle: the split dimensions and the child
    /// centers, two per dimension (plus side first).
    fn children_of(&self, idx: usize) -> Option<(Vec<usize>, Vec<Vec<f64>>)> {
        let r = &self.rects[idx];
        let k_min = *r.levels.iter().min().expect("non-empty levels");
        if k_min >= MAX_LEVEL {
            return None;
        }
        let delta = 3f64.powi(-(k_min as i32 + 1));
        let dims: Vec<usize> = (0..r.levels.len()).filter(|&i| r.levels[i] == k_min).collect();
        let mut centers = Vec::with_capacity(2 * dims.len());
        for &i in &dims {
            for sign in [1.0, -1.0] {
                let mut c = r.center.clone();
                c[i] = (c[i] + sign * delta).clamp(0.0, 1.0);
                centers.push(c);
            }
        }
        Some((dims, centers))
    }

    /// Evaluates the children of every selected rectangle in one batch, then
    /// divides those whose children all fit in the budget.
    fn divide_all(&mut self, selected: &[usize]) {
        let plans: Vec<(usize, Vec<usize>, Vec<Vec<f64>>)> = selected
            .iter()
            .filter_map(|&idx| self.children_of(idx).map(|(dims, cs)| (idx, dims, cs)))
            .collect();
        let units: Vec<Vec<f64>> = plans.iter().flat_map(|p| p.2.iter().cloned()).collect();
        let samples = self.sample_all(&units);
        let mut offset = 0;
        for (idx, dims, centers) in plans {
            let n = centers.len();
            if offset + n > samples.len() {
                break;
            }
            let sampled = &samples[offset..offset + n];
            offset += n;
            let mut it = centers.into_iter().zip(sampled.iter().copied());
            let children: Vec<(usize, [(Vec<f64>, Sample); 2])> = dims
                .iter()
                .map(|&i| {
                    let a = it.next().expect("two children per dimension");
                    let b = it.next().expect("two children per dimension");
                    (i, [a, b])
                })
                .collect();
            self.divide(idx, children);
        }
    }

    fn divide(&mut self, idx: usize, mut children: Vec<(usize, [(Vec<f64>, Sample); 2])>) {
        let (levels, sample, size_key) = {
            let r = &self.rects[idx];
            (r.levels.clone(), r.sample, r.size_key)
        };
        // split first along the dimension with the best child
        children.sort_by(|(i, p), (j, q)| {
            let bp = if p[0].1.rank(&p[1].1) == Ordering::Greater { &p[1].1 } else { &p[0].1 };
            let bq = if q[0].1.rank(&q[1].1) == Ordering::Greater { &q[1].1 } else { &q[0].1 };
            bp.rank(bq).then(i.cmp(j))
        });

        if let Some(set) = self.groups.get_mut(&size_key) {
            set.remove(&RankKey { sample, idx });
            if set.is_empty() {
                self.groups.remove(&size_key);
            }
        }
        let mut cur = levels;
        for (i, pair) in children {
            cur[i] += 1;
            for (c, s) in pair {
                self.insert(c, cur.clone(), s);
            }
        }
        let new_key = diameter(&cur).to_bits();
        self.rects[idx].levels = cur;
        self.rects[idx].size_key = new_key;
        self.groups.entry(new_key).or_default().insert(RankKey { sample, idx });
    }

    fn result(self) -> OptResult {
        let evals = self.evals;
        match (self.best_feasible, self.best_any) {
            (Some((x, v)), _) => OptResult {
                argmax: x,
                value: v,
                evals_used: evals,
                feasible: true,
            },
            (None, Some((x, v))) => OptResult {
                argmax: x,
                value: v,
                evals_used: evals,
                feasible: false,
            },
            (None, None) => {
                let c = self.domain.center();
                OptResult {
                    argmax: c,
                    value: f64::NAN,
                    evals_used: evals,
                    feasible: false,
                }
            }
        }
    }
}
