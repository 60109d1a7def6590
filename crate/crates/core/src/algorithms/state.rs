//! Per-run policy state and the individual policy steps.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::AlgConfig;
use crate::accounting::{instantaneous_regret, Ledger, QueryKind, RegretTrace};
use crate::error::{Error, Result};
use crate::global_opt::{BoxDomain, DirectSearch, OptResult};
use crate::gp::{GpPosterior, QueryCache};
use crate::oracles::DuelingOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    /// Duels only, until the duel model is confident at its own maximizer.
    One,
    /// Labels filtered by the duel model.
    Two,
}

/// A query chosen by a policy. Points are in unit-cube coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryDecision {
    pub kind: QueryKind,
    pub x: Vec<f64>,
    /// Random opponent, present exactly for duels.
    pub x2: Option<Vec<f64>>,
    pub phase: Phase,
}

/// Confidence quantities of the duel model at the phase-one query, before its update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingBound {
    pub mean: f64,
    pub width: f64,
}

#[derive(Debug)]
pub struct AlgState {
    phase: Phase,
    gp_comp: GpPosterior,
    gp_label: GpPosterior,
    comp_cache: QueryCache,
    label_cache: QueryCache,
    fr_lcb: Option<f64>,
    pending: Option<PendingBound>,
    zeta_k: f64,
    level: usize,
    labels_at_level: usize,
    finished: bool,
    t: usize,
    infeasible_fallbacks: usize,
    /// Label-only policies have no phases.
    label_only: bool,
    unit: BoxDomain,
}

impl AlgState {
    pub fn new(config: &AlgConfig, dim: usize, label_noise: f64) -> Result<Self> {
        let mut gp_comp = GpPosterior::new(config.kernel, config.comp_noise, dim)?;
        gp_comp.set_prior_mean(config.comp_prior_mean);
        let gp_label = GpPosterior::new(config.kernel, label_noise, dim)?;
        Ok(AlgState {
            phase: Phase::One,
            gp_comp,
            gp_label,
            comp_cache: QueryCache::default(),
            label_cache: QueryCache::default(),
            fr_lcb: None,
            pending: None,
            zeta_k: config.zeta0.unwrap_or(config.zeta),
            level: 0,
            labels_at_level: 0,
            finished: false,
            t: 0,
            infeasible_fallbacks: 0,
            label_only: config.policy == super::Policy::GpUcb,
            unit: BoxDomain::unit(dim),
        })
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn gp_comp(&self) -> &GpPosterior {
        &self.gp_comp
    }

    pub fn gp_label(&self) -> &GpPosterior {
        &self.gp_label
    }

    pub(crate) fn gp_comp_mut(&mut self) -> &mut GpPosterior {
        &mut self.gp_comp
    }

    pub(crate) fn gp_label_mut(&mut self) -> &mut GpPosterior {
        &mut self.gp_label
    }

    /// Lower bound on the best Borda score, fixed when phase one ends.
    pub fn fr_lcb(&self) -> Option<f64> {
        self.fr_lcb
    }

    pub fn zeta_k(&self) -> f64 {
        self.zeta_k
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn labels_at_level(&self) -> usize {
        self.labels_at_level
    }

    /// Set once the adaptive bias guess exceeds its upper bound.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Queries issued so far, warm start included.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Phase-two steps whose constrained search found no feasible point.
    pub fn infeasible_fallbacks(&self) -> usize {
        self.infeasible_fallbacks
    }

    /// Duel-model mean and standard deviation at a unit-cube point.
    pub fn comp_mean_sd(&mut self, x: &[f64]) -> (f64, f64) {
        self.comp_cache.mean_sd(&self.gp_comp, x)
    }

    /// Label-model mean and standard deviation at a unit-cube point.
    pub fn label_mean_sd(&mut self, x: &[f64]) -> (f64, f64) {
        self.label_cache.mean_sd(&self.gp_label, x)
    }

    /// Filter value `mu_r + beta_r sigma_r - lcb + slack` at `x`.
    pub fn phi(&mut self, x: &[f64], beta_comp: f64, slack: f64) -> Result<f64> {
        let lcb = self.fr_lcb.ok_or_else(|| Error::State("the filter exists only in phase two".into()))?;
        let (m, s) = self.comp_mean_sd(x);
        Ok(m + beta_comp * s - lcb + slack)
    }

    /// Label-only step: maximize the label model's upper confidence bound.
    pub fn gp_ucb_step(&mut self, beta_label: f64, acq_evals: usize) -> Result<QueryDecision> {
        let found = ucb_argmax(&self.gp_label, &mut self.label_cache, &self.unit, beta_label, acq_evals)?;
        Ok(QueryDecision {
            kind: QueryKind::Label,
            x: found.argmax,
            x2: None,
            phase: self.phase,
        })
    }

    /// Phase-one step: duel the duel model's UCB maximizer against a random point.
    /// The flag reports whether the confidence width there is at most `gamma`.
    pub fn phase1_step<R: Rng + ?Sized>(
        &mut self,
        beta_comp: f64,
        gamma: f64,
        acq_evals: usize,
        rng: &mut R,
    ) -> Result<(QueryDecision, bool)> {
        if self.phase != Phase::One {
            return Err(Error::State("phase-one step requested in phase two".into()));
        }
        let found = ucb_argmax(&self.gp_comp, &mut self.comp_cache, &self.unit, beta_comp, acq_evals)?;
        let (mean, sd) = self.comp_mean_sd(&found.argmax);
        let width = beta_comp * sd;
        self.pending = Some(PendingBound { mean, width });
        let x2 = self.unit.sample_uniform(rng);
        Ok((
            QueryDecision {
                kind: QueryKind::Comp,
                x: found.argmax,
                x2: Some(x2),
                phase: Phase::One,
            },
            width <= gamma,
        ))
    }

    /// Freezes `mean - width` at the last phase-one query and enters phase two.
    pub fn compute_fr_lcb(&mut self) -> Result<f64> {
        if self.phase != Phase::One {
            return Err(Error::State("the lower bound is fixed once phase two starts".into()));
        }
        let p = self
            .pending
            .take()
            .ok_or_else(|| Error::State("no phase-one query to bound".into()))?;
        let lcb = p.mean - p.width;
        self.fr_lcb = Some(lcb);
        self.phase = Phase::Two;
        Ok(lcb)
    }

    /// Phase-two step: maximize the label UCB over `{phi >= 0}`, then duel if the
    /// duel model is still unsure at the maximizer and label otherwise.
    #[allow(clippy::too_many_arguments)]
    pub fn phase2_step<R: Rng + ?Sized>(
        &mut self,
        beta_comp: f64,
        beta_label: f64,
        slack: f64,
        gamma: f64,
        acq_evals: usize,
        rng: &mut R,
    ) -> Result<QueryDecision> {
        let lcb = self
            .fr_lcb
            .ok_or_else(|| Error::State("phase-two step requested in phase one".into()))?;
        let (gl, gc) = (&self.gp_label, &self.gp_comp);
        let (lc, cc) = (&mut self.label_cache, &mut self.comp_cache);
        let (mut label_stats, mut comp_stats) = (Vec::new(), Vec::new());
        let found = DirectSearch::new(acq_evals).maximize_constrained_batch(&self.unit, |xs, out| {
            label_stats.clear();
            comp_stats.clear();
            lc.mean_sd_batch(gl, xs, &mut label_stats);
            cc.mean_sd_batch(gc, xs, &mut comp_stats);
            out.extend(
                label_stats
                    .iter()
                    .zip(&comp_stats)
                    .map(|(&(ml, sl), &(mc, sc))| (ml + beta_label * sl, mc + beta_comp * sc - lcb + slack)),
            );
        })?;
        let x = if found.feasible {
            found.argmax
        } else {
            self.infeasible_fallbacks += 1;
            self.gp_ucb_step(beta_label, acq_evals)?.x
        };
        let (_, sd) = self.comp_mean_sd(&x);
        let (kind, x2) = if beta_comp * sd >= gamma {
            (QueryKind::Comp, Some(self.unit.sample_uniform(rng)))
        } else {
            (QueryKind::Label, None)
        };
        Ok(QueryDecision {
            kind,
            x,
            x2,
            phase: Phase::Two,
        })
    }

    /// Charges, queries the oracle, updates the matching model and records regret.
    /// Returns `false` (and issues nothing) when the budget cannot cover the query.
    pub fn query_dispatch<R: Rng + ?Sized>(
        &mut self,
        decision: &QueryDecision,
        oracle: &DuelingOracle,
        ledger: &mut Ledger,
        trace: &mut RegretTrace,
        rng: &mut R,
        warm_start: bool,
    ) -> Result<bool> {
        if decision.x2.is_some() != (decision.kind == QueryKind::Comp) {
            return Err(Error::State("duels need an opponent and labels must not have one".into()));
        }
        if decision.kind == QueryKind::Label && self.phase == Phase::One && !warm_start && !self.label_only {
            return Err(Error::State("labels are not issued in phase one".into()));
        }
        if !ledger.charge(decision.kind) {
            return Ok(false);
        }
        let domain = oracle.domain();
        let x = domain.from_unit(&decision.x);
        let x2 = decision.x2.as_ref().map(|u| domain.from_unit(u));
        match decision.kind {
            QueryKind::Comp => {
                let opponent = x2.as_ref().expect("checked above");
                let z = oracle.compare(&x, opponent, rng)?;
                self.gp_comp.append(&decision.x, if z { 1.0 } else { 0.0 })?;
            }
            QueryKind::Label => {
                let y = oracle.label_query(&x, rng)?;
                self.gp_label.append(&decision.x, y)?;
            }
        }
        self.t += 1;
        let regret = instantaneous_regret(oracle, decision.kind, &x, x2.as_deref());
        let cost = ledger.model().cost(decision.kind);
        trace.push(decision.kind, x, x2, cost, ledger.spent(), regret, warm_start);
        Ok(true)
    }

    /// Counts a label at the current bias level and doubles the level when its share is used up.
    pub fn zeta_schedule_step(&mut self, threshold: usize, zeta_max: f64) {
        self.labels_at_level += 1;
        if self.labels_at_level >= threshold {
            self.labels_at_level = 0;
            self.zeta_k *= 2.0;
            self.level += 1;
        }
        if self.zeta_k > zeta_max {
            self.finished = true;
        }
    }

    /// Raises the frozen lower bound with a newer bound at `x`.
    pub(crate) fn refresh_lcb_at(&mut self, x: &[f64], beta_comp: f64) {
        let (m, s) = self.comp_mean_sd(x);
        if let Some(l) = self.fr_lcb.as_mut() {
            *l = l.max(m - beta_comp * s);
        }
    }
}

/// DIRECT maximizer of `mean + beta * sd` over the unit cube.
fn ucb_argmax(
    gp: &GpPosterior,
    cache: &mut QueryCache,
    unit: &BoxDomain,
    beta: f64,
    acq_evals: usize,
) -> Result<OptResult> {
    let mut stats = Vec::new();
    DirectSearch::new(acq_evals).maximize_batch(unit, |xs, out| {
        stats.clear();
        cache.mean_sd_batch(gp, xs, &mut stats);
        out.extend(stats.iter().map(|&(m, s)| m + beta * s));
    })
}

/// Labels allotted to each bias level of the adaptive policy.
pub fn adaptive_threshold(n_labels_lower: usize, zeta0: f64, zeta_max: f64) -> usize {
    let levels = ((zeta_max / zeta0).log2() - 1e-9).ceil().max(1.0) as usize;
    n_labels_lower.div_ceil(2 * levels).max(1)
}
