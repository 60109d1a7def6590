//! Costs, budget enforcement and regret bookkeeping.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracles::DuelingOracle;

/// Relative slack used when comparing accumulated float costs to the budget.
const COST_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Comp,
    Label,
}

impl QueryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            QueryKind::Comp => "comp",
            QueryKind::Label => "label",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostModel {
    pub label_cost: f64,
    pub comparison_cost: f64,
    pub budget: f64,
}

impl CostModel {
    pub fn new(label_cost: f64, comparison_cost: f64, budget: f64) -> Result<Self> {
        let m = CostModel {
            label_cost,
            comparison_cost,
            budget,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.comparison_cost > 0.0 && self.comparison_cost.is_finite()) {
            return Err(Error::invalid(format!("comparison cost must be positive, got {}", self.comparison_cost)));
        }
        if !(self.label_cost >= self.comparison_cost && self.label_cost.is_finite()) {
            return Err(Error::invalid(format!(
                "label cost {} must be at least the comparison cost {}",
                self.label_cost, self.comparison_cost
            )));
        }
        if !(self.budget > 0.0 && self.budget.is_finite()) {
            return Err(Error::invalid(format!("budget must be positive, got {}", self.budget)));
        }
        Ok(())
    }

    pub fn cost(&self, kind: QueryKind) -> f64 {
        match kind {
            QueryKind::Comp => self.comparison_cost,
            QueryKind::Label => self.label_cost,
        }
    }

    /// `(floor(budget / label_cost), ceil(budget / comparison_cost))`: the query
    /// counts when spending everything on labels or on duels.
    pub fn n_bounds(&self) -> (usize, usize) {
        let lower = (self.budget / self.label_cost + COST_TOLERANCE).floor();
        let upper = (self.budget / self.comparison_cost - COST_TOLERANCE).ceil();
        (lower as usize, upper as usize)
    }

    /// Largest count `n` with `n * cost(kind) <= amount`, forgiving round-off.
    pub fn affordable(&self, kind: QueryKind, amount: f64) -> usize {
        (amount / self.cost(kind) + COST_TOLERANCE).floor().max(0.0) as usize
    }
}

pub fn n_bounds(model: &CostModel) -> (usize, usize) {
    model.n_bounds()
}

/// Running spend for one run. Spend is recomputed from counts so it never drifts.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    model: CostModel,
    comparisons: usize,
    labels: usize,
    terminal: bool,
}

impl Ledger {
    pub fn new(model: CostModel) -> Self {
        Ledger {
            model,
            comparisons: 0,
            labels: 0,
            terminal: false,
        }
    }

    pub fn model(&self) -> &CostModel {
        &self.model
    }

    pub fn spent(&self) -> f64 {
        self.comparisons as f64 * self.model.comparison_cost + self.labels as f64 * self.model.label_cost
    }

    pub fn remaining(&self) -> f64 {
        self.model.budget - self.spent()
    }

    pub fn comparisons(&self) -> usize {
        self.comparisons
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn queries(&self) -> usize {
        self.comparisons + self.labels
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal
    }

    pub fn can_afford(&self, kind: QueryKind) -> bool {
        let after = self.spent() + self.model.cost(kind);
        after <= self.model.budget * (1.0 + COST_TOLERANCE)
    }

    /// Debits one query if the budget covers it; otherwise marks the run terminal.
    pub fn charge(&mut self, kind: QueryKind) -> bool {
        if self.terminal || !self.can_afford(kind) {
            self.terminal = true;
            return false;
        }
        match kind {
            QueryKind::Comp => self.comparisons += 1,
            QueryKind::Label => self.labels += 1,
        }
        true
    }

    pub fn mark_terminal(&mut self) {
        self.terminal = true;
    }
}

pub fn charge(ledger: &mut Ledger, kind: QueryKind) -> bool {
    ledger.charge(kind)
}

/// Regret of one query: a label scores its point, a duel scores its better arm.
pub fn instantaneous_regret(oracle: &DuelingOracle, kind: QueryKind, x: &[f64], x2: Option<&[f64]>) -> f64 {
    let best = oracle.target_optimum().value;
    let own = best - oracle.target_value(x);
    match (kind, x2) {
        (QueryKind::Comp, Some(other)) => own.min(best - oracle.target_value(other)),
        _ => own,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub t: usize,
    pub kind: QueryKind,
    pub x: Vec<f64>,
    pub x2: Option<Vec<f64>>,
    pub cost: f64,
    pub cumulative_cost: f64,
    pub regret: f64,
    pub simple_regret: f64,
    /// Part of the random warm start rather than a policy decision.
    pub warm_start: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub entries: Vec<TraceEntry>,
}

impl RegretTrace {
    pub fn push(&mut self, kind: QueryKind, x: Vec<f64>, x2: Option<Vec<f64>>, cost: f64, cumulative_cost: f64, regret: f64, warm_start: bool) {
        let simple_regret = self.simple_regret().map_or(regret, |s| s.min(regret));
        let t = self.entries.len() + 1;
        self.entries.push(TraceEntry {
            t,
            kind,
            x,
            x2,
            cost,
            cumulative_cost,
            regret,
            simple_regret,
            warm_start,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn simple_regret(&self) -> Option<f64> {
        self.entries.last().map(|e| e.simple_regret)
    }

    pub fn total_cost(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.cumulative_cost)
    }

    pub fn count(&self, kind: QueryKind) -> usize {
        self.entries.iter().filter(|e| e.kind == kind).count()
    }

    /// Simple regret once cumulative spend first reaches `budget`, or at the end.
    pub fn simple_regret_at_cost(&self, budget: f64) -> Option<f64> {
        let mut last = None;
        for e in &self.entries {
            if e.cumulative_cost > budget * (1.0 + COST_TOLERANCE) {
                break;
            }
            last = Some(e.simple_regret);
        }
        last
    }
}
