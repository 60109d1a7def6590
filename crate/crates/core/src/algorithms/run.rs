//! The run loop: warm start, hyperparameter refits and policy steps until the budget blocks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{AlgConfig, BetaConfig, Policy};
use super::state::{adaptive_threshold, AlgState, Phase, QueryDecision};
use crate::accounting::{CostModel, Ledger, QueryKind, RegretTrace};
use crate::error::{Error, Result};
use crate::global_opt::BoxDomain;
use crate::gp::{fit_hyperparams, BetaSchedule, FitBounds, GpPosterior, InfoGainCurve, KernelSpec};
use crate::oracles::DuelingOracle;
use crate::special::halton;

/// Smallest label-model noise, used when the oracle is noiseless.
const MIN_LABEL_NOISE: f64 = 1e-6;
/// Output-scale search interval of the duel model (Borda scores live in [0, 1]).
const COMP_SCALE_BOUNDS: [f64; 2] = [1e-2, 1.0];
/// The label model's output scale is searched within this factor of the target variance.
const LABEL_SCALE_SPREAD: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trace: RegretTrace,
    pub ledger: Ledger,
    /// Query count when phase two began, if it did.
    pub phase_two_start: Option<usize>,
    pub fr_lcb: Option<f64>,
    pub infeasible_fallbacks: usize,
    pub final_zeta: f64,
    pub comp_kernel: KernelSpec,
    pub label_kernel: KernelSpec,
}

/// What an observer sees right before a policy decision is dispatched.
pub struct StepView<'a> {
    pub t: usize,
    pub decision: &'a QueryDecision,
    pub beta_comp: f64,
    pub beta_label: f64,
    /// Bias allowance added to the filter.
    pub slack: f64,
    pub state: &'a mut AlgState,
}

pub fn run(config: &AlgConfig, oracle: &DuelingOracle, costs: &CostModel, seed: u64) -> Result<RunOutcome> {
    run_with_observer(config, oracle, costs, seed, |_| {})
}

pub fn run_with_observer<F>(
    config: &AlgConfig,
    oracle: &DuelingOracle,
    costs: &CostModel,
    seed: u64,
    mut observer: F,
) -> Result<RunOutcome>
where
    F: FnMut(&mut StepView<'_>),
{
    config.validate()?;
    costs.validate()?;
    if costs.budget <= config.warm_start {
        return Err(Error::invalid(format!(
            "budget {} must exceed the warm-start budget {}",
            costs.budget, config.warm_start
        )));
    }
    let dim = oracle.domain().dim();
    let unit = BoxDomain::unit(dim);
    let label_noise = config.label_noise.unwrap_or(oracle.noise()).max(MIN_LABEL_NOISE);
    let mut state = AlgState::new(config, dim, label_noise)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ledger = Ledger::new(*costs);
    let mut trace = RegretTrace::default();

    let (warm_comp, warm_label) = match config.policy {
        Policy::GpUcb => (0, costs.affordable(QueryKind::Label, config.warm_start)),
        Policy::ComparisonOnly => (costs.affordable(QueryKind::Comp, config.warm_start), 0),
        _ => (
            costs.affordable(QueryKind::Comp, config.warm_start / 2.0),
            costs.affordable(QueryKind::Label, config.warm_start / 2.0),
        ),
    };
    for i in 0..warm_comp + warm_label {
        let decision = if i < warm_comp {
            let x = unit.sample_uniform(&mut rng);
            let x2 = unit.sample_uniform(&mut rng);
            QueryDecision {
                kind: QueryKind::Comp,
                x,
                x2: Some(x2),
                phase: Phase::One,
            }
        } else {
            QueryDecision {
                kind: QueryKind::Label,
                x: unit.sample_uniform(&mut rng),
                x2: None,
                phase: Phase::One,
            }
        };
        if !state.query_dispatch(&decision, oracle, &mut ledger, &mut trace, &mut rng, true)? {
            break;
        }
    }

    refit_comp(&mut state, config)?;
    refit_label(&mut state, config)?;
    let mut beta_comp = build_beta(&config.beta_comp, state.gp_comp(), dim)?;
    let mut beta_label = build_beta(&config.beta_label, state.gp_label(), dim)?;

    let acq = config.acq_evals(dim);
    let (n_lower, _) = costs.n_bounds();
    let adaptive = match config.policy {
        Policy::CompGpUcbAdaptive => {
            let (z0, zmax) = config.adaptive_range()?;
            Some((adaptive_threshold(n_lower, z0, zmax), zmax))
        }
        _ => None,
    };
    let gamma = if config.policy == Policy::ComparisonOnly { 0.0 } else { config.gamma };
    let (mut comp_fresh, mut label_fresh) = (0usize, 0usize);
    let comp_interval = |n: usize| config.refit_comp_every.max((config.refit_comp_growth * n as f64).ceil() as usize);
    let mut comp_due = comp_interval(state.gp_comp().len());
    let mut phase_two_start = None;

    while !ledger.is_terminal() && !state.is_finished() {
        let t = state.t() + 1;
        let br = beta_comp.value(t)?;
        let bl = beta_label.value(t)?;
        let slack = match config.policy {
            Policy::CompGpUcb => config.l2 * config.zeta,
            Policy::CompGpUcbAdaptive => 2.0 * config.l2 * state.zeta_k(),
            Policy::GpUcb | Policy::ComparisonOnly => 0.0,
        };
        let (decision, exit) = match (config.policy, state.phase()) {
            (Policy::GpUcb, _) => (state.gp_ucb_step(bl, acq)?, false),
            (_, Phase::One) => state.phase1_step(br, gamma, acq, &mut rng)?,
            (_, Phase::Two) => (state.phase2_step(br, bl, slack, gamma, acq, &mut rng)?, false),
        };
        if !ledger.can_afford(decision.kind) {
            ledger.mark_terminal();
            break;
        }
        observer(&mut StepView {
            t,
            decision: &decision,
            beta_comp: br,
            beta_label: bl,
            slack,
            state: &mut state,
        });
        if !state.query_dispatch(&decision, oracle, &mut ledger, &mut trace, &mut rng, false)? {
            break;
        }
        if exit {
            state.compute_fr_lcb()?;
            phase_two_start = Some(state.t());
        }
        match decision.kind {
            QueryKind::Comp => {
                comp_fresh += 1;
                if config.refresh_lcb && decision.phase == Phase::Two {
                    state.refresh_lcb_at(&decision.x, br);
                }
            }
            QueryKind::Label => {
                label_fresh += 1;
                if let (Some((threshold, zmax)), Phase::Two) = (adaptive, decision.phase) {
                    state.zeta_schedule_step(threshold, zmax);
                }
            }
        }
        if config.refit && comp_fresh >= comp_due {
            comp_fresh = 0;
            refit_comp(&mut state, config)?;
            comp_due = comp_interval(state.gp_comp().len());
        }
        if config.refit && label_fresh >= config.refit_label_every {
            label_fresh = 0;
            refit_label(&mut state, config)?;
        }
    }

    Ok(RunOutcome {
        trace,
        phase_two_start,
        fr_lcb: state.fr_lcb(),
        infeasible_fallbacks: state.infeasible_fallbacks(),
        final_zeta: state.zeta_k(),
        comp_kernel: *state.gp_comp().kernel(),
        label_kernel: *state.gp_label().kernel(),
        ledger,
    })
}

fn build_beta(cfg: &BetaConfig, gp: &GpPosterior, dim: usize) -> Result<BetaSchedule> {
    match *cfg {
        BetaConfig::Heuristic { epsilon } => BetaSchedule::heuristic(epsilon),
        BetaConfig::Theoretical {
            rkhs_bound,
            delta,
            grid_points,
        } => {
            let curve = InfoGainCurve::new(*gp.kernel(), halton(grid_points, dim), gp.noise())?;
            BetaSchedule::theoretical(rkhs_bound, delta, curve)
        }
    }
}

/// Evenly strided subset of at most `cap` observations, centered by `offset`.
fn fit_data(gp: &GpPosterior, cap: usize, offset: f64) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = gp.len();
    let m = n.min(cap.max(1));
    (0..m)
        .map(|k| {
            let i = k * n / m;
            (gp.point(i).to_vec(), gp.targets()[i] - offset)
        })
        .unzip()
}

fn refit_comp(state: &mut AlgState, config: &AlgConfig) -> Result<()> {
    let gp = state.gp_comp();
    if gp.is_empty() || !config.refit {
        return Ok(());
    }
    let (xs, ys) = fit_data(gp, config.fit_max_points, gp.prior_mean());
    let bounds = FitBounds {
        lengthscale: config.lengthscale_bounds,
        scale: COMP_SCALE_BOUNDS,
    };
    let fitted = fit_hyperparams(gp.kernel(), &xs, &ys, gp.noise(), &bounds, config.fit_budget)?;
    if fitted != *gp.kernel() {
        state.gp_comp_mut().set_kernel(fitted);
    }
    Ok(())
}

fn refit_label(state: &mut AlgState, config: &AlgConfig) -> Result<()> {
    let gp = state.gp_label();
    if gp.is_empty() {
        return Ok(());
    }
    let n = gp.len() as f64;
    let mean = gp.targets().iter().sum::<f64>() / n;
    if !config.refit {
        state.gp_label_mut().set_prior_mean(mean);
        return Ok(());
    }
    let var = gp.targets().iter().map(|y| (y - mean) * (y - mean)).sum::<f64>() / n;
    let var = var.max(gp.noise() * gp.noise()).max(1e-12);
    let (xs, ys) = fit_data(gp, config.fit_max_points, mean);
    let bounds = FitBounds {
        lengthscale: config.lengthscale_bounds,
        scale: [var / LABEL_SCALE_SPREAD, var * LABEL_SCALE_SPREAD],
    };
    let fitted = fit_hyperparams(gp.kernel(), &xs, &ys, gp.noise(), &bounds, config.fit_budget)?;
    let gp = state.gp_label_mut();
    if fitted != *gp.kernel() {
        gp.set_kernel(fitted);
    }
    gp.set_prior_mean(mean);
    Ok(())
}
