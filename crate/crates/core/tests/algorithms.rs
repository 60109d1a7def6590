use std::fmt::Write as _;
use std::sync::{Arc, LazyLock};

use duelopt::accounting::{CostModel, Ledger, QueryKind, RegretTrace};
use duelopt::algorithms::{adaptive_threshold, run, run_with_observer, AlgConfig, AlgState, Phase, Policy, QueryDecision};
use duelopt::global_opt::BoxDomain;
use duelopt::gp::KernelSpec;
use duelopt::oracles::{Benchmark, DuelingOracle, LinkFamily, LinkFunction, OracleSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

static CURRIN: LazyLock<DuelingOracle> =
    LazyLock::new(|| DuelingOracle::for_benchmark(Benchmark::CurrinExp, &OracleSettings::default()).unwrap());

static BUMP: LazyLock<DuelingOracle> = LazyLock::new(|| {
    DuelingOracle::new(
        Arc::new(|x: &[f64]| (-((x[0] - 0.3) / 0.15).powi(2)).exp()),
        Arc::new(|x: &[f64]| (-((x[0] - 0.35) / 0.15).powi(2)).exp()),
        LinkFunction::new(LinkFamily::Logistic, 0.25).unwrap(),
        0.05,
        BoxDomain::unit(1),
    )
    .unwrap()
});

fn two_phase(gamma: f64) -> AlgConfig {
    let mut c = AlgConfig::new(Policy::CompGpUcb);
    c.gamma = gamma;
    c.zeta = 0.05;
    c.l2 = 0.1;
    c
}

fn fresh_state(policy: Policy, dim: usize) -> (AlgConfig, AlgState) {
    let mut c = AlgConfig::new(policy);
    c.kernel = KernelSpec::squared_exponential(0.2, 0.04).unwrap();
    let s = AlgState::new(&c, dim, 0.05).unwrap();
    (c, s)
}

fn label_at(x: &[f64]) -> QueryDecision {
    QueryDecision {
        kind: QueryKind::Label,
        x: x.to_vec(),
        x2: None,
        phase: Phase::One,
    }
}

fn duel_at(x: &[f64], x2: &[f64]) -> QueryDecision {
    QueryDecision {
        kind: QueryKind::Comp,
        x: x.to_vec(),
        x2: Some(x2.to_vec()),
        phase: Phase::One,
    }
}

#[test]
fn label_only_policy_spends_everything_on_labels() {
    let costs = CostModel::new(1.0, 0.1, 100.0).unwrap();
    let out = run(&AlgConfig::new(Policy::GpUcb), &CURRIN, &costs, 11).unwrap();
    assert_eq!(out.trace.count(QueryKind::Label), 100);
    assert_eq!(out.trace.count(QueryKind::Comp), 0);
    assert!(out.trace.total_cost() <= 100.0 + 1e-9);
    assert_eq!(out.trace.entries.iter().filter(|e| e.warm_start).count(), 10);
}

#[test]
fn runs_are_deterministic_per_seed() {
    let costs = CostModel::new(1.0, 0.1, 14.0).unwrap();
    let cfg = two_phase(0.3);
    let a = run(&cfg, &CURRIN, &costs, 5).unwrap();
    let b = run(&cfg, &CURRIN, &costs, 5).unwrap();
    assert_eq!(a.trace, b.trace);
    let c = run(&cfg, &CURRIN, &costs, 6).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn smaller_budget_gives_a_prefix_of_the_trace() {
    let cfg = two_phase(0.3);
    let long = run(&cfg, &BUMP, &CostModel::new(1.0, 0.2, 30.0).unwrap(), 3).unwrap();
    for budget in [12.0, 19.5, 24.0] {
        let short = run(&cfg, &BUMP, &CostModel::new(1.0, 0.2, budget).unwrap(), 3).unwrap();
        let n = short.trace.len();
        assert!(n < long.trace.len());
        assert_eq!(short.trace.entries[..], long.trace.entries[..n], "budget {budget}");
        assert!(long.trace.entries[n].cumulative_cost > budget);
    }
}

#[test]
fn two_phase_run_respects_phase_order_and_filter() {
    let costs = CostModel::new(1.0, 0.1, 25.0).unwrap();
    let cfg = two_phase(0.25);
    let mut phase_one_labels = 0;
    let mut checked = 0;
    let mut first_exit = None;
    let mut fallbacks_seen = 0;
    let out = run_with_observer(&cfg, &CURRIN, &costs, 9, |v| {
        let x = v.decision.x.clone();
        match v.decision.phase {
            Phase::One => {
                if v.decision.kind == QueryKind::Label {
                    phase_one_labels += 1;
                }
                let (_, sd) = v.state.comp_mean_sd(&x);
                if first_exit.is_none() && v.beta_comp * sd <= cfg.gamma {
                    first_exit = Some(v.t);
                }
            }
            Phase::Two => {
                let fallbacks = v.state.infeasible_fallbacks();
                let fell_back = fallbacks > fallbacks_seen;
                fallbacks_seen = fallbacks;
                if v.decision.kind == QueryKind::Label && !fell_back {
                    assert!(v.state.phi(&x, v.beta_comp, v.slack).unwrap() >= 0.0);
                    checked += 1;
                }
            }
        }
        assert_eq!(v.decision.x2.is_some(), v.decision.kind == QueryKind::Comp);
        assert!(v.decision.x.iter().all(|c| (0.0..=1.0).contains(c)));
    })
    .unwrap();
    assert_eq!(phase_one_labels, 0);
    assert!(out.phase_two_start.is_some(), "phase one never ended");
    assert_eq!(out.phase_two_start, first_exit);
    assert!(checked > 0);
    assert!(out.ledger.spent() <= 25.0 + 1e-9);
    let (lo, hi) = costs.n_bounds();
    assert!(out.trace.len() + 1 >= lo && out.trace.len() <= hi);
}

#[test]
fn model_targets_stay_in_their_ranges() {
    let costs = CostModel::new(1.0, 0.2, 20.0).unwrap();
    let eta = BUMP.noise();
    let out = run_with_observer(&two_phase(0.3), &BUMP, &costs, 4, |v| {
        assert!(v.state.gp_comp().targets().iter().all(|&z| z == 0.0 || z == 1.0));
        assert!(v.state.gp_label().targets().iter().all(|&y| (-eta..=1.0 + eta).contains(&y)));
        assert_eq!(v.state.fr_lcb().is_some(), v.state.phase() == Phase::Two);
    })
    .unwrap();
    assert!(out.trace.count(QueryKind::Label) > 0);
}

#[test]
fn duel_only_policy_never_labels_after_warm_start() {
    let costs = CostModel::new(1.0, 0.2, 20.0).unwrap();
    let out = run(&AlgConfig::new(Policy::ComparisonOnly), &BUMP, &costs, 2).unwrap();
    assert_eq!(out.trace.count(QueryKind::Label), 0);
    assert_eq!(out.phase_two_start, None);
    assert_eq!(out.trace.len(), 100);
}

#[test]
fn budget_within_warm_start_is_rejected() {
    let costs = CostModel::new(1.0, 0.1, 10.0).unwrap();
    assert!(run(&two_phase(0.1), &BUMP, &costs, 0).is_err());
}

#[test]
fn adaptive_threshold_example() {
    assert_eq!(adaptive_threshold(80, 0.1, 1.6), 10);
    assert_eq!(adaptive_threshold(81, 0.1, 1.6), 11);
    assert_eq!(adaptive_threshold(3, 0.5, 0.5), 2);
}

#[test]
fn bias_guess_doubles_until_it_passes_the_cap() {
    let mut c = AlgConfig::new(Policy::CompGpUcbAdaptive);
    c.zeta0 = Some(0.1);
    c.zeta_max = Some(1.6);
    let mut s = AlgState::new(&c, 1, 0.05).unwrap();
    let threshold = adaptive_threshold(80, 0.1, 1.6);
    let mut seen = vec![s.zeta_k()];
    let mut steps = 0;
    while !s.is_finished() {
        s.zeta_schedule_step(threshold, 1.6);
        steps += 1;
        if s.labels_at_level() == 0 {
            seen.push(s.zeta_k());
        }
    }
    let expect = [0.1, 0.2, 0.4, 0.8, 1.6, 3.2];
    assert_eq!(seen.len(), expect.len());
    for (a, b) in seen.iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(steps, 5 * threshold);
    assert_eq!(s.level(), 5);
}

#[test]
fn duels_do_not_advance_the_label_counter() {
    let mut c = AlgConfig::new(Policy::CompGpUcbAdaptive);
    c.zeta0 = Some(0.1);
    c.zeta_max = Some(1.6);
    let mut s = AlgState::new(&c, 1, 0.05).unwrap();
    s.zeta_schedule_step(10, 1.6);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.1, 10.0).unwrap());
    let mut trace = RegretTrace::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    s.query_dispatch(&duel_at(&[0.2], &[0.7]), &BUMP, &mut ledger, &mut trace, &mut rng, false).unwrap();
    assert_eq!(s.labels_at_level(), 1);
}

#[test]
fn adaptive_run_caps_labels_per_level() {
    let mut c = AlgConfig::new(Policy::CompGpUcbAdaptive);
    c.zeta0 = Some(0.02);
    c.zeta_max = Some(0.32);
    c.l2 = 0.5;
    c.gamma = 0.3;
    let costs = CostModel::new(1.0, 0.2, 40.0).unwrap();
    let threshold = adaptive_threshold(costs.n_bounds().0, 0.02, 0.32);
    let mut per_level = vec![0usize; 8];
    let mut last_slack = 0.0;
    run_with_observer(&c, &BUMP, &costs, 8, |v| {
        if v.decision.kind == QueryKind::Label && v.decision.phase == Phase::Two {
            per_level[v.state.level()] += 1;
        }
        if v.decision.phase == Phase::Two {
            assert!((v.slack - 2.0 * 0.5 * v.state.zeta_k()).abs() < 1e-12);
            assert!(v.slack >= last_slack);
            last_slack = v.slack;
        }
    })
    .unwrap();
    assert!(per_level.iter().all(|&n| n <= threshold), "{per_level:?} > {threshold}");
}

#[test]
fn empty_posterior_exits_when_gamma_matches_prior_width() {
    let (c, mut s) = fresh_state(Policy::CompGpUcb, 2);
    let beta = 2.0;
    let prior_sd = 0.04f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let (d, exit) = s.phase1_step(beta, beta * prior_sd + 1e-12, 200, &mut rng).unwrap();
    assert!(exit);
    assert_eq!(d.kind, QueryKind::Comp);
    assert!(d.x2.is_some());
    let lcb = s.compute_fr_lcb().unwrap();
    assert!((lcb - (c.comp_prior_mean - beta * prior_sd)).abs() < 1e-12);
    assert_eq!(s.phase(), Phase::Two);
    assert!(s.compute_fr_lcb().is_err());
    assert!(s.phase1_step(beta, 1.0, 200, &mut rng).is_err());
}

#[test]
fn zero_gamma_never_exits() {
    let (_, mut s) = fresh_state(Policy::CompGpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.1, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    for _ in 0..60 {
        let (d, exit) = s.phase1_step(0.5, 0.0, 100, &mut rng).unwrap();
        assert!(!exit);
        s.query_dispatch(&d, &BUMP, &mut ledger, &mut trace, &mut rng, false).unwrap();
    }
}

#[test]
fn phase_two_with_wide_gamma_always_labels() {
    let (_, mut s) = fresh_state(Policy::CompGpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.1, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    for x in [0.1, 0.5, 0.8] {
        s.query_dispatch(&label_at(&[x]), &BUMP, &mut ledger, &mut trace, &mut rng, true).unwrap();
    }
    let (_, exit) = s.phase1_step(1.0, 10.0, 100, &mut rng).unwrap();
    assert!(exit);
    s.compute_fr_lcb().unwrap();
    for _ in 0..5 {
        let d = s.phase2_step(1.0, 1.0, 0.0, 10.0, 100, &mut rng).unwrap();
        assert_eq!(d.kind, QueryKind::Label);
        assert_eq!(d.phase, Phase::Two);
        s.query_dispatch(&d, &BUMP, &mut ledger, &mut trace, &mut rng, false).unwrap();
    }
}

#[test]
fn vacuous_filter_matches_label_ucb_choice() {
    let (_, mut s) = fresh_state(Policy::CompGpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.1, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    for x in [0.1, 0.3, 0.45, 0.8] {
        s.query_dispatch(&label_at(&[x]), &BUMP, &mut ledger, &mut trace, &mut rng, true).unwrap();
    }
    s.phase1_step(1.0, 10.0, 100, &mut rng).unwrap();
    s.compute_fr_lcb().unwrap();
    let constrained = s.phase2_step(1.0, 2.0, 1e6, 10.0, 300, &mut rng).unwrap();
    let free = s.gp_ucb_step(2.0, 300).unwrap();
    let ucb = |s: &mut AlgState, x: &[f64]| {
        let (m, sd) = s.label_mean_sd(x);
        m + 2.0 * sd
    };
    let a = ucb(&mut s, &constrained.x);
    let b = ucb(&mut s, &free.x);
    assert!((a - b).abs() < 1e-9, "{a} vs {b}");
}

#[test]
fn label_step_climbs_to_a_single_high_observation() {
    let (_, mut s) = fresh_state(Policy::GpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.1, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    s.query_dispatch(&label_at(&[0.3]), &BUMP, &mut ledger, &mut trace, &mut rng, true).unwrap();
    let y = s.gp_label().targets()[0];
    assert!(y > 0.0);
    for beta in [0.0, 0.1] {
        let d = s.gp_ucb_step(beta, 400).unwrap();
        assert_eq!(d.kind, QueryKind::Label);
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 0..=20_000 {
            let x = i as f64 / 20_000.0;
            let (m, sd) = s.label_mean_sd(&[x]);
            if m + beta * sd > best.0 {
                best = (m + beta * sd, x);
            }
        }
        assert!((d.x[0] - best.1).abs() < 1e-2, "beta {beta}: {} vs {}", d.x[0], best.1);
        assert!((d.x[0] - 0.3).abs() < 2e-2);
    }
}

#[test]
fn dispatch_updates_exactly_one_model() {
    let (_, mut s) = fresh_state(Policy::CompGpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.25, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    let before = s.gp_comp().clone();
    assert!(s.query_dispatch(&duel_at(&[0.4], &[0.9]), &BUMP, &mut ledger, &mut trace, &mut rng, false).unwrap());
    assert_eq!((s.gp_comp().len(), s.gp_label().len()), (1, 0));
    assert_eq!(trace.entries[0].cost, 0.25);
    let mut replay = before;
    replay.append(&[0.4], s.gp_comp().targets()[0]).unwrap();
    for x in [0.0, 0.4, 0.77] {
        assert_eq!(replay.query(&[x]).unwrap(), s.gp_comp().query(&[x]).unwrap());
    }
    assert!(s.query_dispatch(&label_at(&[0.3]), &BUMP, &mut ledger, &mut trace, &mut rng, true).unwrap());
    assert_eq!((s.gp_comp().len(), s.gp_label().len()), (1, 1));
    assert_eq!(trace.entries[1].cost, 1.0);
    assert_eq!(ledger.spent(), 1.25);
    assert_eq!(s.t(), 2);
}

#[test]
fn dispatch_rejects_inconsistent_decisions() {
    let (_, mut s) = fresh_state(Policy::CompGpUcb, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut ledger = Ledger::new(CostModel::new(1.0, 0.25, 100.0).unwrap());
    let mut trace = RegretTrace::default();
    let mut bad = label_at(&[0.3]);
    bad.x2 = Some(vec![0.1]);
    assert!(s.query_dispatch(&bad, &BUMP, &mut ledger, &mut trace, &mut rng, true).is_err());
    assert!(s.query_dispatch(&label_at(&[0.3]), &BUMP, &mut ledger, &mut trace, &mut rng, false).is_err());
    let mut tight = Ledger::new(CostModel::new(1.0, 0.25, 0.5).unwrap());
    assert!(!s.query_dispatch(&label_at(&[0.3]), &BUMP, &mut tight, &mut trace, &mut rng, true).unwrap());
    assert_eq!(s.t(), 0);
    assert!(trace.is_empty());
}

fn render(trace: &RegretTrace, phase_two_start: Option<usize>) -> String {
    let mut s = format!("phase_two_start {phase_two_start:?}\n");
    for e in &trace.entries {
        writeln!(
            s,
            "{} {} {} {:?} {:?} {:?} {:?} {:?} {:?}",
            e.t,
            e.kind.as_str(),
            e.warm_start,
            e.x,
            e.x2,
            e.cost,
            e.cumulative_cost,
            e.regret,
            e.simple_regret
        )
        .unwrap();
    }
    s
}

/// Regenerate with `DUELOPT_BLESS=1 cargo test --test algorithms golden`.
#[test]
fn golden_trace_regression() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/golden_currin_trace.txt");
    let costs = CostModel::new(1.0, 0.1, 20.0).unwrap();
    let out = run(&two_phase(0.25), &CURRIN, &costs, 2024).unwrap();
    let got = render(&out.trace, out.phase_two_start);
    if std::env::var_os("DUELOPT_BLESS").is_some() {
        std::fs::write(path, &got).unwrap();
    }
    let want = std::fs::read_to_string(path).expect("golden trace missing; rerun with DUELOPT_BLESS=1");
    assert!(got == want, "trace drifted from {path}");
}
