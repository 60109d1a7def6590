mod common;

use std::sync::Arc;

use common::{currin_high, currin_low, logistic};
use duelopt::global_opt::BoxDomain;
use duelopt::oracles::{
    borda_truth, eval_borehole, eval_currin, true_optimum, verify_assumption1, verify_assumption2, Benchmark,
    BordaTruth, DuelingOracle, Fidelity, LinkFamily, LinkFunction, OracleSettings,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn oracle_1d(f: fn(f64) -> f64, fc: fn(f64) -> f64, link: LinkFunction, noise: f64) -> DuelingOracle {
    DuelingOracle::new(
        Arc::new(move |x: &[f64]| f(x[0])),
        Arc::new(move |x: &[f64]| fc(x[0])),
        link,
        noise,
        BoxDomain::unit(1),
    )
    .unwrap()
}

/// Published borehole formula with a given leading constant and offset.
fn borehole_reference(x: &[f64], lead: f64, offset: f64) -> f64 {
    let (rw, r, tu, hu, tl, hl, l, kw) = (x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]);
    let lr = (r / rw).ln();
    lead * tu * (hu - hl) / (lr * (offset + 2.0 * l * tu / (lr * rw * rw * kw) + tu / tl))
}

fn borehole_mid() -> Vec<f64> {
    let d = Benchmark::Borehole.domain();
    d.lower().iter().zip(d.upper()).map(|(a, b)| 0.5 * (a + b)).collect()
}

#[test]
fn currin_matches_closed_form() {
    let high = eval_currin(&[0.5, 0.5], Fidelity::High).unwrap();
    assert!((high - (1.0 - (-1.0f64).exp()) * 1868.5 / 159.5).abs() < 1e-12);
    assert!((high - 7.4052).abs() < 1e-4);
    assert_eq!(eval_currin(&[0.0, 0.0], Fidelity::High).unwrap(), 3.0);
    for x in [[0.5, 0.5], [0.1, 0.02], [0.97, 0.8], [0.3, 0.0]] {
        assert!((eval_currin(&x, Fidelity::High).unwrap() - currin_high(&x)).abs() < 1e-12);
        assert!((eval_currin(&x, Fidelity::Low).unwrap() - currin_low(&x)).abs() < 1e-12);
    }
    assert!(eval_currin(&[1.1, 0.5], Fidelity::High).is_err());
    assert!(eval_currin(&[0.5], Fidelity::Low).is_err());
}

#[test]
fn borehole_matches_published_formula() {
    let mid = borehole_mid();
    let high = eval_borehole(&mid, Fidelity::High).unwrap();
    let low = eval_borehole(&mid, Fidelity::Low).unwrap();
    assert!((high - borehole_reference(&mid, 2.0 * std::f64::consts::PI, 1.0)).abs() < 1e-9 * high);
    assert!((low - borehole_reference(&mid, 5.0, 1.5)).abs() < 1e-9 * low);
    assert!(high != low);
    let mut x = mid.clone();
    x[0] = 0.2;
    assert!(eval_borehole(&x, Fidelity::High).is_err());
}

#[test]
fn borehole_increases_with_well_radius() {
    let mut x = borehole_mid();
    let mut last = f64::NEG_INFINITY;
    for rw in [0.05, 0.075, 0.1, 0.125, 0.15] {
        x[0] = rw;
        let v = eval_borehole(&x, Fidelity::High).unwrap();
        assert!(v > last);
        last = v;
    }
}

#[test]
fn link_closed_forms() {
    let logistic_link = LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap();
    assert!((logistic_link.eval(3f64.ln()) - 0.75).abs() < 1e-15);
    let linear = LinkFunction::new(LinkFamily::Linear, 1.0).unwrap();
    assert!((linear.eval(0.4) - 0.7).abs() < 1e-15);
    assert_eq!(linear.eval(5.0), 1.0);
    for fam in [LinkFamily::Logistic, LinkFamily::Probit, LinkFamily::Linear] {
        assert_eq!(LinkFunction::new(fam, 0.7).unwrap().eval(0.0), 0.5);
    }
    let hot = LinkFunction::new(LinkFamily::Logistic, 2.0).unwrap();
    assert!((hot.eval(1.0) - logistic(0.5)).abs() < 1e-15);
}

proptest! {
    #[test]
    fn links_are_antisymmetric(u in -50.0f64..50.0, t in 0.01f64..10.0) {
        for fam in [LinkFamily::Logistic, LinkFamily::Probit, LinkFamily::Linear] {
            let l = LinkFunction::new(fam, t).unwrap();
            prop_assert!((l.eval(u) + l.eval(-u) - 1.0).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&l.eval(u)));
        }
    }

    #[test]
    fn links_are_monotone(u in -20.0f64..20.0, du in 0.0f64..5.0) {
        for fam in [LinkFamily::Logistic, LinkFamily::Probit, LinkFamily::Linear] {
            let l = LinkFunction::new(fam, 1.3).unwrap();
            prop_assert!(l.eval(u + du) >= l.eval(u));
        }
    }

    #[test]
    fn labels_stay_within_the_noise_band(x in 0.0f64..1.0, seed in any::<u64>()) {
        let o = oracle_1d(|x| 3.0 * x, |x| x, LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap(), 0.4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            let y = o.label_query(&[x], &mut rng).unwrap();
            prop_assert!((y - 3.0 * x).abs() <= 0.4);
        }
    }

    #[test]
    fn constant_shift_leaves_duels_unchanged(x in 0.0f64..1.0, x2 in 0.0f64..1.0) {
        let link = LinkFunction::new(LinkFamily::Probit, 0.3).unwrap();
        let a = oracle_1d(|x| x, |x| (3.0 * x).sin(), link, 0.0);
        let b = oracle_1d(|x| x, |x| (3.0 * x).sin() + 5.0, link, 0.0);
        prop_assert!((a.win_probability(&[x], &[x2]) - b.win_probability(&[x], &[x2])).abs() < 1e-12);
    }
}

#[test]
fn label_noise_averages_out() {
    let o = oracle_1d(|x| x * x, |x| x, LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap(), 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 100_000;
    let mean = (0..n).map(|_| o.label_query(&[0.6], &mut rng).unwrap()).sum::<f64>() / n as f64;
    assert!((mean - 0.36).abs() < 3.0 * 0.5 / (3.0 * n as f64).sqrt());
    let exact = oracle_1d(|x| x * x, |x| x, LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap(), 0.0);
    assert_eq!(exact.label_query(&[0.6], &mut rng).unwrap(), 0.36);
    assert!(exact.label_query(&[1.6], &mut rng).is_err());
}

#[test]
fn duel_frequency_follows_the_link() {
    let o = oracle_1d(|x| x, |x| x * 3f64.ln(), LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 100_000;
    let wins = (0..n).filter(|_| o.compare(&[1.0], &[0.0], &mut rng).unwrap()).count();
    let freq = wins as f64 / n as f64;
    assert!((freq - 0.75).abs() < 3.0 * (0.75 * 0.25 / n as f64).sqrt(), "{freq}");
    assert!((o.win_probability(&[0.0], &[1.0]) - 0.25).abs() < 1e-15);
    assert!(o.compare(&[0.0], &[2.0], &mut rng).is_err());
}

#[test]
fn borda_of_identity_under_linear_link() {
    let o = oracle_1d(|x| x, |x| x, LinkFunction::new(LinkFamily::Linear, 1.0).unwrap(), 0.0);
    let bt = BordaTruth::new(&o);
    for x in [0.0, 0.3, 1.0] {
        assert!((borda_truth(&bt, &[x]).unwrap() - (x + 0.5) / 2.0).abs() < 1e-10);
    }
    assert!((bt.best() - 0.75).abs() < 1e-6);
    let lip = verify_assumption2(&bt, &BoxDomain::unit(1).grid(21)).unwrap();
    assert!((lip.l1 - 2.0).abs() < 1e-6 && (lip.l2 - 0.5).abs() < 1e-6);
}

#[test]
fn borda_quadrature_matches_monte_carlo_on_currin() {
    let o = DuelingOracle::for_benchmark(
        Benchmark::CurrinExp,
        &OracleSettings {
            link: LinkFamily::Logistic,
            temperature: Some(1.0),
            noise: Some(0.0),
        },
    )
    .unwrap();
    let bt = BordaTruth::new(&o);
    let x = [0.5, 0.5];
    let q = bt.value(&x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 1_000_000;
    let fx = currin_low(&x);
    let samples: Vec<f64> = (0..n)
        .map(|_| logistic(fx - currin_low(&[rng.random::<f64>(), rng.random::<f64>()])))
        .collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let sd = (samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    assert!((q - mean).abs() < 3.0 * sd / (n as f64).sqrt(), "{q} vs {mean}");
}

#[test]
fn borda_quadrature_is_resolution_stable() {
    let o = DuelingOracle::for_benchmark(Benchmark::CurrinExp, &OracleSettings::default()).unwrap();
    let coarse = BordaTruth::with_resolution(&o, 100, 1000);
    let fine = BordaTruth::with_resolution(&o, 200, 1000);
    for x in [[0.1, 0.1], [0.5, 0.5], [0.9, 0.2], [0.23, 0.0]] {
        let (a, b) = (coarse.value(&x).unwrap(), fine.value(&x).unwrap());
        assert!((a - b).abs() < 1e-4, "{x:?}: {a} vs {b}");
        assert!((0.0..=1.0).contains(&b));
    }
}

#[test]
fn currin_optimum_beats_random_search() {
    let o = DuelingOracle::for_benchmark(Benchmark::CurrinExp, &OracleSettings::default()).unwrap();
    let opt = o.target_optimum();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let bound = (0..1_000_000)
        .map(|_| currin_high(&[rng.random::<f64>(), rng.random::<f64>()]))
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(opt.value >= bound - 1e-3);
    assert!((opt.value - currin_high(&opt.argmax)).abs() < 1e-12);
}

#[test]
fn optimum_of_a_paraboloid() {
    let d = BoxDomain::unit(2);
    let opt = true_optimum(&|x: &[f64]| -((x[0] - 0.37).powi(2) + (x[1] - 0.81).powi(2)), &d);
    assert!((opt.argmax[0] - 0.37).abs() < 1e-4 && (opt.argmax[1] - 0.81).abs() < 1e-4);
    assert!(opt.value.abs() < 1e-8);
    let flat = true_optimum(&|_: &[f64]| 2.5, &d);
    assert_eq!(flat.value, 2.5);
}

#[test]
fn bias_bound_cases() {
    let link = LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap();
    let grid = BoxDomain::unit(1).grid(101);
    let same = oracle_1d(|x| (4.0 * x).sin(), |x| (4.0 * x).sin(), link, 0.0);
    assert!(verify_assumption1(&same, &grid).unwrap() < 1e-12);
    let shifted = oracle_1d(|x| (4.0 * x).sin(), |x| (4.0 * x).sin() + 5.0, link, 0.0);
    assert!(verify_assumption1(&shifted, &grid).unwrap() < 1e-9);
}

#[test]
fn currin_assumption_estimates() {
    let o = DuelingOracle::for_benchmark(Benchmark::CurrinExp, &OracleSettings::default()).unwrap();
    let zeta = verify_assumption1(&o, &BoxDomain::unit(2).grid(50)).unwrap();
    assert!(zeta.is_finite() && zeta > 0.0);
    let bt = BordaTruth::new(&o);
    let lip = verify_assumption2(&bt, &BoxDomain::unit(2).grid(20)).unwrap();
    assert!(lip.l1.is_finite() && lip.l2.is_finite());
    assert!(lip.l1 * lip.l2 >= 1.0);
}

#[test]
fn degenerate_lipschitz_grid_is_rejected() {
    let o = oracle_1d(|_| 1.0, |_| 1.0, LinkFunction::new(LinkFamily::Logistic, 1.0).unwrap(), 0.0);
    let bt = BordaTruth::new(&o);
    assert!(verify_assumption2(&bt, &BoxDomain::unit(1).grid(11)).is_err());
}
