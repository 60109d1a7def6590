use duelopt::global_opt::{constrained_maximize, direct_maximize, BoxDomain, DirectSearch};
use proptest::prelude::*;

fn sin_line(x: &[f64]) -> f64 {
    (10.0 * x[0]).sin() + x[0]
}

fn grid_max_1d(f: impl Fn(&[f64]) -> f64, n: usize) -> f64 {
    (0..n).map(|i| f(&[i as f64 / (n - 1) as f64])).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn sine_plus_line_matches_fine_grid() {
    let best = grid_max_1d(sin_line, 100_000);
    let r = direct_maximize(sin_line, &BoxDomain::unit(1), 300).unwrap();
    assert!((r.value - best).abs() < 1e-3, "{} vs {best}", r.value);
    assert!(r.evals_used <= 300);
}

#[test]
fn boundary_optimum_under_constraint() {
    let r = constrained_maximize(|x| x[0] + x[1], |x| 0.5 - x[0], &BoxDomain::unit(2), 800).unwrap();
    assert!(r.feasible);
    assert!((r.argmax[0] - 0.5).abs() < 2e-2 && (r.argmax[1] - 1.0).abs() < 2e-2, "{:?}", r.argmax);
    assert!(0.5 - r.argmax[0] >= 0.0);
}

#[test]
fn quadratic_on_a_shifted_box() {
    let domain = BoxDomain::new(vec![-2.0, 10.0], vec![3.0, 20.0]).unwrap();
    let r = direct_maximize(|x| -((x[0] - 1.0).powi(2) + (x[1] - 12.5).powi(2) / 4.0), &domain, 600).unwrap();
    assert!((r.argmax[0] - 1.0).abs() < 5e-2 && (r.argmax[1] - 12.5).abs() < 0.1, "{:?}", r.argmax);
}

#[test]
fn never_feasible_reports_best_unconstrained_point() {
    let r = constrained_maximize(|x| x[0], |_| -1.0, &BoxDomain::unit(2), 200).unwrap();
    assert!(!r.feasible);
    assert_eq!(r.evals_used, 200);
}

#[test]
fn batch_search_equals_pointwise_search() {
    let f = |x: &[f64]| (7.0 * x[0]).cos() * (3.0 * x[1]).sin() + 0.1 * x[2];
    let domain = BoxDomain::unit(3);
    let a = DirectSearch::new(700).maximize(&domain, f).unwrap();
    let b = DirectSearch::new(700)
        .maximize_batch(&domain, |xs, out| out.extend(xs.iter().map(|x| f(x))))
        .unwrap();
    assert_eq!(a, b);
}

fn objective(kind: u8) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| match kind {
        0 => -(x[0] - 0.3).powi(2) - (x[1] - 0.7).powi(2),
        1 => (5.0 * x[0]).sin() * (4.0 * x[1]).cos(),
        _ => -(x[0] + x[1] - 1.2).abs(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn more_budget_never_hurts(kind in 0u8..3, small in 1usize..200, extra in 0usize..200) {
        let d = BoxDomain::unit(2);
        let a = direct_maximize(objective(kind), &d, small).unwrap();
        let b = direct_maximize(objective(kind), &d, small + extra).unwrap();
        prop_assert!(b.value >= a.value);
    }

    #[test]
    fn results_lie_in_the_box_and_report_their_value(
        kind in 0u8..3,
        lo in prop::collection::vec(-5.0f64..0.0, 2),
        width in prop::collection::vec(0.1f64..5.0, 2),
        evals in 1usize..300,
    ) {
        let hi: Vec<f64> = lo.iter().zip(&width).map(|(l, w)| l + w).collect();
        let d = BoxDomain::new(lo, hi).unwrap();
        let f = objective(kind);
        let r = direct_maximize(&f, &d, evals).unwrap();
        prop_assert!(d.contains(&r.argmax));
        prop_assert_eq!(r.value, f(&r.argmax));
        prop_assert!(r.evals_used <= evals);
    }

    #[test]
    fn feasible_results_satisfy_the_constraint(kind in 0u8..3, cut in 0.05f64..0.95, evals in 1usize..300) {
        let d = BoxDomain::unit(2);
        let c = move |x: &[f64]| cut - x[0];
        let r = constrained_maximize(objective(kind), c, &d, evals).unwrap();
        if r.feasible {
            prop_assert!(c(&r.argmax) >= 0.0);
        }
    }
}
