//! Independent oracles for the analytic routines: adaptive quadrature for
//! the Beta segments, the closed-form cubic for 3-games, and brute-force
//! search for boundaries and matchings.

use blindseq_core::beta::{beta_segment, binomial};
use blindseq_core::*;

/// Adaptive Simpson quadrature.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(a, m, fa, flm, fm);
        let right = simpson(m, b, fm, frm, fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    recurse(f, a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), tol, 40)
}

#[test]
fn beta_segment_matches_quadrature() {
    let integrand = |k: usize, n: usize| move |x: f64| x.powi(k as i32 - 1) * (1.0 - x).powi((n - k) as i32);
    let got = beta_segment(0.2, 0.7, 3, 6).unwrap();
    let want = integrate(&integrand(3, 6), 0.2, 0.7, 1e-15);
    assert!((got - want).abs() < 1e-12, "{got} vs {want}");

    for &(a, b, k, n) in &[
        (0.0, 0.3, 1, 10),
        (0.45, 0.55, 20, 40),
        (0.1, 0.9, 32, 64),
        (0.6, 0.61, 50, 64),
        (0.0, 1.0, 17, 33),
    ] {
        let got = beta_segment(a, b, k, n).unwrap();
        let want = integrate(&integrand(k, n), a, b, 1e-17);
        assert!((got - want).abs() < 1e-14, "({a},{b},{k},{n}): {got} vs {want}");
    }
}

#[test]
fn cubic_oracle_on_symmetric_three_rows() {
    let base = equal_spacing_table(3).unwrap();
    for i in 0..100 {
        let alpha = 0.5 * i as f64 / 99.0;
        let t = base.clone().with_row(3, vec![0.0, alpha, 1.0 - alpha, 1.0]).unwrap();
        let p = win_prob_table(&t).get(3);
        assert!((p - p3_of_alpha(alpha)).abs() < 1e-12, "alpha={alpha}");
    }
}

#[test]
fn optimal_three_boundary_maximizes_cubic() {
    // brute-force grid search over the closed form
    let best = (0..=50_000)
        .map(|i| 0.5 * i as f64 / 50_000.0)
        .max_by(|a, b| p3_of_alpha(*a).total_cmp(&p3_of_alpha(*b)))
        .unwrap();
    let (rt, _) = risk_tolerant_table(3).unwrap();
    assert!((rt.row(3)[1] - best).abs() < 1e-4);
}

#[test]
fn risk_tolerant_rows_pick_the_best_slot_value() {
    // Exhaustive scan: boundary lookup equals argmax of the slot values.
    let (rt, p) = risk_tolerant_table(12).unwrap();
    for n in 1..=12 {
        for i in 0..2000 {
            let x = (i as f64 + 0.5) / 2000.0;
            let argmax = (1..=n)
                .max_by(|&a, &b| {
                    slot_value(n, a, x, &p).unwrap().total_cmp(&slot_value(n, b, x, &p).unwrap())
                })
                .unwrap();
            let chosen = rt.slot(n, x);
            if chosen != argmax {
                // only allowed at a numerical tie
                let diff = slot_value(n, chosen, x, &p).unwrap() - slot_value(n, argmax, x, &p).unwrap();
                assert!(diff.abs() < 1e-14, "n={n} x={x}");
            }
        }
    }
}

#[test]
fn win_probability_is_the_integral_of_the_upper_envelope() {
    // p_n for the optimal strategy = int_0^1 max_k f_{n,k}(x) dx
    let (_, p) = risk_tolerant_table(7).unwrap();
    for n in 1..=7 {
        let envelope = |x: f64| {
            (1..=n)
                .map(|k| slot_value(n, k, x, &p).unwrap())
                .fold(0.0, f64::max)
        };
        let want = integrate(&envelope, 0.0, 1.0, 1e-13);
        assert!((p.get(n) - want).abs() < 1e-9, "n={n}");
    }
}

#[test]
fn matching_agrees_with_permutation_search() {
    use rand::{Rng, SeedableRng};

    fn brute(values: &[f64], bounds: &[(f64, f64)]) -> bool {
        fn go(i: usize, values: &[f64], bounds: &[(f64, f64)], used: &mut Vec<bool>) -> bool {
            if i == values.len() {
                return true;
            }
            for j in 0..bounds.len() {
                if !used[j] && bounds[j].0 < values[i] && values[i] < bounds[j].1 {
                    used[j] = true;
                    if go(i + 1, values, bounds, used) {
                        return true;
                    }
                    used[j] = false;
                }
            }
            false
        }
        go(0, values, bounds, &mut vec![false; bounds.len()])
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut feasible = 0;
    for _ in 0..10_000 {
        let size = rng.random_range(0..=6);
        let values: Vec<f64> = (0..size).map(|_| rng.random()).collect();
        let bounds: Vec<(f64, f64)> = (0..size)
            .map(|_| {
                let a: f64 = rng.random();
                let b: f64 = rng.random();
                (a.min(b), a.max(b))
            })
            .collect();
        let want = brute(&values, &bounds);
        feasible += want as usize;
        assert_eq!(feasible_assignment_exists(&values, &bounds).unwrap(), want, "{values:?} {bounds:?}");
    }
    // both outcomes must be exercised
    assert!(feasible > 100 && feasible < 9_900);
}

#[test]
fn binomials_match_pascal() {
    let mut row = vec![1u128];
    for n in 1..=100usize {
        let mut next = vec![1u128; n + 1];
        for k in 1..n {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
        for (k, &c) in row.iter().enumerate() {
            assert_eq!(binomial(n, k), c as f64, "C({n},{k})");
        }
    }
}
