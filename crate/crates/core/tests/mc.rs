mod common;

use common::{analytic, benchmark_disc, benchmark_rb, draw, mean_se};
use proptest::prelude::*;
use rbmvr_core::mc::*;
use rbmvr_core::model::{derive_seed, ParameterVector};

fn outputs(ys: &[ParameterVector]) -> Vec<f64> {
    let b = analytic();
    ys.iter().map(|y| b.output(y).unwrap()).collect()
}

#[test]
fn clt_coverage_at_95_percent() {
    let truth = analytic().moments(&common::domain()).unwrap().mean;
    let hits = (0..1000)
        .filter(|&r| {
            let s = outputs(&draw(derive_seed(7, r), 0, 200));
            let e = mc_expectation(&s, A_95).unwrap();
            (e.value - truth).abs() <= e.half_width
        })
        .count();
    let cov = hits as f64 / 1000.0;
    assert!((0.93..=0.97).contains(&cov), "coverage {cov}");
}

#[test]
fn mean_and_variance_are_unbiased() {
    let mom = analytic().moments(&common::domain()).unwrap();
    let (mut means, mut vars) = (Vec::new(), Vec::new());
    for r in 0..10_000 {
        let s = outputs(&draw(derive_seed(11, r), 0, 5));
        let (m, v) = mean_var(&s).unwrap();
        means.push(m);
        vars.push(v);
    }
    let (m, se) = mean_se(&means);
    assert!((m - mom.mean).abs() < 4.0 * se, "{m} vs {}", mom.mean);
    let (v, se) = mean_se(&vars);
    assert!((v - mom.variance).abs() < 4.0 * se, "{v} vs {}", mom.variance);
}

#[test]
fn mc_rb_bounds_are_rigorous() {
    let rb = benchmark_rb();
    let disc = benchmark_disc();
    let ys = draw(5, 0, 1000);
    let full: Vec<f64> = ys.iter().map(|y| disc.output(y).unwrap()).collect();
    for n in [3, 6, 9] {
        let b: Vec<_> = ys.iter().map(|y| rb.output_bound(n, y).unwrap()).collect();
        let sn: Vec<f64> = b.iter().map(|b| b.s_n).collect();
        let ds: Vec<f64> = b.iter().map(|b| b.delta_s).collect();
        let de = mc_rb_expectation_bound(&ds).unwrap();
        let err_e = (mean(&full).unwrap() - mean(&sn).unwrap()).abs();
        assert!(err_e <= de, "N = {n}: {err_e:e} > {de:e}");
        let dv = mc_rb_variance_bound(&sn, &ds, de).unwrap();
        let err_v = (mean_var(&full).unwrap().1 - mean_var(&sn).unwrap().1).abs();
        assert!(err_v <= dv, "N = {n}: {err_v:e} > {dv:e}");
        if n == 9 {
            println!("N = 9: Δ^E = {de:.3e}, Δ^V / |ΔV| = {:.1}", dv / err_v);
        }
    }
}

#[test]
fn control_variate_coefficient_near_one() {
    let rb = benchmark_rb();
    let ys = draw(6, 0, 2000);
    let x = outputs(&ys);
    let y: Vec<f64> = ys.iter().map(|y| rb.online_output(5, y).unwrap()).collect();
    let g = optimal_cv_gamma(&x, &y).unwrap();
    assert!((0.9..=1.1).contains(&g), "γ = {g}");
}

#[test]
fn total_bound_stagnates() {
    let small = mc_rb_total_bound(0.07, 0.01, 1000, A_95, 0.11);
    let large = mc_rb_total_bound(0.07, 0.01, 100_000_000, A_95, 0.11);
    assert!(small > large && (large - 0.11) < 1e-4);
    assert_eq!(mc_rb_total_bound(0.07, 0.0, 1000, A_95, 0.0), clt_halfwidth(0.07, 1000, A_95));
}

fn paired() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64), 3..60)
}

proptest! {
    #[test]
    fn variance_reduction_identity(pairs in paired()) {
        let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let y: Vec<f64> = pairs.iter().map(|p| p.0 * 0.7 + p.1).collect();
        let (_, vx) = mean_var(&x).unwrap();
        let (my, vy) = mean_var(&y).unwrap();
        let c = covariance(&x, &y).unwrap();
        let g = optimal_cv_gamma(&x, &y).unwrap();
        let xs: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - g * (b - my)).collect();
        let rho2 = c * c / (vx * vy);
        let (_, vs) = mean_var(&xs).unwrap();
        prop_assert!((vs - vx * (1.0 - rho2)).abs() <= 1e-12 * vx.max(1.0));
    }

    #[test]
    fn bounds_are_monotone(
        rows in prop::collection::vec((0.0..1.0f64, -2.0..2.0f64, 0.0..0.5f64), 2..40),
        m in 2usize..10_000,
        v in 0.0..1.0f64,
    ) {
        let ds: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let bigger: Vec<f64> = rows.iter().map(|r| r.0 + r.2).collect();
        let sn: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let de = mc_rb_expectation_bound(&ds).unwrap();
        let de2 = mc_rb_expectation_bound(&bigger).unwrap();
        prop_assert!(de2 >= de);
        let dv = mc_rb_variance_bound(&sn, &ds, de).unwrap();
        let dv2 = mc_rb_variance_bound(&sn, &bigger, de2).unwrap();
        prop_assert!(dv2 >= dv);
        prop_assert!(mc_rb_total_bound(v, dv2, m, A_95, de2) >= mc_rb_total_bound(v, dv, m, A_95, de));
        prop_assert!(clt_halfwidth(v + 0.1, m, A_95) >= clt_halfwidth(v, m, A_95));
    }

    #[test]
    fn compensated_sum_matches_exact_sum(v in prop::collection::vec(-1e6..1e6f64, 0..20_000)) {
        // reference: error-free expansion summation with nonoverlapping partials
        let exact: f64 = {
            let mut parts: Vec<f64> = Vec::new();
            for &x in &v {
                let mut x = x;
                let mut i = 0;
                for j in 0..parts.len() {
                    let y = parts[j];
                    let (hi, lo) = if x.abs() < y.abs() { (y, x) } else { (x, y) };
                    let s = hi + lo;
                    let e = lo - (s - hi);
                    if e != 0.0 {
                        parts[i] = e;
                        i += 1;
                    }
                    x = s;
                }
                parts.truncate(i);
                parts.push(x);
            }
            parts.iter().sum()
        };
        let s = sum(&v);
        let abs: f64 = v.iter().map(|x| x.abs()).sum();
        let tol = 2.0 * f64::EPSILON * exact.abs() + v.len() as f64 * f64::EPSILON * f64::EPSILON * abs;
        prop_assert!((s - exact).abs() <= tol, "{s} vs {exact}");
    }
}
