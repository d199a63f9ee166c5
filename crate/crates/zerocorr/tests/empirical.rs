//! Zeros files, unfolding and the histogram estimators on real and
//! synthetic levels.

mod support;

use std::f64::consts::PI;

use support::gue;
use zerocorr::load_zeros;
use zerocorr_core::correlations::gue_limit_r2;
use zerocorr_core::density::WindowConfig;
use zerocorr_core::empirical::{calibrate_counting_offset, chi_square, unfold, uniform_edges};
use zerocorr_core::primes::PrimeTable;

#[test]
fn ql_matches_known_spectrum() {
    // free chain: eigenvalues 2 cos(kπ/(n+1))
    let n = 50;
    let ev = gue::tridiagonal_eigenvalues(vec![0.0; n], &vec![1.0; n - 1]);
    let mut exact: Vec<f64> = (1..=n).map(|k| 2.0 * (k as f64 * PI / (n + 1) as f64).cos()).collect();
    exact.sort_by(f64::total_cmp);
    for (a, b) in ev.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // 2×2 with a diagonal
    let ev = gue::tridiagonal_eigenvalues(vec![1.0, 3.0], &[2.0]);
    let r = 5f64.sqrt();
    assert!((ev[0] - (2.0 - r)).abs() < 1e-13 && (ev[1] - (2.0 + r)).abs() < 1e-13);
}

#[test]
fn sampler_has_unit_density_and_gue_spacing_variance() {
    let s = gue::bulk_spacings(100, 400, 1);
    let (mean, var) = gue::mean_and_variance(&s);
    assert!((mean - 1.0).abs() < 0.01, "mean spacing {mean}");
    // sine-kernel nearest-spacing variance is about 0.180
    assert!((0.165..0.195).contains(&var), "spacing variance {var}");
}

#[test]
fn estimator_reproduces_sine_kernel() {
    let edges = uniform_edges(-3.0, 3.0, 120).unwrap();
    let h = gue::sine_kernel_histogram(200, 400, &edges, 7);
    let c = chi_square(&h, 0.1, 3.0 + 1e-9, 5, |eps| Ok(1.0 + gue_limit_r2(eps, 1.0))).unwrap();
    let r = c.per_dof().unwrap();
    assert!(c.dof == 58 && r <= 1.5, "χ²/dof = {r} over {} bins", c.dof);
}

#[test]
fn loads_first_zeros() {
    let ds = load_zeros(&support::data("first_zeros.txt")).unwrap();
    assert_eq!(ds.len(), 10);
    for (h, want) in ds.heights().iter().zip([14.134725, 21.022040, 25.010858]) {
        assert!((h - want).abs() < 1e-6);
    }
}

#[test]
fn loader_reports_bad_lines() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("z.txt");
    std::fs::write(&p, "").unwrap();
    assert!(load_zeros(&p).unwrap().is_empty());
    std::fs::write(&p, "# header\n14.13\nabc\n").unwrap();
    let e = load_zeros(&p).unwrap_err();
    assert_eq!(e.exit_code(), 3);
    assert!(e.to_string().contains('3'), "{e}");
    std::fs::write(&p, "21.0\n14.1\n").unwrap();
    assert_eq!(load_zeros(&p).unwrap_err().exit_code(), 3);
    assert_eq!(load_zeros(&dir.path().join("missing.txt")).unwrap_err().exit_code(), 5);
}

#[test]
fn counting_matches_known_index() {
    let ds = load_zeros(&support::data("zeros_1e4.txt")).unwrap();
    let c = calibrate_counting_offset(&ds).unwrap();
    assert!(c.max_abs_residual <= 3.0, "{c:?}");
    // first zero is number 10100: the fitted constant absorbs the 10099 zeros below
    let constant = c.offset + 10099.0;
    assert!(constant.abs() <= 3.0, "{c:?}");
}

fn unfolded_1e5() -> Vec<f64> {
    let ds = load_zeros(&support::data("zeros_1e5.txt")).unwrap();
    let cfg = WindowConfig::new(ds.heights()[ds.len() / 2], 1e4, 2, 40).unwrap();
    unfold(&ds, &cfg, &PrimeTable::empty()).unwrap()
}

#[test]
fn unfolded_zeros_have_unit_spacing() {
    let u = unfolded_1e5();
    let mean = (u[u.len() - 1] - u[0]) / (u.len() - 1) as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean spacing {mean}");
}

#[test]
fn zero_spacing_variance_matches_gue() {
    let u = unfolded_1e5();
    let s: Vec<f64> = u.windows(2).map(|w| w[1] - w[0]).collect();
    let (_, var) = gue::mean_and_variance(&s);
    let (_, gue_var) = gue::mean_and_variance(&gue::bulk_spacings(100, 400, 2));
    assert!((var / gue_var - 1.0).abs() < 0.1, "zeros {var}, GUE {gue_var}");
}

#[test]
fn counting_consistent_on_large_file() {
    let ds = load_zeros(&support::data("zeros_1e5.txt")).unwrap();
    let c = calibrate_counting_offset(&ds).unwrap();
    assert!(c.max_abs_residual <= 3.0, "{c:?}");
}
