//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.
//!
//! Criterion 8 uses the zeros file named by `ZEROS_TABLE` when it is set and
//! holds at least 10⁵ zeros; otherwise it runs the synthetic GUE check.

mod support;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use support::gue;
use zerocorr::commands;
use zerocorr::config::{Format, RunConfig, WindowSpec};
use zerocorr::parallel;
use zerocorr_core::correlations::{gue_limit_r2, restricted, BracketVariant, Evaluator, SumTruncation};
use zerocorr_core::density::{smooth_density, WindowConfig};
use zerocorr_core::empirical::{chi_square, uniform_edges};
use zerocorr_core::kernel::{generalized_kernel, kernel_determinant, KernelContext};
use zerocorr_core::phase_average::{averaged_rp_closed_form, rp_integrand, t_q_closed_form, tq_integrand, Method};
use zerocorr_core::primes::PrimeTable;
use zerocorr_core::zeta::product_limit;
use zerocorr_core::Complex64;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn trapezoid(nodes: u32, f: impl Fn(f64) -> Complex64 + Sync) -> Complex64 {
    let h = 2.0 * PI / nodes as f64;
    let parts = parallel::sweep(&(0..nodes).collect::<Vec<_>>(), |&k| f(h * k as f64));
    parts.iter().sum::<Complex64>() / nodes as f64
}

fn random_prime(rng: &mut ChaCha8Rng, small: &PrimeTable) -> zerocorr_core::primes::PrimeEntry {
    small.entries()[rng.random_range(0..small.len())]
}

fn zeta_limit() -> Verdict {
    let s = Complex64::new(0.0, 0.01);
    let limit = product_limit(s);
    let dev = |p_star: u64| {
        let t = PrimeTable::build(p_star).unwrap();
        (parallel::truncated_euler_product(s, &t) / limit - 1.0).norm()
    };
    let (d3, d6) = (dev(1_000), dev(1_000_000));
    verdict(
        d6 < d3 && d6 < 0.02,
        format!("deviation {d3:.4} at p*=1e3, {d6:.4} at p*=1e6 (need decreasing and < 0.02)"),
    )
}

fn closed_form_rp() -> Verdict {
    let small = PrimeTable::build(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_prime(&mut rng, &small);
        let (e1, e2) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let q = trapezoid(2048, |phi| rp_integrand(&p, phi, e1, e2));
        worst = worst.max((q - averaged_rp_closed_form(&p, e1, e2)).norm());
    }
    verdict(worst <= 1e-8, format!("max abs error {worst:.2e} over 100 configurations"))
}

fn closed_form_tq() -> Verdict {
    let small = PrimeTable::build(100).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let p = random_prime(&mut rng, &small);
        let (e1, e2, e3) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let q = trapezoid(2048, |phi| tq_integrand(&p, phi, e1, e2, e3));
        worst = worst.max((q - t_q_closed_form(&p, e1, e2, e3)).norm());
    }
    verdict(worst <= 1e-8, format!("max abs error {worst:.2e} over 100 configurations"))
}

fn oracle_setup(primes: &[u64]) -> (PrimeTable, WindowConfig) {
    let p_star = primes.last().unwrap() + 1;
    let table = PrimeTable::from_primes(p_star, primes).unwrap();
    let cfg = WindowConfig::new(1e4, 1e3, p_star, 40).unwrap();
    (table, cfg)
}

fn r2_oracle() -> Verdict {
    let (table, cfg) = oracle_setup(&[2, 3, 5]);
    let mut zs = Vec::new();
    for (k, eps) in [0.2, 0.4, 0.8].into_iter().enumerate() {
        let analytic = restricted::r2_full(eps, cfg.e, &table).unwrap().total;
        let seed = 40 + k as u64;
        let est = parallel::mc_correlation(&[0.0, eps], &cfg, &table, Method::MonteCarlo { seed }, 1_000_000).unwrap();
        zs.push((est.mean.re - analytic) / est.std_error);
    }
    let worst = zs.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    verdict(worst <= 3.0, format!("z-scores {zs:.2?}"))
}

fn r3_oracle() -> Verdict {
    let (table, cfg) = oracle_setup(&[2, 3]);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut triples = Vec::new();
    while triples.len() < 5 {
        let t: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        if (t[0] - t[1]).abs() > 0.1 && (t[1] - t[2]).abs() > 0.1 && (t[2] - t[0]).abs() > 0.1 {
            triples.push(t);
        }
    }
    let (mut good, mut typo) = (Vec::new(), Vec::new());
    for (k, [e1, e2, e3]) in triples.into_iter().enumerate() {
        let seed = 60 + k as u64;
        let est =
            parallel::mc_correlation(&[e1, e2, e3], &cfg, &table, Method::MonteCarlo { seed }, 1_000_000).unwrap();
        for (variant, out) in [(BracketVariant::Contour, &mut good), (BracketVariant::KnownTypo, &mut typo)] {
            let analytic = restricted::r3_full_variant(e1, e2, e3, cfg.e, &table, variant).unwrap().total;
            out.push((est.mean.re - analytic) / est.std_error);
        }
    }
    let worst = good.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    let typo_best = typo.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    verdict(worst <= 3.0 && typo_best >= 5.0, format!("z-scores {good:.2?}; typo variant max |z| {typo_best:.1}"))
}

fn gue_degeneration() -> Verdict {
    let e = 1e6;
    let dbar = smooth_density(e).unwrap();
    let eps = 0.01 / dbar;
    let ev = Evaluator::new(SumTruncation::default()).unwrap();
    let rc = ev.r2_connected(eps, e).unwrap().connected();
    let ratio = rc / gue_limit_r2(eps, dbar);
    verdict((0.99..=1.01).contains(&ratio), format!("ratio {ratio:.6}"))
}

fn symmetry_suite() -> Verdict {
    let ev = Evaluator::new(SumTruncation::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut even, mut s3, mut real): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..5 {
        let eps: f64 = rng.random_range(0.05..3.0);
        let e: f64 = rng.random_range(1e3..1e7);
        let a = ev.r2_connected(eps, e).unwrap().connected();
        let b = ev.r2_connected(-eps, e).unwrap().connected();
        even = even.max((a - b).abs() / a.abs().max(1.0));

        let (e1, e2, e3) = loop {
            let t: (f64, f64, f64) =
                (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            if (t.0 - t.1).abs() > 0.05 && (t.1 - t.2).abs() > 0.05 && (t.2 - t.0).abs() > 0.05 {
                break t;
            }
        };
        let base = ev.r3_full(e1, e2, e3, e).unwrap().total;
        for (x, y, z) in [(e2, e1, e3), (e1, e3, e2), (e3, e2, e1), (e2, e3, e1), (e3, e1, e2)] {
            s3 = s3.max((ev.r3_full(x, y, z, e).unwrap().total - base).abs());
        }
        let v = BracketVariant::Contour;
        let c_even = ev.r3_oscillatory_cyclic(e1, e2, e3, e, v).unwrap();
        let c_odd = ev.r3_oscillatory_cyclic(e2, e1, e3, e, v).unwrap();
        real = real.max((c_even + c_odd).im.abs());
    }

    let t = PrimeTable::build(30).unwrap();
    let cfg = WindowConfig::new(1e6, 1e4, 30, 40).unwrap();
    let ctx = KernelContext::new(cfg, &t).unwrap();
    let mut perm: f64 = 0.0;
    for _ in 0..5 {
        let pts: Vec<f64> = (0..5).map(|_| 1e6 + rng.random_range(-3.0..3.0)).collect();
        let base = kernel_determinant(&pts, &ctx).unwrap();
        for shift in 1..5 {
            let mut p = pts.clone();
            p.rotate_left(shift);
            p.swap(0, 4 - shift);
            perm = perm.max((kernel_determinant(&p, &ctx).unwrap() - base).abs());
        }
    }

    let e = 1e6 + 0.21;
    let rho = generalized_kernel(e, e, &ctx).unwrap();
    let (xs, ys): (Vec<f64>, Vec<f64>) = (0..=20)
        .map(|k| {
            let delta = 10f64.powf(-4.0 + 2.0 * k as f64 / 20.0) / rho;
            (delta.ln(), kernel_determinant(&[e, e + delta], &ctx).unwrap().ln())
        })
        .unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;

    let pass = even <= 1e-12 && s3 <= 1e-10 && real <= 1e-13 && perm <= 1e-10 && (slope - 2.0).abs() <= 0.05;
    verdict(
        pass,
        format!("evenness {even:.1e}, S3 {s3:.1e}, realness {real:.1e}, permutation {perm:.1e}, repulsion exponent {slope:.4}"),
    )
}

/// Window over the top `count` zeros of a dataset, where the mean density
/// barely changes across the window.
fn top_window(heights: &[f64], count: usize) -> WindowSpec {
    let lo = heights[heights.len().saturating_sub(count)];
    let hi = heights[heights.len() - 1];
    let width = (hi - lo) * (1.0 + 1e-12) + 1e-9;
    WindowSpec { center: 0.5 * (lo + hi), width }
}

fn empirical_comparison() -> Verdict {
    match std::env::var_os("ZEROS_TABLE") {
        Some(path) => zeros_table_comparison(Path::new(&path)),
        None => {
            let edges = uniform_edges(-3.0, 3.0, 120).unwrap();
            let h = gue::sine_kernel_histogram(400, 400, &edges, 8);
            let c = chi_square(&h, 0.1, 3.0 + 1e-9, commands::CHI_MIN_COUNT, |eps| Ok(1.0 + gue_limit_r2(eps, 1.0)))
                .unwrap();
            let r = c.per_dof().unwrap_or(f64::INFINITY);
            verdict(r <= 1.5, format!("no ZEROS_TABLE; synthetic GUE χ²/dof {r:.3} over {} bins", c.dof))
        }
    }
}

fn zeros_table_comparison(path: &Path) -> Verdict {
    let ds = match zerocorr::load_zeros(path) {
        Ok(ds) => ds,
        Err(e) => return verdict(false, format!("{}: {e}", path.display())),
    };
    if ds.len() < 100_000 {
        return verdict(false, format!("{} holds {} zeros, need at least 10^5", path.display(), ds.len()));
    }
    let mut cfg = RunConfig { format: Format::Json, ..RunConfig::default() };
    cfg.empirical.window = Some(top_window(ds.heights(), 20_000));
    let out = match commands::empirical(&cfg, Some(path)) {
        Ok(o) => o,
        Err(e) => return verdict(false, e.to_string()),
    };
    let v: Value = serde_json::from_str(&out.artifacts[0].content).unwrap();
    let s = &v["summary"];
    let r = s["chi_square"]["per_dof"].as_f64().unwrap_or(f64::INFINITY);
    let counting = s["counting"]["max_abs_residual"].as_f64().unwrap_or(f64::INFINITY);
    verdict(
        r <= 1.5 && counting <= 3.0,
        format!("{} zeros; χ²/dof {r:.3} near the top height; counting residual {counting:.2}", ds.len()),
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let zeros = support::data("zeros_1e4.txt");
    let zeros = zeros.to_str().unwrap();
    let mc = d.join("mc.json");
    fs::write(&mc, r#"{"window": {"e": 1e4}, "verify": {"method": "monte_carlo"}}"#).unwrap();
    let mc = mc.to_str().unwrap();
    let r3 = d.join("r3.json");
    fs::write(
        &r3,
        r#"{"grid2d": {"e12": {"start": -1, "stop": 1, "step": 0.5}, "e23": {"start": -1, "stop": 1, "step": 0.5}}}"#,
    )
    .unwrap();
    let r3 = r3.to_str().unwrap();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("predict-r2", vec!["predict-r2"]),
        ("predict-r2 json", vec!["predict-r2", "--format", "json"]),
        ("predict-r3", vec!["predict-r3", "--config", r3]),
        ("verify", vec!["verify", "--format", "json"]),
        ("verify monte carlo", vec!["verify", "--config", mc, "--budget", "50000", "--seed", "9"]),
        ("empirical", vec!["empirical", "--zeros", zeros]),
        ("empirical json", vec!["empirical", "--zeros", zeros, "--format", "json"]),
        ("primes", vec!["primes", "--p-star", "10000"]),
    ];
    let mut bad = Vec::new();
    for (name, args) in &runs {
        let mut outputs = Vec::new();
        for (k, threads) in ["1", "1", "2", "4"].iter().enumerate() {
            let out_dir = d.join(format!("{name}-{k}"));
            fs::create_dir(&out_dir).unwrap();
            let target = out_dir.join("out");
            let mut a = args.clone();
            a.extend(["--threads", threads, "--out", target.to_str().unwrap()]);
            let o = support::zerocorr(&a);
            let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
                .unwrap()
                .map(|e| {
                    let e = e.unwrap();
                    (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
                })
                .collect();
            files.sort();
            outputs.push((o.status.code(), files));
        }
        if outputs.iter().any(|o| *o != outputs[0]) || outputs[0].1.is_empty() {
            bad.push(*name);
        }
    }
    // the thread count may also come from the environment
    let base = support::zerocorr(&["verify", "--config", mc]);
    let env = support::zerocorr_with(&["verify", "--config", mc], Some("3"));
    if base.stdout != env.stdout {
        bad.push("verify via ZEROCORR_THREADS");
    }
    verdict(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{} commands byte-identical at 1, 1, 2, 4 threads", runs.len())
        } else {
            format!("differs: {bad:?}")
        },
    )
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("zeta-product limit", Duration::from_secs(5), zeta_limit),
        ("closed-form ⟨R_p⟩", Duration::from_secs(10), closed_form_rp),
        ("closed-form T_q", Duration::from_secs(10), closed_form_tq),
        ("two-point oracle", Duration::from_secs(60), r2_oracle),
        ("three-point oracle", Duration::from_secs(300), r3_oracle),
        ("GUE degeneration", Duration::from_secs(1), gue_degeneration),
        ("symmetry suite", Duration::from_secs(30), symmetry_suite),
        ("empirical comparison", Duration::from_secs(300), empirical_comparison),
        ("determinism", Duration::MAX, determinism),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = took <= *limit;
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        let budget = if *limit == Duration::MAX { String::new() } else { format!(" / {}s", limit.as_secs()) };
        let late = if in_time { "" } else { ", over the time limit" };
        println!(
            "criterion {}: {} {name}: {} ({:.2}s{budget}{late})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
