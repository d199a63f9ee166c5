//! The four commands. Each returns the text it wants written plus any
//! warnings; the caller owns stdout/stderr and exit codes.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use zerocorr_core::correlations::{gue_limit_r2, restricted, BracketVariant, Evaluator, NEAR_COINCIDENT};
use zerocorr_core::density::{smooth_density, WindowConfig};
use zerocorr_core::empirical::{
    bin_average, calibrate_counting_offset, cell_nodes, chi_square, chi_square_2d, uniform_edges, ChiSquare, Window,
    ZerosDataset,
};
use zerocorr_core::phase_average::{averaged_rp_closed_form, rp_integrand, t_q_closed_form, tq_integrand, Method};
use zerocorr_core::primes::PrimeTable;
use zerocorr_core::zeta::product_limit;
use zerocorr_core::{Complex64, Error};

use crate::cache::table_for;
use crate::config::{Format, Grid, Grid2d, OffsetUnits, OracleMethod, RunConfig};
use crate::error::{CliError, CliResult};
use crate::parallel;
use crate::report::{histogram_csv, json_document, triple_csv, Csv};
use crate::zeros::load_zeros;

/// Bins (cells) with fewer counts are left out of χ².
pub const CHI_MIN_COUNT: u64 = 5;

/// One output document.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// `None` is the main output; `Some(suffix)` a sibling file.
    pub suffix: Option<&'static str>,
    pub content: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
    /// False when a verification check failed.
    pub passed: bool,
}

impl Outcome {
    fn main(content: String) -> Self {
        Outcome { artifacts: vec![Artifact { suffix: None, content }], warnings: Vec::new(), passed: true }
    }
}

fn evaluator(cfg: &RunConfig) -> CliResult<Evaluator> {
    let trunc = cfg.truncation.to_truncation()?;
    let table = table_for(trunc.prime_cutoff, cfg.prime_cache.as_deref())?;
    Ok(Evaluator::with_table(trunc, table)?)
}

// ---------------------------------------------------------------------------
// predict-r2

#[derive(Debug, Clone, Copy, Serialize)]
pub struct R2Row {
    pub epsilon: f64,
    pub diagonal: f64,
    pub oscillatory: f64,
    pub connected: f64,
    pub full: f64,
    pub gue_reference: f64,
}

pub const R2_HEADER: [&str; 6] = ["epsilon", "diagonal", "oscillatory", "connected", "full", "gue_reference"];

pub fn default_r2_grid() -> Grid {
    Grid::range(0.1, 3.0, 0.1)
}

pub fn predict_r2(cfg: &RunConfig) -> CliResult<Outcome> {
    let grid = cfg.grid.clone().unwrap_or_else(default_r2_grid).points()?;
    if grid.contains(&0.0) {
        return Err(CliError::config("the offset grid contains 0, where R2 is singular"));
    }
    let e = cfg.window.e;
    let dbar = smooth_density(e)?;
    let ev = evaluator(cfg)?;
    let rows = parallel::sweep(&grid, |&eps| -> CliResult<R2Row> {
        let b = ev.r2_full(eps, e)?;
        Ok(R2Row {
            epsilon: eps,
            diagonal: b.diagonal,
            oscillatory: b.oscillatory,
            connected: b.connected(),
            full: b.total,
            gue_reference: dbar * dbar + gue_limit_r2(eps, dbar),
        })
    })
    .into_iter()
    .collect::<CliResult<Vec<_>>>()?;
    let content = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&R2_HEADER);
            for r in &rows {
                csv.row(&[r.epsilon, r.diagonal, r.oscillatory, r.connected, r.full, r.gue_reference]);
            }
            csv.as_str().to_string()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                e: f64,
                mean_density: f64,
                rows: &'a [R2Row],
            }
            json_document("predict-r2", &Doc { e, mean_density: dbar, rows: &rows })?
        }
    };
    Ok(Outcome::main(content))
}

// ---------------------------------------------------------------------------
// predict-r3

#[derive(Debug, Clone, Copy, Serialize)]
pub struct R3Row {
    pub e12: f64,
    pub e23: f64,
    pub diagonal: f64,
    pub oscillatory: f64,
    pub connected: f64,
    pub full: f64,
}

pub const R3_HEADER: [&str; 6] = ["e12", "e23", "diagonal", "oscillatory", "connected", "full"];

pub fn default_r3_grid() -> Grid2d {
    Grid2d { e12: Grid::range(-2.0, 2.0, 0.25), e23: Grid::range(-2.0, 2.0, 0.25) }
}

/// Offsets `(e₁, e₂, e₃) = (e₁₂, 0, −e₂₃)`.
pub fn triple_of(e12: f64, e23: f64) -> (f64, f64, f64) {
    (e12, 0.0, -e23)
}

fn degenerate(e12: f64, e23: f64) -> bool {
    e12.abs() < NEAR_COINCIDENT || e23.abs() < NEAR_COINCIDENT || (e12 + e23).abs() < NEAR_COINCIDENT
}

pub fn predict_r3(cfg: &RunConfig) -> CliResult<Outcome> {
    let g = cfg.grid2d.clone().unwrap_or_else(default_r3_grid);
    let (xs, ys) = (g.e12.points()?, g.e23.points()?);
    let pairs: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let e = cfg.window.e;
    smooth_density(e)?;
    let ev = evaluator(cfg)?;
    let mut warnings = Vec::new();
    let results = parallel::sweep(&pairs, |&(x, y)| -> CliResult<Option<R3Row>> {
        if degenerate(x, y) {
            return Ok(None);
        }
        let (e1, e2, e3) = triple_of(x, y);
        let b = ev.r3_full(e1, e2, e3, e)?;
        Ok(Some(R3Row {
            e12: x,
            e23: y,
            diagonal: b.diagonal,
            oscillatory: b.oscillatory,
            connected: b.connected(),
            full: b.total,
        }))
    });
    let mut rows = Vec::with_capacity(results.len());
    for (r, &(x, y)) in results.into_iter().zip(&pairs) {
        match r? {
            Some(row) => rows.push(row),
            None => warnings.push(format!("skipping degenerate grid point e12 = {x}, e23 = {y}")),
        }
    }
    if rows.is_empty() {
        return Err(CliError::config("every grid point has coincident offsets"));
    }
    let content = match cfg.format {
        Format::Csv => {
            let mut csv = Csv::new(&R3_HEADER);
            for r in &rows {
                csv.row(&[r.e12, r.e23, r.diagonal, r.oscillatory, r.connected, r.full]);
            }
            csv.as_str().to_string()
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Doc<'a> {
                e: f64,
                rows: &'a [R3Row],
                skipped: usize,
            }
            json_document("predict-r3", &Doc { e, rows: &rows, skipped: pairs.len() - rows.len() })?
        }
    };
    let mut out = Outcome::main(content);
    out.warnings = warnings;
    Ok(out)
}

// ---------------------------------------------------------------------------
// verify

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Check {
    pub check_name: String,
    pub analytic: f64,
    pub oracle: f64,
    pub std_error: f64,
    /// `(oracle − analytic)/std_error` for Monte Carlo; absent for quadrature.
    pub z_score: Option<f64>,
    pub abs_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn quadrature(name: String, analytic: Complex64, oracle: Complex64, tolerance: f64) -> Self {
        let abs_error = (analytic - oracle).norm();
        Check {
            check_name: name,
            analytic: analytic.re,
            oracle: oracle.re,
            std_error: 0.0,
            z_score: None,
            abs_error,
            tolerance,
            pass: abs_error <= tolerance,
        }
    }

    fn estimate(
        name: String,
        analytic: f64,
        est: &zerocorr_core::phase_average::AverageEstimate,
        tolerance: f64,
    ) -> Self {
        let oracle = est.mean.re;
        let abs_error = (oracle - analytic).abs();
        if est.std_error > 0.0 {
            let z = (oracle - analytic) / est.std_error;
            Check {
                check_name: name,
                analytic,
                oracle,
                std_error: est.std_error,
                z_score: Some(z),
                abs_error,
                tolerance: 3.0,
                pass: z.abs() <= 3.0,
            }
        } else {
            Check {
                check_name: name,
                analytic,
                oracle,
                std_error: 0.0,
                z_score: None,
                abs_error,
                tolerance,
                pass: abs_error <= tolerance,
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub primes: Vec<u64>,
    pub method: OracleMethod,
    pub budget: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

/// Verification options that are not part of the config file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyOptions {
    /// Score the three-point analytic value with the known-bad bracket, to
    /// show the oracle can tell them apart.
    pub typo_bracket: bool,
}

fn oracle_table(primes: &[u64]) -> CliResult<PrimeTable> {
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let p_star = sorted.last().map_or(2, |&p| p + 1);
    if p_star > 1 << 32 {
        return Err(CliError::config("oracle primes must be below 2^32"));
    }
    let all = PrimeTable::build(p_star)?;
    if let Some(&bad) = sorted.iter().find(|&&p| !all.contains(p)) {
        return Err(CliError::config(format!("{bad} is not a prime")));
    }
    Ok(PrimeTable::from_primes(p_star, &sorted)?)
}

pub fn verify(cfg: &RunConfig, opts: VerifyOptions) -> CliResult<Outcome> {
    let v = &cfg.verify;
    let table = oracle_table(&v.primes)?;
    let wcfg = WindowConfig::new(cfg.window.e, cfg.window.delta_e, table.p_star(), cfg.window.n_max)?;
    let (method, budget) = match v.method {
        OracleMethod::Quadrature => (Method::TensorQuadrature, v.nodes as u64),
        OracleMethod::MonteCarlo => (Method::MonteCarlo { seed: cfg.seed }, cfg.budget),
    };
    if !(v.tolerance > 0.0) {
        return Err(CliError::config("verify tolerance must be positive"));
    }
    let mut checks = Vec::new();

    // single-prime closed forms against a dense trapezoid rule
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    if !table.is_empty() && v.closed_form_samples > 0 {
        if v.closed_form_nodes < 8 {
            return Err(CliError::config("closed_form_nodes must be at least 8"));
        }
        let n = v.closed_form_nodes;
        let mean = |f: &(dyn Fn(f64) -> Complex64 + Sync)| -> Complex64 {
            let h = 2.0 * std::f64::consts::PI / n as f64;
            let parts: Vec<Complex64> = parallel::sweep(&(0..n).collect::<Vec<_>>(), |&k| f(h * k as f64));
            parts.iter().sum::<Complex64>() / n as f64
        };
        for k in 0..v.closed_form_samples {
            let p = table.entries()[rng.random_range(0..table.len())];
            let (e1, e2): (f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let q = mean(&|phi| rp_integrand(&p, phi, e1, e2));
            checks.push(Check::quadrature(
                format!("rp_closed_form[{k}] p={}", p.p),
                averaged_rp_closed_form(&p, e1, e2),
                q,
                v.tolerance,
            ));
        }
        for k in 0..v.closed_form_samples {
            let p = table.entries()[rng.random_range(0..table.len())];
            let (e1, e2, e3): (f64, f64, f64) =
                (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let q = mean(&|phi| tq_integrand(&p, phi, e1, e2, e3));
            checks.push(Check::quadrature(
                format!("tq_closed_form[{k}] p={}", p.p),
                t_q_closed_form(&p, e1, e2, e3),
                q,
                v.tolerance,
            ));
        }
    }

    for &eps in &v.r2_offsets {
        let analytic = restricted::r2_full(eps, wcfg.e, &table)?.total;
        let est = parallel::mc_correlation(&[0.0, eps], &wcfg, &table, method, budget)?;
        checks.push(Check::estimate(format!("r2[{eps}]"), analytic, &est, v.tolerance));
    }
    let variant = if opts.typo_bracket { BracketVariant::KnownTypo } else { BracketVariant::Contour };
    for &[e1, e2, e3] in &v.r3_triples {
        let analytic = restricted::r3_full_variant(e1, e2, e3, wcfg.e, &table, variant)?.total;
        let est = parallel::mc_correlation(&[e1, e2, e3], &wcfg, &table, method, budget)?;
        checks.push(Check::estimate(format!("r3[{e1},{e2},{e3}]"), analytic, &est, v.tolerance));
    }

    if !v.zeta_s.is_empty() {
        let big = table_for(v.zeta_p_star, cfg.prime_cache.as_deref())?;
        let ln_p = (v.zeta_p_star as f64).ln();
        for &t in &v.zeta_s {
            let s = Complex64::new(0.0, t);
            let limit = product_limit(s);
            let product = parallel::truncated_euler_product(s, &big);
            let deviation = (product / limit - 1.0).norm();
            // size of the first neglected term, ~|s| ln p*
            let tolerance = 1.5 * t.abs() * ln_p;
            checks.push(Check {
                check_name: format!("euler_product_limit[s={t}i,p*={}]", v.zeta_p_star),
                analytic: limit.norm(),
                oracle: product.norm(),
                std_error: 0.0,
                z_score: None,
                abs_error: deviation,
                tolerance,
                pass: deviation <= tolerance,
            });
        }
    }

    let all_pass = checks.iter().all(|c| c.pass);
    let report =
        VerifyReport { primes: table.primes().collect(), method: v.method, budget, seed: cfg.seed, checks, all_pass };
    let content = match cfg.format {
        Format::Json => json_document("verify", &report)?,
        Format::Csv => {
            let mut csv = Csv::new(&[
                "check_name",
                "analytic",
                "oracle",
                "std_error",
                "z_score",
                "abs_error",
                "tolerance",
                "pass",
            ]);
            for c in &report.checks {
                use crate::report::fmt_f64;
                csv.raw_row(&[
                    format!("\"{}\"", c.check_name),
                    fmt_f64(c.analytic),
                    fmt_f64(c.oracle),
                    fmt_f64(c.std_error),
                    c.z_score.map(fmt_f64).unwrap_or_default(),
                    fmt_f64(c.abs_error),
                    fmt_f64(c.tolerance),
                    c.pass.to_string(),
                ]);
            }
            csv.as_str().to_string()
        }
    };
    let mut out = Outcome::main(content);
    out.passed = all_pass;
    for c in report.checks.iter().filter(|c| !c.pass) {
        out.warnings.push(format!("check failed: {}", c.check_name));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// empirical

#[derive(Debug, Clone, Serialize)]
pub struct ChiSummary {
    pub chi2: Option<f64>,
    pub dof: usize,
    pub per_dof: Option<f64>,
    /// `"ok"` or `"not-applicable"`.
    pub status: &'static str,
}

fn chi_summary(c: ChiSquare) -> ChiSummary {
    match c.per_dof() {
        Some(r) => ChiSummary { chi2: Some(c.chi2), dof: c.dof, per_dof: Some(r), status: "ok" },
        None => ChiSummary { chi2: None, dof: c.dof, per_dof: None, status: "not-applicable" },
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CountingSummary {
    pub offset: f64,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
    pub within_three: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalSummary {
    pub source: String,
    pub zeros: usize,
    pub window_center: f64,
    pub window_width: f64,
    pub zeros_in_window: usize,
    pub mean_density: f64,
    pub pairs_used: u64,
    pub chi_square: ChiSummary,
    pub counting: Option<CountingSummary>,
    pub triples_used: Option<u64>,
    pub chi_square_r3: Option<ChiSummary>,
}

fn default_window(ds: &ZerosDataset) -> CliResult<Window> {
    let h = ds.heights();
    let (Some(&first), Some(&last)) = (h.first(), h.last()) else {
        return Err(Error::EmptyWindow("the dataset has no zeros".into()).into());
    };
    // half-open window that still contains the last zero
    let width = (last - first) * (1.0 + 1e-12) + 1e-9;
    Ok(Window::new(0.5 * (first + last), width)?)
}

pub fn empirical(cfg: &RunConfig, zeros: Option<&Path>) -> CliResult<Outcome> {
    let es = &cfg.empirical;
    let path = zeros.or(es.zeros.as_deref()).ok_or_else(|| CliError::config("no zeros file given"))?;
    let ds = load_zeros(path)?;
    let window = match es.window {
        Some(w) => Window::new(w.center, w.width)?,
        None => default_window(&ds)?,
    };
    let in_window = ds.in_window(window).len();
    if in_window < 2 {
        return Err(Error::EmptyWindow(format!("{in_window} zeros in [{}, {})", window.lo(), window.hi())).into());
    }
    if window.center <= 2.0 * std::f64::consts::PI {
        return Err(CliError::config("window centre must exceed 2π"));
    }
    let dbar = smooth_density(window.center)?;
    let scale = match es.units {
        OffsetUnits::Spacings => 1.0 / dbar,
        OffsetUnits::Raw => 1.0,
    };
    if es.bins.count == 0 || !(es.bins.hi > es.bins.lo) {
        return Err(CliError::config("bins need count ≥ 1 and hi > lo"));
    }
    let edges = uniform_edges(es.bins.lo * scale, es.bins.hi * scale, es.bins.count)?;
    let hist = parallel::empirical_r2(&ds, window, &edges)?;

    let ev = evaluator(cfg)?;
    let model = |eps: f64| -> zerocorr_core::Result<f64> { Ok(ev.r2_full(eps, window.center)?.total) };
    let predicted = parallel::sweep(&(0..hist.bins()).collect::<Vec<_>>(), |&i| {
        let (a, b) = hist.bin(i);
        let mut m = model;
        bin_average(&mut m, a, b).unwrap_or(f64::NAN)
    });
    let mut warnings = Vec::new();
    if predicted.iter().any(|x| x.is_nan()) {
        warnings.push("prediction undefined in some bins (a quadrature node hit a zero offset)".to_string());
    }

    // χ² over positive offsets in the configured range, with a little slack
    // so bins whose edges equal the range ends after scaling are kept
    let [clo, chi] = es.chi_range;
    let (lo, hi) = (clo * scale * (1.0 - 1e-9), chi * scale * (1.0 + 1e-9));
    let chi = chi_square(&hist, lo, hi, CHI_MIN_COUNT, model)?;
    if chi.dof == 0 {
        warnings.push(format!("χ² not applicable: no compared bin has {CHI_MIN_COUNT} pairs"));
    }

    let counting = calibrate_counting_offset(&ds).ok().map(|c| CountingSummary {
        offset: c.offset,
        max_abs_residual: c.max_abs_residual,
        rms_residual: c.rms_residual,
        within_three: c.max_abs_residual <= 3.0,
    });

    let mut pred_csv = Csv::new(&["bin_lo", "bin_hi", "value", "stderr"]);
    for (i, &p) in predicted.iter().enumerate() {
        let (a, b) = hist.bin(i);
        pred_csv.row(&[a, b, p, 0.0]);
    }

    let mut summary = EmpiricalSummary {
        source: ds.source_label().to_string(),
        zeros: ds.len(),
        window_center: window.center,
        window_width: window.width,
        zeros_in_window: in_window,
        mean_density: dbar,
        pairs_used: hist.pairs_used,
        chi_square: chi_summary(chi),
        counting,
        triples_used: None,
        chi_square_r3: None,
    };

    let mut triple = None;
    if let Some(tb) = es.triples {
        if tb.count == 0 || !(tb.hi > tb.lo) {
            return Err(CliError::config("triple bins need count ≥ 1 and hi > lo"));
        }
        let e = uniform_edges(tb.lo * scale, tb.hi * scale, tb.count)?;
        match parallel::empirical_r3(&ds, window, &e, &e) {
            Ok(th) => {
                let (nx, ny) = th.shape();
                let nodes: Vec<(f64, f64)> = (0..nx * ny).flat_map(|k| cell_nodes(&th, k / ny, k % ny)).collect();
                let values = parallel::sweep(&nodes, |&(x, y)| {
                    let (e1, e2, e3) = triple_of(x, y);
                    ev.r3_full(e1, e2, e3, window.center).map(|b| b.total)
                });
                let lookup: BTreeMap<(u64, u64), zerocorr_core::Result<f64>> =
                    nodes.iter().map(|&(x, y)| (x.to_bits(), y.to_bits())).zip(values).collect();
                let c = chi_square_2d(
                    &th,
                    tb.lo * scale * (1.0 + 1e-9),
                    tb.hi * scale * (1.0 + 1e-9),
                    CHI_MIN_COUNT,
                    |x, y| lookup[&(x.to_bits(), y.to_bits())].clone(),
                )?;
                if c.dof == 0 {
                    warnings
                        .push(format!("three-point χ² not applicable: no compared cell has {CHI_MIN_COUNT} triples"));
                }
                summary.triples_used = Some(th.triples_used);
                summary.chi_square_r3 = Some(chi_summary(c));
                triple = Some(th);
            }
            Err(Error::EmptyWindow(m)) => warnings.push(format!("no three-point histogram: {m}")),
            Err(e) => return Err(e.into()),
        }
    }

    let mut out = Outcome { artifacts: Vec::new(), warnings, passed: true };
    match cfg.format {
        Format::Csv => {
            out.artifacts.push(Artifact { suffix: None, content: histogram_csv(&hist).as_str().to_string() });
            out.artifacts.push(Artifact { suffix: Some("prediction.csv"), content: pred_csv.as_str().to_string() });
            if let Some(th) = &triple {
                out.artifacts.push(Artifact { suffix: Some("r3.csv"), content: triple_csv(th).as_str().to_string() });
            }
            out.artifacts
                .push(Artifact { suffix: Some("summary.json"), content: json_document("empirical", &summary)? });
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Bin {
                bin_lo: f64,
                bin_hi: f64,
                value: f64,
                stderr: f64,
                predicted: f64,
            }
            #[derive(Serialize)]
            struct Doc<'a> {
                summary: &'a EmpiricalSummary,
                histogram: Vec<Bin>,
            }
            let err = hist.stderr();
            let histogram = (0..hist.bins())
                .map(|i| Bin {
                    bin_lo: hist.bin(i).0,
                    bin_hi: hist.bin(i).1,
                    value: hist.counts[i],
                    stderr: err[i],
                    predicted: predicted[i],
                })
                .collect();
            out.artifacts.push(Artifact {
                suffix: None,
                content: json_document("empirical", &Doc { summary: &summary, histogram })?,
            });
        }
    }
    Ok(out)
}
