//! Tables of zeros: parsing, unfolding, and pair/triple histograms that
//! estimate `R₂` and `R₃` in raw (density²/density³) units.
//!
//! A histogram over a window `[E − ΔE/2, E + ΔE/2)` counts ordered pairs (or
//! triples) of distinct zeros that all lie in the window and divides by
//! `ΔE · bin width` (by `ΔE · cell area` for triples). Bins are half-open.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::density::{counting_function, smooth_counting, WindowConfig};
use crate::error::{invalid, Error, Result};
use crate::primes::PrimeTable;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

/// Heights closer than this count as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-10;

/// Ascending ordinates of zeros.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZerosDataset {
    heights: Vec<f64>,
    source_label: String,
}

impl ZerosDataset {
    pub fn new(heights: Vec<f64>, source_label: impl Into<String>) -> Result<Self> {
        for (i, &h) in heights.iter().enumerate() {
            check_next(i.checked_sub(1).map(|j| heights[j]), h).map_err(invalid)?;
        }
        Ok(ZerosDataset { heights, source_label: source_label.into() })
    }

    /// One ordinate per line; blank lines and lines starting with `#` are
    /// skipped. Errors carry 1-based line numbers.
    pub fn parse(text: &str, source_label: impl Into<String>) -> Result<Self> {
        let mut heights = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let h: f64 = line
                .parse()
                .map_err(|_| Error::Parse { line: n + 1, message: alloc::format!("not a number: {line:?}") })?;
            check_next(heights.last().copied(), h)
                .map_err(|message| Error::Parse { line: n + 1, message: message.to_string() })?;
            heights.push(h);
        }
        Ok(ZerosDataset { heights, source_label: source_label.into() })
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }

    /// Zeros in `[lo, hi)`.
    pub fn in_range(&self, lo: f64, hi: f64) -> &[f64] {
        let a = self.heights.partition_point(|&h| h < lo);
        let b = self.heights.partition_point(|&h| h < hi);
        &self.heights[a..b.max(a)]
    }

    pub fn in_window(&self, window: Window) -> &[f64] {
        self.in_range(window.lo(), window.hi())
    }
}

fn check_next(prev: Option<f64>, h: f64) -> core::result::Result<(), &'static str> {
    if !(h.is_finite() && h > 0.0) {
        return Err("heights must be positive and finite");
    }
    if let Some(p) = prev {
        if h <= p {
            return Err("heights must be strictly ascending");
        }
        if h - p < DUPLICATE_TOLERANCE {
            return Err("duplicate height");
        }
    }
    Ok(())
}

/// `e_n = N̄(E_n, p*)`, smooth plus oscillatory counting function.
pub fn unfold(ds: &ZerosDataset, cfg: &WindowConfig, table: &PrimeTable) -> Result<Vec<f64>> {
    ds.heights.iter().map(|&h| counting_function(h, cfg, table)).collect()
}

/// Window `[center − width/2, center + width/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub center: f64,
    pub width: f64,
}

impl Window {
    pub fn new(center: f64, width: f64) -> Result<Self> {
        if !(center.is_finite() && width.is_finite() && width > 0.0) {
            return Err(invalid("window needs a finite centre and positive width"));
        }
        Ok(Window { center, width })
    }

    pub fn lo(&self) -> f64 {
        self.center - 0.5 * self.width
    }

    pub fn hi(&self) -> f64 {
        self.center + 0.5 * self.width
    }
}

/// `n` equal bins over `[lo, hi)`.
pub fn uniform_edges(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n == 0 || !(hi > lo) {
        return Err(invalid("need at least one bin and hi > lo"));
    }
    let w = (hi - lo) / n as f64;
    Ok((0..=n).map(|i| if i == n { hi } else { lo + w * i as f64 }).collect())
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(invalid("at least two bin edges are required"));
    }
    if edges.windows(2).any(|w| !(w[1] > w[0])) || edges.iter().any(|e| !e.is_finite()) {
        return Err(invalid("bin edges must be finite and strictly ascending"));
    }
    Ok(())
}

/// Index of the half-open bin holding `x`.
#[inline]
fn bin_of(edges: &[f64], x: f64) -> Option<usize> {
    if x < edges[0] || x >= edges[edges.len() - 1] {
        return None;
    }
    Some(edges.partition_point(|&e| e <= x) - 1)
}

fn reach(edges: &[f64]) -> f64 {
    edges[0].abs().max(edges[edges.len() - 1].abs())
}

/// Raw ordered-pair counts with the first point's index in `first`.
/// Splitting `first` and adding the counts gives the full histogram.
pub fn pair_counts(points: &[f64], first: core::ops::Range<usize>, edges: &[f64]) -> Vec<u64> {
    let mut counts = alloc::vec![0u64; edges.len() - 1];
    let r = reach(edges);
    for i in first {
        let x = points[i];
        // right neighbours, then left
        for &y in points[i + 1..].iter().take_while(|&&y| y - x <= r) {
            if let Some(b) = bin_of(edges, x - y) {
                counts[b] += 1;
            }
        }
        for &y in points[..i].iter().rev().take_while(|&&y| x - y <= r) {
            if let Some(b) = bin_of(edges, x - y) {
                counts[b] += 1;
            }
        }
    }
    counts
}

/// Density-normalized pair histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationHistogram {
    pub bin_edges: Vec<f64>,
    /// `raw / (exposure · bin width)`.
    pub counts: Vec<f64>,
    pub raw: Vec<u64>,
    pub pairs_used: u64,
    /// Window of the first contributing sample.
    pub window: Window,
    /// Total window length that was histogrammed (`ΔE`, summed over merges).
    pub exposure: f64,
}

impl CorrelationHistogram {
    pub fn from_raw(bin_edges: Vec<f64>, raw: Vec<u64>, window: Window, exposure: f64) -> Result<Self> {
        check_edges(&bin_edges)?;
        if raw.len() + 1 != bin_edges.len() {
            return Err(invalid("one count per bin is required"));
        }
        let pairs_used = raw.iter().sum();
        let counts =
            raw.iter().zip(bin_edges.windows(2)).map(|(&c, w)| c as f64 / (exposure * (w[1] - w[0]))).collect();
        Ok(CorrelationHistogram { bin_edges, counts, raw, pairs_used, window, exposure })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin(&self, i: usize) -> (f64, f64) {
        (self.bin_edges[i], self.bin_edges[i + 1])
    }

    /// Poisson standard error per bin.
    pub fn stderr(&self) -> Vec<f64> {
        self.raw
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, w)| (c as f64).sqrt() / (self.exposure * (w[1] - w[0])))
            .collect()
    }

    /// Pool two histograms over the same bins.
    pub fn merge(&self, other: &CorrelationHistogram) -> Result<CorrelationHistogram> {
        if self.bin_edges != other.bin_edges {
            return Err(Error::Configuration("histograms have different bins".into()));
        }
        let raw = self.raw.iter().zip(&other.raw).map(|(a, b)| a + b).collect();
        Self::from_raw(self.bin_edges.clone(), raw, self.window, self.exposure + other.exposure)
    }
}

fn window_points(ds: &ZerosDataset, window: Window, at_least: usize) -> Result<&[f64]> {
    let pts = ds.in_window(window);
    if pts.len() < at_least {
        return Err(Error::EmptyWindow(alloc::format!(
            "{} zeros in [{}, {}), need {at_least}",
            pts.len(),
            window.lo(),
            window.hi()
        )));
    }
    Ok(pts)
}

/// Histogram of `E_i − E_j` over ordered pairs `i ≠ j` inside the window.
pub fn empirical_r2(ds: &ZerosDataset, window: Window, edges: &[f64]) -> Result<CorrelationHistogram> {
    check_edges(edges)?;
    let pts = window_points(ds, window, 2)?;
    let raw = pair_counts(pts, 0..pts.len(), edges);
    CorrelationHistogram::from_raw(edges.to_vec(), raw, window, window.width)
}

/// Same estimator on an arbitrary ascending point set (e.g. unfolded levels).
pub fn pair_histogram(points: &[f64], window: Window, edges: &[f64]) -> Result<CorrelationHistogram> {
    check_edges(edges)?;
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(invalid("points must be ascending"));
    }
    let a = points.partition_point(|&x| x < window.lo());
    let b = points.partition_point(|&x| x < window.hi());
    let pts = &points[a..b.max(a)];
    if pts.len() < 2 {
        return Err(Error::EmptyWindow("fewer than two points in window".into()));
    }
    let raw = pair_counts(pts, 0..pts.len(), edges);
    CorrelationHistogram::from_raw(edges.to_vec(), raw, window, window.width)
}

/// Ordered triples binned by `(E_i − E_j, E_j − E_k)`, row-major in the first.
#[derive(Debug, Clone, PartialEq)]
pub struct TripleHistogram {
    pub edges_12: Vec<f64>,
    pub edges_23: Vec<f64>,
    /// `raw / (exposure · cell area)`, row-major.
    pub counts: Vec<f64>,
    pub raw: Vec<u64>,
    pub triples_used: u64,
    pub window: Window,
    pub exposure: f64,
}

impl TripleHistogram {
    pub fn from_raw(
        edges_12: Vec<f64>,
        edges_23: Vec<f64>,
        raw: Vec<u64>,
        window: Window,
        exposure: f64,
    ) -> Result<Self> {
        check_edges(&edges_12)?;
        check_edges(&edges_23)?;
        let (nx, ny) = (edges_12.len() - 1, edges_23.len() - 1);
        if raw.len() != nx * ny {
            return Err(invalid("one count per cell is required"));
        }
        let mut counts = Vec::with_capacity(raw.len());
        for i in 0..nx {
            for j in 0..ny {
                let area = (edges_12[i + 1] - edges_12[i]) * (edges_23[j + 1] - edges_23[j]);
                counts.push(raw[i * ny + j] as f64 / (exposure * area));
            }
        }
        let triples_used = raw.iter().sum();
        Ok(TripleHistogram { edges_12, edges_23, counts, raw, triples_used, window, exposure })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.edges_12.len() - 1, self.edges_23.len() - 1)
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.counts[i * self.shape().1 + j]
    }

    pub fn stderr(&self) -> Vec<f64> {
        self.raw.iter().zip(&self.counts).map(|(&r, &c)| if r == 0 { 0.0 } else { c / (r as f64).sqrt() }).collect()
    }

    pub fn merge(&self, other: &TripleHistogram) -> Result<TripleHistogram> {
        if self.edges_12 != other.edges_12 || self.edges_23 != other.edges_23 {
            return Err(Error::Configuration("histograms have different cells".into()));
        }
        let raw = self.raw.iter().zip(&other.raw).map(|(a, b)| a + b).collect();
        Self::from_raw(self.edges_12.clone(), self.edges_23.clone(), raw, self.window, self.exposure + other.exposure)
    }
}

/// Raw ordered-triple counts with the first index in `first`.
pub fn triple_counts(points: &[f64], first: core::ops::Range<usize>, edges_12: &[f64], edges_23: &[f64]) -> Vec<u64> {
    let ny = edges_23.len() - 1;
    let mut counts = alloc::vec![0u64; (edges_12.len() - 1) * ny];
    let (r12, r23) = (reach(edges_12), reach(edges_23));
    let near = |c: usize, r: f64| {
        let x = points[c];
        let lo = points.partition_point(|&y| y < x - r);
        let hi = points.partition_point(|&y| y <= x + r);
        lo..hi
    };
    for i in first {
        for j in near(i, r12) {
            if j == i {
                continue;
            }
            let Some(bx) = bin_of(edges_12, points[i] - points[j]) else { continue };
            for k in near(j, r23) {
                if k == i || k == j {
                    continue;
                }
                if let Some(by) = bin_of(edges_23, points[j] - points[k]) {
                    counts[bx * ny + by] += 1;
                }
            }
        }
    }
    counts
}

/// Histogram of ordered triples of distinct zeros inside the window.
pub fn empirical_r3(ds: &ZerosDataset, window: Window, edges_12: &[f64], edges_23: &[f64]) -> Result<TripleHistogram> {
    check_edges(edges_12)?;
    check_edges(edges_23)?;
    let pts = window_points(ds, window, 3)?;
    let raw = triple_counts(pts, 0..pts.len(), edges_12, edges_23);
    TripleHistogram::from_raw(edges_12.to_vec(), edges_23.to_vec(), raw, window, window.width)
}

// ---------------------------------------------------------------------------
// comparisons

/// χ² of a histogram against a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquare {
    pub chi2: f64,
    pub dof: usize,
}

impl ChiSquare {
    /// `χ²/dof`, `None` when no bin qualified.
    pub fn per_dof(&self) -> Option<f64> {
        (self.dof > 0).then(|| self.chi2 / self.dof as f64)
    }
}

/// Bin average of `model` by 4-point Gauss–Legendre.
pub fn bin_average<F: FnMut(f64) -> Result<f64>>(model: &mut F, lo: f64, hi: f64) -> Result<f64> {
    const X: [f64; 4] =
        [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W: [f64; 4] =
        [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let (m, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    let mut s = 0.0;
    for (x, w) in X.iter().zip(W) {
        s += w * model(m + h * x)?;
    }
    Ok(0.5 * s)
}

/// χ² over bins lying inside `[lo, hi]` that hold at least `min_count`
/// pairs (and at least one), with the model averaged over each bin.
pub fn chi_square<F>(hist: &CorrelationHistogram, lo: f64, hi: f64, min_count: u64, mut model: F) -> Result<ChiSquare>
where
    F: FnMut(f64) -> Result<f64>,
{
    let err = hist.stderr();
    let mut chi2 = 0.0;
    let mut dof = 0;
    for i in 0..hist.bins() {
        let (a, b) = hist.bin(i);
        if a < lo || b > hi || hist.raw[i] < min_count.max(1) {
            continue;
        }
        let m = bin_average(&mut model, a, b)?;
        let z = (hist.counts[i] - m) / err[i];
        chi2 += z * z;
        dof += 1;
    }
    Ok(ChiSquare { chi2, dof })
}

/// Nodes of the 3×2 midpoint grid used to average a model over cell `(i, j)`.
/// They never land on `x = 0`, `y = 0` or `x + y = 0` for cells symmetric about 0.
pub fn cell_nodes(hist: &TripleHistogram, i: usize, j: usize) -> [(f64, f64); 6] {
    let (x0, x1) = (hist.edges_12[i], hist.edges_12[i + 1]);
    let (y0, y1) = (hist.edges_23[j], hist.edges_23[j + 1]);
    let mut out = [(0.0, 0.0); 6];
    let mut k = 0;
    for fx in [1.0 / 6.0, 0.5, 5.0 / 6.0] {
        for fy in [0.25, 0.75] {
            out[k] = (x0 + fx * (x1 - x0), y0 + fy * (y1 - y0));
            k += 1;
        }
    }
    out
}

/// χ² over cells whose every edge lies within `[lo, hi]` in both separations
/// and that hold at least `min_count` triples (and at least one), with the
/// model averaged over [`cell_nodes`].
pub fn chi_square_2d<F>(hist: &TripleHistogram, lo: f64, hi: f64, min_count: u64, mut model: F) -> Result<ChiSquare>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let err = hist.stderr();
    let (nx, ny) = hist.shape();
    let mut chi2 = 0.0;
    let mut dof = 0;
    for i in 0..nx {
        let (x0, x1) = (hist.edges_12[i], hist.edges_12[i + 1]);
        for j in 0..ny {
            let (y0, y1) = (hist.edges_23[j], hist.edges_23[j + 1]);
            let idx = i * ny + j;
            if x0 < lo || x1 > hi || y0 < lo || y1 > hi || hist.raw[idx] < min_count.max(1) {
                continue;
            }
            let mut m = 0.0;
            for (x, y) in cell_nodes(hist, i, j) {
                m += model(x, y)?;
            }
            m /= 6.0;
            let z = (hist.counts[idx] - m) / err[idx];
            chi2 += z * z;
            dof += 1;
        }
    }
    Ok(ChiSquare { chi2, dof })
}

/// Result of fitting the additive constant of the counting function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingCalibration {
    pub offset: f64,
    pub max_abs_residual: f64,
    pub rms_residual: f64,
}

/// Least-squares constant `c` in `#{zeros ≤ E_j} ≈ N̄(E_j) + c`, counting
/// from the first zero of the dataset (the `j`-th zero sits at the midpoint
/// `j − 1/2` of its jump).
pub fn calibrate_counting_offset(ds: &ZerosDataset) -> Result<CountingCalibration> {
    if ds.is_empty() {
        return Err(Error::EmptyWindow("empty dataset".into()));
    }
    let mut residuals = Vec::with_capacity(ds.len());
    for (j, &h) in ds.heights.iter().enumerate() {
        residuals.push(j as f64 + 0.5 - smooth_counting(h)?);
    }
    let mut acc = crate::numeric::CompensatedSum::default();
    residuals.iter().for_each(|&r| acc.add(r));
    let offset = acc.value() / residuals.len() as f64;
    let mut max_abs: f64 = 0.0;
    let mut sq = 0.0;
    for r in &residuals {
        let d = r - offset;
        max_abs = max_abs.max(d.abs());
        sq += d * d;
    }
    Ok(CountingCalibration { offset, max_abs_residual: max_abs, rms_residual: (sq / residuals.len() as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_with_comments() {
        let ds = ZerosDataset::parse("# zeros\n14.134725\n\n21.022040\n  25.010858 \n", "t").unwrap();
        assert_eq!(ds.heights(), &[14.134725, 21.022040, 25.010858]);
        assert_eq!(ds.source_label(), "t");
        assert!(ZerosDataset::parse("", "e").unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert_eq!(
            ZerosDataset::parse("1.0\nabc\n", "x").unwrap_err(),
            Error::Parse { line: 2, message: "not a number: \"abc\"".into() }
        );
        assert!(matches!(ZerosDataset::parse("2.0\n# c\n1.0\n", "x"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(ZerosDataset::parse("-1.0\n", "x"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(ZerosDataset::parse("1.0\n1.00000000000001\n", "x"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn two_zeros_give_mirror_bins() {
        let ds = ZerosDataset::new(alloc::vec![100.0, 100.7], "x").unwrap();
        let edges = uniform_edges(-1.0, 1.0, 4).unwrap();
        let h = empirical_r2(&ds, Window::new(100.0, 10.0).unwrap(), &edges).unwrap();
        assert_eq!(h.raw, alloc::vec![1, 0, 0, 1]);
        assert_eq!(h.pairs_used, 2);
        assert_eq!(h.counts[0], h.counts[3]);
    }

    #[test]
    fn pair_bookkeeping() {
        let ds = ZerosDataset::new((1..200).map(|i| 50.0 + (i as f64).powf(1.1) * 0.37).collect(), "x").unwrap();
        let edges = uniform_edges(-3.0, 3.0, 24).unwrap();
        let w = Window::new(90.0, 60.0).unwrap();
        let h = empirical_r2(&ds, w, &edges).unwrap();
        let total: f64 = h.counts.iter().zip(edges.windows(2)).map(|(c, e)| c * (e[1] - e[0]) * w.width).sum();
        assert!((total - h.pairs_used as f64).abs() < 1e-9);
        for i in 0..12 {
            assert_eq!(h.raw[i], h.raw[23 - i]);
        }
        let pts = ds.in_window(w);
        let split: Vec<u64> = {
            let a = pair_counts(pts, 0..40, &edges);
            let b = pair_counts(pts, 40..pts.len(), &edges);
            a.iter().zip(&b).map(|(x, y)| x + y).collect()
        };
        assert_eq!(split, h.raw);
    }

    #[test]
    fn empty_window() {
        let ds = ZerosDataset::new(alloc::vec![10.0, 11.0], "x").unwrap();
        let edges = uniform_edges(-1.0, 1.0, 2).unwrap();
        assert!(matches!(empirical_r2(&ds, Window::new(100.0, 5.0).unwrap(), &edges), Err(Error::EmptyWindow(_))));
    }

    #[test]
    fn three_zeros_six_triples() {
        let ds = ZerosDataset::new(alloc::vec![10.0, 10.3, 11.1], "x").unwrap();
        let edges = uniform_edges(-2.0, 2.0, 8).unwrap();
        let h = empirical_r3(&ds, Window::new(10.5, 4.0).unwrap(), &edges, &edges).unwrap();
        assert_eq!(h.triples_used, 6);
        let (nx, ny) = h.shape();
        // reversing (i, j, k) maps (x, y) → (−y, −x)
        for i in 0..nx {
            for j in 0..ny {
                assert_eq!(h.raw[i * ny + j], h.raw[(ny - 1 - j) * ny + (nx - 1 - i)]);
            }
        }
    }

    #[test]
    fn merge_pools_counts() {
        let ds = ZerosDataset::new(alloc::vec![1.0, 1.5, 2.2, 2.4], "x").unwrap();
        let edges = uniform_edges(-1.0, 1.0, 4).unwrap();
        let a = empirical_r2(&ds, Window::new(1.6, 2.0).unwrap(), &edges).unwrap();
        let m = a.merge(&a).unwrap();
        assert_eq!(m.pairs_used, 2 * a.pairs_used);
        assert_eq!(m.counts, a.counts);
        let other = empirical_r2(&ds, Window::new(1.6, 2.0).unwrap(), &uniform_edges(-1.0, 1.0, 2).unwrap()).unwrap();
        assert!(a.merge(&other).is_err());
    }

    #[test]
    fn chi_square_of_exact_model_is_zero() {
        let h = CorrelationHistogram::from_raw(
            uniform_edges(0.0, 1.0, 4).unwrap(),
            alloc::vec![4, 4, 4, 4],
            Window::new(0.0, 2.0).unwrap(),
            2.0,
        )
        .unwrap();
        let c = chi_square(&h, 0.0, 1.0, 0, |_| Ok(8.0)).unwrap();
        assert_eq!(c.dof, 4);
        assert!(c.chi2 < 1e-20);
        assert_eq!(chi_square(&h, 2.0, 3.0, 0, |_| Ok(0.0)).unwrap().per_dof(), None);
        assert_eq!(chi_square(&h, 0.0, 1.0, 5, |_| Ok(8.0)).unwrap().dof, 0);
    }
}
