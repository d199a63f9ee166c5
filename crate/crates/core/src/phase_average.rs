//! Averaging over independent prime phases.
//!
//! Under a good window average the phases `E ln p` of distinct primes behave
//! as independent uniform angles, so a window average of a quasi-periodic
//! function becomes an integral over the torus `[0, 2π)^{#primes}`. This
//! module evaluates that integral directly, either by seeded Monte Carlo or
//! by a tensor trapezoid rule, and uses it as the ground truth for every
//! closed form in the crate.
//!
//! Monte Carlo samples are grouped in fixed blocks of [`MC_BLOCK`]; block `b`
//! draws from ChaCha8 stream `b` of the seed, and block statistics are merged
//! in a fixed pairwise tree. A parallel driver that evaluates blocks on any
//! number of threads and hands them to [`merge_blocks`] reproduces the
//! sequential result bit for bit.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::density::{
    closed_counting_angle, closed_counting_angle_difference, closed_density_term, smooth_counting_difference,
    smooth_density, WindowConfig,
};
use crate::error::{invalid, Error, Result};
use crate::kernel::lu_determinant;
use crate::numeric::{cis, CompensatedComplexSum, TWO_PI};
use crate::primes::{PrimeEntry, PrimeTable};

/// Samples per Monte Carlo block.
pub const MC_BLOCK: u64 = 4096;
/// Default trapezoid nodes per prime.
pub const DEFAULT_NODES: u32 = 64;
/// Most primes a tensor-product quadrature will take.
pub const MAX_QUADRATURE_PRIMES: usize = 6;
/// Most primes `mc_correlation` takes under tensor quadrature.
pub const MAX_CORRELATION_QUADRATURE_PRIMES: usize = 5;
/// Largest correlation order the oracle evaluates.
pub const MAX_CORRELATION_ORDER: usize = 4;

/// One angle per prime of a table, in table order.
#[derive(Debug, Clone, Copy)]
pub struct PhaseAssignment<'a> {
    table: &'a PrimeTable,
    angles: &'a [f64],
}

impl<'a> PhaseAssignment<'a> {
    pub fn new(table: &'a PrimeTable, angles: &'a [f64]) -> Result<Self> {
        if angles.len() != table.len() {
            return Err(invalid("one angle per prime is required"));
        }
        if angles.iter().any(|a| !(0.0..TWO_PI).contains(a)) {
            return Err(invalid("angles must lie in [0, 2π)"));
        }
        Ok(PhaseAssignment { table, angles })
    }

    pub fn table(&self) -> &'a PrimeTable {
        self.table
    }

    pub fn angles(&self) -> &'a [f64] {
        self.angles
    }

    /// Angle assigned to prime `p`, if `p` is in the table.
    pub fn angle_of(&self, p: u64) -> Option<f64> {
        let idx = self.table.entries().binary_search_by(|e| e.p.cmp(&p)).ok()?;
        Some(self.angles[idx])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'a PrimeEntry, f64)> + '_ {
        self.table.entries().iter().zip(self.angles.iter().copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MonteCarlo { seed: u64 },
    TensorQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    MonteCarlo,
    TensorQuadrature { nodes: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageEstimate {
    pub mean: Complex64,
    /// Standard error of the mean; 0 for quadrature.
    pub std_error: f64,
    pub samples: u64,
    pub kind: EstimateKind,
}

/// Running mean and scatter of a block of complex samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    pub count: u64,
    pub mean: Complex64,
    /// `Σ |f − mean|²`.
    pub m2: f64,
}

impl BlockStats {
    pub const EMPTY: BlockStats = BlockStats { count: 0, mean: Complex64 { re: 0.0, im: 0.0 }, m2: 0.0 };

    #[inline]
    fn push(&mut self, x: Complex64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        let delta2 = x - self.mean;
        self.m2 += delta.re * delta2.re + delta.im * delta2.im;
    }

    /// Chan's parallel combination.
    pub fn merge(a: BlockStats, b: BlockStats) -> BlockStats {
        if a.count == 0 {
            return b;
        }
        if b.count == 0 {
            return a;
        }
        let n = a.count + b.count;
        let delta = b.mean - a.mean;
        let wb = b.count as f64 / n as f64;
        BlockStats { count: n, mean: a.mean + delta * wb, m2: a.m2 + b.m2 + delta.norm_sqr() * a.count as f64 * wb }
    }
}

/// Pairwise-tree merge in slice order.
pub fn merge_blocks(blocks: &[BlockStats]) -> BlockStats {
    match blocks.len() {
        0 => BlockStats::EMPTY,
        1 => blocks[0],
        n => {
            let (l, r) = blocks.split_at(n / 2);
            BlockStats::merge(merge_blocks(l), merge_blocks(r))
        }
    }
}

/// Number of Monte Carlo blocks for a sample budget.
pub fn block_count(budget: u64) -> u64 {
    budget.div_ceil(MC_BLOCK)
}

/// Statistics of Monte Carlo block `block` out of a total `budget`.
pub fn mc_block<F>(f: &F, table: &PrimeTable, seed: u64, block: u64, budget: u64) -> BlockStats
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + ?Sized,
{
    let start = block * MC_BLOCK;
    let len = MC_BLOCK.min(budget.saturating_sub(start));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let mut angles = alloc::vec![0.0f64; table.len()];
    let mut stats = BlockStats::EMPTY;
    for _ in 0..len {
        for a in angles.iter_mut() {
            let u: f64 = rng.random();
            *a = TWO_PI * u;
        }
        let pa = PhaseAssignment { table, angles: &angles };
        stats.push(f(&pa));
    }
    stats
}

/// Estimate from merged Monte Carlo statistics.
pub fn finish_monte_carlo(stats: BlockStats) -> AverageEstimate {
    let n = stats.count;
    let std_error = if n > 1 { (stats.m2 / (n - 1) as f64 / n as f64).sqrt() } else { 0.0 };
    AverageEstimate { mean: stats.mean, std_error, samples: n, kind: EstimateKind::MonteCarlo }
}

/// Validate a tensor quadrature request and return the total node count.
pub fn quadrature_points(primes: usize, nodes: u32, max_primes: usize) -> Result<u64> {
    if primes > max_primes {
        return Err(Error::Capacity(alloc::format!("tensor quadrature over {primes} primes exceeds {max_primes}")));
    }
    (nodes as u64)
        .checked_pow(primes as u32)
        .filter(|&n| n <= 1 << 36)
        .ok_or_else(|| Error::Capacity(alloc::format!("{nodes}^{primes} quadrature nodes")))
}

/// Trapezoid sum over the torus with the first prime's node fixed to `first`
/// (or the single point of an empty table).
pub fn quadrature_slice<F>(f: &F, table: &PrimeTable, nodes: u32, first: u32) -> Complex64
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + ?Sized,
{
    let k = table.len();
    let step = TWO_PI / nodes as f64;
    let mut angles = alloc::vec![0.0f64; k];
    let mut acc = CompensatedComplexSum::default();
    if k == 0 {
        acc.add(f(&PhaseAssignment { table, angles: &angles }));
        return acc.value();
    }
    let mut index = alloc::vec![0u32; k];
    index[0] = first;
    angles[0] = step * first as f64;
    loop {
        acc.add(f(&PhaseAssignment { table, angles: &angles }));
        // odometer over primes 1..k
        let mut d = 1;
        loop {
            if d >= k {
                return acc.value();
            }
            index[d] += 1;
            if index[d] < nodes {
                angles[d] = step * index[d] as f64;
                break;
            }
            index[d] = 0;
            angles[d] = 0.0;
            d += 1;
        }
    }
}

/// Combine per-first-node slices (in node order) into the quadrature estimate.
pub fn finish_quadrature(
    slices: impl IntoIterator<Item = Complex64>,
    total_points: u64,
    nodes: u32,
) -> AverageEstimate {
    let mut acc = CompensatedComplexSum::default();
    for s in slices {
        acc.add(s);
    }
    AverageEstimate {
        mean: acc.value() / total_points as f64,
        std_error: 0.0,
        samples: total_points,
        kind: EstimateKind::TensorQuadrature { nodes },
    }
}

/// Average `f` over independent uniform phases of every prime in `table`.
///
/// `budget` is the sample count for Monte Carlo and the node count per prime
/// for tensor quadrature.
pub fn average_over_phases<F>(f: &F, table: &PrimeTable, method: Method, budget: u64) -> Result<AverageEstimate>
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + ?Sized,
{
    average_with_limit(f, table, method, budget, MAX_QUADRATURE_PRIMES)
}

fn average_with_limit<F>(
    f: &F,
    table: &PrimeTable,
    method: Method,
    budget: u64,
    max_primes: usize,
) -> Result<AverageEstimate>
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + ?Sized,
{
    if budget < 1 {
        return Err(invalid("budget must be at least 1"));
    }
    match method {
        Method::MonteCarlo { seed } => {
            let blocks: Vec<BlockStats> =
                (0..block_count(budget)).map(|b| mc_block(f, table, seed, b, budget)).collect();
            Ok(finish_monte_carlo(merge_blocks(&blocks)))
        }
        Method::TensorQuadrature => {
            let nodes = u32::try_from(budget).map_err(|_| invalid("node count too large"))?;
            let total = quadrature_points(table.len(), nodes, max_primes)?;
            let firsts = if table.is_empty() { 1 } else { nodes };
            let slices = (0..firsts).map(|j| quadrature_slice(f, table, nodes, j));
            Ok(finish_quadrature(slices, total, nodes))
        }
    }
}

// ---------------------------------------------------------------------------
// single-prime integrands and their contour-integral closed forms

/// `⟨R_p⟩` for amplitude² `a_sq` and `θ = (e1 − e2) ln p`.
pub fn rp_average(a_sq: f64, theta: f64) -> Complex64 {
    let w = cis(theta);
    (1.0 - 2.0 * a_sq + a_sq * w) / (1.0 - a_sq * w.conj())
}

/// Closed form of the phase average of the single-prime ratio `R_p`:
/// `(1 − 2A² + A² e^{iε ln p}) / (1 − A² e^{−iε ln p})`, `ε = e1 − e2`.
pub fn averaged_rp_closed_form(p: &PrimeEntry, e1: f64, e2: f64) -> Complex64 {
    rp_average(p.a_p_sq(), (e1 - e2) * p.log_p)
}

/// The single-prime factor of `e^{2πi(N̄₁ − N̄₂)}` at phase `φ`.
pub fn rp_integrand(p: &PrimeEntry, phase: f64, e1: f64, e2: f64) -> Complex64 {
    let a = p.a_p;
    let z1 = cis(phase + e1 * p.log_p);
    let z2 = cis(phase + e2 * p.log_p);
    ((1.0 - a * z2.conj()) * (1.0 - a * z1)) / ((1.0 - a * z1.conj()) * (1.0 - a * z2))
}

/// `2πi` times the density contribution of prime `q` at offset `e3`, i.e.
/// `∂/∂e₃ ln[(1 − A e^{iψ})/(1 − A e^{−iψ})]` with `ψ = φ + e₃ ln q`.
pub fn log_ratio_derivative(q: &PrimeEntry, phase: f64, e3: f64) -> Complex64 {
    let w = cis(phase + e3 * q.log_p) * q.a_p;
    let u = w / (1.0 - w);
    Complex64::new(0.0, -2.0 * q.log_p * u.re)
}

/// The integrand whose phase average defines `T_q`.
pub fn tq_integrand(q: &PrimeEntry, phase: f64, e1: f64, e2: f64, e3: f64) -> Complex64 {
    log_ratio_derivative(q, phase, e3) * rp_integrand(q, phase, e1, e2)
}

/// `T_q` for amplitude² `a_sq` and phases `f_j = e_j ln q`.
pub(crate) fn tq_from_phases(a_sq: f64, log_q: f64, f1: f64, f2: f64, f3: f64) -> Complex64 {
    let w31 = cis(f3 - f1) * a_sq;
    let w23 = cis(f2 - f3) * a_sq;
    let dlog = Complex64::new(0.0, -log_q) * (w31 / (1.0 - w31) + w23 / (1.0 - w23));
    let ratio = (1.0 - a_sq) * (1.0 - cis(f1 - f2)) / (1.0 - a_sq * cis(f2 - f1));
    dlog * ratio
}

/// `T_q = ∂/∂e₃ ln[(1 − A² e^{ie₃₁ ln q})/(1 − A² e^{ie₂₃ ln q})] ·
/// (1 − A²)(1 − e^{ie₁₂ ln q})/(1 − A² e^{ie₂₁ ln q})`, derivative done analytically.
pub fn t_q_closed_form(q: &PrimeEntry, e1: f64, e2: f64, e3: f64) -> Complex64 {
    let l = q.log_p;
    tq_from_phases(q.a_p_sq(), l, e1 * l, e2 * l, e3 * l)
}

// ---------------------------------------------------------------------------
// the end-to-end correlation oracle

/// How the smooth counting function enters the oracle kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SmoothModel {
    /// `N̄(E+e) − N̄(E) → d̄(E) e` and diagonal `d̄(E)`: the convention of the
    /// analytic formulas.
    #[default]
    WindowCenter,
    /// The exact smooth counting function at every point.
    Exact,
}

/// The kernel determinant at offsets `E + e_j`, with `E ln p` replaced by a
/// free phase per prime.
#[derive(Debug, Clone)]
pub struct PhaseKernel<'a> {
    table: &'a PrimeTable,
    offsets: Vec<f64>,
    smooth_counting: Vec<f64>,
    smooth_density: Vec<f64>,
    diagonal_tolerance: f64,
}

impl<'a> PhaseKernel<'a> {
    pub fn new(offsets: &[f64], cfg: &WindowConfig, table: &'a PrimeTable, smooth: SmoothModel) -> Result<Self> {
        let n = offsets.len();
        if n == 0 {
            return Err(invalid("at least one offset is required"));
        }
        if n > MAX_CORRELATION_ORDER {
            return Err(Error::Capacity(alloc::format!("correlation order {n} exceeds {MAX_CORRELATION_ORDER}")));
        }
        if table.p_star() != cfg.p_star {
            return Err(Error::Configuration(alloc::format!(
                "table cutoff {} differs from configured cutoff {}",
                table.p_star(),
                cfg.p_star
            )));
        }
        let dbar = smooth_density(cfg.e)?;
        let (smooth_counting, smooth_density_at) = match smooth {
            SmoothModel::WindowCenter => {
                (offsets.iter().map(|e| dbar * e).collect(), offsets.iter().map(|_| dbar).collect())
            }
            SmoothModel::Exact => {
                let mut c = Vec::with_capacity(n);
                let mut d = Vec::with_capacity(n);
                for &e in offsets {
                    c.push(smooth_counting_difference(cfg.e + e, cfg.e)?);
                    d.push(smooth_density(cfg.e + e)?);
                }
                (c, d)
            }
        };
        Ok(PhaseKernel {
            table,
            offsets: offsets.to_vec(),
            smooth_counting,
            smooth_density: smooth_density_at,
            diagonal_tolerance: crate::kernel::DEFAULT_DIAGONAL_TOLERANCE,
        })
    }

    pub fn order(&self) -> usize {
        self.offsets.len()
    }

    pub fn table(&self) -> &'a PrimeTable {
        self.table
    }

    /// `det K(E+e_i, E+e_j)` at the given phases.
    pub fn determinant(&self, phases: &PhaseAssignment<'_>) -> f64 {
        let n = self.offsets.len();
        let mut m = [0.0f64; MAX_CORRELATION_ORDER * MAX_CORRELATION_ORDER];
        let mut rho = [0.0f64; MAX_CORRELATION_ORDER];
        for (i, &e) in self.offsets.iter().enumerate() {
            let mut d = self.smooth_density[i];
            for (p, phi) in phases.iter() {
                d += closed_density_term(p, phi + e * p.log_p);
            }
            rho[i] = d;
            m[i * n + i] = d;
        }
        for i in 0..n {
            for j in i + 1..n {
                let (ei, ej) = (self.offsets[i], self.offsets[j]);
                let k = if (ei - ej).abs() < self.diagonal_tolerance {
                    0.5 * (rho[i] + rho[j])
                } else {
                    let mut dn = self.smooth_counting[i] - self.smooth_counting[j];
                    for (p, phi) in phases.iter() {
                        dn += closed_counting_angle_difference(p, phi + ei * p.log_p, phi + ej * p.log_p) / PI;
                    }
                    (PI * dn).sin() / (PI * (ei - ej))
                };
                m[i * n + j] = k;
                m[j * n + i] = k;
            }
        }
        lu_determinant(&mut m[..n * n], n)
    }

    /// `N̄(E + e_j, p*) − N̄(E)` at the given phases (all prime powers).
    pub fn counting(&self, j: usize, phases: &PhaseAssignment<'_>) -> f64 {
        let e = self.offsets[j];
        let mut n = self.smooth_counting[j];
        for (p, phi) in phases.iter() {
            n += closed_counting_angle(p, phi + e * p.log_p) / PI;
        }
        n
    }
}

/// `R_n(e_1, …, e_n) = ⟨det K(E + e_i, E + e_j)⟩` averaged over the phases
/// of every prime in `table`, window-centre smooth part.
pub fn mc_correlation(
    offsets: &[f64],
    cfg: &WindowConfig,
    table: &PrimeTable,
    method: Method,
    budget: u64,
) -> Result<AverageEstimate> {
    mc_correlation_with(offsets, cfg, table, method, budget, SmoothModel::WindowCenter)
}

pub fn mc_correlation_with(
    offsets: &[f64],
    cfg: &WindowConfig,
    table: &PrimeTable,
    method: Method,
    budget: u64,
    smooth: SmoothModel,
) -> Result<AverageEstimate> {
    let kernel = PhaseKernel::new(offsets, cfg, table, smooth)?;
    let f = |pa: &PhaseAssignment<'_>| Complex64::new(kernel.determinant(pa), 0.0);
    average_with_limit(&f, table, method, budget, MAX_CORRELATION_QUADRATURE_PRIMES)
}
