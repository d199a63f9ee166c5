//! Rayon drivers over the pure routines of the core crate.
//!
//! Work is split into pieces that do not depend on the thread count (Monte
//! Carlo blocks, quadrature slices, fixed prime chunks, fixed index ranges)
//! and reduced in a fixed order, so results are bit-identical for any pool
//! size.

use rayon::prelude::*;
use zerocorr_core::density::WindowConfig;
use zerocorr_core::empirical::{
    pair_counts, triple_counts, CorrelationHistogram, TripleHistogram, Window, ZerosDataset,
};
use zerocorr_core::kernel::{kernel_determinant, KernelContext};
use zerocorr_core::phase_average::{
    block_count, finish_monte_carlo, finish_quadrature, mc_block, merge_blocks, quadrature_points, quadrature_slice,
    AverageEstimate, BlockStats, Method, PhaseAssignment, PhaseKernel, SmoothModel, MAX_CORRELATION_QUADRATURE_PRIMES,
    MAX_QUADRATURE_PRIMES,
};
use zerocorr_core::primes::PrimeTable;
use zerocorr_core::zeta::{euler_product_from_chunks, euler_product_log_chunk, PRODUCT_CHUNK};
use zerocorr_core::{Complex64, Error, Result};

/// First indices handled per task by the pair and triple counters.
pub const COUNT_CHUNK: usize = 512;

/// A pool with `threads` workers (0 lets rayon decide).
pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn average<F>(f: &F, table: &PrimeTable, method: Method, budget: u64, max_primes: usize) -> Result<AverageEstimate>
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + Sync,
{
    if budget < 1 {
        return Err(Error::InvalidArgument("budget must be at least 1".into()));
    }
    match method {
        Method::MonteCarlo { seed } => {
            let blocks: Vec<BlockStats> =
                (0..block_count(budget)).into_par_iter().map(|b| mc_block(f, table, seed, b, budget)).collect();
            Ok(finish_monte_carlo(merge_blocks(&blocks)))
        }
        Method::TensorQuadrature => {
            let nodes = u32::try_from(budget).map_err(|_| Error::InvalidArgument("node count too large".into()))?;
            let total = quadrature_points(table.len(), nodes, max_primes)?;
            let firsts = if table.is_empty() { 1 } else { nodes };
            let slices: Vec<Complex64> =
                (0..firsts).into_par_iter().map(|j| quadrature_slice(f, table, nodes, j)).collect();
            Ok(finish_quadrature(slices, total, nodes))
        }
    }
}

/// Parallel `average_over_phases`; same result as the serial one.
pub fn average_over_phases<F>(f: &F, table: &PrimeTable, method: Method, budget: u64) -> Result<AverageEstimate>
where
    F: Fn(&PhaseAssignment<'_>) -> Complex64 + Sync,
{
    average(f, table, method, budget, MAX_QUADRATURE_PRIMES)
}

/// Parallel `mc_correlation`; same result as the serial one.
pub fn mc_correlation(
    offsets: &[f64],
    cfg: &WindowConfig,
    table: &PrimeTable,
    method: Method,
    budget: u64,
) -> Result<AverageEstimate> {
    let kernel = PhaseKernel::new(offsets, cfg, table, SmoothModel::WindowCenter)?;
    let f = |pa: &PhaseAssignment<'_>| Complex64::new(kernel.determinant(pa), 0.0);
    average(&f, table, method, budget, MAX_CORRELATION_QUADRATURE_PRIMES)
}

/// `truncated_euler_product` with the prime chunks spread over the pool.
pub fn truncated_euler_product(s: Complex64, table: &PrimeTable) -> Complex64 {
    let logs: Vec<Complex64> =
        table.entries().par_chunks(PRODUCT_CHUNK).map(|c| euler_product_log_chunk(s, c)).collect();
    euler_product_from_chunks(logs)
}

/// Kernel determinants of many point sets.
pub fn kernel_determinants(sets: &[Vec<f64>], ctx: &KernelContext<'_>) -> Result<Vec<f64>> {
    sets.par_iter().map(|pts| kernel_determinant(pts, ctx)).collect()
}

/// Evaluate `f` at every grid point, results in grid order.
pub fn sweep<T, R, F>(grid: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    grid.par_iter().map(f).collect()
}

fn chunked<F>(n: usize, bins: usize, count: F) -> Vec<u64>
where
    F: Fn(std::ops::Range<usize>) -> Vec<u64> + Sync,
{
    let starts: Vec<usize> = (0..n).step_by(COUNT_CHUNK).collect();
    let parts: Vec<Vec<u64>> = starts.par_iter().map(|&s| count(s..(s + COUNT_CHUNK).min(n))).collect();
    let mut total = vec![0u64; bins];
    for p in parts {
        for (t, c) in total.iter_mut().zip(p) {
            *t += c;
        }
    }
    total
}

fn window_slice(ds: &ZerosDataset, window: Window, at_least: usize) -> Result<&[f64]> {
    let pts = ds.in_window(window);
    if pts.len() < at_least {
        return Err(Error::EmptyWindow(format!(
            "{} zeros in [{}, {}), need {at_least}",
            pts.len(),
            window.lo(),
            window.hi()
        )));
    }
    Ok(pts)
}

/// Parallel `empirical_r2`.
pub fn empirical_r2(ds: &ZerosDataset, window: Window, edges: &[f64]) -> Result<CorrelationHistogram> {
    let pts = window_slice(ds, window, 2)?;
    // validates the edges before any counting
    CorrelationHistogram::from_raw(edges.to_vec(), vec![0; edges.len().saturating_sub(1)], window, window.width)?;
    let raw = chunked(pts.len(), edges.len() - 1, |r| pair_counts(pts, r, edges));
    CorrelationHistogram::from_raw(edges.to_vec(), raw, window, window.width)
}

/// Parallel `empirical_r3`.
pub fn empirical_r3(ds: &ZerosDataset, window: Window, edges_12: &[f64], edges_23: &[f64]) -> Result<TripleHistogram> {
    let pts = window_slice(ds, window, 3)?;
    let cells = edges_12.len().saturating_sub(1) * edges_23.len().saturating_sub(1);
    TripleHistogram::from_raw(edges_12.to_vec(), edges_23.to_vec(), vec![0; cells], window, window.width)?;
    let raw = chunked(pts.len(), cells, |r| triple_counts(pts, r, edges_12, edges_23));
    TripleHistogram::from_raw(edges_12.to_vec(), edges_23.to_vec(), raw, window, window.width)
}
