//! Sine kernels and their small determinants.

use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::density::{counting_oscillatory_difference, density_value, smooth_counting_difference, WindowConfig};
use crate::error::{invalid, Error, Result};
use crate::primes::PrimeTable;

/// Largest determinant order handled.
pub const MAX_ORDER: usize = 8;

/// Separation (E-units) below which the kernel takes its diagonal value.
pub const DEFAULT_DIAGONAL_TOLERANCE: f64 = 1e-8;

/// GUE bulk kernel `sin(πρ(x−y)) / (π(x−y))`; equals `ρ` at `x = y`.
pub fn gue_sine_kernel(x: f64, y: f64, rho: f64) -> f64 {
    let d = x - y;
    if d == 0.0 {
        return rho;
    }
    (PI * rho * d).sin() / (PI * d)
}

/// Everything the prime-modulated kernel needs.
#[derive(Debug, Clone, Copy)]
pub struct KernelContext<'a> {
    pub cfg: WindowConfig,
    pub table: &'a PrimeTable,
    pub diagonal_tolerance: f64,
}

impl<'a> KernelContext<'a> {
    pub fn new(cfg: WindowConfig, table: &'a PrimeTable) -> Result<Self> {
        Self::with_tolerance(cfg, table, DEFAULT_DIAGONAL_TOLERANCE)
    }

    pub fn with_tolerance(cfg: WindowConfig, table: &'a PrimeTable, diagonal_tolerance: f64) -> Result<Self> {
        if table.p_star() != cfg.p_star {
            return Err(Error::Configuration(alloc::format!(
                "table cutoff {} differs from configured cutoff {}",
                table.p_star(),
                cfg.p_star
            )));
        }
        if !(diagonal_tolerance > 0.0) {
            return Err(invalid("diagonal tolerance must be positive"));
        }
        Ok(KernelContext { cfg, table, diagonal_tolerance })
    }

    /// `N̄(E1, p*) − N̄(E2, p*)`.
    pub fn counting_difference(&self, e1: f64, e2: f64) -> Result<f64> {
        Ok(smooth_counting_difference(e1, e2)? + counting_oscillatory_difference(e1, e2, self.table, self.cfg.n_max)?)
    }
}

/// `K(E1, E2) = sin(π(N̄(E1,p*) − N̄(E2,p*))) / (π(E1 − E2))`, with
/// `K(E, E) = ρ̄(E)`.
pub fn generalized_kernel(e1: f64, e2: f64, ctx: &KernelContext<'_>) -> Result<f64> {
    // argument order fixed so K(x, y) and K(y, x) are the same bits
    let (e1, e2) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
    let d = e1 - e2;
    if d.abs() < ctx.diagonal_tolerance {
        return Ok(density_value(0.5 * (e1 + e2), &ctx.cfg, ctx.table)?.total);
    }
    let dn = ctx.counting_difference(e1, e2)?;
    Ok((PI * dn).sin() / (PI * d))
}

/// `det K(x_i, x_j)` for `1 ≤ n ≤ 8` points.
pub fn kernel_determinant(points: &[f64], ctx: &KernelContext<'_>) -> Result<f64> {
    let n = points.len();
    check_order(n)?;
    let mut m = [0.0f64; MAX_ORDER * MAX_ORDER];
    for i in 0..n {
        for j in i..n {
            let k = generalized_kernel(points[i], points[j], ctx)?;
            m[i * n + j] = k;
            m[j * n + i] = k;
        }
    }
    Ok(lu_determinant(&mut m[..n * n], n))
}

pub(crate) fn check_order(n: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("at least one point is required"));
    }
    if n > MAX_ORDER {
        return Err(Error::Capacity(alloc::format!("determinant order {n} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

/// Determinant of the row-major `n × n` matrix `a` by LU with partial
/// pivoting. `a` is overwritten.
pub fn lu_determinant(a: &mut [f64], n: usize) -> f64 {
    debug_assert_eq!(a.len(), n * n);
    let mut det = 1.0;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let v = a[row * n + col].abs();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for row in col + 1..n {
            let f = a[row * n + col] / d;
            if f != 0.0 {
                for k in col + 1..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    det
}
