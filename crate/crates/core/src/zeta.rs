//! ζ(1+s) near the pole, its logarithmic derivatives, and the truncated
//! Euler product whose `p* → ∞` limit is `s ζ(1+s)`.
//!
//! Everything is evaluated through the entire function `h(s) = s ζ(1+s)`,
//! summed by Euler–Maclaurin with termwise-differentiated jets. The pole is
//! then restored analytically (`ζ = h/s`, `ζ'/ζ = h'/h − 1/s`), so no
//! quantity ever subtracts two numbers of size `1/|s|`.

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::numeric::{cis, expm1_i, ln_1p, CompensatedComplexSum, Jet};
use crate::primes::{PrimeEntry, PrimeTable};

/// Default Euler–Maclaurin cutoff `M`.
pub const DEFAULT_TERMS: usize = 64;

/// Primes per chunk of the log-space product. The chunk boundaries are fixed
/// so partitioned (parallel) evaluation reduces in the same order.
pub const PRODUCT_CHUNK: usize = 4096;

/// `B_{2k} / (2k)!` for k = 1..=8.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// `n^{-1-s}` as a jet in `s`, for `ln_n = ln n`.
#[inline]
fn inverse_power(x: Jet, ln_n: f64, extra: f64) -> Jet {
    // exponent −(1 + extra + s) ln n
    let e = Jet { v: -(x.v + 1.0 + extra) * ln_n, d1: Complex64::new(-ln_n, 0.0), d2: ZERO };
    e.exp()
}

/// Jet of `h(s) = s ζ(1+s)` by Euler–Maclaurin with cutoff `m`.
pub(crate) fn entire_jet(s: Complex64, m: usize) -> Jet {
    let (x, sum, m_pow) = entire_parts(s, m);
    x * sum + m_pow
}

/// `h(s) − 1`, accurate when `s` is tiny.
pub(crate) fn entire_minus_one(s: Complex64, m: usize) -> Complex64 {
    let (x, sum, _) = entire_parts(s, m);
    // M^{-s} − 1 = e^{a}e^{ib} − 1 with a + ib = −s ln M
    let z = -s * (m as f64).ln();
    let m_pow_m1 = cis(z.im) * z.re.exp_m1() + expm1_i(z.im);
    x.v * sum.v + m_pow_m1
}

/// `(s, Σ_{n<M} n^{-1-s} + tail, M^{-s})`, so that `h = s·sum + M^{-s}`.
fn entire_parts(s: Complex64, m: usize) -> (Jet, Jet, Jet) {
    let x = Jet::variable(s);
    let mut head = Jet::constant(ONE); // n = 1
    for n in 2..m {
        head = head + inverse_power(x, (n as f64).ln(), 0.0);
    }
    let ln_m = (m as f64).ln();
    // M^{-s}
    let m_pow = Jet { v: -x.v * ln_m, d1: Complex64::new(-ln_m, 0.0), d2: ZERO }.exp();
    // M^{-1-s}/2
    let mut tail = inverse_power(x, ln_m, 0.0).scale(Complex64::new(0.5, 0.0));
    // Bernoulli corrections: c_k (1+s)(2+s)…(2k−1+s) M^{-s-2k}
    let mut rising = Jet::constant(ONE);
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let order = 2 * k + 1; // 2k − 1 for 1-based k
                               // extend (1+s)_{order}: multiply the factors not yet included
        let start = if k == 0 { 1 } else { 2 * k };
        for j in start..=order {
            rising = rising * (x + Jet::constant(Complex64::new(j as f64, 0.0)));
        }
        let power = inverse_power(x, ln_m, (2 * k + 1) as f64);
        tail = tail + (rising * power).scale(Complex64::new(*c, 0.0));
    }
    (x, head + tail, m_pow)
}

fn check_terms(terms: usize) -> Result<()> {
    if terms < 4 {
        return Err(invalid("Euler-Maclaurin cutoff must be at least 4"));
    }
    Ok(())
}

/// ζ(1+s).
pub fn zeta_one_plus(s: Complex64, terms: usize) -> Result<Complex64> {
    check_terms(terms)?;
    if s == ZERO {
        return Err(Error::Pole);
    }
    Ok(entire_jet(s, terms).v / s)
}

/// ζ′(1+s)/ζ(1+s), by termwise differentiation.
pub fn log_deriv_zeta_one_plus(s: Complex64, terms: usize) -> Result<Complex64> {
    check_terms(terms)?;
    if s == ZERO {
        return Err(Error::Pole);
    }
    let h = entire_jet(s, terms);
    Ok(h.d1 / h.v - 1.0 / s)
}

/// d/ds [ζ′/ζ](1+s).
pub fn log_deriv_zeta_one_plus_prime(s: Complex64, terms: usize) -> Result<Complex64> {
    check_terms(terms)?;
    if s == ZERO {
        return Err(Error::Pole);
    }
    let (_, g2) = entire_jet(s, terms).log_derivatives();
    Ok(g2 + 1.0 / (s * s))
}

/// `s ζ(1+s)`, the limit of the truncated Euler product. Equal to 1 at `s = 0`.
pub fn product_limit(s: Complex64) -> Complex64 {
    if s == ZERO {
        return ONE;
    }
    entire_jet(s, DEFAULT_TERMS).v
}

/// First and second derivatives of `ln(s ζ(1+s))`; regular at `s = 0`.
pub fn regular_log_derivatives(s: Complex64) -> (Complex64, Complex64) {
    entire_jet(s, DEFAULT_TERMS).log_derivatives()
}

/// `Σ ln[(1 − 1/p)/(1 − p^{−1−s})]` over one slice of primes, in order.
pub fn euler_product_log_chunk(s: Complex64, entries: &[PrimeEntry]) -> Complex64 {
    let mut acc = CompensatedComplexSum::default();
    for e in entries {
        let inv_p = e.a_p_sq();
        // p^{-1-s} = (1/p) e^{-s ln p}
        let z = (-s * e.log_p).exp() * inv_p;
        acc.add(ln_1p(Complex64::new(-inv_p, 0.0)) - ln_1p(-z));
    }
    acc.value()
}

/// Reduce per-chunk logs (chunk order) and exponentiate.
pub fn euler_product_from_chunks(chunk_logs: impl IntoIterator<Item = Complex64>) -> Complex64 {
    let mut acc = CompensatedComplexSum::default();
    for l in chunk_logs {
        acc.add(l);
    }
    acc.value().exp()
}

/// `∏_{p<p*} (1 − 1/p)/(1 − p^{−1−s})`, accumulated in log space.
pub fn truncated_euler_product(s: Complex64, table: &PrimeTable) -> Complex64 {
    euler_product_from_chunks(table.entries().chunks(PRODUCT_CHUNK).map(|c| euler_product_log_chunk(s, c)))
}
