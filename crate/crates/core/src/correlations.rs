//! Analytic two- and three-point correlation functions.
//!
//! Every value is split into a disconnected part (products of mean
//! densities), a diagonal part (paired prime powers) and an oscillatory part
//! carrying `e^{2πi d̄ e_ij}`. Connected parts are additive:
//! `R₂ = d̄² + R₂ᵈⁱᵃᵍ + R₂ᵒˢᶜ`.
//!
//! Sums and products over all primes are cut at
//! [`SumTruncation::prime_cutoff`]. The [`restricted`] submodule evaluates the
//! same expressions over a fixed finite prime table with no `p* → ∞`
//! replacement, which is what the phase-average oracle computes.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::density::smooth_density;
use crate::error::{Error, Result};
use crate::numeric::{cis, expm1_i, ln_1p, CompensatedComplexSum, CompensatedSum};
use crate::primes::{PrimeEntry, PrimeTable};
use crate::zeta::{entire_jet, entire_minus_one, DEFAULT_TERMS, PRODUCT_CHUNK};

/// Below this separation the two-point breakdown switches to the combined
/// near-coincident form.
pub const NEAR_COINCIDENT: f64 = 1e-6;

/// Largest prime cutoff accepted.
pub const MAX_PRIME_CUTOFF: u64 = 1 << 34;

const FOUR_PI_SQ: f64 = 4.0 * PI * PI;
const TWO_PI_SQ: f64 = 2.0 * PI * PI;
const EIGHT_PI_CUBED: f64 = 8.0 * PI * PI * PI;

/// Where the sums and products over all primes are cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumTruncation {
    pub prime_cutoff: u64,
    pub tail_bound_target: f64,
}

impl Default for SumTruncation {
    fn default() -> Self {
        SumTruncation { prime_cutoff: 1_000_000, tail_bound_target: 1e-5 }
    }
}

impl SumTruncation {
    /// Checks the cutoff and that the estimated tail meets the target.
    pub fn new(prime_cutoff: u64, tail_bound_target: f64) -> Result<Self> {
        let t = SumTruncation { prime_cutoff, tail_bound_target };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.prime_cutoff < 2 {
            return Err(crate::error::invalid("prime cutoff must be at least 2"));
        }
        if self.prime_cutoff > MAX_PRIME_CUTOFF {
            return Err(Error::Capacity(alloc::format!("prime cutoff {} is too large", self.prime_cutoff)));
        }
        if !(self.tail_bound_target > 0.0) {
            return Err(crate::error::invalid("tail bound target must be positive"));
        }
        let tail = self.estimated_tail();
        if tail > self.tail_bound_target {
            return Err(Error::Configuration(alloc::format!(
                "estimated tail {tail:.3e} above cutoff {} exceeds target {:.3e}",
                self.prime_cutoff,
                self.tail_bound_target
            )));
        }
        Ok(())
    }

    /// Bound on what the primes `p ≥ prime_cutoff` add to any of the diagonal
    /// sums, the log of the products, or the three-term bracket sums.
    pub fn estimated_tail(&self) -> f64 {
        tail_estimate(self.prime_cutoff)
    }
}

/// Integral comparison with `π(x) < 1.26 x / ln x`, taking the largest of
/// the summand bounds `ln²p/(2π²p²)` (two-point diagonal),
/// `3 ln³p/(4π³p²)` (three-point diagonal), `4/p²` (log products) and
/// `12 ln p/(8π³p²)` (bracket sums, relative to the branch prefactor).
pub fn tail_estimate(cutoff: u64) -> f64 {
    let x = (cutoff.max(3)) as f64;
    let l = x.ln();
    let rosser = 1.26;
    // ∫_x^∞ lnᵏt/t² dt/ln t for k = 0, 1, 2, 3
    let i0 = 1.0 / (x * l);
    let i1 = 1.0 / x;
    let i2 = (l + 1.0) / x;
    let i3 = (l * l + 2.0 * l + 2.0) / x;
    let diag2 = i2 / TWO_PI_SQ;
    let diag3 = 3.0 * i3 / (4.0 * PI * PI * PI);
    let product = 4.0 * i0;
    let bracket = 12.0 * i1 / EIGHT_PI_CUBED;
    rosser * diag2.max(diag3).max(product).max(bracket)
}

/// A correlation value with its three parts; `total` is their sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationBreakdown {
    pub disconnected: f64,
    pub diagonal: f64,
    pub oscillatory: f64,
    pub total: f64,
}

impl CorrelationBreakdown {
    pub fn new(disconnected: f64, diagonal: f64, oscillatory: f64) -> Self {
        CorrelationBreakdown { disconnected, diagonal, oscillatory, total: disconnected + diagonal + oscillatory }
    }

    /// The connected part, `diagonal + oscillatory`.
    pub fn connected(&self) -> f64 {
        self.diagonal + self.oscillatory
    }
}

fn singular(what: &str) -> Error {
    Error::SingularArgument(alloc::string::String::from(what))
}

fn check_offset(eps: f64) -> Result<()> {
    if !eps.is_finite() {
        return Err(crate::error::invalid("offset must be finite"));
    }
    if eps == 0.0 {
        return Err(singular("zero offset"));
    }
    Ok(())
}

fn check_triple(e1: f64, e2: f64, e3: f64) -> Result<()> {
    if !(e1.is_finite() && e2.is_finite() && e3.is_finite()) {
        return Err(crate::error::invalid("offsets must be finite"));
    }
    if e1 == e2 || e2 == e3 || e3 == e1 {
        return Err(singular("coincident offsets"));
    }
    Ok(())
}

fn check_height(e: f64) -> Result<f64> {
    if !(e > crate::numeric::TWO_PI) {
        return Err(crate::error::invalid("height must exceed 2π"));
    }
    smooth_density(e)
}

// ---------------------------------------------------------------------------
// per-prime pieces shared by the truncated and the table-restricted forms

/// `1/(p^{1−ix} − 1) = v/(1 − v)`, `v = e^{ix ln p}/p`.
#[inline]
fn inverse_shifted_power(p: &PrimeEntry, x: f64) -> Complex64 {
    let v = cis(x * p.log_p) * p.a_p_sq();
    v / (1.0 - v)
}

/// `ln(1 − (1 − p^{iε})²/(p − 1)²)`.
#[inline]
fn product_factor_log(p: &PrimeEntry, eps: f64) -> Complex64 {
    let d = expm1_i(eps * p.log_p); // p^{iε} − 1
    let pm1 = (p.p - 1) as f64;
    ln_1p(-(d * d) / (pm1 * pm1))
}

/// `ln ∏_p (1 − (1 − p^{iε})²/(p − 1)²)` in fixed chunks.
fn product_factor_log_sum(eps: f64, entries: &[PrimeEntry]) -> Complex64 {
    let mut total = CompensatedComplexSum::default();
    for chunk in entries.chunks(PRODUCT_CHUNK) {
        let mut acc = CompensatedComplexSum::default();
        for p in chunk {
            acc.add(product_factor_log(p, eps));
        }
        total.add(acc.value());
    }
    total.value()
}

/// `Σ_p ln³p [f(e₁₂)f(e₁₃) + f(e₂₁)f(e₂₃) + f(e₃₂)f(e₃₁)]`.
fn diagonal_triple_sum(e1: f64, e2: f64, e3: f64, entries: &[PrimeEntry]) -> Complex64 {
    let mut acc = CompensatedComplexSum::default();
    for p in entries {
        let f = |x| inverse_shifted_power(p, x);
        let pairings = f(e1 - e2) * f(e1 - e3) + f(e2 - e1) * f(e2 - e3) + f(e3 - e2) * f(e3 - e1);
        acc.add(pairings * (p.log_p * p.log_p * p.log_p));
    }
    acc.value()
}

/// `R₃ᵈⁱᵃᵍ` over the given primes.
fn r3_diagonal_over(e1: f64, e2: f64, e3: f64, entries: &[PrimeEntry]) -> f64 {
    -2.0 * diagonal_triple_sum(e1, e2, e3, entries).re / EIGHT_PI_CUBED
}

/// Which three-term bracket to use in the three-point oscillatory part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[allow(clippy::manual_non_exhaustive)]
pub enum BracketVariant {
    /// The bracket obtained from the contour integral.
    #[default]
    Contour,
    /// Second cross term with denominator `(q^{1+ie₃₁} − 1)(q − 1)`; kept only
    /// so tests can show the oracle rejects it.
    #[doc(hidden)]
    KnownTypo,
}

/// `−i ln q (t₁ + t₂ + t₃)`, the per-prime rational part of the bracket.
pub fn three_terms(q: &PrimeEntry, e1: f64, e2: f64, e3: f64, variant: BracketVariant) -> Complex64 {
    let l = q.log_p;
    let qf = q.p as f64;
    // q^{1+ix} − 1
    let shifted = |x: f64| cis(x * l) * qf - 1.0;
    let (e12, e13, e23) = (e1 - e2, e1 - e3, e2 - e3);
    let (e31, e32) = (-e13, -e23);
    let num = expm1_i(e12 * l); // q^{ie₁₂} − 1
    let t1 = num / (shifted(e23) * shifted(e13));
    let t2 = match variant {
        BracketVariant::Contour => num / (shifted(e31) * shifted(e32)),
        BracketVariant::KnownTypo => num / (shifted(e31) * (qf - 1.0)),
    };
    // (1 − q^{ie₁₂})²/(q − 2 + q^{ie₁₂}) · [1/(q^{1−ie₃₁} − 1) + 1/(q^{1−ie₂₃} − 1)]
    let t3 = num * num / (qf - 1.0 + num) * (1.0 / shifted(-e31) + 1.0 / shifted(-e23));
    Complex64::new(0.0, -l) * (t1 + t2 + t3)
}

fn three_term_sum(e1: f64, e2: f64, e3: f64, entries: &[PrimeEntry], variant: BracketVariant) -> Complex64 {
    let mut acc = CompensatedComplexSum::default();
    for q in entries {
        acc.add(three_terms(q, e1, e2, e3, variant));
    }
    acc.value()
}

/// Cyclic images `(1,2,3)`, `(2,3,1)`, `(3,1,2)`.
fn cyclic(e1: f64, e2: f64, e3: f64) -> [(f64, f64, f64); 3] {
    [(e1, e2, e3), (e2, e3, e1), (e3, e1, e2)]
}

/// `−e^{2πi d̄ e₁₂}/(2πi)³ · P · B` with `P` the prefactor (which already
/// contains `1/e₁₂²`) and `B` the bracket.
fn branch(dbar: f64, e12: f64, prefactor: Complex64, bracket: Complex64) -> Complex64 {
    // (2πi)³ = −i(2π)³
    let inv = Complex64::new(0.0, 1.0 / EIGHT_PI_CUBED);
    -cis(2.0 * PI * dbar * e12) * inv * prefactor * bracket
}

// ---------------------------------------------------------------------------
// truncated forms (p* → ∞ replaced by ζ, remaining sums cut)

/// A prime table sized for one [`SumTruncation`], reusable across points.
#[derive(Debug, Clone)]
pub struct Evaluator {
    trunc: SumTruncation,
    table: PrimeTable,
    terms: usize,
}

impl Evaluator {
    pub fn new(trunc: SumTruncation) -> Result<Self> {
        trunc.validate()?;
        let table = PrimeTable::build(trunc.prime_cutoff)?;
        Ok(Evaluator { trunc, table, terms: DEFAULT_TERMS })
    }

    /// Use an existing table, e.g. one loaded from a cache.
    pub fn with_table(trunc: SumTruncation, table: PrimeTable) -> Result<Self> {
        trunc.validate()?;
        if table.p_star() != trunc.prime_cutoff {
            return Err(Error::Configuration(alloc::format!(
                "table cutoff {} differs from prime cutoff {}",
                table.p_star(),
                trunc.prime_cutoff
            )));
        }
        Ok(Evaluator { trunc, table, terms: DEFAULT_TERMS })
    }

    pub fn truncation(&self) -> SumTruncation {
        self.trunc
    }

    pub fn table(&self) -> &PrimeTable {
        &self.table
    }

    /// `(1/2π²) Re[(ln h)''(iε)] − (1/4π²) Σ_p ln²p [(p^{1+iε}−1)^{−2} + c.c.]`,
    /// the diagonal part without its `−1/(2π²ε²)` pole.
    fn r2_diagonal_regular(&self, eps: f64) -> f64 {
        let (_, g2) = entire_jet(Complex64::new(0.0, eps), self.terms).log_derivatives();
        let mut acc = CompensatedSum::default();
        for p in self.table.entries() {
            // (p^{1+iε} − 1)^{−1} = w/(1 − w), w = e^{−iε ln p}/p
            let u = inverse_shifted_power(p, -eps);
            acc.add(p.log_p * p.log_p * (u * u).re);
        }
        g2.re / TWO_PI_SQ - acc.value() / TWO_PI_SQ
    }

    pub fn r2_diagonal(&self, eps: f64) -> Result<f64> {
        check_offset(eps)?;
        Ok(self.r2_diagonal_regular(eps) - 1.0 / (TWO_PI_SQ * eps * eps))
    }

    /// `e^{2πi d̄ε} |ζ(1+iε)|² ∏_p(…)` with the `1/ε²` left out.
    fn r2_oscillatory_numerator(&self, eps: f64, dbar: f64) -> Complex64 {
        let h = entire_jet(Complex64::new(0.0, eps), self.terms).v;
        let log_prod = product_factor_log_sum(eps, self.table.entries());
        cis(2.0 * PI * dbar * eps) * h.norm_sqr() * log_prod.exp()
    }

    pub fn r2_oscillatory(&self, eps: f64, e: f64) -> Result<f64> {
        check_offset(eps)?;
        let dbar = check_height(e)?;
        Ok(2.0 * self.r2_oscillatory_numerator(eps, dbar).re / (FOUR_PI_SQ * eps * eps))
    }

    /// Connected two-point function with `disconnected = 0`.
    ///
    /// For `|ε| < NEAR_COINCIDENT` the `∓1/(2π²ε²)` poles of the two parts
    /// are combined analytically; `diagonal` then holds only the regular part
    /// and `oscillatory` the combined remainder.
    pub fn r2_connected(&self, eps: f64, e: f64) -> Result<CorrelationBreakdown> {
        check_offset(eps)?;
        let dbar = check_height(e)?;
        let regular = self.r2_diagonal_regular(eps);
        if eps.abs() >= NEAR_COINCIDENT {
            let osc = 2.0 * self.r2_oscillatory_numerator(eps, dbar).re / (FOUR_PI_SQ * eps * eps);
            let diag = regular - 1.0 / (TWO_PI_SQ * eps * eps);
            return Ok(CorrelationBreakdown::new(0.0, diag, osc));
        }
        // Re[e^{iα}|h|²P] − 1 with α = 2πd̄ε, |h|² = e^{2 Re ln h}
        let s = Complex64::new(0.0, eps);
        let ln_h = ln_1p(entire_minus_one(s, self.terms));
        let log_prod = product_factor_log_sum(eps, self.table.entries());
        let a = 2.0 * ln_h.re + log_prod.re;
        let b = 2.0 * PI * dbar * eps + log_prod.im;
        let half = 0.5 * b;
        let re_minus_one = a.exp_m1() * b.cos() - 2.0 * half.sin() * half.sin();
        let combined = re_minus_one / (TWO_PI_SQ * eps * eps);
        Ok(CorrelationBreakdown::new(0.0, regular, combined))
    }

    pub fn r2_full(&self, eps: f64, e: f64) -> Result<CorrelationBreakdown> {
        let c = self.r2_connected(eps, e)?;
        let dbar = smooth_density(e)?;
        Ok(CorrelationBreakdown::new(dbar * dbar, c.diagonal, c.oscillatory))
    }

    pub fn r3_diagonal(&self, e1: f64, e2: f64, e3: f64) -> Result<f64> {
        check_triple(e1, e2, e3)?;
        Ok(r3_diagonal_over(e1, e2, e3, self.table.entries()))
    }

    pub fn r3_oscillatory(&self, e1: f64, e2: f64, e3: f64, e: f64) -> Result<f64> {
        self.r3_oscillatory_variant(e1, e2, e3, e, BracketVariant::Contour)
    }

    #[doc(hidden)]
    pub fn r3_oscillatory_variant(&self, e1: f64, e2: f64, e3: f64, e: f64, variant: BracketVariant) -> Result<f64> {
        Ok(2.0 * self.r3_oscillatory_cyclic(e1, e2, e3, e, variant)?.re)
    }

    /// Sum of the three cyclic branches before the complex conjugate is
    /// added; the odd permutations of the offsets give its conjugate.
    #[doc(hidden)]
    pub fn r3_oscillatory_cyclic(
        &self,
        e1: f64,
        e2: f64,
        e3: f64,
        e: f64,
        variant: BracketVariant,
    ) -> Result<Complex64> {
        check_triple(e1, e2, e3)?;
        let dbar = check_height(e)?;
        let mut sum = CompensatedComplexSum::default();
        for (a, b, c) in cyclic(e1, e2, e3) {
            let e12 = a - b;
            let s = Complex64::new(0.0, e12);
            let h = entire_jet(s, self.terms).v;
            let prefactor = product_factor_log_sum(e12, self.table.entries()).exp() * (h.norm_sqr() / (e12 * e12));
            // ∂/∂e₃ ln|ζ(1+ie₃₂)|² = −2 Im[ζ′/ζ(1+ie₃₂)]
            let g32 = crate::zeta::log_deriv_zeta_one_plus(Complex64::new(0.0, c - b), self.terms)?;
            let g31 = crate::zeta::log_deriv_zeta_one_plus(Complex64::new(0.0, c - a), self.terms)?;
            let zeta_part = -2.0 * g32.im + 2.0 * g31.im;
            let bracket = three_term_sum(a, b, c, self.table.entries(), variant) + zeta_part;
            sum.add(branch(dbar, e12, prefactor, bracket));
        }
        Ok(sum.value())
    }

    pub fn r3_full(&self, e1: f64, e2: f64, e3: f64, e: f64) -> Result<CorrelationBreakdown> {
        check_triple(e1, e2, e3)?;
        let dbar = check_height(e)?;
        let mut pairs = CompensatedSum::default();
        for (x, y) in [(e1, e2), (e2, e3), (e3, e1)] {
            pairs.add(self.r2_connected(x - y, e)?.connected());
        }
        let disconnected = dbar * dbar * dbar + dbar * pairs.value();
        let diag = self.r3_diagonal(e1, e2, e3)?;
        let osc = self.r3_oscillatory(e1, e2, e3, e)?;
        Ok(CorrelationBreakdown::new(disconnected, diag, osc))
    }
}

pub fn r2_diagonal(eps: f64, trunc: SumTruncation) -> Result<f64> {
    check_offset(eps)?;
    Evaluator::new(trunc)?.r2_diagonal(eps)
}

pub fn r2_oscillatory(eps: f64, e: f64, trunc: SumTruncation) -> Result<f64> {
    check_offset(eps)?;
    check_height(e)?;
    Evaluator::new(trunc)?.r2_oscillatory(eps, e)
}

pub fn r2_connected(eps: f64, e: f64, trunc: SumTruncation) -> Result<CorrelationBreakdown> {
    check_offset(eps)?;
    check_height(e)?;
    Evaluator::new(trunc)?.r2_connected(eps, e)
}

pub fn r2_full(eps: f64, e: f64, trunc: SumTruncation) -> Result<CorrelationBreakdown> {
    check_offset(eps)?;
    check_height(e)?;
    Evaluator::new(trunc)?.r2_full(eps, e)
}

pub fn r3_diagonal(e1: f64, e2: f64, e3: f64, trunc: SumTruncation) -> Result<f64> {
    check_triple(e1, e2, e3)?;
    Evaluator::new(trunc)?.r3_diagonal(e1, e2, e3)
}

pub fn r3_oscillatory(e1: f64, e2: f64, e3: f64, e: f64, trunc: SumTruncation) -> Result<f64> {
    check_triple(e1, e2, e3)?;
    check_height(e)?;
    Evaluator::new(trunc)?.r3_oscillatory(e1, e2, e3, e)
}

pub fn r3_full(e1: f64, e2: f64, e3: f64, e: f64, trunc: SumTruncation) -> Result<CorrelationBreakdown> {
    check_triple(e1, e2, e3)?;
    check_height(e)?;
    Evaluator::new(trunc)?.r3_full(e1, e2, e3, e)
}

/// Connected GUE two-point function `−sin²(πρε)/(π²ε²)`; `−ρ²` for `|ε| < 10⁻¹²`.
pub fn gue_limit_r2(eps: f64, rho: f64) -> f64 {
    if eps.abs() < 1e-12 {
        return -rho * rho;
    }
    let s = (PI * rho * eps).sin() / (PI * eps);
    -s * s
}

// ---------------------------------------------------------------------------

/// The same correlation functions over a fixed finite prime table, with
/// every product and sum kept finite. These are what the phase-average
/// oracle reproduces; with an empty table they are the pure sine-kernel
/// determinants.
pub mod restricted {
    use super::*;
    use crate::phase_average::averaged_rp_closed_form;

    /// `(1/2π²) Σ_p ln²p Re[w/(1 − w)]`, `w = e^{iε ln p}/p`.
    pub fn paired_density(eps: f64, table: &PrimeTable) -> f64 {
        let mut acc = CompensatedSum::default();
        for p in table.entries() {
            acc.add(p.log_p * p.log_p * inverse_shifted_power(p, eps).re);
        }
        acc.value() / TWO_PI_SQ
    }

    /// `∏_{p∈S} ⟨R_p⟩(ε)`.
    pub fn rp_product(eps: f64, table: &PrimeTable) -> Complex64 {
        let mut acc = CompensatedComplexSum::default();
        for p in table.entries() {
            acc.add(averaged_rp_closed_form(p, eps, 0.0).ln());
        }
        acc.value().exp()
    }

    pub fn r2_connected(eps: f64, e: f64, table: &PrimeTable) -> Result<CorrelationBreakdown> {
        check_offset(eps)?;
        let dbar = check_height(e)?;
        let diag = paired_density(eps, table) - 1.0 / (TWO_PI_SQ * eps * eps);
        let osc = 2.0 * (cis(2.0 * PI * dbar * eps) * rp_product(eps, table)).re / (FOUR_PI_SQ * eps * eps);
        Ok(CorrelationBreakdown::new(0.0, diag, osc))
    }

    pub fn r2_full(eps: f64, e: f64, table: &PrimeTable) -> Result<CorrelationBreakdown> {
        let c = r2_connected(eps, e, table)?;
        let dbar = smooth_density(e)?;
        Ok(CorrelationBreakdown::new(dbar * dbar, c.diagonal, c.oscillatory))
    }

    /// `∂/∂e₃ ln|(1 − A²e^{ie₃₁ ln q})/(1 − A²e^{ie₂₃ ln q})|²`.
    pub fn ratio_log_derivative(q: &PrimeEntry, e1: f64, e2: f64, e3: f64) -> f64 {
        let l = q.log_p;
        let u31 = inverse_shifted_power(q, e3 - e1);
        let u23 = inverse_shifted_power(q, e2 - e3);
        2.0 * l * (u31.im + u23.im)
    }

    pub fn r3_diagonal(e1: f64, e2: f64, e3: f64, table: &PrimeTable) -> Result<f64> {
        check_triple(e1, e2, e3)?;
        Ok(r3_diagonal_over(e1, e2, e3, table.entries()))
    }

    pub fn r3_oscillatory(
        e1: f64,
        e2: f64,
        e3: f64,
        e: f64,
        table: &PrimeTable,
        variant: BracketVariant,
    ) -> Result<f64> {
        check_triple(e1, e2, e3)?;
        let dbar = check_height(e)?;
        let mut sum = CompensatedComplexSum::default();
        for (a, b, c) in cyclic(e1, e2, e3) {
            let e12 = a - b;
            let prefactor = rp_product(e12, table) / (e12 * e12);
            let mut bracket = CompensatedComplexSum::default();
            for q in table.entries() {
                bracket.add(Complex64::new(ratio_log_derivative(q, a, b, c), 0.0));
                bracket.add(three_terms(q, a, b, c, variant));
            }
            let pole = -2.0 * e12 / ((b - c) * (c - a));
            let bracket = bracket.value() + pole;
            sum.add(branch(dbar, e12, prefactor, bracket));
        }
        Ok(2.0 * sum.value().re)
    }

    pub fn r3_full(e1: f64, e2: f64, e3: f64, e: f64, table: &PrimeTable) -> Result<CorrelationBreakdown> {
        r3_full_variant(e1, e2, e3, e, table, BracketVariant::Contour)
    }

    #[doc(hidden)]
    pub fn r3_full_variant(
        e1: f64,
        e2: f64,
        e3: f64,
        e: f64,
        table: &PrimeTable,
        variant: BracketVariant,
    ) -> Result<CorrelationBreakdown> {
        check_triple(e1, e2, e3)?;
        let dbar = check_height(e)?;
        let mut pairs = CompensatedSum::default();
        for (x, y) in [(e1, e2), (e2, e3), (e3, e1)] {
            pairs.add(r2_connected(x - y, e, table)?.connected());
        }
        let disconnected = dbar * dbar * dbar + dbar * pairs.value();
        let diag = r3_diagonal(e1, e2, e3, table)?;
        let osc = r3_oscillatory(e1, e2, e3, e, table, variant)?;
        Ok(CorrelationBreakdown::new(disconnected, diag, osc))
    }
}
