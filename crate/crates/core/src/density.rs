//! Density of zeros: the smooth part, the prime-truncated oscillatory part,
//! the mean counting function `N̄(E, p*)` and the phase `e^{2πi N̄}`.
//!
//! The additive constant of the smooth counting function is fixed to 0;
//! only differences of `N̄` enter the correlation functions.

use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::numeric::{cis, CompensatedSum, DoubleDouble, TWO_PI};
use crate::primes::{PrimeEntry, PrimeTable};

pub const DEFAULT_N_MAX: u32 = 40;

/// Height, window and cutoffs of one evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowConfig {
    pub e: f64,
    pub delta_e: f64,
    pub p_star: u64,
    pub n_max: u32,
}

/// The soft ordering `p* < ΔE < E` does not hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeWarning {
    CutoffNotBelowWindow,
    WindowNotBelowHeight,
}

impl core::fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RegimeWarning::CutoffNotBelowWindow => write!(f, "prime cutoff is not below the window width"),
            RegimeWarning::WindowNotBelowHeight => write!(f, "window width is not below the height"),
        }
    }
}

impl WindowConfig {
    pub fn new(e: f64, delta_e: f64, p_star: u64, n_max: u32) -> Result<Self> {
        if !(e > TWO_PI) {
            return Err(invalid("height must exceed 2π"));
        }
        if !(delta_e > 0.0) {
            return Err(invalid("window width must be positive"));
        }
        if p_star < 2 {
            return Err(invalid("prime cutoff must be at least 2"));
        }
        if n_max < 1 {
            return Err(invalid("prime-power truncation must be at least 1"));
        }
        Ok(WindowConfig { e, delta_e, p_star, n_max })
    }

    pub fn regime_warnings(&self) -> impl Iterator<Item = RegimeWarning> {
        let a = (self.p_star as f64 >= self.delta_e).then_some(RegimeWarning::CutoffNotBelowWindow);
        let b = (self.delta_e >= self.e).then_some(RegimeWarning::WindowNotBelowHeight);
        a.into_iter().chain(b)
    }

    /// Tail bound `Σ_{n>n_max} p^{−n/2} ≤ 2^{−n_max/2+1}` of the prime-power sums.
    pub fn power_tail_bound(&self) -> f64 {
        2.0f64.powf(1.0 - self.n_max as f64 / 2.0)
    }

    fn check_table(&self, table: &PrimeTable) -> Result<()> {
        if table.p_star() != self.p_star {
            return Err(Error::Configuration(alloc::format!(
                "table cutoff {} differs from configured cutoff {}",
                table.p_star(),
                self.p_star
            )));
        }
        Ok(())
    }
}

/// `ρ̄ = d̄ + d̃` with its two parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue {
    pub smooth: f64,
    pub oscillatory: f64,
    pub total: f64,
}

impl DensityValue {
    pub fn new(smooth: f64, oscillatory: f64) -> Self {
        DensityValue { smooth, oscillatory, total: smooth + oscillatory }
    }
}

fn check_height(e: f64) -> Result<()> {
    if !(e > 0.0) {
        return Err(invalid("height must be positive"));
    }
    Ok(())
}

fn check_powers(n_max: u32) -> Result<()> {
    if n_max < 1 {
        return Err(invalid("prime-power truncation must be at least 1"));
    }
    Ok(())
}

/// `d̄(E) = ln(E/2π) / 2π`.
pub fn smooth_density(e: f64) -> Result<f64> {
    check_height(e)?;
    Ok(smooth_density_unchecked(e))
}

#[inline]
pub(crate) fn smooth_density_unchecked(e: f64) -> f64 {
    (e / TWO_PI).ln() / TWO_PI
}

/// `N̄(E) = (E/2π) ln(E/2πe)`, additive constant 0.
pub fn smooth_counting(e: f64) -> Result<f64> {
    check_height(e)?;
    Ok(e / TWO_PI * ((e / TWO_PI).ln() - 1.0))
}

/// `N̄(E1) − N̄(E2)` without subtracting two large numbers.
pub fn smooth_counting_difference(e1: f64, e2: f64) -> Result<f64> {
    check_height(e1)?;
    check_height(e2)?;
    let delta = e1 - e2;
    // E1 ln E1 − E2 ln E2 = Δ ln E2 + E1 ln(1 + Δ/E2)
    let diff = delta * (e2 / TWO_PI).ln() + e1 * (delta / e2).ln_1p() - delta;
    Ok(diff / TWO_PI)
}

/// Sums `Σ_{n≤n_max} w^n` and `Σ_{n≤n_max} w^n/n` for `w = A e^{iθ}`.
fn power_sums(a: f64, theta: f64, n_max: u32) -> (Complex64, Complex64) {
    let w = cis(theta) * a;
    let mut wn = Complex64::new(1.0, 0.0);
    let mut plain = Complex64::new(0.0, 0.0);
    let mut harmonic = Complex64::new(0.0, 0.0);
    for n in 1..=n_max {
        wn *= w;
        plain += wn;
        harmonic += wn / n as f64;
    }
    (plain, harmonic)
}

/// `d̃(E) = −(1/2π) Σ_{p<p*} Σ_{n≤n_max} (ln p / p^{n/2}) · 2cos(nE ln p)`.
pub fn oscillatory_density(e: f64, table: &PrimeTable, n_max: u32) -> Result<f64> {
    check_powers(n_max)?;
    let mut acc = CompensatedSum::default();
    for p in table.entries() {
        let (plain, _) = power_sums(p.a_p, p.phase(e), n_max);
        acc.add(p.log_p * plain.re);
    }
    Ok(-acc.value() / PI)
}

/// Oscillatory part of the counting function,
/// `−(1/π) Σ_p Σ_{n≤n_max} (p^{−n/2}/n) sin(nE ln p)`.
pub fn counting_oscillatory(e: f64, table: &PrimeTable, n_max: u32) -> Result<f64> {
    check_powers(n_max)?;
    let mut acc = CompensatedSum::default();
    for p in table.entries() {
        let (_, harmonic) = power_sums(p.a_p, p.phase(e), n_max);
        acc.add(harmonic.im);
    }
    Ok(-acc.value() / PI)
}

/// `counting_oscillatory(E1) − counting_oscillatory(E2)` via
/// `sin a − sin b = 2 cos((a+b)/2) sin((a−b)/2)`.
pub fn counting_oscillatory_difference(e1: f64, e2: f64, table: &PrimeTable, n_max: u32) -> Result<f64> {
    check_powers(n_max)?;
    let mid = DoubleDouble::sum(e1, e2).scale(0.5);
    let half = DoubleDouble::sum(e1, -e2).scale(0.5);
    let mut acc = CompensatedSum::default();
    for p in table.entries() {
        let (mid_phase, half_phase) = (p.phase_of(mid), p.phase_of(half));
        let mut amp = 1.0;
        for n in 1..=n_max {
            amp *= p.a_p;
            let k = n as f64;
            acc.add(amp / k * 2.0 * (k * mid_phase).cos() * (k * half_phase).sin());
        }
    }
    Ok(-acc.value() / PI)
}

/// `N̄(E, p*) = N̄(E) + oscillatory counting part`.
pub fn counting_function(e: f64, cfg: &WindowConfig, table: &PrimeTable) -> Result<f64> {
    cfg.check_table(table)?;
    Ok(smooth_counting(e)? + counting_oscillatory(e, table, cfg.n_max)?)
}

/// `ρ̄(E) = d̄(E) + d̃(E, p*)`.
pub fn density_value(e: f64, cfg: &WindowConfig, table: &PrimeTable) -> Result<DensityValue> {
    cfg.check_table(table)?;
    Ok(DensityValue::new(smooth_density(e)?, oscillatory_density(e, table, cfg.n_max)?))
}

/// `e^{2πi N̄(E, p*)}` from the closed product over primes, which sums every
/// prime power (`n_max = ∞`).
pub fn phase_factor(e: f64, cfg: &WindowConfig, table: &PrimeTable) -> Result<Complex64> {
    cfg.check_table(table)?;
    let smooth = smooth_counting(e)?;
    let frac = smooth - smooth.floor();
    let mut arg = CompensatedSum::default();
    for p in table.entries() {
        arg.add(2.0 * closed_counting_angle(p, p.phase(e)));
    }
    Ok(cis(TWO_PI * frac + arg.value()))
}

/// `arg(1 − A_p e^{iφ})`; `π` times this is the full (all prime powers)
/// counting contribution of one prime at phase `φ`.
#[inline]
pub fn closed_counting_angle(p: &PrimeEntry, phase: f64) -> f64 {
    let (s, c) = phase.sin_cos();
    (-p.a_p * s).atan2(1.0 - p.a_p * c)
}

/// `arg[(1 − A e^{iφ₁})/(1 − A e^{iφ₂})]` for nearby phases without cancellation.
#[inline]
pub fn closed_counting_angle_difference(p: &PrimeEntry, phase1: f64, phase2: f64) -> f64 {
    // (1 − A w1)/(1 − A w2) = 1 − A w2 (w1/w2 − 1)/(1 − A w2)
    let w2 = cis(phase2) * p.a_p;
    let ratio = Complex64::new(1.0, 0.0) - w2 * crate::numeric::expm1_i(phase1 - phase2) / (1.0 - w2);
    ratio.im.atan2(ratio.re)
}

/// All-prime-power density contribution of one prime at phase `φ`:
/// `−(ln p/π) Re[A e^{iφ}/(1 − A e^{iφ})]`.
#[inline]
pub fn closed_density_term(p: &PrimeEntry, phase: f64) -> f64 {
    let w = cis(phase) * p.a_p;
    -(p.log_p / PI) * (w / (1.0 - w)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E as EULER;

    #[test]
    fn smooth_density_fixed_points() {
        assert_eq!(smooth_density(TWO_PI).unwrap(), 0.0);
        assert!((smooth_density(TWO_PI * EULER).unwrap() - 1.0 / TWO_PI).abs() < 1e-16);
        assert!(smooth_density(0.0).is_err());
        assert!(smooth_density(-3.0).is_err());
    }

    #[test]
    fn smooth_counting_zero_and_slope() {
        assert!(smooth_counting(TWO_PI * EULER).unwrap().abs() < 1e-15);
        let e = 1e5;
        let h = 1e-3;
        let fd = (smooth_counting(e + h).unwrap() - smooth_counting(e - h).unwrap()) / (2.0 * h);
        assert!((fd - smooth_density(e).unwrap()).abs() < 1e-6);
        assert!(smooth_counting(0.0).is_err());
    }

    #[test]
    fn smooth_counting_difference_matches_direct() {
        let (a, b) = (12_345.6, 12_001.2);
        let direct = smooth_counting(a).unwrap() - smooth_counting(b).unwrap();
        assert!((smooth_counting_difference(a, b).unwrap() - direct).abs() < 1e-9);
        // tiny separations: ≈ d̄ Δ
        let e = 1e6;
        let d = (e + 1e-6) - e;
        let diff = smooth_counting_difference(e + d, e).unwrap();
        assert!((diff / d - smooth_density(e + 0.5 * d).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn empty_table_has_no_oscillation() {
        let t = PrimeTable::empty();
        assert_eq!(oscillatory_density(123.0, &t, 40).unwrap(), 0.0);
        assert_eq!(counting_oscillatory(123.0, &t, 40).unwrap(), 0.0);
    }

    #[test]
    fn single_prime_at_origin() {
        let t = PrimeTable::build(3).unwrap();
        let v = oscillatory_density(0.0, &t, 1).unwrap();
        let expected = -(2.0f64.ln()) / (PI * 2.0f64.sqrt());
        assert!((v - expected).abs() < 1e-16);
    }

    #[test]
    fn counting_vanishes_at_zero_height() {
        let t = PrimeTable::build(100).unwrap();
        assert_eq!(counting_oscillatory(0.0, &t, 40).unwrap(), 0.0);
    }

    #[test]
    fn counting_derivative_is_density() {
        let t = PrimeTable::build(50).unwrap();
        let e = 500.0;
        let h = 1e-5;
        let fd =
            (counting_oscillatory(e + h, &t, 30).unwrap() - counting_oscillatory(e - h, &t, 30).unwrap()) / (2.0 * h);
        assert!((fd - oscillatory_density(e, &t, 30).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn oscillatory_difference_matches_direct() {
        let t = PrimeTable::build(100).unwrap();
        let (a, b) = (1000.3, 999.1);
        let direct = counting_oscillatory(a, &t, 40).unwrap() - counting_oscillatory(b, &t, 40).unwrap();
        assert!((counting_oscillatory_difference(a, b, &t, 40).unwrap() - direct).abs() < 1e-11);
    }

    #[test]
    fn zero_powers_rejected() {
        let t = PrimeTable::build(10).unwrap();
        assert!(oscillatory_density(1.0, &t, 0).is_err());
        assert!(counting_oscillatory(1.0, &t, 0).is_err());
    }

    #[test]
    fn window_config_validation() {
        assert!(WindowConfig::new(1e4, 1e3, 100, 40).is_ok());
        assert!(WindowConfig::new(6.0, 1e3, 100, 40).is_err());
        assert!(WindowConfig::new(1e4, 0.0, 100, 40).is_err());
        assert!(WindowConfig::new(1e4, 1e3, 1, 40).is_err());
        assert!(WindowConfig::new(1e4, 1e3, 100, 0).is_err());
        let ok = WindowConfig::new(1e4, 1e3, 100, 40).unwrap();
        assert_eq!(ok.regime_warnings().count(), 0);
        let odd = WindowConfig::new(1e4, 50.0, 100, 40).unwrap();
        assert_eq!(odd.regime_warnings().collect::<alloc::vec::Vec<_>>(), [RegimeWarning::CutoffNotBelowWindow]);
    }

    #[test]
    fn table_mismatch_is_configuration_error() {
        let cfg = WindowConfig::new(1e4, 1e3, 100, 40).unwrap();
        let t = PrimeTable::build(50).unwrap();
        assert!(matches!(counting_function(1e4, &cfg, &t), Err(Error::Configuration(_))));
        assert!(matches!(phase_factor(1e4, &cfg, &t), Err(Error::Configuration(_))));
    }

    #[test]
    fn empty_table_phase_is_smooth_phase() {
        let cfg = WindowConfig::new(1e4, 1e3, 2, 40).unwrap();
        let t = PrimeTable::build(2).unwrap();
        let n = smooth_counting(1e4).unwrap();
        let expected = cis(TWO_PI * n);
        assert!((phase_factor(1e4, &cfg, &t).unwrap() - expected).norm() < 1e-9);
    }

    #[test]
    fn closed_terms_match_long_series() {
        let t = PrimeTable::build(30).unwrap();
        for p in t.entries() {
            let phase = 0.77 * p.p as f64;
            let (plain, harmonic) = power_sums(p.a_p, phase, 200);
            assert!((closed_density_term(p, phase) + p.log_p * plain.re / PI).abs() < 1e-14);
            assert!((closed_counting_angle(p, phase) + harmonic.im).abs() < 1e-14);
        }
    }

    #[test]
    fn closed_angle_difference_matches_direct() {
        let p = PrimeEntry::new(3);
        let d = closed_counting_angle_difference(&p, 1.3, 0.4);
        let direct = closed_counting_angle(&p, 1.3) - closed_counting_angle(&p, 0.4);
        assert!((d - direct).abs() < 1e-15);
    }
}
