//! Small numerical helpers shared by the evaluation modules.

use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by std float methods when std is linked
use num_traits::Float;

pub(crate) const TWO_PI: f64 = 2.0 * core::f64::consts::PI;

/// `ln(1 + z)` without cancellation when `|z|` is small.
pub fn ln_1p(z: Complex64) -> Complex64 {
    // |1+z|² = 1 + (2 Re z + |z|²)
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// `e^{iθ} − 1` without cancellation for small θ.
#[inline]
pub fn expm1_i(theta: f64) -> Complex64 {
    let h = 0.5 * theta;
    let s = h.sin();
    // e^{iθ} − 1 = 2i sin(θ/2) e^{iθ/2}
    Complex64::new(-2.0 * s * s, 2.0 * s * h.cos())
}

#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

const LN2_DD: DoubleDouble =
    DoubleDouble { hi: f64::from_bits(0x3FE6_2E42_FEFA_39EF), lo: f64::from_bits(0x3C7A_BC9E_3B39_803F) };
const TWO_PI_HI: f64 = TWO_PI;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

#[inline]
fn two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    let bb = s - a;
    DoubleDouble { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> DoubleDouble {
    let s = a + b;
    DoubleDouble { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    DoubleDouble { hi: p, lo: a.mul_add(b, -p) }
}

impl DoubleDouble {
    pub const fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Exact sum of two doubles.
    pub fn sum(a: f64, b: f64) -> Self {
        two_sum(a, b)
    }

    pub fn scale(self, k: f64) -> Self {
        self * Self::from_f64(k)
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl core::ops::Add for DoubleDouble {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        let s = two_sum(self.hi, o.hi);
        quick_two_sum(s.hi, s.lo + self.lo + o.lo)
    }
}

impl core::ops::Mul for DoubleDouble {
    type Output = Self;

    fn mul(self, o: Self) -> Self {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + self.hi * o.lo + self.lo * o.hi)
    }
}

impl core::ops::Div for DoubleDouble {
    type Output = Self;

    /// Three rounds of long division.
    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self + o * Self::from_f64(-q1);
        let q2 = r.hi / o.hi;
        let r = r + o * Self::from_f64(-q2);
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2) + Self::from_f64(q3)
    }
}

/// `ln n` to roughly 32 significant digits, for `1 ≤ n < 2^53`.
pub fn ln_double_double(n: u64) -> DoubleDouble {
    debug_assert!(n >= 1);
    let mut k = 63 - n.leading_zeros() as i32;
    // m = n / 2^k is exact
    let mut m = n as f64 / (2.0f64).powi(k);
    if m > core::f64::consts::SQRT_2 {
        m *= 0.5;
        k += 1;
    }
    // ln m = 2 atanh t with t = (m − 1)/(m + 1), |t| < 0.172
    let t = DoubleDouble::from_f64(m - 1.0) / two_sum(m, 1.0);
    let t2 = t * t;
    let mut pow = t;
    let mut acc = t;
    let mut j = 1.0;
    while pow.hi.abs() > 1e-36 {
        pow = pow * t2;
        j += 2.0;
        acc = acc + pow / DoubleDouble::from_f64(j);
    }
    LN2_DD.scale(k as f64) + acc.scale(2.0)
}

/// `x·(hi + lo)` reduced into `[−π, π]`, keeping the bits a plain product
/// would lose once `x·hi` is large.
pub fn reduced_phase(x: DoubleDouble, log: DoubleDouble) -> f64 {
    let p = x * log;
    let k = (p.hi / TWO_PI).round();
    let q = two_prod(k, TWO_PI_HI);
    (p.hi - q.hi) + (p.lo - q.lo) - k * TWO_PI_LO
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl CompensatedComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    #[inline]
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// Second-order jet `(f, f', f'')` of a complex function of one complex
/// variable, propagated through arithmetic by the chain rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub v: Complex64,
    pub d1: Complex64,
    pub d2: Complex64,
}

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        Jet { v, d1: Complex64::new(0.0, 0.0), d2: Complex64::new(0.0, 0.0) }
    }

    pub fn variable(v: Complex64) -> Self {
        Jet { v, d1: Complex64::new(1.0, 0.0), d2: Complex64::new(0.0, 0.0) }
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Jet { v: e, d1: e * self.d1, d2: e * (self.d2 + self.d1 * self.d1) }
    }

    pub fn scale(self, k: Complex64) -> Self {
        Jet { v: self.v * k, d1: self.d1 * k, d2: self.d2 * k }
    }

    /// Value, first and second derivative of `ln f`.
    pub fn log_derivatives(self) -> (Complex64, Complex64) {
        let g1 = self.d1 / self.v;
        (g1, self.d2 / self.v - g1 * g1)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d1: self.d1 + o.d1, d2: self.d2 + o.d2 }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d1: self.d1 - o.d1, d2: self.d2 - o.d2 }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { v: -self.v, d1: -self.d1, d2: -self.d2 }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}
