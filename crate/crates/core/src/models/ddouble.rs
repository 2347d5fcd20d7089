//! Double-double arithmetic, just enough for accurate fractional parts of
//! `n^rho` far beyond the 53-bit mantissa.

use std::ops::{Add, Mul, Neg, Sub};

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

const LN2: DoubleDouble = DoubleDouble {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: DoubleDouble = DoubleDouble { hi: 0.0, lo: 0.0 };
    pub const ONE: DoubleDouble = DoubleDouble { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }

    /// Exact for integers below 2^106.
    pub fn from_u128(n: u128) -> Self {
        let hi = n as f64;
        // `hi` may round up, so take the signed remainder.
        let rem = n as i128 - hi as i128;
        let (hi, lo) = quick_two_sum(hi, rem as f64);
        DoubleDouble { hi, lo }
    }

    /// Exact for magnitudes below 2^106.
    pub fn from_i128(n: i128) -> Self {
        let d = Self::from_u128(n.unsigned_abs());
        if n < 0 {
            -d
        } else {
            d
        }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        DoubleDouble { hi, lo }
    }

    /// Division by a small positive integer, correctly rounded to double-double.
    fn div_small(self, d: u32) -> Self {
        let d = d as f64;
        let q1 = self.hi / d;
        let (p, e) = two_prod(q1, d);
        let rem = ((self.hi - p) - e + self.lo) / d;
        let (hi, lo) = quick_two_sum(q1, rem);
        DoubleDouble { hi, lo }
    }

    pub fn scale_pow2(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        DoubleDouble {
            hi: self.hi * f,
            lo: self.lo * f,
        }
    }

    pub fn floor(self) -> Self {
        let hi = self.hi.floor();
        if hi == self.hi {
            let (hi, lo) = quick_two_sum(hi, self.lo.floor());
            DoubleDouble { hi, lo }
        } else {
            DoubleDouble { hi, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`, rounded to `f64`.
    pub fn fract(self) -> f64 {
        let f = (self - self.floor()).to_f64();
        if f >= 1.0 {
            0.0
        } else {
            f.max(0.0)
        }
    }

    /// `exp(x)` for `|x| < 709`.
    pub fn exp(self) -> Self {
        // x = k ln2 + r with |r| <= ln2/2. Squaring a reduced argument would
        // double the relative error per step, so sum the series directly.
        let k = (self.hi / LN2.hi).round();
        let r = self - LN2.mul_f64(k);
        let mut term = DoubleDouble::ONE;
        let mut sum = DoubleDouble::ONE;
        for i in 1..=40 {
            term = (term * r).div_small(i);
            sum = sum + term;
            if term.hi.abs() < 1e-34 {
                break;
            }
        }
        sum.scale_pow2(k as i32)
    }

    /// Natural logarithm of a positive value: one Newton step on `exp`
    /// squares the relative error of the `f64` seed.
    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "logarithm of a nonpositive value");
        let x = DoubleDouble::from_f64(self.hi.ln());
        x + self * (-x).exp() - DoubleDouble::ONE
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DoubleDouble { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DoubleDouble { hi, lo }
    }
}

/// `n^rho` in double-double precision.
///
/// The integer part of the exponent is applied exactly, so the relative
/// error is that of `n^{rho - floor(rho)}`, about `1e-31 ln n`.
pub fn pow_dd(n: u64, rho: f64) -> DoubleDouble {
    if n == 0 {
        return DoubleDouble::ZERO;
    }
    if n == 1 {
        return DoubleDouble::ONE;
    }
    let whole = rho.floor();
    let frac = rho - whole;
    let int_part = (whole >= 0.0)
        .then(|| (n as u128).checked_pow(whole as u32))
        .flatten()
        .filter(|&p| p < (1u128 << 106));
    match int_part {
        Some(p) => {
            let base = DoubleDouble::from_u128(p);
            if frac == 0.0 {
                base
            } else {
                base * DoubleDouble::from_u128(n as u128).ln().mul_f64(frac).exp()
            }
        }
        None => DoubleDouble::from_u128(n as u128).ln().mul_f64(rho).exp(),
    }
}
