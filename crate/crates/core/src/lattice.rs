//! Jacobi operators on the two-sided lattice: coefficient rules, shifts,
//! finite restrictions and the weighted distance between operators.
//!
//! An operator is determined by its off-diagonal `a(n) > 0` and diagonal
//! `b(n)` sequences, acting as
//!
//! ```text
//! (J u)(n) = a(n) u(n+1) + b(n) u(n) + a(n-1) u(n-1)
//! ```
//!
//! Every operator carries a bound `c0 > 1` with `1/c0 <= a(n) <= c0` and
//! `|b(n)| <= c0`. Comparisons between operators with different bounds use
//! the larger of the two.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest bound constant handed out by the generators.
pub const DEFAULT_C0: f64 = 2.0;

/// Closed-form coefficient rule `n -> (a(n), b(n))`.
///
/// Implementations must be pure: repeated evaluation at the same index has
/// to return bit-identical values.
pub trait CoefficientRule: Send + Sync + fmt::Debug {
    fn eval(&self, n: i64) -> (f64, f64);

    /// Descriptor in the model mini-language (e.g. `anderson:42,1`).
    fn descriptor(&self) -> String;

    /// Known bounds `(inf a, sup a, sup |b|)`, if the rule can certify them.
    fn bounds(&self) -> Option<RuleBounds> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RuleBounds {
    pub a_min: f64,
    pub a_max: f64,
    pub b_abs_max: f64,
}

impl RuleBounds {
    /// Unit off-diagonal, diagonal bounded by `b_abs_max`.
    pub fn schrodinger(b_abs_max: f64) -> Self {
        RuleBounds {
            a_min: 1.0,
            a_max: 1.0,
            b_abs_max,
        }
    }

    /// Smallest admissible bound constant, never below [`DEFAULT_C0`].
    pub fn c0(&self) -> f64 {
        DEFAULT_C0.max(self.a_max).max(1.0 / self.a_min).max(self.b_abs_max)
    }

    fn admits(&self, c0: f64) -> bool {
        self.a_min >= 1.0 / c0 && self.a_max <= c0 && self.b_abs_max <= c0
    }
}

/// Reproducibility record of a [`Coefficients`] value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Descriptor {
    pub model: String,
    pub offset: i64,
    pub reflected: bool,
    pub c0: f64,
}

/// A point of the space of bounded Jacobi operators, stored as a rule.
///
/// Shifting and reflecting only rewrite the index map, so both are O(1) and
/// never materialize coefficients.
#[derive(Clone)]
pub struct Coefficients {
    rule: Arc<dyn CoefficientRule>,
    offset: i64,
    reflected: bool,
    c0: f64,
}

impl fmt::Debug for Coefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficients")
            .field("model", &self.rule.descriptor())
            .field("offset", &self.offset)
            .field("reflected", &self.reflected)
            .field("c0", &self.c0)
            .finish()
    }
}

impl Coefficients {
    /// Wraps a rule using the bound constant derived from its certified
    /// bounds, or [`DEFAULT_C0`] if it has none.
    pub fn new(rule: impl CoefficientRule + 'static) -> Self {
        let c0 = rule.bounds().map_or(DEFAULT_C0, |b| b.c0());
        Coefficients {
            rule: Arc::new(rule),
            offset: 0,
            reflected: false,
            c0,
        }
    }

    /// Wraps a rule with an explicit bound constant. Rules with certified
    /// bounds are checked here; others are checked on evaluation.
    pub fn with_c0(rule: impl CoefficientRule + 'static, c0: f64) -> Result<Self> {
        if !(c0 > 1.0 && c0.is_finite()) {
            return Err(Error::invalid(format!("bound constant must exceed 1, got {c0}")));
        }
        if let Some(bounds) = rule.bounds() {
            if !bounds.admits(c0) {
                return Err(Error::BoundViolation {
                    index: 0,
                    detail: format!("{bounds:?} not admissible for c0 = {c0}"),
                });
            }
        }
        Ok(Coefficients {
            rule: Arc::new(rule),
            offset: 0,
            reflected: false,
            c0,
        })
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            model: self.rule.descriptor(),
            offset: self.offset,
            reflected: self.reflected,
            c0: self.c0,
        }
    }

    #[inline]
    fn raw(&self, n: i64) -> (f64, f64) {
        if self.reflected {
            // b'(n) = b(-n-1), a'(n) = a(-n-2), measured from the offset.
            let (_, b) = self.rule.eval(self.offset - n - 1);
            let (a, _) = self.rule.eval(self.offset - n - 2);
            (a, b)
        } else {
            self.rule.eval(self.offset + n)
        }
    }

    /// `(a(n), b(n))`. Bounds are asserted in debug builds.
    #[inline]
    pub fn at(&self, n: i64) -> (f64, f64) {
        let ab = self.raw(n);
        debug_assert!(
            self.admits(ab),
            "coefficients {ab:?} at n = {n} violate c0 = {}",
            self.c0
        );
        ab
    }

    /// `(a(n), b(n))` with the bound check performed in every build.
    pub fn checked_at(&self, n: i64) -> Result<(f64, f64)> {
        let ab = self.raw(n);
        if self.admits(ab) {
            Ok(ab)
        } else {
            Err(Error::BoundViolation {
                index: n,
                detail: format!("(a, b) = {ab:?} outside bounds for c0 = {}", self.c0),
            })
        }
    }

    #[inline]
    pub fn a(&self, n: i64) -> f64 {
        self.at(n).0
    }

    #[inline]
    pub fn b(&self, n: i64) -> f64 {
        self.at(n).1
    }

    fn admits(&self, (a, b): (f64, f64)) -> bool {
        a >= 1.0 / self.c0 && a <= self.c0 && b.abs() <= self.c0
    }

    /// The translate `J^(n)` with `J^(n)(m) = J(m + n)`.
    pub fn shift(&self, n: i64) -> Coefficients {
        let offset = if self.reflected {
            self.offset - n
        } else {
            self.offset + n
        };
        Coefficients { offset, ..self.clone() }
    }

    /// Index reflection `a'(n) = a(-n-2)`, `b'(n) = b(-n-1)`, which maps the
    /// left half-line `n <= -1` onto `n >= 0`. An involution.
    pub fn reflect(&self) -> Coefficients {
        Coefficients {
            reflected: !self.reflected,
            ..self.clone()
        }
    }

    /// Materializes `J` restricted to `n0..n0+len`.
    pub fn window<T: Real>(&self, n0: i64, len: usize) -> Window<T> {
        extract_window(self, n0, len)
    }
}

/// [`Coefficients::shift`] as a free function.
pub fn shift(j: &Coefficients, n: i64) -> Coefficients {
    j.shift(n)
}

/// Finite restriction of an operator to `offset..offset+len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Window<T> {
    offset: i64,
    diag: Vec<T>,
    offdiag: Vec<T>,
    c0: T,
}

impl<T: Real> Window<T> {
    /// Builds a window from raw arrays. `offdiag` must have one entry fewer
    /// than `diag` and be strictly positive. The bound constant is derived
    /// from the data.
    pub fn new(offset: i64, diag: Vec<T>, offdiag: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::invalid("window length must be at least 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::invalid(format!(
                "expected {} off-diagonal entries, got {}",
                diag.len() - 1,
                offdiag.len()
            )));
        }
        let mut c0 = T::lit(DEFAULT_C0);
        for &a in &offdiag {
            if !(a > T::zero()) {
                return Err(Error::NonPositiveOffDiagonal(a.to_f64().unwrap_or(f64::NAN)));
            }
            c0 = c0.max(a).max(a.recip());
        }
        for &b in &diag {
            c0 = c0.max(b.abs());
        }
        Ok(Window {
            offset,
            diag,
            offdiag,
            c0,
        })
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[T] {
        &self.offdiag
    }

    pub fn c0(&self) -> T {
        self.c0
    }

    /// Certain enclosure `[-3 c0, 3 c0]` of the spectrum.
    pub fn spectral_bracket(&self) -> (T, T) {
        let r = T::lit(3.0) * self.c0;
        (-r, r)
    }

    /// Leading sub-window of length `len`.
    pub fn truncate(&self, len: usize) -> Window<T> {
        assert!(len >= 1 && len <= self.len());
        Window {
            offset: self.offset,
            diag: self.diag[..len].to_vec(),
            offdiag: self.offdiag[..len - 1].to_vec(),
            c0: self.c0,
        }
    }
}

/// `J_Λ` for `Λ = n0..n0+len`: `diag[k] = b(n0+k)`, `offdiag[k] = a(n0+k)`.
pub fn extract_window<T: Real>(j: &Coefficients, n0: i64, len: usize) -> Window<T> {
    assert!(len >= 1, "window length must be at least 1");
    let mut diag = Vec::with_capacity(len);
    let mut offdiag = Vec::with_capacity(len - 1);
    for k in 0..len as i64 {
        let (a, b) = j.at(n0 + k);
        diag.push(T::lit(b));
        if k + 1 < len as i64 {
            offdiag.push(T::lit(a));
        }
    }
    Window {
        offset: n0,
        diag,
        offdiag,
        c0: T::lit(j.c0()),
    }
}

/// Point `z = E + iη` with `η >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy<T> {
    pub re: T,
    pub im: T,
}

impl<T: Real> ComplexEnergy<T> {
    pub fn new(re: T, im: T) -> Result<Self> {
        if !(im >= T::zero()) {
            return Err(Error::NegativeImaginary(im.to_f64().unwrap_or(f64::NAN)));
        }
        if !re.is_finite() || !im.is_finite() {
            return Err(Error::invalid("energy must be finite"));
        }
        Ok(ComplexEnergy { re, im })
    }

    /// Point on the real axis.
    pub fn real(e: T) -> Self {
        ComplexEnergy { re: e, im: T::zero() }
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.re, self.im)
    }

    pub fn is_real(self) -> bool {
        self.im == T::zero()
    }

    /// Rejects points on the real axis.
    pub fn require_upper(self) -> Result<Self> {
        if self.im > T::zero() {
            Ok(self)
        } else {
            Err(Error::RequiresUpperHalfPlane(self.im.to_f64().unwrap_or(f64::NAN)))
        }
    }
}

/// Truncated distance `Σ_{|n|<=K} 2^{-|n|} (|b1(n)-b2(n)| + |a1(n)-a2(n)|)`.
///
/// The omitted tail is at most `8 c0 2^{-K}` with `c0` the common bound.
pub fn metric_d(j1: &Coefficients, j2: &Coefficients, radius: usize) -> f64 {
    let k = radius as i64;
    let mut total = 0.0;
    // Accumulate from the outside in so the small weights are summed first.
    for m in (0..=k).rev() {
        let w = 0.5f64.powi(m as i32);
        let idx: &[i64] = if m == 0 { &[0] } else { &[m, -m] };
        for &n in idx {
            let (a1, b1) = j1.at(n);
            let (a2, b2) = j2.at(n);
            total += w * ((b1 - b2).abs() + (a1 - a2).abs());
        }
    }
    total
}

/// Upper bound on what [`metric_d`] omits beyond the radius.
pub fn metric_tail_bound(c0: f64, radius: usize) -> f64 {
    8.0 * c0 * 0.5f64.powi(radius as i32)
}
