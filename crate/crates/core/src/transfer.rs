//! Transfer matrices of the eigenvalue equation `J u = z u`.
//!
//! With the state vector `(u(n), a(n-1) u(n-1))` one step reads
//!
//! ```text
//! M(z, n) = 1/a(n) [[z - b(n), -1], [a(n)^2, 0]],   det M = 1
//! ```
//!
//! and the ordered product `M(z, N-1) ... M(z, 0)` has the cosine and sine
//! solutions in its rows:
//!
//! ```text
//! [[c(z,N), s(z,N)], [a(N-1) c(z,N-1), a(N-1) s(z,N-1)]]
//! ```
//!
//! Products are renormalized after every step so that arbitrarily long
//! products stay finite.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::lattice::{Coefficients, ComplexEnergy, Window};
use crate::scalar::Real;

pub type Mat2<T> = [[Complex<T>; 2]; 2];

pub fn mat_mul<T: Real>(x: &Mat2<T>, y: &Mat2<T>) -> Mat2<T> {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

pub fn mat_det<T: Real>(x: &Mat2<T>) -> Complex<T> {
    x[0][0] * x[1][1] - x[0][1] * x[1][0]
}

pub fn frobenius<T: Real>(x: &Mat2<T>) -> T {
    (x[0][0].norm_sqr() + x[0][1].norm_sqr() + x[1][0].norm_sqr() + x[1][1].norm_sqr()).sqrt()
}

fn scale<T: Real>(x: &Mat2<T>, s: T) -> Mat2<T> {
    [[x[0][0] * s, x[0][1] * s], [x[1][0] * s, x[1][1] * s]]
}

fn identity<T: Real>() -> Mat2<T> {
    let (o, l) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
    [[l, o], [o, l]]
}

/// One-step transfer matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferStep<T> {
    pub mat: Mat2<T>,
}

impl<T: Real> TransferStep<T> {
    pub fn det(&self) -> Complex<T> {
        mat_det(&self.mat)
    }
}

/// `M(z, n)` for coefficients `a > 0`, `b`.
pub fn step_matrix<T: Real>(z: ComplexEnergy<T>, a: T, b: T) -> Result<TransferStep<T>> {
    if !(a > T::zero()) {
        return Err(Error::NonPositiveOffDiagonal(a.to_f64().unwrap_or(f64::NAN)));
    }
    let inv = a.recip();
    let zc = z.to_complex();
    let zero = Complex::new(T::zero(), T::zero());
    Ok(TransferStep {
        mat: [
            [(zc - b) * inv, Complex::new(-inv, T::zero())],
            [Complex::new(a, T::zero()), zero],
        ],
    })
}

/// Transfer product kept as `exp(logscale) * mat` with `|mat|_F = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledProduct<T> {
    pub mat: Mat2<T>,
    pub logscale: T,
    pub steps: usize,
}

impl<T: Real> ScaledProduct<T> {
    pub fn identity() -> Self {
        let id = identity();
        // |I|_F = sqrt(2)
        let norm = frobenius(&id);
        ScaledProduct {
            mat: scale(&id, norm.recip()),
            logscale: norm.ln(),
            steps: 0,
        }
    }

    /// Left-multiplies by `M(z, n)` for coefficients `(a, b)`.
    #[inline]
    pub fn push(&mut self, z: Complex<T>, a: T, b: T) {
        let p = &self.mat;
        let inv = a.recip();
        let zb = z - b;
        let row0 = [(zb * p[0][0] - p[1][0]) * inv, (zb * p[0][1] - p[1][1]) * inv];
        let row1 = [p[0][0] * a, p[0][1] * a];
        let next = [row0, row1];
        let norm = frobenius(&next);
        self.mat = scale(&next, norm.recip());
        self.logscale += norm.ln();
        self.steps += 1;
    }

    /// `log |P|_F`.
    pub fn log_norm(&self) -> T {
        self.logscale + frobenius(&self.mat).ln()
    }

    /// `(1/N) log |P|_F`.
    pub fn lyapunov(&self) -> T {
        self.log_norm() / T::from_len(self.steps.max(1))
    }

    /// The product itself. Overflows once `logscale` exceeds the exponent
    /// range; prefer [`ScaledProduct::mat`] with `logscale` for comparisons.
    pub fn reconstruct(&self) -> Mat2<T> {
        scale(&self.mat, self.logscale.exp())
    }

    /// `det P / |P|_F^2`, computed without leaving the normalized form.
    pub fn normalized_det(&self) -> Complex<T> {
        let n = frobenius(&self.mat);
        mat_det(&self.mat) / (n * n)
    }
}

fn product_from<T: Real>(z: Complex<T>, coeffs: impl Iterator<Item = (T, T)>) -> ScaledProduct<T> {
    let mut p = ScaledProduct::identity();
    for (a, b) in coeffs {
        p.push(z, a, b);
    }
    p
}

/// `M(z, N-1) ... M(z, 0)` for `J`.
pub fn transfer_product<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize) -> ScaledProduct<T> {
    assert!(n >= 1, "product length must be at least 1");
    product_from(
        z.to_complex(),
        (0..n as i64).map(|k| {
            let (a, b) = j.at(k);
            (T::lit(a), T::lit(b))
        }),
    )
}

/// Transfer product across a materialized window, in index order.
///
/// The last window site contributes a step too, so the off-diagonal value
/// `a_last` beyond the window has to be supplied.
pub fn window_product<T: Real>(w: &Window<T>, z: ComplexEnergy<T>, a_last: T) -> ScaledProduct<T> {
    let offdiag = w.offdiag().iter().copied().chain(std::iter::once(a_last));
    product_from(z.to_complex(), offdiag.zip(w.diag().iter().copied()))
}

/// `(1/N) log |M(z,N-1) ... M(z,0)|`, Frobenius norm. Real `z` is allowed.
pub fn lyapunov_finite<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize) -> T {
    transfer_product(j, z, n).lyapunov()
}

/// A solution value `value * exp(logscale)` with its predecessor sharing the
/// same scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledSolution<T> {
    pub value: Complex<T>,
    pub prev: Complex<T>,
    pub logscale: T,
}

impl<T: Real> ScaledSolution<T> {
    pub fn log_abs(&self) -> T {
        self.value.norm().ln() + self.logscale
    }

    pub fn log_abs_prev(&self) -> T {
        self.prev.norm().ln() + self.logscale
    }

    /// `u(n) / u(n-1)`.
    pub fn ratio(&self) -> Complex<T> {
        self.value / self.prev
    }

    /// `u(n)` unscaled; may overflow.
    pub fn unscaled(&self) -> Complex<T> {
        self.value * self.logscale.exp()
    }

    pub fn unscaled_prev(&self) -> Complex<T> {
        self.prev * self.logscale.exp()
    }
}

/// Cosine and sine solutions at `n = N` (and `N - 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosSin<T> {
    pub n: usize,
    pub c: ScaledSolution<T>,
    pub s: ScaledSolution<T>,
}

fn run_recurrence<T: Real>(
    z: Complex<T>,
    coeff: &impl Fn(i64) -> (T, T),
    n: usize,
    init: (Complex<T>, Complex<T>),
) -> ScaledSolution<T> {
    let lo = T::lit(2f64.powi(-400));
    let hi = T::lit(2f64.powi(400));
    let (mut cur, mut prev) = init;
    let mut logscale = T::zero();
    // the boundary term at n = 0 uses a(-1) = 1
    let mut a_prev = T::one();
    for k in 0..n as i64 {
        let (a, b) = coeff(k);
        let next = ((z - b) * cur - prev * a_prev) / a;
        prev = cur;
        cur = next;
        a_prev = a;
        let m = cur.norm().max(prev.norm());
        if m > hi || (m < lo && m > T::zero()) {
            let k2 = m.log2().round();
            let f = T::lit(2.0).powf(-k2);
            cur *= f;
            prev *= f;
            logscale += k2 * T::LN_2();
        }
    }
    ScaledSolution {
        value: cur,
        prev,
        logscale,
    }
}

/// Cosine `c` and sine `s` solutions from the three-term recurrence
/// `a(n) u(n+1) = (z - b(n)) u(n) - a(n-1) u(n-1)` with
/// `c(0) = 1, c(-1) = 0, s(0) = 0, s(-1) = 1`.
pub fn cosine_sine<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize) -> CosSin<T> {
    assert!(n >= 1, "solution index must be at least 1");
    let coeff = |k: i64| {
        let (a, b) = j.at(k);
        (T::lit(a), T::lit(b))
    };
    let zc = z.to_complex();
    let one = Complex::new(T::one(), T::zero());
    let zero = Complex::new(T::zero(), T::zero());
    CosSin {
        n,
        c: run_recurrence(zc, &coeff, n, (one, zero)),
        s: run_recurrence(zc, &coeff, n, (zero, one)),
    }
}

/// Largest entrywise relative discrepancy between a transfer product and the
/// matrix assembled from the cosine/sine solutions, measured in units of
/// `|P|_F`.
pub fn product_solution_mismatch<T: Real>(p: &ScaledProduct<T>, cs: &CosSin<T>, a_last: T) -> T {
    let base = p.logscale;
    let sc = |sol: &ScaledSolution<T>, v: Complex<T>| v * (sol.logscale - base).exp();
    let q: Mat2<T> = [
        [sc(&cs.c, cs.c.value), sc(&cs.s, cs.s.value)],
        [sc(&cs.c, cs.c.prev) * a_last, sc(&cs.s, cs.s.prev) * a_last],
    ];
    let diff = [
        [p.mat[0][0] - q[0][0], p.mat[0][1] - q[0][1]],
        [p.mat[1][0] - q[1][0], p.mat[1][1] - q[1][1]],
    ];
    frobenius(&diff) / frobenius(&p.mat)
}
