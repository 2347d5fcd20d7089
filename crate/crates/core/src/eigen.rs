//! Eigenvalue counting for finite restrictions `J_[0,N-1]`.
//!
//! Everything here is driven by Sturm counts of the `LDL^T` pivots
//! `q_0 = b_0 - E`, `q_k = b_k - E - a_{k-1}^2 / q_{k-1}`; the number of
//! negative pivots is the number of eigenvalues below `E`. Full spectra come
//! from bisection on the count, which also gives the density of states
//! measure `ν_N = (1/N) Σ δ_{λ_j}` and its logarithmic potential.

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Coefficients, ComplexEnergy, Window};
use crate::scalar::{pairwise_sum, Real};

/// Eigenvalues closer than this to a real evaluation point are treated as a
/// collision in [`log_potential`].
pub const ATOM_COLLISION: f64 = 1e-14;

/// Default bisection tolerance relative to the bound constant.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

#[inline]
fn count_with_squares<T: Real>(diag: &[T], offdiag_sq: &[T], e: T, guard: T) -> usize {
    let mut q = diag[0] - e;
    let mut count = usize::from(q < T::zero());
    for (d, a2) in diag[1..].iter().zip(offdiag_sq) {
        if q.abs() < guard {
            q = if q < T::zero() { -guard } else { guard };
        }
        q = (*d - e) - *a2 / q;
        count += usize::from(q < T::zero());
    }
    count
}

fn pivot_guard<T: Real>(w: &Window<T>) -> T {
    T::pivot_floor() * T::lit(3.0) * w.c0()
}

/// Number of eigenvalues of `w` strictly below `e`.
pub fn sturm_count<T: Real>(w: &Window<T>, e: T) -> usize {
    let sq: Vec<T> = w.offdiag().iter().map(|a| *a * *a).collect();
    count_with_squares(w.diag(), &sq, e, pivot_guard(w))
}

struct Bisector<'a, T> {
    diag: &'a [T],
    offdiag_sq: Vec<T>,
    guard: T,
    tol: T,
}

impl<T: Real> Bisector<'_, T> {
    fn count(&self, e: T) -> usize {
        count_with_squares(self.diag, &self.offdiag_sq, e, self.guard)
    }

    /// Eigenvalues in `[lo, hi)`, given the counts at both ends, in order.
    fn solve(&self, lo: T, hi: T, c_lo: usize, c_hi: usize) -> Vec<T> {
        if c_hi == c_lo {
            return Vec::new();
        }
        let two = T::lit(2.0);
        let mid = lo + (hi - lo) / two;
        if hi - lo <= self.tol || mid <= lo || mid >= hi {
            return vec![mid; c_hi - c_lo];
        }
        let c_mid = self.count(mid);
        // split work only where there is enough of it to pay for a task
        if c_hi - c_lo > 64 && self.diag.len() > 512 {
            let (mut left, right) =
                rayon::join(|| self.solve(lo, mid, c_lo, c_mid), || self.solve(mid, hi, c_mid, c_hi));
            left.extend(right);
            left
        } else {
            let mut left = self.solve(lo, mid, c_lo, c_mid);
            left.extend(self.solve(mid, hi, c_mid, c_hi));
            left
        }
    }
}

/// All eigenvalues of `w`, ascending and with multiplicity, each within
/// `tol` of the true value.
pub fn eigenvalues_bisect<T: Real>(w: &Window<T>, tol: T) -> Vec<T> {
    assert!(tol > T::zero(), "bisection tolerance must be positive");
    let b = Bisector {
        diag: w.diag(),
        offdiag_sq: w.offdiag().iter().map(|a| *a * *a).collect(),
        guard: pivot_guard(w),
        tol,
    };
    let (lo, hi) = w.spectral_bracket();
    let (c_lo, c_hi) = (b.count(lo), b.count(hi));
    debug_assert_eq!((c_lo, c_hi), (0, w.len()), "spectral bracket too narrow");
    b.solve(lo, hi, c_lo, c_hi)
}

/// Density of states measure of a finite box: uniform weights on the
/// sorted eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct DosMeasure<T> {
    atoms: Vec<T>,
}

impl<T: Real> DosMeasure<T> {
    /// Wraps eigenvalues, sorting them if necessary.
    pub fn from_eigenvalues(mut atoms: Vec<T>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("density of states measure needs at least one atom"));
        }
        if atoms.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("eigenvalues must be finite"));
        }
        atoms.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        Ok(DosMeasure { atoms })
    }

    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weight(&self) -> T {
        T::from_len(self.atoms.len()).recip()
    }

    /// `ν((-∞, e))`.
    pub fn cdf(&self, e: T) -> T {
        T::from_len(self.atoms.partition_point(|&x| x < e)) * self.weight()
    }

    /// `∫ g dν`.
    pub fn integrate(&self, g: impl Fn(T) -> T) -> T {
        let vals: Vec<T> = self.atoms.iter().map(|&x| g(x)).collect();
        pairwise_sum(&vals) * self.weight()
    }
}

/// `ν_N` of `J_[0,N-1]`, eigenvalues to absolute accuracy `tol`.
pub fn dos_measure<T: Real>(j: &Coefficients, n: usize, tol: T) -> DosMeasure<T> {
    assert!(n >= 1, "box size must be at least 1");
    let w: Window<T> = j.window(0, n);
    DosMeasure {
        atoms: eigenvalues_bisect(&w, tol),
    }
}

/// Default absolute bisection tolerance for `J`.
pub fn default_tol<T: Real>(j: &Coefficients) -> T {
    T::lit(DEFAULT_REL_TOL * j.c0())
}

/// `(1/N) #{eigenvalues of J_[0,N-1] below E}`; one Sturm pass.
pub fn ids_estimate<T: Real>(j: &Coefficients, e: T, n: usize) -> T {
    assert!(n >= 1, "box size must be at least 1");
    let w: Window<T> = j.window(0, n);
    ids_on_window(&w, e)
}

/// Counting function of a materialized window, normalized by its length.
pub fn ids_on_window<T: Real>(w: &Window<T>, e: T) -> T {
    T::from_len(sturm_count(w, e)) / T::from_len(w.len())
}

/// Counting function on a grid of energies; one Sturm pass per energy.
pub fn ids_curve<T: Real>(w: &Window<T>, energies: &[T]) -> Vec<T> {
    let sq: Vec<T> = w.offdiag().iter().map(|a| *a * *a).collect();
    let guard = pivot_guard(w);
    let n = T::from_len(w.len());
    energies
        .par_iter()
        .map(|&e| T::from_len(count_with_squares(w.diag(), &sq, e, guard)) / n)
        .collect()
}

/// `∫ log|t - z| dν(t)`.
///
/// On the real axis an atom within [`ATOM_COLLISION`] of `E` is an error
/// rather than being regularized away.
pub fn log_potential<T: Real>(nu: &DosMeasure<T>, z: ComplexEnergy<T>) -> Result<T> {
    if z.is_real() {
        let lim = T::lit(ATOM_COLLISION);
        let i = nu.atoms.partition_point(|&x| x < z.re);
        for k in i.saturating_sub(1)..(i + 1).min(nu.atoms.len()) {
            if (nu.atoms[k] - z.re).abs() < lim {
                return Err(Error::Singularity {
                    energy: z.re.to_f64().unwrap_or(f64::NAN),
                    atom: nu.atoms[k].to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }
    let zc = z.to_complex();
    Ok(nu.integrate(|t| (Complex::new(t, T::zero()) - zc).norm().ln()))
}

/// `-(1/N) Σ_{j<N} log a(j)`.
pub fn log_inverse_a<T: Real>(j: &Coefficients, n: usize) -> T {
    let logs: Vec<T> = (0..n as i64).map(|k| T::lit(j.a(k).ln())).collect();
    -pairwise_sum(&logs) / T::from_len(n)
}

/// `∫ log|t - z| dν_N - (1/N) Σ_{j<N} log a(j)`, which equals
/// `(1/N) log|c(z, N)|`.
pub fn thouless_rhs<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize) -> Result<T> {
    let nu = dos_measure(j, n, default_tol(j));
    thouless_rhs_with(&nu, j, z)
}

/// [`thouless_rhs`] reusing a precomputed `ν_N`.
pub fn thouless_rhs_with<T: Real>(nu: &DosMeasure<T>, j: &Coefficients, z: ComplexEnergy<T>) -> Result<T> {
    Ok(log_potential(nu, z)? + log_inverse_a(j, nu.len()))
}
