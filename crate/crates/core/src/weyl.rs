//! Weyl–Titchmarsh m-functions of half-line and finite restrictions.
//!
//! `m₊(z, J) = ⟨δ₀, (J₊ − z)⁻¹ δ₀⟩` is evaluated by the continued fraction
//! `m⁽ᵏ⁾ = 1 / (b(k) − z − a(k)² m⁽ᵏ⁺¹⁾)` with a zero tail, which is the
//! same as a Dirichlet box. `m₋` is `m₊` of the reflected operator.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::eigen::log_inverse_a;
use crate::error::{Error, Result};
use crate::lattice::{Coefficients, ComplexEnergy};
use crate::scalar::{pairwise_sum, Real};

pub const INITIAL_DEPTH: usize = 8;
pub const MAX_DEPTH: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MMethod {
    ContinuedFraction,
    BoxResolvent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MFunctionValue<T> {
    pub value: Complex<T>,
    pub method: MMethod,
    /// Continued-fraction depth, or number of box sites.
    pub depth: usize,
    pub est_error: T,
}

fn coeff<T: Real>(j: &Coefficients, n: i64) -> (T, T) {
    let (a, b) = j.at(n);
    (T::lit(a), T::lit(b))
}

fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Continued fraction truncated after `depth` levels.
fn continued_fraction<T: Real>(j: &Coefficients, z: Complex<T>, depth: usize) -> Complex<T> {
    let mut m = Complex::new(T::zero(), T::zero());
    for k in (0..depth as i64).rev() {
        let (a, b) = coeff::<T>(j, k);
        m = (-(z - b) - m * (a * a)).inv();
    }
    m
}

/// `m₊(z, J)` to absolute accuracy `tol`, doubling the depth from
/// [`INITIAL_DEPTH`] until two successive approximants agree.
pub fn m_plus<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, tol: T) -> Result<MFunctionValue<T>> {
    let z = z.require_upper()?.to_complex();
    let mut depth = INITIAL_DEPTH;
    let mut prev = continued_fraction(j, z, depth);
    loop {
        let next_depth = (2 * depth).min(MAX_DEPTH);
        let next = continued_fraction(j, z, next_depth);
        let increment = (next - prev).norm();
        if increment < tol {
            return Ok(MFunctionValue {
                value: next,
                method: MMethod::ContinuedFraction,
                depth: next_depth,
                est_error: increment,
            });
        }
        if next_depth == MAX_DEPTH {
            return Err(Error::NonConvergence {
                best_re: to_f64(next.re),
                best_im: to_f64(next.im),
                depth: next_depth,
                increment: to_f64(increment),
            });
        }
        prev = next;
        depth = next_depth;
    }
}

/// Solution of `(J_[0,M-1] − z) u = δ₀`, by forward elimination and back
/// substitution.
fn box_solve<T: Real>(j: &Coefficients, z: Complex<T>, sites: usize) -> Vec<Complex<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut upper = vec![zero; sites];
    let mut rhs = vec![zero; sites];
    let mut a_prev = T::zero();
    for k in 0..sites {
        let (a, b) = coeff::<T>(j, k as i64);
        let piv = (-z + b) - upper.get(k.wrapping_sub(1)).copied().unwrap_or(zero) * a_prev;
        let r = if k == 0 {
            Complex::new(T::one(), T::zero())
        } else {
            -rhs[k - 1] * a_prev
        };
        upper[k] = Complex::new(a, T::zero()) / piv;
        rhs[k] = r / piv;
        a_prev = a;
    }
    let mut u = vec![zero; sites];
    u[sites - 1] = rhs[sites - 1];
    for k in (0..sites - 1).rev() {
        u[k] = rhs[k] - upper[k] * u[k + 1];
    }
    u
}

/// `m₊` from the resolvent of the box `[0, M−1]`; the error estimate is
/// the change from a box of half the size.
pub fn m_plus_box<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, sites: usize) -> Result<MFunctionValue<T>> {
    let z = z.require_upper()?.to_complex();
    if sites < 2 {
        return Err(Error::invalid("box needs at least two sites"));
    }
    let full = box_solve(j, z, sites)[0];
    let half = box_solve(j, z, sites / 2)[0];
    Ok(MFunctionValue {
        value: full,
        method: MMethod::BoxResolvent,
        depth: sites,
        est_error: (full - half).norm(),
    })
}

/// `m₋(z, J) = ⟨δ₋₁, (J₋ − z)⁻¹ δ₋₁⟩`, computed as `m₊` of the reflection.
pub fn m_minus<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, tol: T) -> Result<MFunctionValue<T>> {
    m_plus(&j.reflect(), z, tol)
}

/// `m_N(z) = ⟨δ_N, (J_[0,N] − z)⁻¹ δ_N⟩` from the forward pivots of the box.
///
/// Satisfies `c(z, N+1) / c(z, N) = −1 / (a(N) m_N(z))`.
pub fn box_m<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize) -> Result<Complex<T>> {
    let z = z.require_upper()?.to_complex();
    let (_, b0) = coeff::<T>(j, 0);
    let mut g = (-z + b0).inv();
    for k in 1..=n as i64 {
        let (a_prev, _) = coeff::<T>(j, k - 1);
        let (_, b) = coeff::<T>(j, k);
        g = ((-z + b) - g * (a_prev * a_prev)).inv();
    }
    Ok(g)
}

/// `m₊(z, J⁽ⁿ⁾)` for `n = 0..=N`, by one backward sweep from a converged
/// tail at `n = N`. The sweep contracts, so the tail error does not grow.
pub fn m_plus_along<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize, tol: T) -> Result<Vec<Complex<T>>> {
    let tail = m_plus(&j.shift(n as i64), z, tol)?;
    let zc = z.to_complex();
    let mut out = vec![tail.value; n + 1];
    let mut m = tail.value;
    for k in (0..n).rev() {
        let (a, b) = coeff::<T>(j, k as i64);
        m = ((-zc + b) - m * (a * a)).inv();
        out[k] = m;
    }
    Ok(out)
}

/// `−(1/N) Σ_{n<N} log a(n) − (1/N) Σ_{n<N} log|m₊(z, J⁽ⁿ⁾)|`.
pub fn lyap_via_m<T: Real>(j: &Coefficients, z: ComplexEnergy<T>, n: usize, tol: T) -> Result<T> {
    if n == 0 {
        return Err(Error::invalid("box size must be at least 1"));
    }
    let ms = m_plus_along(j, z, n, tol)?;
    let logs: Vec<T> = ms[..n].iter().map(|m| m.norm().ln()).collect();
    Ok(log_inverse_a::<T>(j, n) - pairwise_sum(&logs) / T::from_len(n))
}

/// Comparison of the decaying solution `u₊` (normalized by
/// `u₊(0) = −a(0) m₊(z, J)`) with the product `Π_{n=0}^{N} a(n) m₊(z, J⁽ⁿ⁾)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UPlusReport {
    pub n: usize,
    /// `log|u₊(N)|` from a box solve with `sites` sites.
    pub log_abs_box: f64,
    pub sites: usize,
    /// `log|Π_{n=0}^{N} a(n) m₊(z, J⁽ⁿ⁾)|`.
    pub log_abs_product: f64,
    /// `|u₊(N)| / |product| − 1`.
    pub rel_error: f64,
    /// The same with the product re-normalized by `a(0) / a(N)`, which is
    /// what the normalization of `u₊` implies when `a(0) ≠ a(N)`.
    pub rel_error_normalized: f64,
    /// Sign of `u₊(N) / product`: `(−1)^(N+1)` in every case examined.
    pub sign: i8,
}

/// Builds a [`UPlusReport`] at `z`. The box extends past `N` until the
/// m-function of the tail has converged, so the Dirichlet end is invisible.
pub fn u_plus_check(j: &Coefficients, z: ComplexEnergy<f64>, n: usize) -> Result<UPlusReport> {
    let tol = 1e-14;
    let ms = m_plus_along(j, z, n, tol)?;
    let tail = m_plus(&j.shift(n as i64), z, tol)?;
    let sites = n + 1 + tail.depth.max(64);
    let v = box_solve(j, z.require_upper()?.to_complex(), sites);
    let a0 = j.a(0);
    // the box solution has v(0) = m₊, so u₊ = −a(0) v
    let u_n = v[n] * (-a0);
    let log_prod: f64 = (0..=n).map(|k| j.a(k as i64).ln() + ms[k].norm().ln()).sum();
    let prod_phase: Complex<f64> = ms.iter().map(|m| m / m.norm()).product();
    let log_box = u_n.norm().ln();
    let rel_error = (log_box - log_prod).exp_m1().abs();
    let renorm = (a0 / j.a(n as i64)).ln();
    let rel_error_normalized = (log_box - log_prod - renorm).exp_m1().abs();
    let sign = if (u_n / u_n.norm() / prod_phase).re >= 0.0 {
        1
    } else {
        -1
    };
    Ok(UPlusReport {
        n,
        log_abs_box: log_box,
        sites,
        log_abs_product: log_prod,
        rel_error,
        rel_error_normalized,
        sign,
    })
}

/// `|m₊(E + iη) + conj(M₋(E + iη))|` with `M₋ = −1 / (a(−1)² m₋)`: a
/// heuristic proxy for the reflectionless boundary condition.
///
/// `M₋` is the left-side partner of `m₊` in the whole-line Green function,
/// `G(0,0) = −1 / (−1/m₊ + a(−1)² m₋)`, and the condition `m₊ = −conj(M₋)`
/// is what holds on the band of the free and constant operators. Small
/// values at small `η` suggest reflectionless behavior; nothing converges
/// here.
pub fn reflectionless_defect<T: Real>(j: &Coefficients, e: T, eta: T, tol: T) -> Result<T> {
    let z = ComplexEnergy::new(e, eta)?.require_upper()?;
    let mp = m_plus(j, z, tol)?.value;
    let mm = m_minus(j, z, tol)?.value;
    let a = T::lit(j.a(-1));
    let partner = -(mm * (a * a)).inv();
    Ok((mp + partner.conj()).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::CoefficientRule;
    use crate::models::{gen_basic, BasicKind};
    use crate::transfer::cosine_sine;
    use crate::ComplexEnergy;
    use proptest::prelude::*;

    fn free() -> Coefficients {
        gen_basic(BasicKind::Free).unwrap()
    }

    fn z(re: f64, im: f64) -> ComplexEnergy {
        ComplexEnergy::new(re, im).unwrap()
    }

    #[test]
    fn free_m_at_i() {
        let m = m_plus(&free(), z(0.0, 1.0), 1e-12).unwrap();
        assert!((m.value - Complex::new(0.0, 0.618_033_988_749_894_8)).norm() < 1e-8);
        assert!(m.est_error < 1e-12);
        assert_eq!(m.method, MMethod::ContinuedFraction);
    }

    #[test]
    fn free_m_outside_band() {
        let m = m_plus(&free(), z(3.0, 1e-6), 1e-12).unwrap();
        assert!((m.value.re + 0.381_966_011_250_105_1).abs() < 1e-5);
    }

    #[test]
    fn real_axis_is_rejected() {
        assert!(matches!(
            m_plus(&free(), ComplexEnergy::real(0.5), 1e-10),
            Err(Error::RequiresUpperHalfPlane(_))
        ));
        assert!(box_m(&free(), ComplexEnergy::real(0.5), 3).is_err());
    }

    #[test]
    fn non_convergence_reports_best_value() {
        // inside the band at tiny η the tail decays far too slowly
        match m_plus(&free(), z(0.3, 1e-9), 1e-15) {
            Err(Error::NonConvergence { depth, best_im, .. }) => {
                assert_eq!(depth, MAX_DEPTH);
                assert!(best_im > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn box_resolvent_agrees() {
        let j = gen_basic(BasicKind::Anderson { seed: 5, coupling: 2.0 }).unwrap();
        for &(e, eta) in &[(0.0, 1.0), (1.5, 0.1), (-2.2, 0.01)] {
            let cf = m_plus(&j, z(e, eta), 1e-12).unwrap();
            let bx = m_plus_box(&j, z(e, eta), 2 * cf.depth).unwrap();
            assert_eq!(bx.method, MMethod::BoxResolvent);
            assert!((cf.value - bx.value).norm() < 1e-10 + bx.est_error, "{e} {eta}");
        }
    }

    #[test]
    fn m_minus_conventions() {
        let f = free();
        let mp = m_plus(&f, z(0.0, 1.0), 1e-13).unwrap().value;
        let mm = m_minus(&f, z(0.0, 1.0), 1e-13).unwrap().value;
        assert!((mp - mm).norm() < 1e-12);
        let c = gen_basic(BasicKind::Constant(0.7)).unwrap();
        let mp = m_plus(&c, z(0.2, 0.5), 1e-13).unwrap().value;
        let mm = m_minus(&c, z(0.2, 0.5), 1e-13).unwrap().value;
        assert!((mp - mm).norm() < 1e-12);

        #[derive(Debug)]
        struct Ramp;
        impl CoefficientRule for Ramp {
            fn eval(&self, n: i64) -> (f64, f64) {
                (1.0 + 0.1 * (n as f64 * 0.3).sin(), (n as f64 / 7.0).tanh())
            }
            fn descriptor(&self) -> String {
                "ramp".into()
            }
        }
        let j = Coefficients::new(Ramp);
        let a = m_minus(&j, z(0.0, 1.0), 1e-13).unwrap();
        let b = m_plus(&j.reflect(), z(0.0, 1.0), 1e-13).unwrap();
        assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
        assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());

        // m₋ is the corner entry of the left half-line: compare against a
        // direct box solve on indices -1, -2, ...
        let left = m_minus(&j, z(0.4, 0.3), 1e-13).unwrap().value;
        let mut g = Complex::new(0.0, 0.0);
        for k in (1..=400i64).rev() {
            let (_, b) = j.at(-k);
            let a = j.a(-k - 1);
            g = 1.0 / (b - Complex::new(0.4, 0.3) - a * a * g);
        }
        assert!((left - g).norm() < 1e-12);
    }

    #[test]
    fn box_m_examples() {
        let f = free();
        let m0 = box_m(&f, z(0.0, 1.0), 0).unwrap();
        assert!((m0 - Complex::new(0.0, 1.0)).norm() < 1e-15);
        let m1 = box_m(&f, z(0.0, 2.0), 1).unwrap();
        assert!((m1 - Complex::new(0.0, 0.4)).norm() < 1e-15);
    }

    #[test]
    fn c_ratio_identity() {
        let j = gen_basic(BasicKind::Anderson {
            seed: 11,
            coupling: 1.0,
        })
        .unwrap();
        let zz = z(0.3, 0.7);
        for n in 0..=200usize {
            let m = box_m(&j, zz, n).unwrap();
            let lhs = if n == 0 {
                cosine_sine(&j, zz, 1).c.unscaled()
            } else {
                let hi = cosine_sine(&j, zz, n + 1).c;
                let lo = cosine_sine(&j, zz, n).c;
                hi.value / lo.value * (hi.logscale - lo.logscale).exp()
            };
            let rhs = -1.0 / (j.a(n as i64) * m);
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "n={n}");
        }
    }

    #[test]
    fn lyap_via_m_examples() {
        let l = lyap_via_m(&free(), z(0.0, 2.0), 100, 1e-12).unwrap();
        assert!((l - 0.881_373_587_019_543).abs() < 1e-3);
        let c = gen_basic(BasicKind::Constant(0.5)).unwrap();
        let zz = z(1.0, 0.3);
        let l = lyap_via_m(&c, zz, 50, 1e-13).unwrap();
        let m = m_plus(&c, zz, 1e-13).unwrap().value;
        assert!((l + m.norm().ln()).abs() < 1e-12);
    }

    #[test]
    fn u_plus_expansion() {
        let r = u_plus_check(&free(), z(0.0, 1.0), 3).unwrap();
        assert!((r.log_abs_box.exp() - 0.145_898_033_750_315_5).abs() < 1e-9);
        assert!(r.rel_error < 1e-6);
        assert_eq!(r.sign, 1);
        for n in 0..12 {
            let r = u_plus_check(&free(), z(0.4, 0.8), n).unwrap();
            assert!(r.rel_error < 1e-6);
            assert_eq!(r.sign, if n % 2 == 0 { -1 } else { 1 }, "n={n}");
        }
        let one = gen_basic(BasicKind::Constant(1.0)).unwrap();
        let r = u_plus_check(&one, z(0.0, 2.0), 5).unwrap();
        assert!(r.rel_error < 1e-8);
    }

    #[test]
    fn u_plus_with_varying_a() {
        let j = crate::models::gen_tabulated(vec![0.8, 1.25, 1.1], vec![0.3, -0.2, 0.9]).unwrap();
        for n in 1..20 {
            let r = u_plus_check(&j, z(0.1, 0.6), n).unwrap();
            assert!(r.rel_error_normalized < 1e-6, "n={n}");
        }
    }

    #[test]
    fn reflectionless_examples() {
        let d = reflectionless_defect(&free(), 0.0, 1e-4, 1e-10).unwrap();
        assert!(d <= 1e-3, "{d}");
        let c = gen_basic(BasicKind::Constant(0.5)).unwrap();
        let d = reflectionless_defect(&c, 1.0, 1e-3, 1e-10).unwrap();
        assert!(d <= 1e-2, "{d}");
        assert!(reflectionless_defect(&c, 1.0, 0.0, 1e-10).is_err());
        // outside the band the condition fails
        let d = reflectionless_defect(&free(), 3.0, 1e-3, 1e-10).unwrap();
        assert!(d > 0.5, "{d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn herglotz_and_resolvent_bound(
            seed in 0u64..10_000,
            coupling in 0.0f64..3.0,
            e in -5.0f64..5.0,
            eta in 0.01f64..3.0,
            n in 0usize..100,
        ) {
            let j = gen_basic(BasicKind::Anderson { seed, coupling }).unwrap();
            let zz = z(e, eta);
            let m = m_plus(&j, zz, 1e-10).unwrap().value;
            prop_assert!(m.im > 0.0);
            prop_assert!(m.norm() <= 1.0 / eta + 1e-9);
            let mn = box_m(&j, zz, n).unwrap();
            prop_assert!(mn.im > 0.0);
            prop_assert!(mn.norm() <= 1.0 / eta + 1e-12);
        }
    }
}
