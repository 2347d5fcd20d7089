//! Empirical measures of translates and finite surrogates for weak-*
//! convergence.
//!
//! A measure on operators is represented by weighted windows of radius `K`
//! around the origin. Two such measures are compared through the moments of
//! a fixed dictionary: all monomials of degree at most 1 or 2 in the window
//! entries divided by `c0`. This separates measures only up to those
//! moments; it is a pseudometric, not a metrization of weak-* convergence.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{Coefficients, Window};
use crate::models::{gen_basic, BasicKind};

/// Materialized windows are limited to this many reals.
pub const MAX_STORED_REALS: usize = 1 << 26;

const LEAF: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    radius: usize,
    windows: Vec<Window<f64>>,
    weights: Vec<f64>,
    c0: f64,
}

/// Values `∫ g dμ` over the dictionary `G(K, degree)`, in dictionary order:
/// first the variables, then the products `v_i v_j` for `i <= j`.
///
/// The variables of a window are its `2K+1` diagonal entries followed by
/// its `2K` off-diagonal entries, all divided by `c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    pub radius: usize,
    pub degree: u8,
    pub c0: f64,
    pub values: Vec<f64>,
}

/// Number of dictionary functions for radius `K` and the given degree.
pub fn dictionary_len(radius: usize, degree: u8) -> usize {
    let v = 4 * radius + 1;
    match degree {
        1 => v,
        _ => v + v * (v + 1) / 2,
    }
}

impl EmpiricalMeasure {
    /// Weighted windows. Weights must be positive and sum to 1.
    pub fn from_atoms(windows: Vec<Window<f64>>, weights: Vec<f64>) -> Result<Self> {
        let Some(first) = windows.first() else {
            return Err(Error::invalid("measure needs at least one window"));
        };
        if windows.len() != weights.len() {
            return Err(Error::invalid("one weight per window"));
        }
        let len = first.len();
        if len % 2 == 0 || windows.iter().any(|w| w.len() != len) {
            return Err(Error::invalid("windows must share one odd length 2K+1"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::invalid("weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("weights sum to {total}, not 1")));
        }
        let c0 = windows.iter().map(|w| w.c0()).fold(0.0, f64::max);
        Ok(EmpiricalMeasure {
            radius: len / 2,
            windows,
            weights,
            c0,
        })
    }

    /// The `p`-atom invariant measure of a `p`-periodic operator.
    pub fn periodic(j: &Coefficients, period: usize, radius: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("period must be positive"));
        }
        let windows = (0..period as i64)
            .map(|n| j.window(n - radius as i64, 2 * radius + 1))
            .collect();
        Self::from_atoms(windows, vec![1.0 / period as f64; period])
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn windows(&self) -> &[Window<f64>] {
        &self.windows
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// Dictionary moments with entries normalized by `c0`, which must be at
    /// least the bound of every window.
    pub fn moments(&self, degree: u8, c0: f64) -> Result<MomentVector> {
        if !(degree == 1 || degree == 2) {
            return Err(Error::invalid(format!(
                "dictionary degree must be 1 or 2, got {degree}"
            )));
        }
        if !(c0 >= self.c0) {
            return Err(Error::invalid("normalization below the bound of the measure"));
        }
        let len = dictionary_len(self.radius, degree);
        let values = self.accumulate(0, self.windows.len(), degree, c0.recip(), len);
        Ok(MomentVector {
            radius: self.radius,
            degree,
            c0,
            values,
        })
    }

    /// Weighted moment sums over windows `lo..hi`, reduced as a binary tree
    /// so that the result does not depend on scheduling.
    fn accumulate(&self, lo: usize, hi: usize, degree: u8, scale: f64, len: usize) -> Vec<f64> {
        if hi - lo <= LEAF {
            let mut acc = vec![0.0; len];
            let mut vars = Vec::with_capacity(4 * self.radius + 1);
            for (w, &wt) in self.windows[lo..hi].iter().zip(&self.weights[lo..hi]) {
                vars.clear();
                vars.extend(w.diag().iter().chain(w.offdiag()).map(|x| x * scale));
                let v = vars.len();
                for (slot, x) in acc[..v].iter_mut().zip(&vars) {
                    *slot += wt * x;
                }
                if degree == 2 {
                    let mut k = v;
                    for i in 0..v {
                        let wi = wt * vars[i];
                        for x in &vars[i..] {
                            acc[k] += wi * x;
                            k += 1;
                        }
                    }
                }
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        let (mut left, right) = rayon::join(
            || self.accumulate(lo, mid, degree, scale, len),
            || self.accumulate(mid, hi, degree, scale, len),
        );
        for (l, r) in left.iter_mut().zip(right) {
            *l += r;
        }
        left
    }
}

/// `A_{N,J} = (1/N) Σ_{n<N} δ_{J⁽ⁿ⁾}`, seen through windows of radius `K`.
pub fn empirical_measure(j: &Coefficients, n: usize, radius: usize) -> Result<EmpiricalMeasure> {
    if n == 0 {
        return Err(Error::invalid("empirical measure needs N >= 1"));
    }
    let reals = n.saturating_mul(4 * radius + 2);
    if reals > MAX_STORED_REALS {
        return Err(Error::invalid(format!(
            "N = {n}, K = {radius} would store {reals} reals (limit {MAX_STORED_REALS})"
        )));
    }
    let windows = (0..n as i64)
        .into_par_iter()
        .map(|k| j.window(k - radius as i64, 2 * radius + 1))
        .collect();
    EmpiricalMeasure::from_atoms(windows, vec![1.0 / n as f64; n])
}

/// `max_{g ∈ G(K, degree)} |∫ g dμ₁ − ∫ g dμ₂|`, normalizing by the larger
/// of the two bounds.
pub fn cylinder_distance(m1: &EmpiricalMeasure, m2: &EmpiricalMeasure, degree: u8) -> Result<f64> {
    if m1.radius != m2.radius {
        return Err(Error::invalid(format!(
            "window radii differ: {} vs {}",
            m1.radius, m2.radius
        )));
    }
    let c0 = m1.c0.max(m2.c0);
    let a = m1.moments(degree, c0)?;
    let b = m2.moments(degree, c0)?;
    Ok(a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone)]
pub enum Target {
    SingleOperator(Coefficients),
    /// The isospectral torus of `[-2, 2]`, which is the free operator alone.
    FreeTorus,
}

impl Target {
    fn operator(&self) -> Coefficients {
        match self {
            Target::SingleOperator(j) => j.clone(),
            Target::FreeTorus => gen_basic(BasicKind::Free).expect("free operator"),
        }
    }
}

fn weighted_gap(seq: &[(f64, f64)], target: &[(f64, f64)], radius: usize) -> f64 {
    // same order as `metric_d`: outer sites first
    let mut total = 0.0;
    for m in (0..=radius).rev() {
        let w = 0.5f64.powi(m as i32);
        let sites: &[usize] = if m == 0 { &[radius] } else { &[radius + m, radius - m] };
        for &i in sites {
            let ((a1, b1), (a2, b2)) = (seq[i], target[i]);
            total += w * ((b1 - b2).abs() + (a1 - a2).abs());
        }
    }
    total
}

/// `(1/N) #{1 <= n <= N : d_K(J⁽ⁿ⁾, A) >= ε}` with the truncated metric of
/// radius `K`, which omits at most `8 c0 2^{-K}` of the full distance.
pub fn convergence_in_probability(j: &Coefficients, target: &Target, n: usize, eps: f64, radius: usize) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let k = radius as i64;
    let target = target.operator();
    let tgt: Vec<(f64, f64)> = (-k..=k).map(|m| target.at(m)).collect();
    let seq: Vec<(f64, f64)> = (1 - k..=n as i64 + k).into_par_iter().map(|m| j.at(m)).collect();
    let width = 2 * radius + 1;
    let count: usize = (0..n)
        .into_par_iter()
        .filter(|&i| weighted_gap(&seq[i..i + width], &tgt, radius) >= eps)
        .count();
    Ok(count as f64 / n as f64)
}

/// `(1/N) #{1 <= n <= N : |a(n) − 1| > ε or |b(n)| > ε}`.
pub fn drr_statistic(j: &Coefficients, n: usize, eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::invalid("epsilon must be positive"));
    }
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let count = (1..=n as i64)
        .into_par_iter()
        .filter(|&m| {
            let (a, b) = j.at(m);
            (a - 1.0).abs() > eps || b.abs() > eps
        })
        .count();
    Ok(count as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::metric_d;
    use crate::models::gen_tabulated;
    use proptest::prelude::*;

    fn basic(kind: BasicKind) -> Coefficients {
        gen_basic(kind).unwrap()
    }

    #[test]
    fn constant_windows_coincide() {
        let m = empirical_measure(&basic(BasicKind::Constant(0.3)), 17, 2).unwrap();
        let w0 = &m.windows()[0];
        assert!(m
            .windows()
            .iter()
            .all(|w| w.diag() == w0.diag() && w.offdiag() == w0.offdiag()));
        assert_eq!(m.windows()[0].len(), 5);
    }

    #[test]
    fn periodic_windows_repeat() {
        let j = basic(BasicKind::Periodic(vec![0.1, -0.4, 0.9]));
        let m = empirical_measure(&j, 30, 1).unwrap();
        let mut distinct: Vec<&Window<f64>> = Vec::new();
        for w in m.windows() {
            if !distinct.iter().any(|d| d.diag() == w.diag()) {
                distinct.push(w);
            }
        }
        assert_eq!(distinct.len(), 3);
        let free = empirical_measure(&basic(BasicKind::Free), 1, 1).unwrap();
        assert_eq!(free.windows()[0].diag(), &[0.0; 3]);
        assert_eq!(free.windows()[0].offdiag(), &[1.0; 2]);
    }

    #[test]
    fn distance_examples() {
        let zero = empirical_measure(&basic(BasicKind::Free), 10, 0).unwrap();
        let delta = empirical_measure(&basic(BasicKind::Constant(0.25)), 10, 0).unwrap();
        assert_eq!(cylinder_distance(&zero, &zero, 2).unwrap(), 0.0);
        let d = cylinder_distance(&zero, &delta, 1).unwrap();
        assert!((d - 0.25 / 2.0).abs() < 1e-15);

        let j = basic(BasicKind::Periodic(vec![0.0, 1.0]));
        let emp = empirical_measure(&j, 2000, 3).unwrap();
        let exact = EmpiricalMeasure::periodic(&j, 2, 3).unwrap();
        assert!(cylinder_distance(&emp, &exact, 2).unwrap() < 1e-15);

        let other = empirical_measure(&j, 10, 2).unwrap();
        assert!(cylinder_distance(&emp, &other, 1).is_err());
        assert!(emp.moments(3, 2.0).is_err());
    }

    #[test]
    fn dictionary_shape() {
        let m = empirical_measure(&basic(BasicKind::Constant(1.0)), 4, 2).unwrap();
        let mv = m.moments(2, 2.0).unwrap();
        assert_eq!(mv.values.len(), dictionary_len(2, 2));
        assert!(mv.values.iter().all(|v| v.abs() <= 1.0));
        // diag entries b/c0 = 0.5, off-diagonal a/c0 = 0.5, all products 0.25
        assert!(mv.values[..9].iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert!(mv.values[9..].iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn periodic_gap_decays_like_one_over_n() {
        let j = gen_tabulated(vec![1.0, 1.3, 0.8], vec![0.2, -0.5, 1.1]).unwrap();
        let exact = EmpiricalMeasure::periodic(&j, 3, 2).unwrap();
        for n in [301usize, 3001, 30_001] {
            let emp = empirical_measure(&j, n, 2).unwrap();
            let d = cylinder_distance(&emp, &exact, 2).unwrap();
            // frozen regression constant: measured 0.417
            assert!(d * n as f64 <= 0.5, "n={n}: {}", d * n as f64);
        }
    }

    #[test]
    fn in_probability_examples() {
        let free = basic(BasicKind::Free);
        for eps in [1e-9, 0.1, 5.0] {
            assert_eq!(
                convergence_in_probability(&free, &Target::FreeTorus, 1000, eps, 8).unwrap(),
                0.0
            );
        }
        let one = basic(BasicKind::Constant(1.0));
        assert_eq!(
            convergence_in_probability(&one, &Target::FreeTorus, 1000, 0.5, 8).unwrap(),
            1.0
        );
        let a = basic(BasicKind::Anderson { seed: 2, coupling: 1.0 });
        let same = convergence_in_probability(&a, &Target::SingleOperator(a.clone()), 500, 1e-12, 4).unwrap();
        assert!(same > 0.99, "shifts of a random operator are far from it");
        let sparse = basic(BasicKind::SparseSquares { height: 1.0 });
        let v = convergence_in_probability(&sparse, &Target::FreeTorus, 100_000, 0.5, 8).unwrap();
        assert!(v <= 17.0 * 316.0 / 1e5, "{v}");
        assert!(v > 0.0);
    }

    #[test]
    fn in_probability_uses_the_lattice_metric() {
        let j = basic(BasicKind::Anderson { seed: 9, coupling: 1.2 });
        let t = basic(BasicKind::Periodic(vec![0.5, -0.5]));
        let k = 5;
        for eps in [0.5, 1.0, 2.0, 3.0] {
            let direct = (1..=300).filter(|&n| metric_d(&j.shift(n), &t, k) >= eps).count() as f64 / 300.0;
            let fast = convergence_in_probability(&j, &Target::SingleOperator(t.clone()), 300, eps, k).unwrap();
            assert_eq!(direct, fast);
        }
    }

    #[test]
    fn drr_examples() {
        let sparse = basic(BasicKind::SparseSquares { height: 1.0 });
        assert_eq!(drr_statistic(&sparse, 100_000, 0.5).unwrap(), 316.0 / 1e5);
        assert_eq!(drr_statistic(&basic(BasicKind::Free), 1000, 0.1).unwrap(), 0.0);
        assert_eq!(drr_statistic(&basic(BasicKind::Constant(1.0)), 1000, 0.5).unwrap(), 1.0);
        let dec = basic(BasicKind::Decaying { c: 5.0, exponent: 0.5 });
        let v = drr_statistic(&dec, 1_000_000, 0.1).unwrap();
        assert!(v <= 3e-3, "{v}");
        assert!(drr_statistic(&dec, 10, 0.0).is_err());
    }

    fn measure_strategy() -> impl Strategy<Value = EmpiricalMeasure> {
        prop::collection::vec(
            (
                prop::collection::vec(-2.0f64..2.0, 3),
                prop::collection::vec(0.5f64..2.0, 2),
                0.1f64..1.0,
            ),
            1..6,
        )
        .prop_map(|atoms| {
            let total: f64 = atoms.iter().map(|a| a.2).sum();
            let (windows, weights): (Vec<_>, Vec<_>) = atoms
                .into_iter()
                .map(|(d, o, w)| (Window::new(0, d, o).unwrap(), w / total))
                .unzip();
            EmpiricalMeasure::from_atoms(windows, weights).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cylinder_distance_is_a_pseudometric(
            a in measure_strategy(),
            b in measure_strategy(),
            c in measure_strategy(),
            degree in 1u8..=2,
        ) {
            let d = |x: &EmpiricalMeasure, y: &EmpiricalMeasure| cylinder_distance(x, y, degree).unwrap();
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            // the triangle inequality needs one normalization for all three
            let c0 = a.c0().max(b.c0()).max(c.c0());
            let mv = |m: &EmpiricalMeasure| m.moments(degree, c0).unwrap().values;
            let gap = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            let (ma, mb, mc) = (mv(&a), mv(&b), mv(&c));
            prop_assert!(gap(&ma, &mc) <= gap(&ma, &mb) + gap(&mb, &mc) + 1e-15);
        }

        #[test]
        fn drr_is_monotone_in_eps(seed in 0u64..1000, e1 in 0.01f64..2.0, e2 in 0.01f64..2.0) {
            let j = basic(BasicKind::Anderson { seed, coupling: 1.5 });
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(drr_statistic(&j, 2000, hi).unwrap() <= drr_statistic(&j, 2000, lo).unwrap());
        }
    }
}
