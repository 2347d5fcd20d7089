use serde::{Deserialize, Serialize};

use super::ddouble::DoubleDouble;
use crate::error::{Error, Result};

/// Point of the torus `[0,1)^r` together with the rotation number of the
/// skew-shift `(ω0, ω1, ...) -> (ω0 + α, ω1 + ω0, ..., ω_{r-1} + ω_{r-2})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkewShiftState {
    r: usize,
    alpha: f64,
    omega: Vec<f64>,
}

fn in_unit(x: f64) -> bool {
    (0.0..1.0).contains(&x)
}

impl SkewShiftState {
    pub fn new(alpha: f64, omega: Vec<f64>) -> Result<Self> {
        if !in_unit(alpha) {
            return Err(Error::invalid(format!("alpha must lie in [0,1), got {alpha}")));
        }
        if let Some(w) = omega.iter().find(|w| !in_unit(**w)) {
            return Err(Error::invalid(format!("torus coordinates must lie in [0,1), got {w}")));
        }
        Ok(SkewShiftState {
            r: omega.len(),
            alpha,
            omega,
        })
    }

    /// Starting point at the origin of `[0,1)^r`.
    pub fn at_origin(r: usize, alpha: f64) -> Result<Self> {
        Self::new(alpha, vec![0.0; r])
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// One application of the map.
    pub fn step(&self) -> SkewShiftState {
        let mut next = self.omega.clone();
        for k in (1..self.r).rev() {
            next[k] = frac(self.omega[k] + self.omega[k - 1]);
        }
        if self.r > 0 {
            next[0] = frac(self.omega[0] + self.alpha);
        }
        SkewShiftState {
            omega: next,
            ..self.clone()
        }
    }

    /// Coordinate `k` of `T^n ω`, from the closed form
    /// `Σ_{j<=k} C(n, k-j) ω_j + C(n, k+1) α (mod 1)`, which holds for
    /// negative `n` as well with generalized binomial coefficients.
    pub fn orbit_coordinate(&self, n: i64, k: usize) -> f64 {
        assert!(k < self.r, "coordinate {k} outside a {}-torus", self.r);
        let mut acc = 0.0;
        for j in 0..=k {
            acc += frac_mul(binomial(n, k - j), self.omega[j]);
        }
        acc += frac_mul(binomial(n, k + 1), self.alpha);
        frac(acc)
    }

    /// The sampled coordinate: the last one, `r - 1`; for `r = 0` the
    /// constant `α`.
    pub fn sample(&self, n: i64) -> f64 {
        if self.r == 0 {
            self.alpha
        } else {
            self.orbit_coordinate(n, self.r - 1)
        }
    }
}

fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Generalized binomial `n (n-1) ... (n-k+1) / k!`, exact.
fn binomial(n: i64, k: usize) -> i128 {
    let mut c: i128 = 1;
    for i in 0..k as i128 {
        c = c
            .checked_mul(n as i128 - i)
            .expect("binomial coefficient overflows i128");
        c /= i + 1;
    }
    c
}

/// `frac(c * x)` with the product formed in double-double arithmetic.
fn frac_mul(c: i128, x: f64) -> f64 {
    if x == 0.0 || c == 0 {
        return 0.0;
    }
    DoubleDouble::from_i128(c).mul_f64(x).fract()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle_dist(a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        d.min(1.0 - d)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(2, 3), 0);
        assert_eq!(binomial(-1, 2), 1);
        assert_eq!(binomial(-3, 3), -10);
    }

    #[test]
    fn rotation_orbit() {
        let st = SkewShiftState::new(0.25, vec![0.0]).unwrap();
        let xs: Vec<f64> = (0..4).map(|n| st.sample(n)).collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75]);
    }

    #[test]
    fn quadratic_orbit_from_origin() {
        let alpha = std::f64::consts::FRAC_1_PI;
        let st = SkewShiftState::at_origin(2, alpha).unwrap();
        for n in 0..200i64 {
            let expect = frac(alpha * (n * (n - 1) / 2) as f64);
            assert!(circle_dist(st.sample(n), expect) < 1e-10, "n = {n}");
        }
    }

    /// The map iterated in double-double, so that the reference itself does
    /// not drift over 10^4 steps.
    fn iterate_dd(alpha: f64, omega: &[f64], steps: usize) -> Vec<Vec<f64>> {
        let wrap = |x: DoubleDouble| x - x.floor();
        let alpha = DoubleDouble::from_f64(alpha);
        let mut w: Vec<DoubleDouble> = omega.iter().map(|&x| DoubleDouble::from_f64(x)).collect();
        let mut out = Vec::with_capacity(steps + 1);
        for _ in 0..=steps {
            out.push(w.iter().map(|x| x.to_f64()).collect());
            for k in (1..w.len()).rev() {
                w[k] = wrap(w[k] + w[k - 1]);
            }
            w[0] = wrap(w[0] + alpha);
        }
        out
    }

    #[test]
    fn closed_form_matches_iteration() {
        for r in 1..=3 {
            let omega: Vec<f64> = (0..r).map(|k| 0.1 + 0.27 * k as f64).collect();
            let st = SkewShiftState::new(0.618_033_988_749_894_8, omega.clone()).unwrap();
            let orbit = iterate_dd(st.alpha(), &omega, 10_000);
            for (n, point) in orbit.iter().enumerate() {
                for (k, &x) in point.iter().enumerate() {
                    let d = circle_dist(st.orbit_coordinate(n as i64, k), x);
                    assert!(d < 1e-9, "r={r} n={n} k={k} d={d:e}");
                }
            }
        }
    }

    #[test]
    fn plain_step_follows_the_orbit() {
        let mut st = SkewShiftState::new(0.3, vec![0.2, 0.7, 0.05]).unwrap();
        let origin = st.clone();
        for n in 0..100 {
            for k in 0..3 {
                assert!(circle_dist(origin.orbit_coordinate(n, k), st.omega()[k]) < 1e-11);
            }
            st = st.step();
        }
    }

    #[test]
    fn negative_times_invert_the_map() {
        let st = SkewShiftState::new(0.3, vec![0.2, 0.7, 0.05]).unwrap();
        let earlier = SkewShiftState::new(0.3, (0..3).map(|k| st.orbit_coordinate(-5, k)).collect()).unwrap();
        let mut s = earlier;
        for _ in 0..5 {
            s = s.step();
        }
        for k in 0..3 {
            assert!(circle_dist(s.omega()[k], st.omega()[k]) < 1e-11);
        }
    }

    #[test]
    fn validation() {
        assert!(SkewShiftState::new(1.0, vec![]).is_err());
        assert!(SkewShiftState::new(0.5, vec![-0.1]).is_err());
        let st = SkewShiftState::new(0.3, vec![]).unwrap();
        assert_eq!(st.sample(17), 0.3);
    }
}
