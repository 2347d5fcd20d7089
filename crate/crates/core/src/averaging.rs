//! Parameter averages over the constant and skew-shift families.
//!
//! For `b(n) = f(n^ρ mod 1)` the Lyapunov exponent and integrated density of
//! states are predicted by averaging the same quantity over an ergodic
//! family indexed by `α ∈ [0,1]`. When `⌊ρ⌋ = 0` that family consists of
//! constant potentials `f(α)`, which have closed forms; otherwise it is the
//! skew-shift of dimension `⌊ρ⌋`, averaged here by Monte Carlo.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::ids_on_window;
use crate::error::{Error, Result};
use crate::lattice::{Coefficients, ComplexEnergy, Window};
use crate::models::{gen_skewshift, ProfileFunction, SkewShiftState};
use crate::scalar::pairwise_sum;
use crate::transfer::window_product;

pub const DEFAULT_NODES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quantity {
    Lyapunov,
    Ids,
}

/// Lyapunov exponent of the constant potential `c`:
/// `log|w + sqrt(w² − 1)|` with `w = (z − c)/2` and the root of modulus at
/// least 1. Exactly zero on the band `|E − c| <= 2` of the real axis.
pub fn gamma_const(c: f64, z: ComplexEnergy<f64>) -> f64 {
    if z.is_real() {
        let d = (z.re - c).abs();
        return if d <= 2.0 { 0.0 } else { (d / 2.0).acosh() };
    }
    let w = (z.to_complex() - c) / 2.0;
    let s = (w * w - 1.0).sqrt();
    let root = if (w + s).norm() >= (w - s).norm() { w + s } else { w - s };
    root.norm().ln().max(0.0)
}

/// Integrated density of states of the constant potential `c`:
/// `(1/π) arccos(clamp(−(E − c)/2, −1, 1))`.
pub fn k_const(c: f64, e: f64) -> f64 {
    (-(e - c) / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI
}

/// `[−2 + max f, 2 + min f]`, on which every constant potential of the
/// family has the energy inside its band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimonZhuInterval {
    pub lo: f64,
    pub hi: f64,
    /// Set when `max f − min f > 4`; the endpoints are then reversed.
    pub empty: bool,
}

impl SimonZhuInterval {
    pub fn contains(&self, e: f64) -> bool {
        !self.empty && self.lo <= e && e <= self.hi
    }
}

pub fn simonzhu_interval(f: &ProfileFunction) -> SimonZhuInterval {
    SimonZhuInterval {
        lo: -2.0 + f.fmax(),
        hi: 2.0 + f.fmin(),
        empty: f.fmax() - f.fmin() > 4.0,
    }
}

/// A quadrature value with the change observed on doubling the nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageEstimate {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

fn constant_family(quantity: Quantity, c: f64, e: f64) -> f64 {
    match quantity {
        Quantity::Lyapunov => gamma_const(c, ComplexEnergy::real(e)),
        Quantity::Ids => k_const(c, e),
    }
}

fn midpoint(f: &ProfileFunction, e: f64, quantity: Quantity, nodes: usize) -> f64 {
    let h = 1.0 / nodes as f64;
    let vals: Vec<f64> = (0..nodes)
        .map(|i| constant_family(quantity, f.eval((i as f64 + 0.5) * h), e))
        .collect();
    pairwise_sum(&vals) * h
}

/// `∫₀¹ γ_{f(α)}(E) dα` or `∫₀¹ k_{f(α)}(E) dα` by the composite midpoint
/// rule; the error is `|Q(2 nodes) − Q(nodes)|`.
pub fn average_r0(f: &ProfileFunction, e: f64, quantity: Quantity, nodes: usize) -> Result<AverageEstimate> {
    if nodes < 2 {
        return Err(Error::invalid("quadrature needs at least two nodes"));
    }
    if !e.is_finite() {
        return Err(Error::invalid("energy must be finite"));
    }
    let value = midpoint(f, e, quantity, nodes);
    let finer = midpoint(f, e, quantity, 2 * nodes);
    Ok(AverageEstimate {
        value,
        error: (finer - value).abs(),
        nodes,
    })
}

/// Mean with its jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Delete-one jackknife of the mean of `groups`.
pub fn jackknife_mean(groups: &[f64]) -> McEstimate {
    let n = groups.len();
    let total = pairwise_sum(groups);
    let mean = total / n as f64;
    if n < 2 {
        return McEstimate {
            mean,
            std_error: f64::INFINITY,
            samples: n,
        };
    }
    let leave_out: Vec<f64> = groups.iter().map(|g| (total - g) / (n - 1) as f64).collect();
    let centre = pairwise_sum(&leave_out) / n as f64;
    let sq: Vec<f64> = leave_out.iter().map(|t| (t - centre).powi(2)).collect();
    McEstimate {
        mean,
        std_error: ((n - 1) as f64 / n as f64 * pairwise_sum(&sq)).sqrt(),
        samples: n,
    }
}

/// The quantity at real energy `E` on the box `[0, N−1]` of `J`.
pub fn finite_quantity(j: &Coefficients, e: f64, quantity: Quantity, n: usize) -> f64 {
    let w: Window<f64> = j.window(0, n);
    on_window(&w, j.a(n as i64 - 1), e, quantity)
}

fn on_window(w: &Window<f64>, a_last: f64, e: f64, quantity: Quantity) -> f64 {
    match quantity {
        Quantity::Lyapunov => window_product(w, ComplexEnergy::real(e), a_last).lyapunov(),
        Quantity::Ids => ids_on_window(w, e),
    }
}

/// One member of the skew-shift family, at `N_inner` sites.
pub fn skew_sample(f: &ProfileFunction, st: &SkewShiftState, e: f64, quantity: Quantity, n_inner: usize) -> f64 {
    finite_quantity(&gen_skewshift(f, st), e, quantity, n_inner)
}

/// Sampling plan of [`average_skew_mc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewPlan {
    pub r: usize,
    pub n_alpha: usize,
    pub n_omega: usize,
    pub n_inner: usize,
    pub seed: u64,
}

/// The sampled parameters: `α` from stream `i` of the seed, then the `ω`
/// points of that `α` from the same stream.
pub fn skew_parameters(plan: &SkewPlan, i: usize) -> Vec<SkewShiftState> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    rng.set_stream(i as u64);
    let alpha: f64 = rng.gen();
    (0..plan.n_omega)
        .map(|_| {
            let omega = (0..plan.r).map(|_| rng.gen::<f64>()).collect();
            SkewShiftState::new(alpha, omega).expect("uniform samples lie in [0,1)")
        })
        .collect()
}

/// Monte Carlo average of the quantity over the skew-shift family of
/// dimension `r`: `α` and `ω` uniform, each sample a finite box of
/// `N_inner` sites. The error is a jackknife over the `α` groups.
pub fn average_skew_mc(f: &ProfileFunction, e: f64, quantity: Quantity, plan: &SkewPlan) -> Result<McEstimate> {
    if plan.r == 0 {
        return Err(Error::invalid(
            "skew-shift averages need r >= 1; use the r = 0 quadrature",
        ));
    }
    if plan.n_alpha == 0 || plan.n_omega == 0 || plan.n_inner == 0 {
        return Err(Error::invalid("sample counts must be positive"));
    }
    let groups: Vec<f64> = (0..plan.n_alpha)
        .into_par_iter()
        .map(|i| {
            let vals: Vec<f64> = skew_parameters(plan, i)
                .iter()
                .map(|st| skew_sample(f, st, e, quantity, plan.n_inner))
                .collect();
            pairwise_sum(&vals) / vals.len() as f64
        })
        .collect();
    let mut est = jackknife_mean(&groups);
    est.samples = plan.n_alpha * plan.n_omega;
    Ok(est)
}

/// How the averaged side of an [`AverageReport`] is computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AverageMethod {
    Quadrature { nodes: usize },
    SkewMonteCarlo(SkewPlan),
}

/// Direct finite-`N` values next to the family average, per energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageReport {
    pub energies: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Quadrature error or standard error of each averaged value.
    pub rhs_error: Vec<f64>,
    pub quantity: Quantity,
    pub n: usize,
    pub method: AverageMethod,
}

impl AverageReport {
    pub fn gap(&self) -> Vec<f64> {
        self.lhs.iter().zip(&self.rhs).map(|(l, r)| (l - r).abs()).collect()
    }
}

/// Compares `J` on `[0, N−1]` with the average over the family of `f`.
pub fn average_report(
    j: &Coefficients,
    f: &ProfileFunction,
    energies: &[f64],
    quantity: Quantity,
    n: usize,
    method: AverageMethod,
) -> Result<AverageReport> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    let w: Window<f64> = j.window(0, n);
    let a_last = j.a(n as i64 - 1);
    let lhs: Vec<f64> = energies
        .par_iter()
        .map(|&e| on_window(&w, a_last, e, quantity))
        .collect();
    let mut rhs = Vec::with_capacity(energies.len());
    let mut rhs_error = Vec::with_capacity(energies.len());
    for &e in energies {
        let (v, err) = match method {
            AverageMethod::Quadrature { nodes } => {
                let a = average_r0(f, e, quantity, nodes)?;
                (a.value, a.error)
            }
            AverageMethod::SkewMonteCarlo(plan) => {
                let m = average_skew_mc(f, e, quantity, &plan)?;
                (m.mean, m.std_error)
            }
        };
        rhs.push(v);
        rhs_error.push(err);
    }
    Ok(AverageReport {
        energies: energies.to_vec(),
        lhs,
        rhs,
        rhs_error,
        quantity,
        n,
        method,
    })
}

/// `γ_c(z)` through its defining limit, for cross-checks: the exponent of
/// the constant potential from one long transfer product.
pub fn gamma_const_by_transfer(c: f64, z: Complex<f64>, n: usize) -> f64 {
    let w = Window::new(0, vec![c; n], vec![1.0; n - 1]).expect("valid window");
    let z = ComplexEnergy::new(z.re, z.im).expect("upper half plane");
    window_product(&w, z, 1.0).lyapunov()
}
