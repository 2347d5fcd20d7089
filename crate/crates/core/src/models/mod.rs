//! Coefficient generators and the model descriptor mini-language.
//!
//! All generators produce Schrödinger-type operators (`a ≡ 1`) except
//! [`gen_tabulated`], which is periodic in both sequences.
//!
//! | descriptor              | diagonal `b(n)`                               |
//! |-------------------------|-----------------------------------------------|
//! | `free`                  | `0`                                           |
//! | `constant:c`            | `c`                                           |
//! | `periodic:b1,b2,...`    | `b[n mod p]`                                  |
//! | `anderson:seed,λ`       | i.i.d. uniform on `[-λ, λ)`, keyed by `(seed, n)` |
//! | `sparse:h`              | `h` on perfect squares `n >= 0`, else `0`     |
//! | `decaying:c,p`          | `c / (1 + |n|)^p`                             |
//! | `nrho:ρ`                | `f(|n|^ρ mod 1)`                              |
//! | `skew:r,α[,ω0,...]`     | `f((T_α^n ω)_{r-1})`, or `f(α)` for `r = 0`   |

mod ddouble;
mod discrepancy;
mod profile;
mod skew;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use ddouble::{pow_dd, DoubleDouble};
pub use discrepancy::{discrepancy, sequence, star_discrepancy, SequenceKind};
pub use profile::{ProfileFunction, ProfileKind};
pub use skew::SkewShiftState;

use crate::error::{Error, Result};
use crate::lattice::{CoefficientRule, Coefficients, RuleBounds};
use profile::{fmt_num, parse_list};

#[derive(Debug, Clone, PartialEq)]
pub enum BasicKind {
    Free,
    Constant(f64),
    Periodic(Vec<f64>),
    Anderson { seed: u64, coupling: f64 },
    SparseSquares { height: f64 },
    Decaying { c: f64, exponent: f64 },
}

#[derive(Debug, Clone)]
struct BasicRule(BasicKind);

/// Uniform sample in `[0, 1)` determined by `(seed, n)` alone.
fn keyed_uniform(seed: u64, n: i64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // zigzag so that negative sites get their own counter values
    let counter = ((n << 1) ^ (n >> 63)) as u64;
    rng.set_word_pos(2 * counter as u128);
    (rng.next_u64() >> 11) as f64 * 2f64.powi(-53)
}

fn is_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i64;
    (r.saturating_sub(1)..=r + 1).any(|k| k >= 0 && k.checked_mul(k) == Some(n))
}

impl CoefficientRule for BasicRule {
    fn eval(&self, n: i64) -> (f64, f64) {
        let b = match &self.0 {
            BasicKind::Free => 0.0,
            BasicKind::Constant(c) => *c,
            BasicKind::Periodic(list) => list[n.rem_euclid(list.len() as i64) as usize],
            BasicKind::Anderson { seed, coupling } => coupling * (2.0 * keyed_uniform(*seed, n) - 1.0),
            BasicKind::SparseSquares { height } => {
                if is_square(n) {
                    *height
                } else {
                    0.0
                }
            }
            BasicKind::Decaying { c, exponent } => c / (1.0 + n.unsigned_abs() as f64).powf(*exponent),
        };
        (1.0, b)
    }

    fn descriptor(&self) -> String {
        match &self.0 {
            BasicKind::Free => "free".into(),
            BasicKind::Constant(c) => format!("constant:{}", fmt_num(*c)),
            BasicKind::Periodic(list) => format!(
                "periodic:{}",
                list.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
            ),
            BasicKind::Anderson { seed, coupling } => format!("anderson:{seed},{}", fmt_num(*coupling)),
            BasicKind::SparseSquares { height } => format!("sparse:{}", fmt_num(*height)),
            BasicKind::Decaying { c, exponent } => format!("decaying:{},{}", fmt_num(*c), fmt_num(*exponent)),
        }
    }

    fn bounds(&self) -> Option<RuleBounds> {
        let sup = match &self.0 {
            BasicKind::Free => 0.0,
            BasicKind::Constant(c) => c.abs(),
            BasicKind::Periodic(list) => list.iter().fold(0.0f64, |m, x| m.max(x.abs())),
            BasicKind::Anderson { coupling, .. } => *coupling,
            BasicKind::SparseSquares { height } => height.abs(),
            BasicKind::Decaying { c, .. } => c.abs(),
        };
        Some(RuleBounds::schrodinger(sup))
    }
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::invalid(format!("{what} must be finite, got {x}")))
    }
}

fn validate(kind: &BasicKind) -> Result<()> {
    match kind {
        BasicKind::Free => {}
        BasicKind::Constant(c) => {
            finite(*c, "constant")?;
        }
        BasicKind::Periodic(list) => {
            if list.is_empty() {
                return Err(Error::invalid("periodic potential needs at least one value"));
            }
            for x in list {
                finite(*x, "periodic value")?;
            }
        }
        BasicKind::Anderson { coupling, .. } => {
            if !(finite(*coupling, "coupling")? >= 0.0) {
                return Err(Error::invalid("coupling must be nonnegative"));
            }
        }
        BasicKind::SparseSquares { height } => {
            finite(*height, "height")?;
        }
        BasicKind::Decaying { c, exponent } => {
            finite(*c, "amplitude")?;
            if !(finite(*exponent, "exponent")? >= 0.0) {
                return Err(Error::invalid("decay exponent must be nonnegative"));
            }
        }
    }
    Ok(())
}

pub fn gen_basic(kind: BasicKind) -> Result<Coefficients> {
    validate(&kind)?;
    Ok(Coefficients::new(BasicRule(kind)))
}

/// Same as [`gen_basic`] with an explicit bound constant.
pub fn gen_basic_with_c0(kind: BasicKind, c0: f64) -> Result<Coefficients> {
    validate(&kind)?;
    Coefficients::with_c0(BasicRule(kind), c0)
}

#[derive(Debug, Clone)]
struct TabulatedRule {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl CoefficientRule for TabulatedRule {
    fn eval(&self, n: i64) -> (f64, f64) {
        let i = n.rem_euclid(self.b.len() as i64) as usize;
        (self.a[i], self.b[i])
    }

    fn descriptor(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",");
        format!("tabulated:a={};b={}", join(&self.a), join(&self.b))
    }

    fn bounds(&self) -> Option<RuleBounds> {
        Some(RuleBounds {
            a_min: self.a.iter().copied().fold(f64::INFINITY, f64::min),
            a_max: self.a.iter().copied().fold(0.0, f64::max),
            b_abs_max: self.b.iter().fold(0.0f64, |m, x| m.max(x.abs())),
        })
    }
}

/// Jacobi operator periodic in both `a` and `b` with the given period data.
pub fn gen_tabulated(a: Vec<f64>, b: Vec<f64>) -> Result<Coefficients> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::invalid("tabulated coefficients need equal, nonzero lengths"));
    }
    if let Some(x) = a.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
        return Err(Error::NonPositiveOffDiagonal(*x));
    }
    for x in &b {
        finite(*x, "diagonal value")?;
    }
    Ok(Coefficients::new(TabulatedRule { a, b }))
}

#[derive(Debug, Clone)]
struct NRhoRule {
    profile: ProfileFunction,
    rho: f64,
}

impl NRhoRule {
    fn phase(&self, n: i64) -> f64 {
        let n = n.unsigned_abs();
        let f = pow_dd(n, self.rho).fract();
        if !(1e-12..=1.0 - 1e-12).contains(&f) && is_integer_power(n, self.rho) {
            return 0.0;
        }
        f
    }
}

impl CoefficientRule for NRhoRule {
    fn eval(&self, n: i64) -> (f64, f64) {
        (1.0, self.profile.eval(self.phase(n)))
    }

    fn descriptor(&self) -> String {
        format!("nrho:{};profile={}", fmt_num(self.rho), self.profile.descriptor())
    }

    fn bounds(&self) -> Option<RuleBounds> {
        Some(RuleBounds::schrodinger(self.profile.sup_abs()))
    }
}

/// Whether `n^rho` is an integer, decided exactly for `rho = p/q` with
/// `q <= 16` while `n^p` fits in 128 bits.
fn is_integer_power(n: u64, rho: f64) -> bool {
    let Some(q) = (1..=16u32).find(|&q| (rho * q as f64).fract() == 0.0) else {
        return false;
    };
    let p = (rho * q as f64) as u32;
    let m = (n as f64).powf(rho).round() as u128;
    match ((n as u128).checked_pow(p), m.checked_pow(q)) {
        (Some(lhs), Some(rhs)) => lhs == rhs,
        _ => false,
    }
}

/// `a ≡ 1`, `b(n) = f(|n|^ρ mod 1)`; the fractional part is taken from a
/// double-double evaluation of `|n|^ρ`.
pub fn gen_nrho(f: &ProfileFunction, rho: f64) -> Result<Coefficients> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::invalid(format!("rho must be positive, got {rho}")));
    }
    Ok(Coefficients::new(NRhoRule {
        profile: f.clone(),
        rho,
    }))
}

#[derive(Debug, Clone)]
struct SkewRule {
    profile: ProfileFunction,
    state: SkewShiftState,
}

impl CoefficientRule for SkewRule {
    fn eval(&self, n: i64) -> (f64, f64) {
        (1.0, self.profile.eval(self.state.sample(n)))
    }

    fn descriptor(&self) -> String {
        let mut parts = vec![self.state.r().to_string(), fmt_num(self.state.alpha())];
        parts.extend(self.state.omega().iter().map(|w| fmt_num(*w)));
        format!("skew:{};profile={}", parts.join(","), self.profile.descriptor())
    }

    fn bounds(&self) -> Option<RuleBounds> {
        Some(RuleBounds::schrodinger(self.profile.sup_abs()))
    }
}

/// `a ≡ 1`, `b(n) = f((T_α^n ω)_{r-1})`; for `r = 0` the constant `f(α)`.
pub fn gen_skewshift(f: &ProfileFunction, st: &SkewShiftState) -> Coefficients {
    Coefficients::new(SkewRule {
        profile: f.clone(),
        state: st.clone(),
    })
}

/// Parses a model descriptor. `nrho` and `skew` sample `profile`, which is
/// required for them and ignored otherwise.
pub fn parse_model(desc: &str, profile: Option<&ProfileFunction>) -> Result<Coefficients> {
    let (tag, rest) = desc.split_once(':').unwrap_or((desc, ""));
    let nums = parse_list(desc, rest)?;
    let arity = |lo: usize, hi: usize| -> Result<()> {
        if nums.len() < lo || nums.len() > hi {
            Err(Error::descriptor(
                desc,
                if lo == hi {
                    format!("expected {lo} parameter(s), got {}", nums.len())
                } else {
                    format!("expected {lo}..={hi} parameters, got {}", nums.len())
                },
            ))
        } else {
            Ok(())
        }
    };
    let wrap = |r: Result<Coefficients>| r.map_err(|e| Error::descriptor(desc, e.to_string()));
    let need_profile = || profile.ok_or_else(|| Error::descriptor(desc, "this model needs a profile"));
    match tag {
        "free" => {
            arity(0, 0)?;
            wrap(gen_basic(BasicKind::Free))
        }
        "constant" => {
            arity(1, 1)?;
            wrap(gen_basic(BasicKind::Constant(nums[0])))
        }
        "periodic" => {
            arity(1, usize::MAX)?;
            wrap(gen_basic(BasicKind::Periodic(nums)))
        }
        "anderson" => {
            arity(2, 2)?;
            let seed = nums[0];
            if seed < 0.0 || seed.fract() != 0.0 || seed > u64::MAX as f64 {
                return Err(Error::descriptor(desc, "seed must be a nonnegative integer"));
            }
            // parse the seed from text so large seeds keep every digit
            let seed: u64 = rest
                .split(',')
                .next()
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| Error::descriptor(desc, "seed must be a nonnegative integer"))?;
            wrap(gen_basic(BasicKind::Anderson {
                seed,
                coupling: nums[1],
            }))
        }
        "sparse" => {
            arity(1, 1)?;
            wrap(gen_basic(BasicKind::SparseSquares { height: nums[0] }))
        }
        "decaying" => {
            arity(2, 2)?;
            wrap(gen_basic(BasicKind::Decaying {
                c: nums[0],
                exponent: nums[1],
            }))
        }
        "nrho" => {
            arity(1, 1)?;
            wrap(gen_nrho(need_profile()?, nums[0]))
        }
        "skew" => {
            arity(2, usize::MAX)?;
            let r = nums[0];
            if r < 0.0 || r.fract() != 0.0 || r > 16.0 {
                return Err(Error::descriptor(desc, "r must be an integer in 0..=16"));
            }
            let r = r as usize;
            let omega = if nums.len() == 2 {
                vec![0.0; r]
            } else if nums.len() == 2 + r {
                nums[2..].to_vec()
            } else {
                return Err(Error::descriptor(desc, format!("expected 0 or {r} torus coordinates")));
            };
            let st = SkewShiftState::new(nums[1], omega).map_err(|e| Error::descriptor(desc, e.to_string()))?;
            Ok(gen_skewshift(need_profile()?, &st))
        }
        _ => Err(Error::descriptor(
            desc,
            "unknown model (free, constant, periodic, anderson, sparse, decaying, nrho, skew)",
        )),
    }
}
