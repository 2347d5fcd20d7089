use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// E, L: finite-N Lyapunov exponent on the energy grid
    Lyapunov,
    /// E, k: finite-N integrated density of states
    Ids,
    /// E, lhs, rhs, gap: Thouless formula against the transfer-matrix exponent
    ThoulessCheck,
    /// E, re, im: half-line m-function at E + i eta
    Mfunction,
    /// E, direct, averaged, gap: finite-N quantity against the family average
    Average,
    /// N, value: density of sites away from (a, b) = (1, 0)
    Drr,
    /// N, distance: empirical measure against a target
    MeasureDist,
    /// N, discrepancy: star discrepancy of n^rho mod 1
    Equidist,
    /// E, defect: |m+ + conj(M-)| at E + i eta
    Reflectionless,
    /// E, det, mismatch, c_ratio, entry_margin: exact transfer-matrix identities
    Identities,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantityArg {
    Lyapunov,
    Ids,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    /// quadrature over the r = 0 family
    Quadrature,
    /// Monte Carlo over the skew-shift family
    Skew,
}

/// Which pair `thouless-check` compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    /// (1/N) log|P_N| against log(1/A) + ∫ log|t − z| dν_N
    Asymptotic,
    /// (1/N) log|c(z, N)| against the same right-hand side; equal up to rounding
    Exact,
    /// (1/N) log|P_N| against the m-function route
    Mfunction,
}

#[derive(Debug, Clone, PartialEq, Parser, Serialize, Deserialize)]
#[command(
    name = "jacobi",
    version,
    about = "Spectral quantities of one-dimensional Jacobi operators"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,

    /// Model descriptor, e.g. free, anderson:42,1, nrho:0.5, sparse:1
    #[arg(long, default_value = "free")]
    pub model: String,

    /// Profile descriptor for nrho and skew models: trig:..., pwl:..., table:PATH, identity
    #[arg(long)]
    pub profile: Option<String>,

    #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
    pub emin: f64,
    #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
    pub emax: f64,
    #[arg(long, default_value_t = 61)]
    pub ne: usize,

    /// Imaginary part of z
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,

    /// Box size; a comma list for drr, measure-dist and equidist
    #[arg(long, value_delimiter = ',', default_value = "10000")]
    pub n: Vec<usize>,

    /// Window radius K
    #[arg(long, default_value_t = 16)]
    pub k: usize,

    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,

    /// Exponent of the equidistributed sequence
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,

    /// Quadrature nodes for average
    #[arg(long, default_value_t = 4096)]
    pub nodes: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Skew-shift dimension for average --method skew
    #[arg(long, default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 64)]
    pub n_alpha: usize,
    #[arg(long, default_value_t = 4)]
    pub n_omega: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n_inner: usize,

    #[arg(long, value_enum, default_value_t = QuantityArg::Lyapunov)]
    pub quantity: QuantityArg,

    #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
    pub method: MethodArg,

    #[arg(long, value_enum, default_value_t = RouteArg::Asymptotic)]
    pub route: RouteArg,

    /// measure-dist target: exact (atoms of a periodic model), free-torus, or a model descriptor
    #[arg(long, default_value = "free-torus")]
    pub target: String,

    /// Moment degree for measure-dist --target exact
    #[arg(long, default_value_t = 2)]
    pub degree: u8,

    /// Tolerance of m-function continued fractions
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,

    /// CSV destination; standard output when omitted
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Worker threads; 0 uses every available core
    #[arg(long, default_value_t = 0)]
    pub threads: usize,

    /// Leave the timestamp line out of the metadata
    #[arg(long)]
    pub no_timestamp: bool,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), String> {
        let floats = [
            ("emin", self.emin),
            ("emax", self.emax),
            ("eta", self.eta),
            ("eps", self.eps),
            ("rho", self.rho),
            ("tol", self.tol),
        ];
        if let Some((name, v)) = floats.iter().find(|(_, v)| !v.is_finite()) {
            return Err(format!("--{name} must be finite, got {v}"));
        }
        if self.ne == 0 {
            return Err("--ne must be at least 1".into());
        }
        if self.emin > self.emax {
            return Err(format!("--emin {} exceeds --emax {}", self.emin, self.emax));
        }
        if self.eta < 0.0 {
            return Err(format!("--eta must be nonnegative, got {}", self.eta));
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return Err("--n entries must be at least 1".into());
        }
        let lists = matches!(self.command, Command::Drr | Command::MeasureDist | Command::Equidist);
        if !lists && self.n.len() > 1 {
            return Err(format!("{:?} takes a single --n", self.command));
        }
        if self.tol <= 0.0 {
            return Err("--tol must be positive".into());
        }
        Ok(())
    }

    /// `ne` points from `emin` to `emax` inclusive.
    pub fn energies(&self) -> Vec<f64> {
        if self.ne == 1 {
            return vec![self.emin];
        }
        let step = (self.emax - self.emin) / (self.ne - 1) as f64;
        (0..self.ne)
            .map(|i| {
                if i + 1 == self.ne {
                    self.emax
                } else {
                    self.emin + step * i as f64
                }
            })
            .collect()
    }

    pub fn single_n(&self) -> usize {
        self.n[0]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    #[cfg(test)]
    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}
