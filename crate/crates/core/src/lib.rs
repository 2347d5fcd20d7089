//! Numerics for bounded Jacobi operators on the integer lattice.
//!
//! The crate covers transfer-matrix Lyapunov exponents, Sturm-count
//! eigenvalues and densities of states, Weyl m-functions, the coefficient
//! families built from `f(n^ρ mod 1)` and skew-shift orbits, empirical
//! measures of translates, and the parameter averages that predict the
//! Lyapunov exponent and integrated density of states of those families.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar to `f64`, with `F32` variants for the
//! single-precision kernels.

// `!(x > 0.0)` also rejects NaN, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod eigen;
pub mod error;
pub mod lattice;
pub mod measures;
pub mod models;
pub mod scalar;
pub mod transfer;
pub mod weyl;

pub use error::{Error, Result};
pub use lattice::{CoefficientRule, Coefficients, Descriptor, RuleBounds};
pub use scalar::Real;

pub type Window = lattice::Window<f64>;
pub type ComplexEnergy = lattice::ComplexEnergy<f64>;
pub type ScaledProduct = transfer::ScaledProduct<f64>;
pub type CosSin = transfer::CosSin<f64>;
pub type DosMeasure = eigen::DosMeasure<f64>;
pub type MFunctionValue = weyl::MFunctionValue<f64>;

pub type WindowF32 = lattice::Window<f32>;
pub type ComplexEnergyF32 = lattice::ComplexEnergy<f32>;
pub type ScaledProductF32 = transfer::ScaledProduct<f32>;
pub type CosSinF32 = transfer::CosSin<f32>;
pub type DosMeasureF32 = eigen::DosMeasure<f32>;
pub type MFunctionValueF32 = weyl::MFunctionValue<f32>;
