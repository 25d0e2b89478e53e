//! Exact dynamics of two- and three-level atoms under simultaneous relaxation
//! and dephasing noise.
//!
//! Both noise channels are Ornstein-Uhlenbeck processes. Their combined effect
//! enters through one composite correlation kernel ([`kernels`]), which fixes
//! the O-operator coefficient `F(t)` or `Q(t)` ([`coeffs`]). That coefficient
//! drives the exact master equations and closed-form fidelities
//! ([`dynamics`]). A linear quantum-state-diffusion sampler ([`trajectories`])
//! serves as an independent check, and [`experiments`] assembles the
//! relaxation / dephasing / composite comparisons.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below fix the scalar to `f64`, which is what the experiments use.

// `!(x > 0)` is used on purpose: unlike `x <= 0` it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coeffs;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod kernels;
mod scalar;
pub mod trajectories;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};

pub type OuParams64 = kernels::OuParams<f64>;
pub type KernelSpec64 = kernels::KernelSpec<f64>;
pub type TimeGrid64 = coeffs::TimeGrid<f64>;
pub type CoefficientSolution64 = coeffs::CoefficientSolution<f64>;
pub type PureState64 = dynamics::PureState<f64>;
pub type DensityMatrix64 = dynamics::DensityMatrix<f64>;
pub type DensityTrace64 = dynamics::DensityTrace<f64>;
pub type FidelityTrace64 = dynamics::FidelityTrace<f64>;

pub type OuParams32 = kernels::OuParams<f32>;
pub type KernelSpec32 = kernels::KernelSpec<f32>;
pub type TimeGrid32 = coeffs::TimeGrid<f32>;
pub type CoefficientSolution32 = coeffs::CoefficientSolution<f32>;
pub type FidelityTrace32 = dynamics::FidelityTrace<f32>;
