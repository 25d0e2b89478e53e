//! Noise correlation kernels.
//!
//! Relaxation and dephasing are both Ornstein-Uhlenbeck processes with
//! correlation `(Γγ/2)·exp(-γτ)`. Mixing them yields the composite kernel
//!
//! ```text
//! G(τ) = β(τ) · exp{ -(Γ_α/2) [ τ + (exp(-γ_α τ) - 1)/γ_α ] }
//! ```
//!
//! which collapses back to a rescaled OU kernel when the dephasing channel is
//! delta-correlated. All kernels are even in `t - s`; they are evaluated at
//! `τ = |t - s| ≥ 0` only.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Strength/memory pair `(Γ, γ)` of one OU noise channel, in units of ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuParams<T> {
    pub strength: T,
    pub memory_rate: T,
}

impl<T: Real> OuParams<T> {
    pub fn new(strength: T, memory_rate: T) -> Result<Self> {
        let p = Self { strength, memory_rate };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.strength >= T::zero()) || !self.strength.is_finite() {
            return Err(invalid("strength", format!("must be finite and >= 0, got {}", self.strength)));
        }
        if !(self.memory_rate > T::zero()) || !self.memory_rate.is_finite() {
            return Err(invalid(
                "memory_rate",
                format!("must be finite and > 0, got {}", self.memory_rate),
            ));
        }
        Ok(())
    }

    /// `Γγ/2`, the kernel value at zero lag.
    #[inline]
    pub fn peak(&self) -> T {
        self.strength * self.memory_rate * T::lit(0.5)
    }
}

/// A correlation kernel the coefficient solvers can consume.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec<T> {
    /// Pure relaxation: `β(τ)`.
    Ou(OuParams<T>),
    /// Relaxation mixed with non-Markovian OU dephasing.
    Composite { beta: OuParams<T>, alpha: OuParams<T> },
    /// Relaxation mixed with delta-correlated dephasing of rate `dephasing_strength`.
    MarkovDephasedOu { beta: OuParams<T>, dephasing_strength: T },
    Zero,
}

impl<T: Real> KernelSpec<T> {
    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::Ou(p) => p.validate(),
            KernelSpec::Composite { beta, alpha } => {
                beta.validate()?;
                alpha.validate()
            }
            KernelSpec::MarkovDephasedOu { beta, dephasing_strength } => {
                beta.validate()?;
                if !(*dephasing_strength >= T::zero()) || !dephasing_strength.is_finite() {
                    return Err(invalid(
                        "dephasing_strength",
                        format!("must be finite and >= 0, got {dephasing_strength}"),
                    ));
                }
                Ok(())
            }
            KernelSpec::Zero => Ok(()),
        }
    }

    #[inline]
    pub fn eval(&self, tau: T) -> T {
        eval_kernel(self, tau)
    }

    /// Exponential-form parameters `(Γ̃, γ̃)` for kernels that are a single
    /// OU exponential; `None` for the composite kernel.
    pub fn ou_form(&self) -> Option<OuParams<T>> {
        match *self {
            KernelSpec::Ou(p) => Some(p),
            KernelSpec::MarkovDephasedOu { beta, dephasing_strength } => {
                Some(markov_limit_params(beta, dephasing_strength).0)
            }
            KernelSpec::Zero => Some(OuParams { strength: T::zero(), memory_rate: T::one() }),
            KernelSpec::Composite { .. } => None,
        }
    }

    /// Relaxation channel, if any.
    pub fn relaxation(&self) -> Option<OuParams<T>> {
        match *self {
            KernelSpec::Ou(p) => Some(p),
            KernelSpec::Composite { beta, .. } | KernelSpec::MarkovDephasedOu { beta, .. } => Some(beta),
            KernelSpec::Zero => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Ou(_) => "ou",
            KernelSpec::Composite { .. } => "composite",
            KernelSpec::MarkovDephasedOu { .. } => "markov_dephased_ou",
            KernelSpec::Zero => "zero",
        }
    }
}

/// `(Γγ/2)·exp(-γτ)`.
#[inline]
pub fn eval_ou_kernel<T: Real>(p: OuParams<T>, tau: T) -> T {
    p.peak() * (-p.memory_rate * tau).exp()
}

/// `τ + (exp(-γτ) - 1)/γ`, evaluated without cancellation for small `γτ`.
pub fn dephasing_bracket<T: Real>(memory_rate: T, tau: T) -> T {
    let x = memory_rate * tau;
    if x < T::lit(1e-6) {
        // τ·(x/2 - x²/6 + x³/24)
        tau * x * (T::lit(0.5) - x * (T::lit(1.0 / 6.0) - x * T::lit(1.0 / 24.0)))
    } else {
        tau + (-x).exp_m1() / memory_rate
    }
}

/// Dephasing exponent `∫₀ᵗdt₁∫₀^{t₁}dt₂ α(t₁-t₂)` for an OU dephasing channel.
#[inline]
pub fn ou_dephasing_exponent<T: Real>(alpha: OuParams<T>, t: T) -> T {
    T::lit(0.5) * alpha.strength * dephasing_bracket(alpha.memory_rate, t)
}

/// Same exponent for delta-correlated dephasing `α = Γ_α δ(τ)`: `Γ_α t / 2`.
#[inline]
pub fn markov_dephasing_exponent<T: Real>(dephasing_strength: T, t: T) -> T {
    T::lit(0.5) * dephasing_strength * t
}

pub fn eval_composite_kernel<T: Real>(beta: OuParams<T>, alpha: OuParams<T>, tau: T) -> T {
    eval_ou_kernel(beta, tau) * (-ou_dephasing_exponent(alpha, tau)).exp()
}

/// Tilded parameters of the Markov-dephased kernel and the ratio
/// `r = γ_β / γ̃_β`, with `γ̃_β = γ_β + Γ_α/2` and `Γ̃_β = r Γ_β`.
pub fn markov_limit_params<T: Real>(beta: OuParams<T>, dephasing_strength: T) -> (OuParams<T>, T) {
    let memory_rate = beta.memory_rate + T::lit(0.5) * dephasing_strength;
    let r = beta.memory_rate / memory_rate;
    (OuParams { strength: r * beta.strength, memory_rate }, r)
}

pub fn eval_kernel<T: Real>(spec: &KernelSpec<T>, tau: T) -> T {
    match *spec {
        KernelSpec::Ou(p) => eval_ou_kernel(p, tau),
        KernelSpec::Composite { beta, alpha } => eval_composite_kernel(beta, alpha, tau),
        KernelSpec::MarkovDephasedOu { beta, dephasing_strength } => {
            eval_ou_kernel(markov_limit_params(beta, dephasing_strength).0, tau)
        }
        KernelSpec::Zero => T::zero(),
    }
}
