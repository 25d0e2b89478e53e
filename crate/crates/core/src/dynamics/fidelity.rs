//! Closed-form fidelities `⟨ψ₀|ρ(t)|ψ₀⟩` driven by a coefficient solution.

use serde::{Deserialize, Serialize};

use super::state::PureState;
use crate::coeffs::{CoefficientKind, CoefficientSolution, TimeGrid};
use crate::error::{invalid, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityTrace<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<T>,
}

impl<T: Real> FidelityTrace<T> {
    pub fn from_fn(grid: TimeGrid<T>, f: impl FnMut(usize) -> T) -> Self {
        Self { grid, values: (0..grid.len()).map(f).collect() }
    }

    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max)
    }
}

/// How the qubit fidelity is averaged over pure initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AverageVariant {
    /// `1/2 + [e^{-2∫Re F} + Re e^{-∫F}]/4`
    #[default]
    PaperFormula,
    /// Uniform average over the Bloch sphere:
    /// `1/2 + e^{-2∫Re F}/6 + Re e^{-∫F}/3`
    HaarIntegral,
}

impl AverageVariant {
    pub const ALL: [AverageVariant; 2] = [AverageVariant::PaperFormula, AverageVariant::HaarIntegral];

    /// Weights `(w_pop, w_coh)` of the population and coherence terms; the
    /// constant is `1 - w_pop - w_coh`.
    pub fn weights<T: Real>(self) -> (T, T) {
        match self {
            AverageVariant::PaperFormula => (T::lit(0.25), T::lit(0.25)),
            AverageVariant::HaarIntegral => (T::lit(1.0 / 6.0), T::lit(1.0 / 3.0)),
        }
    }

    /// Average of `|μ|²|ν|²`-weighted coherence terms, i.e. of `2(|μ|²-|μ|⁴)`.
    pub fn coherence_weight<T: Real>(self) -> T {
        self.weights::<T>().1
    }

    pub fn name(self) -> &'static str {
        match self {
            AverageVariant::PaperFormula => "paper_formula",
            AverageVariant::HaarIntegral => "haar_integral",
        }
    }
}

fn require(coeff: &CoefficientSolution<impl Real>, kind: CoefficientKind) -> Result<()> {
    if coeff.kind != kind {
        return Err(invalid("coeff", format!("expected a {kind:?} coefficient, got {:?}", coeff.kind)));
    }
    Ok(())
}

/// Qubit fidelity for initial population `|μ|²`:
///
/// `1 - |μ|² - (|μ|² - 2|μ|⁴) e^{-2∫Re F} + 2(|μ|² - |μ|⁴) Re e^{-∫F}`
pub fn fidelity_qubit<T: Real>(mu_sq: T, coeff: &CoefficientSolution<T>) -> Result<FidelityTrace<T>> {
    require(coeff, CoefficientKind::TwoLevelF)?;
    if !(T::zero()..=T::one()).contains(&mu_sq) {
        return Err(invalid("mu_sq", format!("population must lie in [0, 1], got {mu_sq}")));
    }
    let mu4 = mu_sq * mu_sq;
    let two = T::lit(2.0);
    Ok(FidelityTrace::from_fn(coeff.grid, |n| {
        let pop = (-two * coeff.real_integral[n]).exp();
        let coh = (-coeff.integral[n]).exp().re;
        T::one() - mu_sq - (mu_sq - two * mu4) * pop + two * (mu_sq - mu4) * coh
    }))
}

pub fn average_fidelity_qubit<T: Real>(
    coeff: &CoefficientSolution<T>,
    variant: AverageVariant,
) -> Result<FidelityTrace<T>> {
    require(coeff, CoefficientKind::TwoLevelF)?;
    let (wp, wc) = variant.weights::<T>();
    let base = T::one() - wp - wc;
    Ok(FidelityTrace::from_fn(coeff.grid, |n| {
        base + wp * (T::lit(-2.0) * coeff.real_integral[n]).exp() + wc * (-coeff.integral[n]).exp().re
    }))
}

/// Λ-atom fidelity for `|ψ₀⟩ = a|1⟩ + b|2⟩ + c|3⟩`, with `Q̄ = -2∫Q`:
///
/// `½|a|²[1 - e^{Q̄+Q̄*}]|b+c|² + |a|⁴e^{Q̄+Q̄*} + (1-|a|²)² + (|a|²-|a|⁴)[e^{Q̄}+e^{Q̄*}]`
pub fn fidelity_lambda<T: Real>(psi0: &PureState<T>, coeff: &CoefficientSolution<T>) -> Result<FidelityTrace<T>> {
    require(coeff, CoefficientKind::ThreeLevelQ)?;
    if psi0.dim() != 3 {
        return Err(invalid("initial", "Λ fidelity needs a three-level state"));
    }
    let amps = psi0.amplitudes();
    let a2 = amps[0].norm_sqr();
    let bc2 = (amps[1] + amps[2]).norm_sqr();
    let one = T::one();
    let half = T::lit(0.5);
    Ok(FidelityTrace::from_fn(coeff.grid, |n| {
        let qb = coeff.q_bar(n);
        let e = qb.exp();
        let e_conj = qb.conj().exp();
        let both = (qb + qb.conj()).exp();
        let total = (-both + one) * (half * a2 * bc2)
            + both * (a2 * a2)
            + (one - a2) * (one - a2)
            + (e + e_conj) * (a2 - a2 * a2);
        assert!(
            total.im.abs() <= T::lit(1e-12).max(T::epsilon() * T::lit(64.0)),
            "imaginary residual {} in Λ fidelity",
            total.im
        );
        total.re
    }))
}
