//! Relaxation (R), dephasing (D) and composite (C) fidelity triples.

use serde::{Deserialize, Serialize};

use crate::coeffs::{solve_coefficient, CoefficientKind, CoefficientSolution, TimeGrid};
use crate::dynamics::{average_fidelity_qubit, fidelity_lambda, fidelity_qubit, AverageVariant, FidelityTrace, PureState};
use crate::error::{invalid, Result};
use crate::kernels::{markov_dephasing_exponent, ou_dephasing_exponent, KernelSpec, OuParams};

/// The dephasing channel mixed into the relaxation noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Dephasing {
    /// `α(τ) = Γ_α δ(τ)`
    Markov { strength: f64 },
    /// OU dephasing `(Γ_α γ_α / 2) e^{-γ_α τ}`
    Ou(OuParams<f64>),
}

impl Dephasing {
    pub fn strength(&self) -> f64 {
        match *self {
            Dephasing::Markov { strength } => strength,
            Dephasing::Ou(p) => p.strength,
        }
    }

    /// `∫₀ᵗdt₁∫₀^{t₁}dt₂ α(t₁-t₂)`
    pub fn exponent(&self, t: f64) -> f64 {
        match *self {
            Dephasing::Markov { strength } => markov_dephasing_exponent(strength, t),
            Dephasing::Ou(p) => ou_dephasing_exponent(p, t),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Dephasing::Markov { strength } if !(strength >= 0.0) || !strength.is_finite() => {
                Err(invalid("dephasing_strength", format!("must be finite and >= 0, got {strength}")))
            }
            Dephasing::Markov { .. } => Ok(()),
            Dephasing::Ou(p) => p.validate(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub relaxation: OuParams<f64>,
    pub dephasing: Dephasing,
    pub omega: f64,
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        self.relaxation.validate()?;
        self.dephasing.validate()?;
        if !self.omega.is_finite() {
            return Err(invalid("omega", "must be finite"));
        }
        Ok(())
    }

    pub fn relaxation_kernel(&self) -> KernelSpec<f64> {
        KernelSpec::Ou(self.relaxation)
    }

    pub fn composite_kernel(&self) -> KernelSpec<f64> {
        match self.dephasing {
            Dephasing::Markov { strength } => {
                KernelSpec::MarkovDephasedOu { beta: self.relaxation, dephasing_strength: strength }
            }
            Dephasing::Ou(alpha) => KernelSpec::Composite { beta: self.relaxation, alpha },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Qubit,
    Lambda,
}

impl System {
    pub fn kind(self) -> CoefficientKind {
        match self {
            System::Qubit => CoefficientKind::TwoLevelF,
            System::Lambda => CoefficientKind::ThreeLevelQ,
        }
    }
}

/// Initial condition: one pure state, or the qubit average over pure states.
#[derive(Debug, Clone, PartialEq)]
pub enum Initial {
    State(PureState<f64>),
    Average(AverageVariant),
}

/// Coefficients shared by every fidelity evaluation of one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioSolution {
    pub params: ScenarioParams,
    pub system: System,
    pub relaxation: CoefficientSolution<f64>,
    pub composite: CoefficientSolution<f64>,
    /// `exp(-∫∫α)`, the decay of dephased coherences.
    pub dephasing_factor: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioTriple {
    pub r: FidelityTrace<f64>,
    pub d: FidelityTrace<f64>,
    pub c: FidelityTrace<f64>,
    pub params: ScenarioParams,
}

impl ScenarioSolution {
    pub fn solve(params: ScenarioParams, system: System, grid: TimeGrid<f64>) -> Result<Self> {
        params.validate()?;
        let kind = system.kind();
        let relaxation = solve_coefficient(&params.relaxation_kernel(), params.omega, grid, kind)?;
        let composite = solve_coefficient(&params.composite_kernel(), params.omega, grid, kind)?;
        let dephasing_factor = grid.times().map(|t| (-params.dephasing.exponent(t)).exp()).collect();
        Ok(Self { params, system, relaxation, composite, dephasing_factor })
    }

    pub fn grid(&self) -> TimeGrid<f64> {
        self.relaxation.grid
    }

    fn coefficient_fidelity(&self, coeff: &CoefficientSolution<f64>, initial: &Initial) -> Result<FidelityTrace<f64>> {
        match (self.system, initial) {
            (System::Qubit, Initial::Average(v)) => average_fidelity_qubit(coeff, *v),
            (System::Qubit, Initial::State(psi)) if psi.dim() == 2 => fidelity_qubit(psi.upper_population(), coeff),
            (System::Lambda, Initial::State(psi)) if psi.dim() == 3 => fidelity_lambda(psi, coeff),
            (System::Lambda, Initial::Average(_)) => {
                Err(invalid("initial", "state averaging is only defined for the qubit"))
            }
            (_, Initial::State(psi)) => Err(invalid("initial", format!("{}-level state does not fit {:?}", psi.dim(), self.system))),
        }
    }

    /// Pure dephasing leaves populations alone and multiplies every coherence
    /// between the upper level and a lower level by the dephasing factor.
    fn dephasing_fidelity(&self, initial: &Initial) -> Result<FidelityTrace<f64>> {
        let factor = &self.dephasing_factor;
        // fidelity = 1 - w (1 - D_φ), w = weight of the dephased coherences
        let weight = match (self.system, initial) {
            (System::Qubit, Initial::Average(v)) => v.coherence_weight::<f64>(),
            (_, Initial::State(psi)) if psi.dim() == self.system.kind().dim() => {
                let p = psi.upper_population();
                2.0 * (p - p * p)
            }
            // mismatched inputs: reuse the coefficient path's validation error
            _ => return self.coefficient_fidelity(&self.relaxation, initial),
        };
        Ok(FidelityTrace::from_fn(self.grid(), |n| 1.0 - weight * (1.0 - factor[n])))
    }

    pub fn triple(&self, initial: &Initial) -> Result<ScenarioTriple> {
        Ok(ScenarioTriple {
            r: self.coefficient_fidelity(&self.relaxation, initial)?,
            d: self.dephasing_fidelity(initial)?,
            c: self.coefficient_fidelity(&self.composite, initial)?,
            params: self.params,
        })
    }
}

/// R, D and C fidelities for one parameter set.
pub fn build_triple(
    params: ScenarioParams,
    system: System,
    initial: &Initial,
    grid: TimeGrid<f64>,
) -> Result<ScenarioTriple> {
    ScenarioSolution::solve(params, system, grid)?.triple(initial)
}
