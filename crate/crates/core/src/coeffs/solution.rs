use serde::{Deserialize, Serialize};

use super::TimeGrid;
use crate::scalar::{Cx, Real};

/// Which O-operator coefficient a solution holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientKind {
    /// `F(t)` of the qubit, `Ō = F σ₋`.
    TwoLevelF,
    /// `Q(t)` of the Λ atom, `Ō = Q L_Λ`.
    ThreeLevelQ,
}

impl CoefficientKind {
    /// Coefficient of the quadratic term in the Riccati equation; equivalently
    /// the multiplier of the coefficient in `∂_t f(t,s) = [iω + k·F(t)] f(t,s)`.
    pub fn quadratic<T: Real>(self) -> T {
        match self {
            CoefficientKind::TwoLevelF => T::one(),
            CoefficientKind::ThreeLevelQ => T::lit(2.0),
        }
    }

    pub fn dim(self) -> usize {
        match self {
            CoefficientKind::TwoLevelF => 2,
            CoefficientKind::ThreeLevelQ => 3,
        }
    }
}

/// Sampled coefficient and its running trapezoidal integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSolution<T> {
    pub grid: TimeGrid<T>,
    pub values: Vec<Cx<T>>,
    /// `∫₀^{t_n} F(s) ds`
    pub integral: Vec<Cx<T>>,
    /// `∫₀^{t_n} Re F(s) ds`
    pub real_integral: Vec<T>,
    pub kind: CoefficientKind,
}

impl<T: Real> CoefficientSolution<T> {
    pub fn from_values(grid: TimeGrid<T>, values: Vec<Cx<T>>, kind: CoefficientKind) -> Self {
        assert_eq!(values.len(), grid.len(), "coefficient samples must cover the grid");
        let half = grid.step * T::lit(0.5);
        let mut integral = Vec::with_capacity(values.len());
        let mut real_integral = Vec::with_capacity(values.len());
        let (mut acc, mut acc_re) = (Cx::new(T::zero(), T::zero()), T::zero());
        integral.push(acc);
        real_integral.push(acc_re);
        for w in values.windows(2) {
            acc += (w[0] + w[1]) * half;
            acc_re += (w[0].re + w[1].re) * half;
            integral.push(acc);
            real_integral.push(acc_re);
        }
        Self { grid, values, integral, real_integral, kind }
    }

    /// All-zero coefficient (no relaxation channel).
    pub fn zero(grid: TimeGrid<T>, kind: CoefficientKind) -> Self {
        Self::from_values(grid, vec![Cx::new(T::zero(), T::zero()); grid.len()], kind)
    }

    /// Linear interpolation between grid nodes; clamps outside `[0, horizon]`.
    pub fn value_at(&self, t: T) -> Cx<T> {
        let x = t / self.grid.step;
        if !(x > T::zero()) {
            return self.values[0];
        }
        let n = x.floor().to_usize().unwrap_or(usize::MAX);
        if n >= self.grid.count {
            return self.values[self.grid.count];
        }
        let frac = x - T::from_usize_lossy(n);
        self.values[n] + (self.values[n + 1] - self.values[n]) * frac
    }

    /// `Q̄(t_n) = -2 ∫₀^{t_n} Q(s) ds`.
    pub fn q_bar(&self, n: usize) -> Cx<T> {
        self.integral[n] * T::lit(-2.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
