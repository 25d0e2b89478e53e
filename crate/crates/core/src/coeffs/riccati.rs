//! Fixed-step RK4 for the coefficient Riccati equation
//!
//! ```text
//! Ḟ = Γ̃γ̃/2 + (-γ̃ + iω) F + k F²,   F(0) = 0
//! ```
//!
//! valid whenever the kernel is a single exponential.

use super::{CoefficientKind, CoefficientSolution, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::scalar::{cx, is_finite, Cx, Real};

pub fn solve_riccati<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
    kind: CoefficientKind,
) -> Result<CoefficientSolution<T>> {
    kernel.validate()?;
    let p = kernel.ou_form().ok_or(Error::NotOuForm(kernel.name()))?;
    let source = cx(p.peak(), T::zero());
    let linear = cx(-p.memory_rate, omega);
    let quad: T = kind.quadratic();
    let rhs = |f: Cx<T>| source + linear * f + f * f * quad;

    let h = grid.step;
    let (half, sixth) = (h * T::lit(0.5), h / T::lit(6.0));
    let mut values = Vec::with_capacity(grid.len());
    let mut f = cx(T::zero(), T::zero());
    values.push(f);
    for n in 0..grid.count {
        let k1 = rhs(f);
        let k2 = rhs(f + k1 * half);
        let k3 = rhs(f + k2 * half);
        let k4 = rhs(f + k3 * h);
        f += (k1 + (k2 + k3) * T::lit(2.0) + k4) * sixth;
        if !is_finite(f) {
            return Err(Error::NonFinite { context: "riccati", time: grid.time(n + 1).as_f64() });
        }
        values.push(f);
    }
    Ok(CoefficientSolution::from_values(grid, values, kind))
}

/// Qubit coefficient `F(t)`.
pub fn solve_riccati_f<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
) -> Result<CoefficientSolution<T>> {
    solve_riccati(kernel, omega, grid, CoefficientKind::TwoLevelF)
}

/// Λ-atom coefficient `Q(t)`.
pub fn solve_riccati_q<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
) -> Result<CoefficientSolution<T>> {
    solve_riccati(kernel, omega, grid, CoefficientKind::ThreeLevelQ)
}
