//! General-kernel construction of the O-operator coefficient
//!
//! ```text
//! F(t) = ∫₀ᵗ ds G(t-s) f(t,s),   ∂_t f(t,s) = [iω + k F(t)] f(t,s),   f(s,s) = 1
//! ```
//!
//! using `f(t,s) = E(t)/E(s)` with `E(t) = exp ∫₀ᵗ [iω + k F(u)] du`. The
//! exponent `log E` is kept explicitly; the quadrature weights `E(t_n)/E(s_j)`
//! are carried forward by one complex multiply per step, so a step costs
//! O(n) multiplies and no transcendental calls.

use super::{CoefficientKind, CoefficientSolution, TimeGrid};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::scalar::{cx, is_finite, Cx, Real};

pub fn solve_volterra<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
    kind: CoefficientKind,
) -> Result<CoefficientSolution<T>> {
    kernel.validate()?;
    let h = grid.step;
    let half = h * T::lit(0.5);
    let quad: T = kind.quadratic();
    let i_omega = cx(T::zero(), omega);
    let zero = cx(T::zero(), T::zero());

    // G(t_n - s_j) depends only on n - j on a uniform grid.
    let lag: Vec<T> = (0..grid.len()).map(|m| kernel.eval(grid.time(m))).collect();

    let mut values = Vec::with_capacity(grid.len());
    let mut log_e = Vec::with_capacity(grid.len());
    values.push(zero);
    log_e.push(zero);
    // ratio[j] = E(t_n) / E(s_j) for the current n.
    let mut ratio: Vec<Cx<T>> = Vec::with_capacity(grid.len());
    ratio.push(cx(T::one(), T::zero()));

    for n in 0..grid.count {
        let f_n = values[n];
        // Trapezoid over s ∈ [0, t_{n+1}] expressed through E(t_n)/E(s_j);
        // the j = n+1 endpoint contributes G(0)·1 separately.
        let mut partial = zero;
        for (j, r) in ratio.iter().enumerate() {
            let w = if j == 0 { half } else { h };
            partial += *r * (lag[n + 1 - j] * w);
        }
        let endpoint = cx(lag[0] * half, T::zero());
        let a_n = i_omega + f_n * quad;

        let step_log = |f_next: Cx<T>| (a_n + i_omega + f_next * quad) * half;
        let mut f_next = f_n;
        for _ in 0..2 {
            f_next = step_log(f_next).exp() * partial + endpoint;
        }
        let growth = step_log(f_next).exp();
        if !is_finite(f_next) || !is_finite(growth) {
            return Err(Error::NonFinite { context: "volterra", time: grid.time(n + 1).as_f64() });
        }
        log_e.push(log_e[n] + step_log(f_next));
        values.push(f_next);
        for r in ratio.iter_mut() {
            *r *= growth;
        }
        ratio.push(cx(T::one(), T::zero()));
    }
    debug_assert_eq!(log_e.len(), grid.len());
    Ok(CoefficientSolution::from_values(grid, values, kind))
}

/// Qubit coefficient `F(t)` for an arbitrary kernel.
pub fn solve_volterra_f<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
) -> Result<CoefficientSolution<T>> {
    solve_volterra(kernel, omega, grid, CoefficientKind::TwoLevelF)
}

/// Riccati when the kernel admits it, Volterra otherwise.
pub fn solve_coefficient<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    grid: TimeGrid<T>,
    kind: CoefficientKind,
) -> Result<CoefficientSolution<T>> {
    if kernel.ou_form().is_some() {
        super::solve_riccati(kernel, omega, grid, kind)
    } else {
        solve_volterra(kernel, omega, grid, kind)
    }
}
