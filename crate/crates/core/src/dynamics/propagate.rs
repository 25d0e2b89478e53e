//! RK4 propagation of the exact master equations.
//!
//! Qubit, in the frame of `H_sys = (ω/2)σ_z`:
//!
//! ```text
//! ρ̇ = -i[(ω + F_I)/2 σ_z, ρ] + F_R (2σ₋ρσ₊ - σ₊σ₋ρ - ρσ₊σ₋)
//! ```
//!
//! Λ atom, rotating with `H_sys`:
//!
//! ```text
//! ρ̇ = Q [L ρ, L†] + Q* [L, ρ L†],   L = |2⟩⟨1| + |3⟩⟨1|
//! ```
//!
//! Coefficients are interpolated linearly between grid nodes.

use log::warn;

use super::state::DensityMatrix;
use crate::coeffs::{CoefficientKind, CoefficientSolution, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::scalar::{cx, is_finite, Cx, Real};

/// Density matrices sampled on a grid.
#[derive(Debug, Clone)]
pub struct DensityTrace<T> {
    pub grid: TimeGrid<T>,
    pub states: Vec<DensityMatrix<T>>,
    /// Smallest eigenvalue seen over the whole trace; positivity is monitored,
    /// not enforced.
    pub min_eigenvalue: T,
}

impl<T: Real> DensityTrace<T> {
    pub fn max_trace_drift(&self) -> T {
        self.states.iter().map(|r| (r.trace() - cx(T::one(), T::zero())).norm()).fold(T::zero(), T::max)
    }

    pub fn max_hermiticity_deviation(&self) -> T {
        self.states.iter().map(|r| r.hermiticity_deviation()).fold(T::zero(), T::max)
    }
}

fn qubit_rhs<T: Real>(coeff: Cx<T>, omega: T, rho: &[Cx<T>], out: &mut [Cx<T>]) {
    let (fr, w) = (coeff.re, omega + coeff.im);
    let rot = cx(-fr, -w);
    out[0] = rho[0] * (T::lit(-2.0) * fr);
    out[3] = rho[0] * (T::lit(2.0) * fr);
    out[1] = rho[1] * rot;
    out[2] = rho[2] * rot.conj();
}

fn lambda_rhs<T: Real>(q: Cx<T>, rho: &[Cx<T>], out: &mut [Cx<T>]) {
    let gain = rho[0] * (q.re * T::lit(2.0));
    let two = T::lit(2.0);
    for j in 0..3 {
        for k in 0..3 {
            let mut d = cx(T::zero(), T::zero());
            if j > 0 && k > 0 {
                d += gain;
            }
            if j == 0 {
                d -= q * rho[k] * two;
            }
            if k == 0 {
                d -= q.conj() * rho[3 * j] * two;
            }
            out[3 * j + k] = d;
        }
    }
}

fn output_stride<T: Real>(coeff: &CoefficientSolution<T>, output: &TimeGrid<T>) -> Result<usize> {
    coeff.grid.stride_to(output).ok_or_else(|| {
        Error::GridMismatch(format!(
            "output grid (dt={}, n={}) is not a coarsening of the coefficient grid (dt={}, n={})",
            output.step, output.count, coeff.grid.step, coeff.grid.count
        ))
    })
}

fn rk4_propagate<T: Real>(
    coeff: &CoefficientSolution<T>,
    rho0: &DensityMatrix<T>,
    stride: usize,
    output: TimeGrid<T>,
    rhs: impl Fn(Cx<T>, &[Cx<T>], &mut [Cx<T>]),
) -> Result<DensityTrace<T>> {
    let n2 = rho0.entries().len();
    let h = coeff.grid.step;
    let (half, sixth) = (h * T::lit(0.5), h / T::lit(6.0));
    let zero = cx(T::zero(), T::zero());
    let mut rho = rho0.entries().to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![zero; n2], vec![zero; n2], vec![zero; n2], vec![zero; n2], vec![zero; n2]);

    let mut states = Vec::with_capacity(output.len());
    let mut min_eig = rho0.min_eigenvalue();
    states.push(rho0.clone());
    for n in 0..coeff.grid.count {
        let c0 = coeff.values[n];
        let c1 = coeff.values[n + 1];
        let cm = (c0 + c1) * T::lit(0.5);
        rhs(c0, &rho, &mut k1);
        for i in 0..n2 {
            tmp[i] = rho[i] + k1[i] * half;
        }
        rhs(cm, &tmp, &mut k2);
        for i in 0..n2 {
            tmp[i] = rho[i] + k2[i] * half;
        }
        rhs(cm, &tmp, &mut k3);
        for i in 0..n2 {
            tmp[i] = rho[i] + k3[i] * h;
        }
        rhs(c1, &tmp, &mut k4);
        for i in 0..n2 {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth;
        }
        if (n + 1) % stride == 0 {
            if !rho.iter().all(|z| is_finite(*z)) {
                return Err(Error::NonFinite { context: "master equation", time: coeff.grid.time(n + 1).as_f64() });
            }
            let state = DensityMatrix::from_entries_unchecked(rho0.dim(), rho.clone());
            min_eig = min_eig.min(state.min_eigenvalue());
            states.push(state);
        }
    }
    if min_eig < T::lit(-1e-6) {
        warn!("density matrix lost positivity: smallest eigenvalue {min_eig}");
    }
    Ok(DensityTrace { grid: output, states, min_eigenvalue: min_eig })
}

fn check(coeff: &CoefficientSolution<impl Real>, rho_dim: usize, kind: CoefficientKind) -> Result<()> {
    if coeff.kind != kind {
        return Err(invalid("coeff", format!("expected a {kind:?} coefficient, got {:?}", coeff.kind)));
    }
    if rho_dim != kind.dim() {
        return Err(invalid("rho0", format!("expected dimension {}, got {rho_dim}", kind.dim())));
    }
    Ok(())
}

/// Qubit master equation, sampled on every coefficient node.
pub fn propagate_qubit<T: Real>(
    coeff: &CoefficientSolution<T>,
    rho0: &DensityMatrix<T>,
    omega: T,
) -> Result<DensityTrace<T>> {
    propagate_qubit_on(coeff, rho0, omega, coeff.grid)
}

/// Qubit master equation sampled on `output`, which must be a coarsening of
/// the coefficient grid with the same horizon.
pub fn propagate_qubit_on<T: Real>(
    coeff: &CoefficientSolution<T>,
    rho0: &DensityMatrix<T>,
    omega: T,
    output: TimeGrid<T>,
) -> Result<DensityTrace<T>> {
    check(coeff, rho0.dim(), CoefficientKind::TwoLevelF)?;
    let stride = output_stride(coeff, &output)?;
    rk4_propagate(coeff, rho0, stride, output, |c, r, o| qubit_rhs(c, omega, r, o))
}

/// Λ-atom master equation in the frame rotating with `H_sys`.
pub fn propagate_lambda<T: Real>(coeff: &CoefficientSolution<T>, rho0: &DensityMatrix<T>) -> Result<DensityTrace<T>> {
    propagate_lambda_on(coeff, rho0, coeff.grid)
}

pub fn propagate_lambda_on<T: Real>(
    coeff: &CoefficientSolution<T>,
    rho0: &DensityMatrix<T>,
    output: TimeGrid<T>,
) -> Result<DensityTrace<T>> {
    check(coeff, rho0.dim(), CoefficientKind::ThreeLevelQ)?;
    let stride = output_stride(coeff, &output)?;
    rk4_propagate(coeff, rho0, stride, output, lambda_rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{solve_riccati_f, solve_riccati_q};
    use crate::dynamics::PureState;
    use crate::kernels::{KernelSpec, OuParams};

    fn kernel() -> KernelSpec<f64> {
        KernelSpec::MarkovDephasedOu { beta: OuParams::new(1.0, 0.1).unwrap(), dephasing_strength: 2.0 }
    }

    #[test]
    fn qubit_ground_state_is_stationary() {
        let grid = TimeGrid::with_horizon(1e-3, 8.0).unwrap();
        let f = solve_riccati_f(&kernel(), 1.0, grid).unwrap();
        let rho0 = DensityMatrix::from_pure(&PureState::ground());
        let tr = propagate_qubit(&f, &rho0, 1.0).unwrap();
        assert!(tr.states.iter().all(|r| r.max_abs_diff(&rho0) <= 1e-9));
    }

    #[test]
    fn lambda_dark_state_is_stationary_and_excited_decays() {
        let grid = TimeGrid::with_horizon(1e-3, 8.0).unwrap();
        let q = solve_riccati_q(&kernel(), 1.0, grid).unwrap();
        let dark = DensityMatrix::from_pure(&PureState::basis(3, 1));
        let tr = propagate_lambda(&q, &dark).unwrap();
        assert!(tr.states.iter().all(|r| r.max_abs_diff(&dark) <= 1e-9));

        let up = DensityMatrix::from_pure(&PureState::basis(3, 0));
        let tr = propagate_lambda(&q, &up).unwrap();
        for (n, r) in tr.states.iter().enumerate() {
            let expected = (-4.0 * q.real_integral[n]).exp();
            assert!((r.get(0, 0).re - expected).abs() <= 1e-6);
        }
        assert!(tr.max_trace_drift() <= 1e-9 && tr.max_hermiticity_deviation() <= 1e-9);
    }

    #[test]
    fn output_grid_must_be_a_coarsening() {
        let grid = TimeGrid::new(1e-2, 100).unwrap();
        let f = solve_riccati_f(&kernel(), 1.0, grid).unwrap();
        let rho0 = DensityMatrix::from_pure(&PureState::bloch(1.0, 0.0));
        let ok = propagate_qubit_on(&f, &rho0, 1.0, grid.coarsen(4).unwrap()).unwrap();
        let full = propagate_qubit(&f, &rho0, 1.0).unwrap();
        assert_eq!(ok.states.len(), 26);
        assert_eq!(ok.states[25], full.states[100]);
        let bad = TimeGrid::new(1e-2, 50).unwrap();
        assert!(matches!(propagate_qubit_on(&f, &rho0, 1.0, bad), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn wrong_kind_or_dimension_is_rejected() {
        let grid = TimeGrid::new(1e-2, 10).unwrap();
        let f = solve_riccati_f(&kernel(), 1.0, grid).unwrap();
        let rho3 = DensityMatrix::from_pure(&PureState::basis(3, 0));
        assert!(propagate_lambda(&f, &rho3).is_err());
        assert!(propagate_qubit(&f, &rho3, 1.0).is_err());
    }
}
