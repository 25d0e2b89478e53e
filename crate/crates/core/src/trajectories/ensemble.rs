//! Linear QSD ensemble
//!
//! ```text
//! ∂_t|ψ⟩ = [-iH_sys + L z*_t - L†Ō(t)] |ψ⟩,   Ō(t) = C(t) L
//! ```
//!
//! where `C` is `F` (qubit, `L = σ₋`) or `Q` (Λ atom, `L = L_Λ`). For both systems
//! `L` maps the upper level (index 0) onto every lower level with unit
//! amplitude, hence `L†L = k P₀` with `k` the coefficient's quadratic factor.
//! The mean of `|ψ⟩⟨ψ|` over unnormalized paths is `ρ_sys`.

use rayon::prelude::*;

use super::noise::{CovarianceFactor, EnsembleSpec, NoisePath};
use crate::coeffs::{CoefficientSolution, TimeGrid};
use crate::dynamics::{DensityMatrix, DensityTrace, FidelityTrace, PureState};
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::scalar::{cx, is_finite, Cx, Real};

/// Paths per accumulation block. Blocks are reduced in index order, so the
/// result does not depend on how many threads processed them.
const BLOCK: usize = 64;

#[derive(Debug, Clone)]
pub struct EnsembleResult<T> {
    /// Ensemble-averaged `|ψ⟩⟨ψ|` in the frame of the QSD equation.
    pub density: DensityTrace<T>,
    /// Mean of `|⟨ψ₀(t)|ψ(t)⟩|²` where `ψ₀(t)` is the freely evolved initial
    /// state, i.e. the fidelity in the frame rotating with `H_sys`.
    pub fidelity: FidelityTrace<T>,
    pub fidelity_std_err: Vec<T>,
    /// Standard error of the trace estimate `M[⟨ψ|ψ⟩]`.
    pub trace_std_err: Vec<T>,
    pub count: usize,
}

#[derive(Clone)]
struct Accum<T> {
    rho: Vec<Cx<T>>,
    fid: Vec<T>,
    fid_sq: Vec<T>,
    norm: Vec<T>,
    norm_sq: Vec<T>,
}

impl<T: Real> Accum<T> {
    fn new(nodes: usize, dim: usize) -> Self {
        let z = T::zero();
        Self {
            rho: vec![cx(z, z); nodes * dim * dim],
            fid: vec![z; nodes],
            fid_sq: vec![z; nodes],
            norm: vec![z; nodes],
            norm_sq: vec![z; nodes],
        }
    }

    fn add(&mut self, other: &Self) {
        for (a, b) in self.rho.iter_mut().zip(&other.rho) {
            *a += *b;
        }
        for (dst, src) in [
            (&mut self.fid, &other.fid),
            (&mut self.fid_sq, &other.fid_sq),
            (&mut self.norm, &other.norm),
            (&mut self.norm_sq, &other.norm_sq),
        ] {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += *b;
            }
        }
    }
}

struct Propagator<'a, T> {
    coeff: &'a CoefficientSolution<T>,
    grid: TimeGrid<T>,
    /// Diagonal of `-i H_sys`.
    free: Vec<Cx<T>>,
    quad: T,
}

impl<T: Real> Propagator<'_, T> {
    fn rhs(&self, c: Cx<T>, z: Cx<T>, psi: &[Cx<T>], out: &mut [Cx<T>]) {
        out[0] = (self.free[0] - c * self.quad) * psi[0];
        for j in 1..psi.len() {
            out[j] = self.free[j] * psi[j] + z * psi[0];
        }
    }

    /// Visits `ψ(t_n)` for every node of the trajectory grid.
    fn run(&self, psi0: &[Cx<T>], noise: &NoisePath<T>, mut visit: impl FnMut(usize, &[Cx<T>])) -> Result<()> {
        let d = psi0.len();
        let h = self.grid.step;
        let (half, sixth) = (h * T::lit(0.5), h / T::lit(6.0));
        let zero = cx(T::zero(), T::zero());
        let mut psi = psi0.to_vec();
        let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d], vec![zero; d]);
        visit(0, &psi);
        for n in 0..self.grid.count {
            let t = self.grid.time(n);
            let (c0, cm, c1) = (
                self.coeff.value_at(t),
                self.coeff.value_at(t + half),
                self.coeff.value_at(t + h),
            );
            let (z0, z1) = (noise.samples[n], noise.samples[n + 1]);
            let zm = (z0 + z1) * T::lit(0.5);
            self.rhs(c0, z0, &psi, &mut k1);
            for i in 0..d {
                tmp[i] = psi[i] + k1[i] * half;
            }
            self.rhs(cm, zm, &tmp, &mut k2);
            for i in 0..d {
                tmp[i] = psi[i] + k2[i] * half;
            }
            self.rhs(cm, zm, &tmp, &mut k3);
            for i in 0..d {
                tmp[i] = psi[i] + k3[i] * h;
            }
            self.rhs(c1, z1, &tmp, &mut k4);
            for i in 0..d {
                psi[i] += (k1[i] + (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * sixth;
            }
            if !psi.iter().all(|z| is_finite(*z)) {
                return Err(Error::NonFinite { context: "qsd trajectory", time: self.grid.time(n + 1).as_f64() });
            }
            visit(n + 1, &psi);
        }
        Ok(())
    }
}

/// Ensemble average of the linear QSD equation driven by noise with
/// correlation `kernel`, closed by the coefficient `coeff`.
///
/// `grid` is the trajectory grid: the coefficient grid itself or a uniform
/// coarsening of it.
pub fn run_qsd_ensemble<T: Real>(
    kernel: &KernelSpec<T>,
    omega: T,
    coeff: &CoefficientSolution<T>,
    psi0: &PureState<T>,
    grid: TimeGrid<T>,
    ensemble: EnsembleSpec,
) -> Result<EnsembleResult<T>> {
    let dim = psi0.dim();
    if coeff.kind.dim() != dim {
        return Err(invalid("initial", format!("{:?} coefficient needs a {}-level state", coeff.kind, coeff.kind.dim())));
    }
    if ensemble.count == 0 {
        return Err(invalid("count", "ensemble needs at least one trajectory"));
    }
    coeff.grid.stride_to(&grid).ok_or_else(|| {
        Error::GridMismatch(format!(
            "trajectory grid (dt={}, n={}) is not a coarsening of the coefficient grid (dt={}, n={})",
            grid.step, grid.count, coeff.grid.step, coeff.grid.count
        ))
    })?;
    let factor = CovarianceFactor::new(kernel, grid)?;

    let half_omega = omega * T::lit(0.5);
    let free: Vec<Cx<T>> = (0..dim).map(|i| cx(T::zero(), if i == 0 { -half_omega } else { half_omega })).collect();
    let prop = Propagator { coeff, grid, free, quad: coeff.kind.quadratic() };
    let references: Vec<PureState<T>> = grid.times().map(|t| psi0.free_evolved(omega, t)).collect();
    let nodes = grid.len();

    let blocks = ensemble.count.div_ceil(BLOCK);
    let partials: Vec<Result<Accum<T>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Accum::new(nodes, dim);
            let end = ((b + 1) * BLOCK).min(ensemble.count);
            for index in b * BLOCK..end {
                let noise = factor.sample(ensemble.seed, index as u64);
                prop.run(psi0.amplitudes(), &noise, |n, psi| {
                    let base = n * dim * dim;
                    for i in 0..dim {
                        for j in i..dim {
                            acc.rho[base + i * dim + j] += psi[i] * psi[j].conj();
                        }
                    }
                    let f = references[n].overlap_sqr(psi);
                    let nrm = psi.iter().fold(T::zero(), |s, a| s + a.norm_sqr());
                    acc.fid[n] += f;
                    acc.fid_sq[n] += f * f;
                    acc.norm[n] += nrm;
                    acc.norm_sq[n] += nrm * nrm;
                })?;
            }
            Ok(acc)
        })
        .collect();

    let mut total = Accum::new(nodes, dim);
    for p in partials {
        total.add(&p?);
    }

    let count = T::from_usize_lossy(ensemble.count);
    let std_err = |sum: T, sum_sq: T| {
        if ensemble.count < 2 {
            return T::zero();
        }
        let mean = sum / count;
        let var = ((sum_sq - sum * mean) / (count - T::one())).max(T::zero());
        (var / count).sqrt()
    };
    let mut states = Vec::with_capacity(nodes);
    let mut min_eig = T::infinity();
    for n in 0..nodes {
        let base = n * dim * dim;
        let mut entries = vec![cx(T::zero(), T::zero()); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = total.rho[base + i * dim + j] / count;
                entries[i * dim + j] = v;
                entries[j * dim + i] = v.conj();
            }
        }
        let state = DensityMatrix::from_entries_unchecked(dim, entries);
        min_eig = min_eig.min(state.min_eigenvalue());
        states.push(state);
    }
    Ok(EnsembleResult {
        density: DensityTrace { grid, states, min_eigenvalue: min_eig },
        fidelity: FidelityTrace::from_fn(grid, |n| total.fid[n] / count),
        fidelity_std_err: (0..nodes).map(|n| std_err(total.fid[n], total.fid_sq[n])).collect(),
        trace_std_err: (0..nodes).map(|n| std_err(total.norm[n], total.norm_sq[n])).collect(),
        count: ensemble.count,
    })
}

/// Coarsest-needed trajectory grid: the smallest stride that divides the
/// coefficient grid and leaves at most `max_nodes` nodes.
pub fn coarsen_for_trajectories<T: Real>(grid: TimeGrid<T>, max_nodes: usize) -> Result<TimeGrid<T>> {
    let mut stride = 1;
    while grid.count / stride + 1 > max_nodes || !grid.count.is_multiple_of(stride) {
        stride += 1;
        if stride > grid.count {
            return Err(invalid("grid", "cannot coarsen coefficient grid to the trajectory limit"));
        }
    }
    grid.coarsen(stride)
}
