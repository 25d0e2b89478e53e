//! Complex Gaussian noise `z*_t` with `M[z_t z_s*] = G(t-s)` and `M[z_t z_s] = 0`.
//!
//! Paths are `z = Λ(x + iy)/√2` with `Λ` the lower Cholesky factor of the
//! covariance `C[n,m] = G(|t_n - t_m|)` and `x, y` independent standard
//! normal vectors. Each path draws from its own ChaCha stream selected by the
//! path index, so a path does not depend on which thread produced it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::coeffs::TimeGrid;
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::scalar::{cx, Cx, Real};

/// Largest grid (in nodes) the dense covariance factorization accepts.
pub const MAX_NOISE_NODES: usize = 4097;

const JITTER: f64 = 1e-12;

/// Trajectory count and master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub count: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(count: usize, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(invalid("count", "ensemble needs at least one trajectory"));
        }
        Ok(Self { count, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisePath<T> {
    pub grid: TimeGrid<T>,
    pub samples: Vec<Cx<T>>,
}

/// Packed lower-triangular factor of the noise covariance on one grid.
#[derive(Debug, Clone)]
pub struct CovarianceFactor<T> {
    grid: TimeGrid<T>,
    /// Row `n` occupies `rows[n(n+1)/2 .. n(n+1)/2 + n + 1]`.
    rows: Vec<T>,
}

impl<T: Real> CovarianceFactor<T> {
    pub fn new(kernel: &KernelSpec<T>, grid: TimeGrid<T>) -> Result<Self> {
        kernel.validate()?;
        let lag: Vec<T> = (0..grid.len()).map(|m| kernel.eval(grid.time(m))).collect();
        Self::from_lags(grid, &lag)
    }

    fn from_lags(grid: TimeGrid<T>, lag: &[T]) -> Result<Self> {
        let n = grid.len();
        if n > MAX_NOISE_NODES {
            return Err(invalid(
                "grid",
                format!("noise grid has {n} nodes; at most {MAX_NOISE_NODES} are supported"),
            ));
        }
        let g0 = lag[0];
        let jitter = g0 * T::lit(JITTER);
        // Pivots this far below zero are rounding noise of a semidefinite matrix.
        let floor = -g0 * T::lit(1e-8);
        let idx = |r: usize, c: usize| r * (r + 1) / 2 + c;
        let mut rows = vec![T::zero(); n * (n + 1) / 2];
        for r in 0..n {
            for c in 0..=r {
                let mut s = lag[r - c];
                if r == c {
                    s += jitter;
                }
                let (ro, co) = (idx(r, 0), idx(c, 0));
                for k in 0..c {
                    s -= rows[ro + k] * rows[co + k];
                }
                if r == c {
                    if s > T::zero() {
                        rows[ro + c] = s.sqrt();
                    } else if s >= floor {
                        rows[ro + c] = T::zero();
                    } else {
                        return Err(Error::NotPositiveSemidefinite { index: r, pivot: s.as_f64() });
                    }
                } else {
                    let d = rows[co + c];
                    rows[ro + c] = if d > T::zero() { s / d } else { T::zero() };
                }
            }
        }
        Ok(Self { grid, rows })
    }

    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    /// Path `index` of the ensemble seeded with `seed`.
    pub fn sample(&self, seed: u64, index: u64) -> NoisePath<T> {
        let n = self.grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let scale = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let w: Vec<Cx<T>> = (0..n)
            .map(|_| {
                let x: f64 = StandardNormal.sample(&mut rng);
                let y: f64 = StandardNormal.sample(&mut rng);
                cx(T::lit(x) * scale, T::lit(y) * scale)
            })
            .collect();
        let mut samples = Vec::with_capacity(n);
        let mut off = 0;
        for r in 0..n {
            let row = &self.rows[off..off + r + 1];
            let mut acc = cx(T::zero(), T::zero());
            for (l, wk) in row.iter().zip(&w) {
                acc += *wk * *l;
            }
            samples.push(acc);
            off += r + 1;
        }
        NoisePath { grid: self.grid, samples }
    }
}

/// `ensemble.count` independent paths on `grid`.
pub fn sample_noise_paths<T: Real>(
    kernel: &KernelSpec<T>,
    grid: TimeGrid<T>,
    ensemble: EnsembleSpec,
) -> Result<Vec<NoisePath<T>>> {
    use rayon::prelude::*;
    let factor = CovarianceFactor::new(kernel, grid)?;
    Ok((0..ensemble.count as u64).into_par_iter().map(|i| factor.sample(ensemble.seed, i)).collect())
}
