//! Pure states and density matrices of the qubit (d = 2) and Λ atom (d = 3).
//!
//! Basis order: qubit `[|1⟩, |0⟩]` (excited first); Λ atom `[|1⟩, |2⟩, |3⟩]`.
//! In both systems index 0 is the upper level, so `H_sys = (ω/2)·diag(1, -1, ..)`.

use crate::error::{invalid, Result};
use crate::scalar::{cx, Cx, Real};

const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T> {
    amplitudes: Vec<Cx<T>>,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: Vec<Cx<T>>) -> Result<Self> {
        if !(2..=3).contains(&amplitudes.len()) {
            return Err(invalid("initial", format!("dimension must be 2 or 3, got {}", amplitudes.len())));
        }
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y);
        let tol = T::lit(NORM_TOL).max(T::epsilon() * T::lit(16.0));
        if !((norm - T::one()).abs() <= tol) {
            return Err(invalid("initial", format!("state is not normalized (norm² = {norm})")));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<Cx<T>>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |x, y| x + y).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(invalid("initial", "amplitudes must not all vanish"));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    /// `μ|1⟩ + ν|0⟩`.
    pub fn qubit(mu: Cx<T>, nu: Cx<T>) -> Result<Self> {
        Self::new(vec![mu, nu])
    }

    /// `μ = cos(θ/2)`, `ν = sin(θ/2) e^{iφ}`.
    pub fn bloch(theta: T, phi: T) -> Self {
        let h = theta * T::lit(0.5);
        Self { amplitudes: vec![cx(h.cos(), T::zero()), Cx::from_polar(h.sin(), phi)] }
    }

    /// `a|1⟩ + b|2⟩ + c|3⟩`.
    pub fn lambda(a: Cx<T>, b: Cx<T>, c: Cx<T>) -> Result<Self> {
        Self::new(vec![a, b, c])
    }

    /// Basis state `index` of a `dim`-level system.
    pub fn basis(dim: usize, index: usize) -> Self {
        assert!((2..=3).contains(&dim) && index < dim);
        let mut amplitudes = vec![cx(T::zero(), T::zero()); dim];
        amplitudes[index] = cx(T::one(), T::zero());
        Self { amplitudes }
    }

    /// Qubit ground state `|0⟩`.
    pub fn ground() -> Self {
        Self::basis(2, 1)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Cx<T>] {
        &self.amplitudes
    }

    /// Population of the upper level, `|μ|²` or `|a|²`.
    pub fn upper_population(&self) -> T {
        self.amplitudes[0].norm_sqr()
    }

    /// State after free evolution under `H_sys` for time `t`.
    pub fn free_evolved(&self, omega: T, t: T) -> Self {
        let phase = omega * t * T::lit(0.5);
        let upper = Cx::from_polar(T::one(), -phase);
        let lower = Cx::from_polar(T::one(), phase);
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| if i == 0 { *a * upper } else { *a * lower })
            .collect();
        Self { amplitudes }
    }

    /// `|⟨self|ψ⟩|²`
    pub fn overlap_sqr(&self, psi: &[Cx<T>]) -> T {
        self.amplitudes
            .iter()
            .zip(psi)
            .fold(cx(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
            .norm_sqr()
    }
}

/// Row-major `d × d` complex density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T> {
    dim: usize,
    entries: Vec<Cx<T>>,
}

impl<T: Real> DensityMatrix<T> {
    /// Checks trace and Hermiticity to `1e-9`.
    pub fn new(dim: usize, entries: Vec<Cx<T>>) -> Result<Self> {
        if !(2..=3).contains(&dim) || entries.len() != dim * dim {
            return Err(invalid("rho0", format!("expected a 2x2 or 3x3 matrix, got {} entries", entries.len())));
        }
        let rho = Self { dim, entries };
        let tol = T::lit(1e-9);
        if rho.hermiticity_deviation() > tol {
            return Err(invalid("rho0", "matrix is not Hermitian"));
        }
        if (rho.trace().re - T::one()).abs() > tol {
            return Err(invalid("rho0", format!("trace is {}, expected 1", rho.trace().re)));
        }
        Ok(rho)
    }

    pub(crate) fn from_entries_unchecked(dim: usize, entries: Vec<Cx<T>>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        Self { dim, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, entries: vec![cx(T::zero(), T::zero()); dim * dim] }
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        let a = psi.amplitudes();
        let dim = a.len();
        let mut rho = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                rho.entries[i * dim + j] = a[i] * a[j].conj();
            }
        }
        rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Cx<T>] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Cx<T> {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.dim).fold(cx(T::zero(), T::zero()), |acc, i| acc + self.get(i, i))
    }

    /// Largest `|ρ_ij - ρ_ji*|`.
    pub fn hermiticity_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `⟨ψ|ρ|ψ⟩`, real part.
    pub fn expectation(&self, psi: &PureState<T>) -> T {
        let a = psi.amplitudes();
        let mut acc = cx(T::zero(), T::zero());
        for i in 0..self.dim {
            for j in 0..self.dim {
                acc += a[i].conj() * self.get(i, j) * a[j];
            }
        }
        acc.re
    }

    /// Largest elementwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> T {
        let h = T::lit(0.5);
        let herm = |i: usize, j: usize| (self.get(i, j) + self.get(j, i).conj()) * h;
        match self.dim {
            2 => {
                let (a, d, b) = (herm(0, 0).re, herm(1, 1).re, herm(0, 1));
                let mean = (a + d) * h;
                let rad = ((a - d) * (a - d) * T::lit(0.25) + b.norm_sqr()).sqrt();
                mean - rad
            }
            3 => {
                let m: Vec<Cx<T>> = (0..9).map(|k| herm(k / 3, k % 3)).collect();
                min_eig_hermitian3(&m)
            }
            _ => unreachable!("dimension validated on construction"),
        }
    }
}

/// Closed-form (trigonometric) smallest eigenvalue of a 3x3 Hermitian matrix.
fn min_eig_hermitian3<T: Real>(m: &[Cx<T>]) -> T {
    let third = T::lit(1.0 / 3.0);
    let off = m[1].norm_sqr() + m[2].norm_sqr() + m[5].norm_sqr();
    let q = (m[0].re + m[4].re + m[8].re) * third;
    let p2 = (m[0].re - q).powi(2) + (m[4].re - q).powi(2) + (m[8].re - q).powi(2) + off * T::lit(2.0);
    if p2 <= T::epsilon() * T::epsilon() {
        return q;
    }
    let p = (p2 / T::lit(6.0)).sqrt();
    let s = |k: usize| {
        let v = m[k] / p;
        if k.is_multiple_of(4) {
            v - cx(q / p, T::zero())
        } else {
            v
        }
    };
    let b: Vec<Cx<T>> = (0..9).map(s).collect();
    let det = b[0] * (b[4] * b[8] - b[5] * b[7]) - b[1] * (b[3] * b[8] - b[5] * b[6])
        + b[2] * (b[3] * b[7] - b[4] * b[6]);
    let r = (det.re * T::lit(0.5)).max(-T::one()).min(T::one());
    let phi = r.acos() * third;
    q + p * T::lit(2.0) * (phi + T::lit(2.0) * T::PI() * third).cos()
}
