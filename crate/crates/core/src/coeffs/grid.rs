use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Uniform time grid `t_n = n·step`, `n = 0..=count`, in units of 1/ω.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<T> {
    pub step: T,
    pub count: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(step: T, count: usize) -> Result<Self> {
        if !(step > T::zero()) || !step.is_finite() {
            return Err(invalid("dt", format!("must be finite and > 0, got {step}")));
        }
        if count < 1 {
            return Err(invalid("count", "grid needs at least one step"));
        }
        Ok(Self { step, count })
    }

    /// Grid of step `dt` whose last node is the closest node to `horizon`.
    pub fn with_horizon(dt: T, horizon: T) -> Result<Self> {
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(invalid("horizon", format!("must be finite and > 0, got {horizon}")));
        }
        if !(dt > T::zero()) {
            return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        let count = (horizon / dt).round().to_usize().unwrap_or(0).max(1);
        Self::new(dt, count)
    }

    #[inline]
    pub fn time(&self, n: usize) -> T {
        self.step * T::from_usize_lossy(n)
    }

    #[inline]
    pub fn horizon(&self) -> T {
        self.time(self.count)
    }

    /// Number of nodes, `count + 1`.
    #[inline]
    pub fn len(&self) -> usize {
        self.count + 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.len()).map(move |n| self.time(n))
    }

    /// Every `stride`-th node of this grid.
    pub fn coarsen(&self, stride: usize) -> Result<Self> {
        if stride == 0 || !self.count.is_multiple_of(stride) {
            return Err(invalid("stride", format!("{stride} does not divide {}", self.count)));
        }
        Self::new(self.step * T::from_usize_lossy(stride), self.count / stride)
    }

    /// Whether `other` has the same horizon and a step that is an integer
    /// multiple of this one.
    pub fn stride_to(&self, other: &TimeGrid<T>) -> Option<usize> {
        if other.count == 0 || !self.count.is_multiple_of(other.count) {
            return None;
        }
        let stride = self.count / other.count;
        let rel = (other.step - self.step * T::from_usize_lossy(stride)).abs() / other.step;
        (rel < T::lit(1e-9)).then_some(stride)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_rounding() {
        let g = TimeGrid::with_horizon(1e-3f64, 8.0).unwrap();
        assert_eq!(g.count, 8000);
        assert_eq!(g.len(), 8001);
        assert!((g.horizon() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(-1e-3, 10).is_err());
        assert!(TimeGrid::new(1e-3, 0).is_err());
        assert!(TimeGrid::with_horizon(1e-3, -1.0).is_err());
    }

    #[test]
    fn coarsening() {
        let g = TimeGrid::new(1e-3, 8000).unwrap();
        let c = g.coarsen(10).unwrap();
        assert_eq!(c.count, 800);
        assert_eq!(g.stride_to(&c), Some(10));
        assert!(g.coarsen(7).is_err());
        assert_eq!(g.stride_to(&TimeGrid::new(2e-3, 800).unwrap()), None);
    }
}
