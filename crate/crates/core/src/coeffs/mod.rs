//! O-operator coefficients `F(t)` (qubit) and `Q(t)` (Λ atom).

mod grid;
mod riccati;
mod solution;
mod volterra;

pub use grid::TimeGrid;
pub use riccati::{solve_riccati, solve_riccati_f, solve_riccati_q};
pub use solution::{CoefficientKind, CoefficientSolution};
pub use volterra::{solve_coefficient, solve_volterra, solve_volterra_f};
