//! Master-equation propagation and closed-form fidelities.

mod fidelity;
mod propagate;
mod state;

pub use fidelity::{average_fidelity_qubit, fidelity_lambda, fidelity_qubit, AverageVariant, FidelityTrace};
pub use propagate::{propagate_lambda, propagate_lambda_on, propagate_qubit, propagate_qubit_on, DensityTrace};
pub use state::{DensityMatrix, PureState};
