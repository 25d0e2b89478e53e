//! Monte-Carlo oracle: linear quantum-state-diffusion trajectories.

mod ensemble;
mod noise;

pub use ensemble::{coarsen_for_trajectories, run_qsd_ensemble, EnsembleResult};
pub use noise::{sample_noise_paths, CovarianceFactor, EnsembleSpec, NoisePath, MAX_NOISE_NODES};
