//! Stationary measures, Lyapunov exponents and entropies.

mod asymptotic;
mod boundary_entropy;
mod dirac;
mod gap;
mod grid;
mod lyapunov;
mod stationary;

pub use asymptotic::{asymptotic_entropy, AsymptoticEntropy, AsymptoticParams, SbmCheck};
pub use boundary_entropy::{boundary_entropy, boundary_entropy_with, rn_derivative, BoundaryEntropy, BoundaryEntropyParams};
pub use dirac::{dirac_convergence_probe, DiracCurve};
pub use gap::{entropy_gap_report, EntropyGapParams, EntropyReport};
pub use grid::{lifted_images, GridMeasure};
pub use lyapunov::{lyapunov_exponent, LyapunovEstimate, LyapunovParams};
pub use stationary::{
    estimate_stationary_measure, stationarity_residual, StationaryEstimate, StationaryMethod, StationaryParams,
};
