//! Step distributions, seeded walks and exact convolution powers.

mod canonical;
mod convolution;
mod step;
mod trajectory;

pub(crate) use canonical::int_mul;
pub use canonical::{canonical, integer_matrix, CanonicalElement, ElementKey, IntMat};
pub use convolution::{convolve_exact, convolution_powers, entropy_of, ConvolutionOptions, ExactMeasure};
pub use step::{MomentReport, StepDistribution};
pub use trajectory::{sample_walk, sample_walk_indexed, WalkTrajectory};
