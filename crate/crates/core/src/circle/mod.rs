//! Circle arithmetic, third-order jets and the generator family.
//!
//! All public coordinates live on `[0, 1)`. Möbius matrices act on the
//! projective line through the angle chart `x -> (sin πx, cos πx)`.

mod chart;
mod conjugator;
mod distortion;
mod generator;
mod jet;
mod mobius;
mod point;

pub use chart::LinearChart;
pub use conjugator::TrigLift;
pub use distortion::{
    affine_distortion, affine_distortion_fn, holder_seminorm, sup_log_derivative, sup_projective_schwarzian,
    sup_schwarzian, DEFAULT_GRID,
};
pub use generator::{Alphabet, CircleMap, Generator, GeneratorSpec, Letter, Word};
pub use jet::{log_and_schwarzian, Jet3};
pub use mobius::Mat2;
pub use point::{circle_dist, wrap, CircleArc, CirclePoint};
