//! Walk constants, distortion radii, and empirical distortion checks.

mod constants;
mod decay;
mod rho;
mod verify;

pub use constants::{walk_constants, ConstantsParams, ConstantsReport, ProbeContext};
pub use decay::{interval_mass_decay, MassDecay};
pub use rho::{rho_lower_bound, word_rho_lower_bound};
pub use verify::{
    verify_complex_distortion, verify_real_distortion, ComplexDistortionReport, RealDistortionReport, Violation,
};

use crate::circle::{wrap, CircleMap};

/// Image `(left, length)` of the arc `[a, a + length]`.
///
/// Tiny arcs use the midpoint derivative; long arcs are tracked through their complement.
pub(crate) fn push_arc<M: CircleMap + ?Sized>(g: &M, a: f64, length: f64) -> (f64, f64) {
    let na = g.apply(a);
    if length > 0.5 {
        let (_, c) = push_arc(g, a + length, 1.0 - length);
        (na, 1.0 - c)
    } else if length > 1e-6 {
        (na, wrap(g.apply(a + length) - na))
    } else {
        (na, length * g.derivative(a + 0.5 * length))
    }
}
