//! Numerical laboratory for random walks on groups of circle diffeomorphisms.
//!
//! The crate is organised by subsystem:
//!
//! * [`circle`]: points, arcs, third-order jets, Möbius generators and their
//!   distortion seminorms.
//! * [`walk`]: step distributions, seeded walks, exact convolution powers.
//! * [`measure`]: stationary measures, Lyapunov exponent, boundary and
//!   asymptotic entropy.
//! * [`boundary`]: semi-conjugation, proximality, minimal sets and finite
//!   quotients.
//! * [`probes`]: random constants along a walk and distortion verification.
//! * [`near_identity`]: pigeonhole search for pairs of elements whose quotient
//!   is close to the identity.
//! * [`ode`]: Möbius normalisation and Schwarzian ODE reconstruction.
//! * [`experiment`]: config-driven scenarios used by the `circlelab` binary.

pub mod boundary;
pub mod circle;
pub mod error;
pub mod experiment;
pub mod measure;
pub mod near_identity;
pub mod ode;
pub mod probes;
pub mod rng;
pub mod walk;

pub use error::{Error, Result};
