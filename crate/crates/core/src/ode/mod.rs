//! Möbius normalisation of near-identity maps and reconstruction from the Schwarzian.
//!
//! A map `φ` on an interval is written as `φ(x_m + y) = A(x_m + k(y))` with `A`
//! the Möbius map sharing the 2-jet of `φ` at `x_m`. Then `S k = S φ(x_m + ·)`
//! and `k = u / v` for the solutions of `w'' + (S k / 2) w = 0`.

mod convergence;
mod normalize;
mod solve;

pub use convergence::{c3_convergence_check, C3Report, C3Row, Verdict};
pub use normalize::{mobius_normalize, MobiusJet, Normalization};
pub use solve::{solve_and_reconstruct, Reconstruction};
