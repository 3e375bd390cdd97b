//! Near-identity pairs from entropy pigeonholing, and the endgame estimates.

mod distance;
mod endgame;
mod kappa;
mod search;

pub use distance::{ck_distance_to_identity, CkDistance, NearIdentityMap};
pub use endgame::{endgame_estimates, EndgameReport};
pub use kappa::kappa_m_solve;
pub use search::{
    search_near_identity_pairs, BucketStats, MSearch, NearIdentityParams, NearIdentityReport, PairContext, Thresholds,
};
