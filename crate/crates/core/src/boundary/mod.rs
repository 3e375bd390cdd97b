//! Semi-conjugation, proximality, minimal sets and finite quotients.

mod minimal;
mod proximal;
mod quotient;
mod semiconj;

pub use minimal::{minimal_set_classify, thin_arcs, Gap, GapCriterion, MinimalSet};
pub use proximal::{proximality_test, test_arcs, ArcWitness, ProximalityOutcome};
pub use quotient::{finite_quotient_detect, FiniteQuotient, QuotientCandidate, QuotientCoordinates};
pub use semiconj::{semiconjugation_map, SemiConjugation};
