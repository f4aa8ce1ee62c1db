//! Exact finite-stage machinery for generalized microscopic sets: numerals
//! with arbitrary-precision exponents, power budget families, interval sets,
//! an exact cover solver, the lazy set constructions, the cover-transforming
//! procedures and the adversary witnesses that defeat candidate covers.

pub mod budget;
pub mod construct;
pub mod cover;
pub mod error;
pub mod interval;
pub mod numeral;
pub mod procedures;
pub(crate) mod serde_big;
pub mod tower;
pub mod witness;

pub use budget::{budget_length, partial_sum_check, shift_family, BudgetList, EpsilonSpec, FamilyKind, PowerFamily};
pub use cover::{
    counting_certificate, greedy_cover, solve_feasible, validate_cover, validate_labeled, Certificate, CoverProblem,
    CoverVerdict, LabeledCover,
};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use numeral::{Numeral, Run};
