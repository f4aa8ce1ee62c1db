//! Lazy closed-form constructions.

pub mod nano;
pub mod pico;
pub mod rational;
pub mod spacing;

pub use nano::{gap_inequality, nano_f, GapCheck, NanoNode, NanoScheme, NanoStage, NodeRef, PlacementMode};
pub use pico::{g_rule, h, k_n, node_exponent, pico_point, PicoNode, PicoParams, PicoRef, PicoScheme, PicoStage};
pub use rational::{rational, rational_cover_stage, GdeltaRationalScheme, RationalInterval};
pub use spacing::{f_set, spacing_place, ScaffoldRef, SpacingPlacement, SpacingScheme};
