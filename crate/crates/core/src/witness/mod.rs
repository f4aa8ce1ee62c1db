//! Adversary strategies and condition checkers.

pub mod chain;
pub mod demo;
pub mod nano;
pub mod pico;
pub mod spacing;

pub use chain::{verify_chain, ChainStep, ChainWitness, WitnessOutcome};
pub use demo::{non_ideal_demo, DemoParams, DemoReport, NanoDemoParams, PicoDemoParams};
pub use nano::{nano_candidates, nano_witness_chain, Candidate};
pub use pico::{covers_point, pico_candidates, pico_witness_chain, DescentClaim, PicoWitness};
pub use spacing::{spacing_condition_check, SpacingReport, ThirdCheck};
