//! Deterministic compressed-sensing frames from combinatorial block designs.
//!
//! The pipeline: generate or load a pairwise balanced design ([`design`]),
//! splice complex Hadamard rows into its incidence structure to obtain a
//! measurement frame ([`frame`]), measure the frame's coherence against the
//! Welch bound ([`analysis`]), and stress the resulting sparse-recovery
//! guarantee with synthetic basis-pursuit trials ([`recovery`]).  A separate
//! integer-arithmetic planner ([`planner`]) answers block-count feasibility
//! questions for decompositions with prescribed numbers of blocks of each
//! size.
//!
//! All operations are pure functions of their inputs plus explicit seeds.
//! With the default `parallel` feature the pair scans and recovery trials
//! run on rayon; results are bitwise identical to the sequential fallback
//! because every reduction happens in index order.

// dense matrix kernels index by (row, col) throughout
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod design;
pub mod frame;
pub mod planner;
pub mod recovery;
pub mod tol;
pub mod unitary;

mod combin;
mod linalg;
mod par;

pub use design::{Design, DesignKind};
pub use frame::FrameMatrix;
