//! Train-track directed random walks on Out(F_r).
//!
//! The walk draws elementary Nielsen automorphisms [x ↦ yx] from a Markov
//! chain whose transitions are the admissible pairs. Cyclically admissible
//! compositions are train track maps of the rose with one illegal turn; this
//! crate builds them, certifies property (𝒢) for them, measures the spectral
//! growth of the walk, and recovers such compositions from arbitrary
//! one-illegal-turn train track maps by Stallings folds.

pub mod error;
pub mod folds;
pub mod free_group;
pub mod invariants;
pub mod nielsen;
pub mod rose_map;
pub mod spectral;
pub mod walk;

pub use error::{Error, Result};
