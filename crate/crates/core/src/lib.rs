//! Allocation-only core of `divekit`: a bounded-variable primal simplex with
//! dual extraction, branch and bound with solution pools, a generic diving
//! engine with the classic scoring rules, a bipartite graph neural network
//! that predicts integer assignments, and the duality-guided learned diver.
//!
//! Nothing in this crate touches the file system or the wall clock. Time
//! limits go through the [`clock::Clock`] trait so the std companion crate
//! can plug in a real timer.
#![no_std]

extern crate alloc;

pub mod bnb;
pub mod clock;
pub mod diving;
pub mod generate;
pub mod graphnet;
pub mod instance;
pub mod l2dive;
pub mod metrics;
pub mod num;
pub mod simplex;
pub mod standard;

pub use instance::{MilpInstance, Sense};
pub use standard::{to_standard_form, StandardLp};
