//! Peeling by layers of Boltzmann triangulations and the growth-fragmentation
//! process that describes their cycle lengths at large scale.
//!
//! Modules:
//! - [`weights`]: partition function, cycle and volume weights, exact counts.
//! - [`kernel`]: one-step peeling laws, half-plane limits, locally largest cycle kernel.
//! - [`layers`]: the branching peeling by layers engine.
//! - [`llc`]: the locally largest cycle chain.
//! - [`gf`]: the Lévy process, Lamperti transforms and cell systems.
//! - [`harness`]: statistics, experiments, configuration and export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod gf;
pub mod harness;
pub mod kernel;
pub mod layers;
pub mod llc;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use kernel::{Event, OddSplit, StepLaw};
pub use layers::{CycleState, ExploreConfig, Trace};
pub use weights::WeightTable;
