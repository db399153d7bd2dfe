//! Planning and simulation of defect-free atom array assembly with the
//! parallel compression algorithm.
//!
//! A partially loaded `L′ × L′` trap array is rearranged so that its centered
//! `L × L` target block ends up fully occupied. The planner works in two
//! stages: [`compression`] moves whole rows of atoms inward ring by ring with
//! a parallel tweezer array, then [`postprocess`] fills the remaining holes
//! one atom at a time. Every move is recorded in a [`metrics::MoveLog`] from
//! which capture, release and distance counters are tallied.

pub mod compression;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod loading;
pub mod metrics;
pub mod paths;
pub mod postprocess;
pub mod render;
pub mod report;
pub mod rng;
pub mod schedule;
#[doc(hidden)]
pub mod testing;

pub use compression::{Parallelism, Protocol};
pub use error::{Error, Result};
pub use lattice::{make_spec, GridSpec, ReservoirMode, Site};
pub use loading::Occupancy;
pub use metrics::{Metrics, MoveLog, TimeModel};
