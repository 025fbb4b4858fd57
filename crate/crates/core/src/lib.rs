//! Directed diffusion-limited aggregation on the square lattice.
//!
//! Particles follow directed symmetric random walks and stick to a growing
//! cluster. This crate provides the three discrete-time samplers, the
//! continuous-time dynamics (Gillespie and coupled Harris replay), directed
//! first-passage percolation, the red/black influence coupling, exact
//! activity sweeps, and the estimators used to study growth.

pub mod activity;
pub mod analysis;
pub mod cluster;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod harris;
pub mod influence;
pub mod io;
pub mod lattice;
pub mod verify;

pub use cluster::Cluster;
pub use error::{Error, Result};
pub use exact::{Dyadic, Weight};
pub use harris::HarrisSystem;
pub use lattice::{DirectedEdge, Site, Step};

/// Version string written into every output header.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
