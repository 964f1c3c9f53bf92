//! Consensus and flocking dynamics on temporal graphs: the adaptive
//! Cucker-Smale model and its singular limit, linear Laplacian dynamics,
//! graph generators, connectivity certificates and decay-rate bounds, plus a
//! declarative scenario runner.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod exec;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod matrix;
pub mod rng;

pub use error::{Error, Result};
