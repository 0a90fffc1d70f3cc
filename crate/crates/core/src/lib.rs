//! Numerical realization, classification and deformation of icosahedra with
//! unit edges: embeddings of the icosahedral graph into 3-space whose 30
//! edges all have length 1, with twelve distinct (possibly self-intersecting)
//! vertices.

pub mod ansatz;
pub mod combinatorics;
pub mod error;
pub mod flex;
pub mod invariants;
pub mod oracle;
pub mod realization;
pub mod solver;

pub use error::{Error, Result};
