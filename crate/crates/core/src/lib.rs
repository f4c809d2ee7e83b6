//! Decide whether a family of bipartite pure states can be carried to a
//! target family by local operations alone — a tensor-product TPCP map with
//! no communication between the two parties.
//!
//! The library is organized as a pipeline of necessary conditions (spectral
//! peeling, cross-pair eigenvalue matching, Schmidt reduction to single-party
//! Gram problems) followed by certificate construction and verification
//! (unitary dilations, Kraus families, seeded alternating search). Verdicts
//! form a three-valued lattice: `Impossible` with a machine-checkable
//! witness, `Certified` with a verified certificate, or `Inconclusive` with
//! the list of checks that passed.

pub mod channel;
pub mod error;
pub mod fixtures;
pub mod gram;
pub mod linalg;
pub mod reduction;
pub mod search;
pub mod spectral;
pub mod states;
pub mod verdict;

pub use error::{Error, Result};
pub use linalg::{C64, CMatrix, CVector, Tolerance};
pub use states::{BipartiteState, MixedInputProblem, StatePair, TransformProblem};

