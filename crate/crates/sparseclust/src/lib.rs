//! Communication-efficient distributed clustering on simulated sites.
//!
//! The crate implements spectral graph clustering through spectral
//! sparsifiers in two simulated communication models — a message-passing
//! (coordinator) model and a shared blackboard — together with
//! blackboard-model geometric clustering (k-center parallel guessing and a
//! successive-sampling coreset for k-median/k-means). Every protocol run
//! produces a bit-exact communication ledger, so the accuracy-versus-
//! communication trade-offs can be measured rather than estimated.
//!
//! A narrative guide with runnable examples lives in `book/`; its code
//! blocks are compiled as doc-tests through the [`book`] module.

pub mod data;
pub mod error;
pub mod geo;
pub mod graph;
pub mod cluster;
pub mod laplacian;
pub mod hashing;
pub mod linalg;
pub mod netsim;
pub mod protocols;
pub mod sparsify;

pub use error::{Error, Result};
pub use graph::{Edge, VertexSet, WeightedGraph};
