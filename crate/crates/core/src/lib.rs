//! Kikuchi-matrix machinery for k-uniform hypergraphs: even-cover search and
//! verification, hypergraph decompositions, colored Kikuchi graphs with the
//! edge-deletion process, spectral norms of reweighted Kikuchi matrices, and
//! sound refutation certificates for k-XOR instances.

pub mod combinatorics;
pub mod decomposition;
pub mod error;
pub mod generate;
pub mod hypergraph;
pub mod io;
pub mod kikuchi_even;
pub mod kikuchi_odd;
pub mod moore;
pub mod oracle;
pub mod refuter;
pub mod spectral;

pub use error::{Error, Result};
pub use hypergraph::{
    eval_xor, verify_even_cover, Assignment, EvenCover, Hypergraph, Sign, XorInstance,
};
