//! Query engine for the join fragment of SPARQL (nested basic graph
//! patterns and OPTIONAL, i.e. inner and left-outer joins) over compressed
//! 2D bitmatrix indexes.
//!
//! The pipeline: N-Triples are dictionary-encoded into a triple cube whose
//! 2D slices are stored as hybrid run-length/set-position compressed
//! matrices. A query is planned over a graph of supernodes capturing the
//! OPTIONAL nesting, pruned to (for acyclic well-designed queries) minimal
//! per-pattern triple sets with semi-joins expressed as fold/unfold on the
//! compressed rows, and evaluated by a recursive multi-way pipelined join
//! that avoids nullification and best-match whenever the query class
//! permits.

pub mod bitmat;
pub mod bitrow;
pub mod bits;
pub mod dictionary;
pub mod error;
pub mod exec;
pub mod gen;
pub mod index;
pub mod ntriples;
pub mod oracle;
pub mod plan;
pub mod prune;
pub mod query;
pub mod term;
pub mod verify;

pub use error::{Error, Result};
