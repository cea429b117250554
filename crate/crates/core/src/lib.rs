//! Exact computations with graded matrix factorisations of quasi-homogeneous
//! potentials: residues, quantum dimensions and orbifold-equivalence search.

pub mod archive;
pub mod catalogue;
pub mod error;
pub mod fixtures;
pub mod grading;
pub mod groebner;
pub mod linalg;
pub mod mf;
pub mod poly;
pub mod residue;
pub mod search;
pub mod verify;

pub use error::{Error, Result};
