//! Exact prime and factorization-type statistics for polynomials over
//! finite fields: counts in short intervals and arithmetic progressions,
//! cycle-type laws, von Mangoldt sums, and the small-`m` exceptions.

pub mod combinatorics;
pub mod error;
pub mod exec;
pub mod gf;
pub mod polyring;
pub mod render;
pub mod statistics;
pub mod verify;

pub use combinatorics::Partition;
pub use error::{Error, Result};
pub use exec::ScanOptions;
pub use gf::{make_field, FieldElement, FieldSpec};
pub use polyring::{Factorization, Poly};
