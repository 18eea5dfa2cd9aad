//! Exact computations with symmetric sequences, operadic modules and bar
//! constructions over the commutative operad.

pub mod algebra;
pub mod bar;
pub mod cache;
pub mod chain;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod field;
pub mod filtration;
pub mod linalg;
pub mod operad;
pub mod random;
pub mod sset;
pub mod symseq;
pub mod tree;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Field, FieldKind, Fp, F2, F3, F5, F7, Q};
