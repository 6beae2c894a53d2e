//! Quantum expanders: construction, spectral-gap certification, separation
//! geometry of unitary tuples, packing experiments and random-matrix checks.

pub mod error;
pub mod expanders;
pub mod geometry;
pub mod linalg;
pub mod packing;
pub mod randmat;
pub mod superop;
pub mod tuple_io;

pub use error::{QexError, Result};
pub use linalg::{c64, ComplexMatrix, MatrixTuple, RngSpec};
pub use superop::{GapReport, NormMethod, NormOptions, SuperOperator};
