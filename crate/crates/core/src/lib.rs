//! Exact damping basis of the dissipative optomechanical Liouvillian, with a
//! brute-force oracle and spectral time evolution.
//!
//! Units have `hbar = 1`. Joint operators are ordered cavity (x) mechanics.

pub mod basis;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod params;
pub mod special;
pub mod superop;

pub use basis::{BasisElement, DampingBasis, EigenLabel, Side};
pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use par::Execution;
pub use params::{SystemParams, Variant};
