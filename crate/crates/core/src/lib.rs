//! Randomized, inverse-free divide-and-conquer diagonalization of matrix pencils.
//!
//! Given a pencil `(A, B)` of dense complex matrices, [`rpd::rpd`] returns
//! `(S, T, D)` with `A ≈ S D T⁻¹` and `B ≈ S T⁻¹` to a user tolerance. The
//! crate is `no_std` with `alloc`; dense kernels come from `faer`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod comparator;
pub mod deflate;
pub mod eigsolve;
mod error;
pub mod grid;
pub mod irs;
pub mod linalg;
pub mod pseudospectra;
pub mod recipes;
pub mod rng;
pub mod rpd;
pub mod rrf;

pub use error::{Error, Result};
pub use faer::c64;
pub use linalg::{CMatrix, Eigenvalue, Pencil};
pub use rng::RngStream;
