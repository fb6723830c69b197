//! Exact-diagonalization core for the generalized Hubbard model coupled to a
//! truncated quantized radiation field.
//!
//! Everything here is pure computation over dense complex matrices: lattice
//! geometry and coupling Fourier analysis, fermionic and bosonic operator
//! algebra, Hamiltonian assembly (including the hole-particle transformed and
//! source-deformed forms), and Gibbs-state quantities such as Duhamel
//! two-point functions and charge susceptibilities.
//!
//! The crate is `no_std` and only needs `alloc`. IO, configuration files and
//! the command line live in the `rphl` companion crate.

#![no_std]

extern crate alloc;

pub mod error;
pub mod fock;
pub mod hamiltonian;
pub mod lattice;
pub mod photon;
pub mod spectral;
pub mod thermal;

pub use error::{Error, Result};

/// Complex scalar used for every operator entry.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type Matrix = nalgebra::DMatrix<C64>;

/// Hard ceiling on the total Hilbert-space dimension of any assembled operator.
pub const MAX_DIM: usize = 8192;

/// Largest entry modulus of a matrix (0 for an empty one).
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation between two matrices of equal shape.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |H - H^dagger|`.
pub fn hermiticity_residual(m: &Matrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}
