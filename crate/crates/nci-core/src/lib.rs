//! Numerical toolkit for quantized real-space invariants of tight-binding
//! models on finite Delone point patterns.
//!
//! The library computes Chern-type and winding pairings of Fermi projections
//! with position-operator derivations, Lyapunov exponents and level-statistics
//! diagnostics for localization, Fredholm indices of Dirac-compressed
//! projections, and the corresponding N-fermion Fock-sector quantities.
//!
//! Conventions used throughout:
//! - lengths are fixed so that the point density is 1 (one site per unit
//!   volume);
//! - the derivation in direction `j` is `∂_j A = i [X_j, A]`, with `X_j`
//!   either the real-space position (minimal image on a torus) or the
//!   integer cell coordinate (roots-of-unity mode);
//! - even pairings carry the prefactor `Λ_k = (2iπ)^{ k/2 } / (k/2)!` so that
//!   quantized values come out as plain integers.

// Link against the system BLAS/LAPACK implementation.
extern crate blas_src;

pub mod dirac;
pub mod invariants;
pub mod linalg;
pub mod localization;
pub mod manybody;
pub mod models;
pub mod pattern;
pub mod spectral;

pub use num_complex::Complex64;
