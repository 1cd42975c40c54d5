//! Finite-element machinery for 2D high-contrast Helmholtz scattering.
//!
//! The crate solves the unit-cell corrector problems of a periodically
//! structured scatterer, derives the frequency-dependent effective
//! parameters (including the resonant effective permeability), solves the
//! macroscopic effective scattering problem, reconstructs the fine-scale
//! field inside the inclusions, and provides a direct heterogeneous solver
//! as ground truth.
//!
//! Modules:
//! - [`geometry`], [`mesh`]: axis-aligned boxes and structured, interface
//!   resolving triangulations with periodic identification.
//! - [`sparse`]: complex CSR assembly and a direct sparse LU solve.
//! - [`fem`]: P1 assembly of Helmholtz sesquilinear forms with impedance
//!   boundary, norms, point evaluation, cross-mesh errors.
//! - [`cell`]: periodic corrector and resonant cell problems, effective
//!   parameters, and the eigen-series permeability oracle.
//! - [`effective`]: the macroscopic effective solve and the fine-scale
//!   reconstruction.
//! - [`heterogeneous`]: the direct fine-scale reference solve.

pub mod cell;
pub mod effective;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod heterogeneous;
pub mod mesh;
pub mod sparse;

pub use error::{Error, Result};
pub use num_complex::Complex64;
