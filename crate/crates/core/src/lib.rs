//! Numerical toolkit for the phase-space dynamics of coherent states in a
//! trigonometric double-singular well: exact eigenbasis, fractional-revival
//! evolution, Wigner distributions, interference-tile metrology, and
//! displacement-sensitivity overlaps. Atomic units (hbar = m = 1) throughout.

pub mod analysis;
pub mod eigh;
pub mod error;
pub mod ptcore;
pub mod revival;
pub mod sensitivity;
pub mod special;
pub mod wigner;

pub use error::{PtError, Result};
pub use ptcore::{coherent_coefficients, overlap_coeff, CoefficientState, PtParams};
pub use wigner::{wigner_direct, wigner_fast, PhaseSpaceGrid, WignerField};
