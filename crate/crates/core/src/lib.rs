//! Numerical machinery for quantum mechanics with complex action parameters:
//! a complex mass `m = m_R + i m_I` and complex potential coefficients make
//! the Hamiltonian non-Hermitian, and the two natural expectation functionals
//! (two-sided `<B|O|A>/<B|A>` and one-sided `<A|O|A>/<A|A>`) obey different
//! momentum relations, `p = m q̇` versus `p = m_eff q̇` with
//! `m_eff = m_R + m_I^2/m_R`.
//!
//! The crate provides the truncated bosonic basis and its non-Hermitian
//! coordinate/momentum operators, smeared-delta calculus on complex contours,
//! state evolution and the exact time-development identities of both
//! functionals, the re-chosen-boundary decomposition, and a lattice
//! path-integral realization with its window-averaged momentum relation.

pub mod contour;
pub mod dynamics;
pub mod error;
pub mod expectations;
pub mod fockspace;
pub mod linalg;
pub mod pathintegral;
pub mod rechoose;
pub mod timeseries;

pub use error::{Error, Result};
pub use linalg::{OperatorMatrix, StateVector};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
