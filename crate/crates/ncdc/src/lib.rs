//! Noncommutative derivative calculi for *-polynomials.
//!
//! The crate provides, bottom-up:
//! - [`ncpoly`]: *-monomials and *-polynomials over the complex numbers with
//!   a canonical reduced form, parser, and printer;
//! - [`derivation`]: the symbolic derivative calculi (split, self-adjoint,
//!   unitary) with values in the algebraic tensor product;
//! - [`repn`]: finite-dimensional matrix evaluation of polynomials and
//!   tensor matrices, realification, and random tuple sampling;
//! - [`spectral`]: singular-value spectra, normalized nullity and rank,
//!   regularized log-determinants, and decay diagnostics;
//! - [`projections`]: spectral cutoff and range-fitting projections and the
//!   product/two-sided constructions built from them;
//! - [`covering`]: covering and packing numbers of finite metric sets,
//!   sumset bounds, ball-covering estimates, and binding constructions;
//! - [`volumes`]: closed-form volume and covering asymptotics for
//!   Schatten-norm balls;
//! - [`verify`]: the named verification suites exposed by the CLI.

pub mod covering;
pub mod derivation;
pub mod error;
pub mod ncpoly;
pub mod projections;
pub mod repn;
pub mod spectral;
pub mod verify;
pub mod volumes;

pub use derivation::{
    d_s, d_sa, d_u, linnell_witness, m_f, partial_deriv, partial_deriv_presplit, BlockShape,
    Flavor, LinnellWitness, TensorElement, TensorKey, TensorMatrix, URoute,
};
pub use error::{NcError, Result};
pub use ncpoly::{parse, Letter, Monomial, PolyTuple, Polynomial};
