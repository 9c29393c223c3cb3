//! Gamma factors of cuspidal representations of GL(n) over finite fields.
//!
//! The library computes the four desk-scale gamma factors (Rankin–Selberg,
//! Asai, exterior-square, Bump–Friedberg) of cuspidal representations of
//! GL_n(F_q) by exhaustive Bessel-function sums, re-derives each of them from
//! the defining functional equation, and compares everything against closed
//! Gauss-sum product formulas.
//!
//! Layering, bottom to top:
//! - [`ffchar`]: finite-field towers with Zech-logarithm arithmetic, additive
//!   and multiplicative characters, Gauss sums;
//! - [`matgrp`]: dense matrices over tower fields, subgroup enumeration,
//!   canonical coset representatives of `N_n\GL_n`, conjugacy invariants;
//! - [`cuspidal`]: cuspidal character values, Bessel functions, subgroup
//!   multiplicities;
//! - [`gammasums`]: Fourier transforms, the gamma engines and the
//!   functional-equation oracle, period sums;
//! - [`gaussform`]: Gauss-sum product formulas and inertia eigencharacter
//!   multisets;
//! - [`verify`]: the machine-checkable invariant suite;
//! - [`cache`]: versioned binary result caching.

pub mod cache;
pub mod cuspidal;
pub mod ffchar;
pub mod gammasums;
pub mod gaussform;
pub mod matgrp;
pub mod par;
pub mod scalar;
pub mod verify;

use std::fmt;

/// Library error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid configuration (non-prime p, degree not in tower, parity
    /// mismatch, zero where nonzero required, ...).
    Config(String),
    /// An enumeration or table would exceed the configured budget.
    Budget(String),
    /// A computation produced a value violating an exact identity beyond
    /// tolerance (signals an arithmetic bug, never expected).
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Budget(m) => write!(f, "budget exceeded: {m}"),
            Error::Numeric(m) => write!(f, "numeric consistency error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
