//! Finite-dimensional laboratory for the elementary operators
//! `Δ_{T,S}(X) = TXS − X` and `δ_{T,S}(X) = TX − XS`, the operator classes
//! they define (m-isometries, m-selfadjoint, (m,C)-isometric/symmetric
//! operators, left m-invertible pairs and their n-quasi variants), and the
//! structural constructions built on top of them.
//!
//! Every operator is a dense complex matrix ([`CMatrix`]). Identities are
//! checked numerically: each check reports a residual norm together with the
//! scale of the terms that produced it, and a [`ToleranceConfig`] decides
//! whether the residual counts as zero.

pub mod calculus;
pub mod certificate;
pub mod classes;
pub mod error;
pub mod generate;
pub mod harness;
pub mod json;
pub mod linalg;
pub mod random;
pub mod spectral;
pub mod structure;
pub mod tolerance;

pub use calculus::{Conjugation, DKind, Evaluation, OperatorPair};
pub use certificate::{Check, ConstructionCertificate, Verdict, Violation};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use tolerance::ToleranceConfig;
