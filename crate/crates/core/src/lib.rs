//! Symbol-based multilevel τ preconditioners for multilevel Toeplitz systems.
//!
//! The crate covers two pipelines:
//!
//! * nonsymmetric systems `T_n(g) u = b` (fractional diffusion) solved with
//!   MINRES on the flipped system `Y T_n(g) u = Y b`, preconditioned by a τ
//!   matrix whose spectrum follows `|g|`;
//! * ill-conditioned symmetric systems solved with PCG and the τ projection
//!   of a fractional Laplacian-like reference matrix.
//!
//! Multilevel vectors are stored in lexicographic order with level 1 varying
//! fastest, so a 2-level operator `A ⊗ B` acts with `B` on the contiguous
//! (level-1) index.

pub mod coefficients;
pub mod error;
pub mod experiments;
pub mod fde;
mod fft;
pub mod grid;
pub mod krylov;
pub mod precond;
pub mod spectra;
pub mod symbols;
pub mod tau;
pub mod toeplitz;

pub use error::{Error, Result};
