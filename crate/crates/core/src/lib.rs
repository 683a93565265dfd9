//! Finite-time quenching of the fourth-order MEMS equation
//! `u_t = -eps^2 Laplacian^2 u - 1/(1+u)^2` on the strip and the unit disc.

// `!(x > 0.0)` is the NaN-rejecting form; quadrature constants keep every digit;
// dense kernels index several arrays in lockstep.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::excessive_precision,
    clippy::needless_range_loop
)]

pub mod cli;
pub mod error;
pub mod meshfield;
pub mod mmpde;
pub mod numkit;
pub mod selfsim;
pub mod smalltime;
pub mod spectral;

pub use error::{Error, Result};
