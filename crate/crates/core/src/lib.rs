#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! First-order convex optimization with approximate duality gap certificates.
//!
//! Every solver maintains an upper bound U and a lower bound L on the
//! optimum; the tracker checks at each step that the scaled gap A·(U − L)
//! moves by no more than the computed discretization error.

pub mod error;
pub mod linalg;
pub mod mirror_maps;
pub mod problems;
pub mod gap_tracker;
pub mod solvers_discrete;
pub mod vi_saddle;
pub mod solvers_continuous;
pub mod harness;

pub use error::{Error, Result};
