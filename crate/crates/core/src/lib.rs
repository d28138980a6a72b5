//! Desk-scale computations for asymptotic Banach space geometry.

pub mod analysis;
pub mod blockseq;
pub mod cli;
pub mod combinatorics;
pub mod error;
pub mod games;
pub mod spaces;

pub use error::{Error, Result};
