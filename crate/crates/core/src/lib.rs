//! Finite-dimensional quantum mechanics on probability vectors.
//!
//! States, channels, measurements and generators are carried as real vectors and matrices
//! over a minimal informationally complete POVM frame. Positivity is decided from power
//! traces alone, without reconstructing operators.

pub mod channels;
pub mod circuits;
pub mod classicality;
pub mod dynamics;
pub mod error;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod measurements;
pub mod optimize;
pub mod random;
pub mod states;

pub use error::{Error, Result};
pub use frames::{Frame, MicPovmFrame};
pub use states::ProbVector;
