//! Nonparametric regression whose linear algebra runs on exact Gauss-Jordan
//! elimination. The pivot search inside the elimination is pluggable: a
//! classical scan, or Grover search executed on a dense statevector
//! simulator.
//!
//! Layers, bottom-up:
//!
//! - [`quantum`]: statevector, standard gates, QFT, Born-rule measurement.
//! - [`grover`]: Grover iteration and the randomized search for an unknown
//!   number of marked items.
//! - [`qgje`]: exact rational matrices, RREF, consistency, solving, and the
//!   Moore-Penrose pseudoinverse.
//! - [`fdist`]: F distribution CDF and quantile.
//! - [`linreg`]: global linear smoother with confidence bands.
//! - [`localpoly`]: local polynomial kernel regression with confidence bands.

pub mod error;
pub mod fdist;
pub mod grover;
pub mod linreg;
pub mod localpoly;
pub mod qgje;
pub mod quantum;

pub use error::{Error, Result};
pub use qgje::{Backend, BackendStats, Matrix, Rational};
