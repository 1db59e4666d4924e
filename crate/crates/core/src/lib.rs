//! Persistent homology of random coverings of the flat torus.
//!
//! A Poisson cloud on `T^d` is thickened into balls of radius `r` (the
//! occupancy set) with the complement as the vacancy set. Both are
//! discretized as filtrations of a periodic cubical grid, reduced to
//! persistence diagrams, and the essential classes read off as giant
//! cycles. The `experiments` module turns many such trials into threshold
//! estimates.

pub mod error;
pub mod experiments;
pub mod filtration;
mod floatrepr;
pub mod percolation;
pub mod persistence;
pub mod torus;

pub use error::{Error, Result};
