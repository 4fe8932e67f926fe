//! Tactile estimation of the contents of a granular container.
//!
//! The crate simulates the four exploratory procedures a robot performs on a
//! grasped bottle (lift, tilt-and-shake, fast rotation, slow rotation), turns
//! the virtual sensor readings into vibration and topple features, and fits
//! the estimators that recover content mass, fill height, particle size and
//! particle shape class. [`harness`] wires everything into reproducible
//! experiments.

pub mod domain;
pub mod error;
pub mod estimators;
pub mod features;
pub mod granusim;
pub mod harness;
pub mod seed;

pub use error::{Error, Result};
