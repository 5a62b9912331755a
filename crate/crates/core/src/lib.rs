//! Multiuser MIMO broadcast with simultaneous wireless information and power
//! transfer: block-diagonalizing precoders, a dual ellipsoid solver for the
//! per-frame weighted-sum-rate problem with harvesting constraints, battery
//! driven user grouping and a frame-level simulator.

pub mod bd;
pub mod error;
pub mod grouping;
pub mod linalg;
pub mod model;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
