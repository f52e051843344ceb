//! Simulation and direct-sampling toolkit for 2D inverse medium scattering.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod augment;
pub mod dataset;
pub mod dsm;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod scene;
pub mod special;

pub use error::{Error, Result};
pub use geometry::Point;
