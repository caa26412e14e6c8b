//! Environment-aware placement of drone base stations.
//!
//! Buildings are extruded footprint polygons that block line of sight;
//! drones serve ground users on a shared downlink channel, and the
//! [`deployment`] solvers search candidate positions to maximize coverage,
//! find the smallest fleet that covers everyone, or minimize total hover
//! time. [`extraction`] recovers building footprints from map-style raster
//! images and [`scenario`] ties everything to config files, sweeps and CSV.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod deployment;
pub mod error;
pub mod extraction;
pub mod geometry;
pub mod polyfile;
pub mod scenario;

pub use error::{Error, Result};
