//! Aortic aneurysm analysis for CT angiography volumes.
//!
//! The crate covers the whole chain from a raw intensity volume to clinical
//! measurements:
//!
//! * [`centerline`] traces the contrast-filled lumen with a shortest path and
//!   builds centerline-orthogonal planes,
//! * [`lumen`] casts radial rays on every plane to find the inner boundary and
//!   regularizes the contours with a threshold-driven active contour,
//! * [`thrombus`] grows a coupled active contour from the inner boundary to the
//!   weakly contrasted outer boundary, guided by an opacity image,
//! * [`measure`] reports maximum diameter and cross-sectional area per plane,
//! * [`endoleak`] finds contrast-bright clusters inside the thrombus,
//! * [`eval`] scores a segmentation against a reference mask.
//!
//! [`phantom`] generates synthetic volumes with analytic ground truth and
//! [`pipeline`] runs every stage from a single JSON configuration.

pub mod centerline;
pub mod config;
pub mod contour;
pub mod endoleak;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod lumen;
pub mod measure;
pub mod phantom;
pub mod pipeline;
pub mod thrombus;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{Grid, Vec3, Volume};
