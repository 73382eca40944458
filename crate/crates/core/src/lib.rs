//! Refinement of LoD2 building models to LoD3 from mobile laser scans.
//!
//! Rays from each scan point are traced through an occupancy octree that also
//! carries the model's wall bands. Voxels are compared against the walls and
//! against the per-point semantic predictions, the two resulting façade
//! textures feed a small Bayesian network, and high-probability clusters are
//! generalized into rectangles and filled with library window/door solids.
//! Classified conflicts are written back onto the point labels.

pub mod bayes;
pub mod building;
pub mod cloud;
pub mod config;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod io;
pub mod library;
pub mod occupancy;
pub mod pipeline;
pub mod recon;
pub mod shape;
pub mod sim;
pub mod textures;
pub mod uncertainty;

pub use error::{Error, Result};
