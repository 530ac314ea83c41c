//! Relative-motion quantum dynamics of two like charges confined to a helix.
//!
//! The crate is layered bottom-up:
//!
//! * [`potential`]: closed-form helical interaction, its derivative and regularization
//! * [`landscape`]: extrema, well segmentation, bifurcation ratios
//! * [`spectral`]: isolated-well spectra from high-order finite differences
//! * [`tdse`]: split-operator propagation in a sine basis
//! * [`observables`]: well occupations and intrawell moments
//! * [`runner`]: configuration, presets, CSV/JSON output

// `!(x > 0.0)` deliberately rejects NaN; index loops mirror the band algebra
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod landscape;
pub mod observables;
pub mod potential;
pub mod runner;
pub mod spectral;
pub mod tdse;

pub use error::{Error, Result};
pub use potential::{HelixParams, PotentialModel, RegularizedPotential};
