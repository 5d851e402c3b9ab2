//! Scenario engine for long-horizon electricity demand.
//!
//! The pipeline has two halves. A statistical business-as-usual model
//! (elastic-net regression of regional daily peak and energy on weather and
//! GDP) is projected forward, perturbed with natural variation and
//! downscaled to hourly profiles. A bottom-up technology model adds
//! air-conditioning and electric-vehicle loads on top. The [`runner`]
//! enumerates the 3 × 3 × 2 scenario matrix and writes per-state, regional
//! and national CSV tables.
//!
//! Most users start from [`runner::Pipeline`]; every stage is also usable on
//! its own, see the crate's `examples/` directory.

pub mod bau;
pub mod calendar;
pub mod cooling;
pub mod ev;
pub mod fixtures;
pub mod gdp;
pub mod hourly;
pub mod ingest;
pub mod rng;
pub mod runner;
pub mod variation;

mod error;

pub use error::{Error, Result};
pub use ingest::Region;
