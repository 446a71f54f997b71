//! Slotted simulator for mobility-induced beam misalignment in indoor THz
//! links: channel and antenna model, 6-DoF user mobility, link-state
//! accounting, and always-align / align-after-failure / align-before-failure
//! policies with online learners.

pub mod channel;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod learners;
pub mod linkstate;
pub mod math;
pub mod metrics;
pub mod mobility;
pub mod strategies;
pub mod sweep;

pub use error::{Error, Result};
