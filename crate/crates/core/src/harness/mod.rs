//! Experiment configuration, initial data and parameter scans.

pub mod config;
pub mod presets;
pub mod scan;
