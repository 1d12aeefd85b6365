//! Simulation harness for no-slip and rolling billiards: configuration
//! files, CSV traces, named experiments, SVG plots and the `noslip` CLI.
//! The dynamics live in [`noslip_core`].

pub mod config;
pub mod csvio;
pub mod error;
pub mod experiments;
pub mod plot;
pub mod run;

pub use noslip_core;
