//! Core dynamics for no-slip billiards and their nonholonomic (rolling) counterparts.
//!
//! Everything in this crate is pure computation: collision maps, billiard
//! flight with gravity, the geometry of tube hypersurfaces around cylinders,
//! the rolling equations in adapted frames and an adaptive Runge-Kutta
//! stepper with event location. IO, configuration and experiment drivers
//! live in the `noslip` crate.
//!
//! The crate is `no_std` and needs only `alloc`.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
pub mod geometry;
pub mod inertia;
pub mod integrate;
pub mod math;
pub mod noslip;
pub mod poly;
pub mod rolling;
pub mod trace;

pub use error::{Error, Result};
pub use inertia::InertiaParams;
