//! Cross-sections, billiard domains and the tube hypersurface around a cylinder.
//!
//! # Orientation
//!
//! A boundary curve `γ(s)` is parametrized by arclength with the region on
//! its left. The adapted frame is `e2 = γ'(s)` and `e1 = -J e2`, where `J`
//! is the counterclockwise quarter turn, so `e1` is the *outward* normal.
//! Curvature is defined by `d e1/ds = -κ e2`: a disc of radius `R` has
//! `κ = -1/R`, a straight wall `κ = 0`, and a circular scatterer seen from
//! the table (traversed clockwise) has `κ = +1/ρ`.
//!
//! Billiard collisions use the *inward* unit normal `ν = -e1`.

mod domain;
mod segment;
mod tube;

pub use domain::{boundary_residual, BilliardDomain, Domain2, Domain3, DomainKind, Hit, PieceId};
pub use segment::{BoundaryCurve, CurveBuilder, Segment, SegmentShape};
pub use tube::{curvature_factors, frame_check, shape_eigen, FrameResiduals, Region, TubeChart};
