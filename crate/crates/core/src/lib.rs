//! Cartesian ovals and the perfect-lens property.
//!
//! The crate covers the planar geometry of the oval `d1 + n*d2 = c`, vector
//! refraction, the refraction ODEs with their conserved quantities, the conic
//! limiting cases, surfaces of revolution with the normal-meets-axis
//! certificates, and end-to-end ray tracing through the focal pair.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod conics;
pub mod geom;
pub mod ode;
pub mod optics;
pub mod oval;
pub mod raytrace;
pub mod revolution;
pub mod roots;

pub use conics::{ConicKind, ConicSpec};
pub use geom::{Point2, Point3, Vec2, Vec3};
pub use oval::{CartesianOval, OvalError, OvalParams, OvalSample, Tolerances};
