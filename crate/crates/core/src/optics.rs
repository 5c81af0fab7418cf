//! Refraction geometry: sines of the focal rays about a normal, the constant
//! sine-ratio certificate, and the vector form of Snell's law.
//!
//! Sines are always unsigned magnitudes of 2D cross products, so the
//! certificates do not depend on which way a normal points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Vec2};
use crate::oval::{CartesianOval, OvalSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("CoincidentPoint: the point coincides with a focus")]
    CoincidentPoint,
    #[error("AxialDegeneracy: sin(theta2) = {sin_theta2:e} is too small for a ratio")]
    AxialDegeneracy { sin_theta2: f64 },
    #[error("DisagreementBeyondTolerance: {what} differ by {diff:e}")]
    DisagreementBeyondTolerance { what: &'static str, diff: f64 },
    #[error("TotalInternalReflection: transmitted sine would be {required_sine}")]
    TotalInternalReflection { required_sine: f64 },
    #[error("InvalidRatio: refraction ratio must be finite and > 0, got {0}")]
    InvalidRatio(f64),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

/// Below this `sin(theta2)` the sine ratio is treated as undefined.
pub const AXIAL_SINE_FLOOR: f64 = 1e-14;

/// Agreement required between the two evaluations in [`fundamental_sines`].
pub const FUNDAMENTAL_AGREEMENT: f64 = 1e-10;

/// A ray with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray2 {
    pub origin: Point2,
    pub direction: Vec2,
}

impl Ray2 {
    /// Builds a ray, normalizing `direction`.
    pub fn new(origin: Point2, direction: Vec2) -> Result<Self, OpticsError> {
        if !origin.is_finite() {
            return Err(OpticsError::InvalidInput("ray origin must be finite".into()));
        }
        let direction = direction
            .try_normalize()
            .ok_or_else(|| OpticsError::InvalidInput("ray direction must be nonzero".into()))?;
        Ok(Self { origin, direction })
    }

    pub fn at(&self, t: f64) -> Point2 {
        self.origin + self.direction * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SineAnglePair {
    pub sin_theta1: f64,
    pub sin_theta2: f64,
}

impl SineAnglePair {
    pub fn ratio(&self) -> Result<f64, OpticsError> {
        if self.sin_theta2 < AXIAL_SINE_FLOOR {
            return Err(OpticsError::AxialDegeneracy { sin_theta2: self.sin_theta2 });
        }
        Ok(self.sin_theta1 / self.sin_theta2)
    }
}

/// Sines of the angles that the lines `F -> P` and `F2 -> P` make with the
/// normal line at `P`.
pub fn sines_about_normal(p: Point2, normal: Vec2, f: Point2, f2: Point2) -> Result<SineAnglePair, OpticsError> {
    let u1 = (p - f).try_normalize().ok_or(OpticsError::CoincidentPoint)?;
    let u2 = (p - f2).try_normalize().ok_or(OpticsError::CoincidentPoint)?;
    Ok(SineAnglePair { sin_theta1: u1.cross(normal).abs().min(1.0), sin_theta2: u2.cross(normal).abs().min(1.0) })
}

/// `sin(theta1) / sin(theta2)` at a curve sample, using the sample's normal
/// and the oval's foci. Equals `n` everywhere off the axis.
pub fn snell_ratio(sample: &OvalSample, oval: &CartesianOval) -> Result<f64, OpticsError> {
    sines_about_normal(sample.point, sample.normal, oval.focus(), oval.second_focus())?.ratio()
}

/// Returns `(sin(theta1 + phi), sin(theta2 + phi))` at an upper-half curve
/// point, where `phi = atan(tangent_slope)` is the tangent inclination.
///
/// The values are computed from the angle decomposition (angles between the
/// focal rays and the normal built from `tangent_slope`), from the law of
/// cosines in the triangle `F P F'`, and from the reduced form
/// `(x / l1, (b - x) / l2)`; any pair disagreeing by more than
/// [`FUNDAMENTAL_AGREEMENT`] is an error. The reduced form is returned.
pub fn fundamental_sines(p: Point2, oval: &CartesianOval, tangent_slope: f64) -> Result<(f64, f64), OpticsError> {
    if !(p.y > 0.0) {
        return Err(OpticsError::InvalidInput(format!("point must have y > 0, got y = {}", p.y)));
    }
    if !tangent_slope.is_finite() {
        return Err(OpticsError::InvalidInput("tangent slope must be finite".into()));
    }
    let b = oval.b();
    let f2 = oval.second_focus();
    let (l1, l2) = oval.focal_distances(p);
    if l1 == 0.0 || l2 == 0.0 {
        return Err(OpticsError::CoincidentPoint);
    }

    let reduced = (p.x / l1, (b - p.x) / l2);

    // upper half: the normal with positive y-component points out of the oval
    let outward = Vec2::new(-tangent_slope, 1.0) / tangent_slope.hypot(1.0);
    let phi = tangent_slope.atan();
    let theta1 = (oval.focus() - p).angle_to(outward);
    let theta2 = (f2 - p).angle_to(-outward);
    let decomposed = ((theta1 + phi).sin(), (theta2 + phi).sin());

    let check = |what: &'static str, a: (f64, f64), b: (f64, f64)| {
        let diff = (a.0 - b.0).abs().max((a.1 - b.1).abs());
        if diff > FUNDAMENTAL_AGREEMENT {
            Err(OpticsError::DisagreementBeyondTolerance { what, diff })
        } else {
            Ok(())
        }
    };
    check("angle decomposition and reduced form", decomposed, reduced)?;
    if b > 0.0 {
        let cosines = ((b * b + l1 * l1 - l2 * l2) / (2.0 * l1 * b), (b * b + l2 * l2 - l1 * l1) / (2.0 * l2 * b));
        check("law of cosines and reduced form", cosines, reduced)?;
    }
    Ok(reduced)
}

/// Refracts a unit `incident` direction at an interface with unit `normal`.
///
/// `ratio` is the transmitted-side index over the incident-side index, so
/// `sin(theta_t) = sin(theta_i) / ratio`. The normal may point either way;
/// it is flipped internally to face the incident side.
pub fn refract_direction(incident: Vec2, normal: Vec2, ratio: f64) -> Result<Vec2, OpticsError> {
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(OpticsError::InvalidRatio(ratio));
    }
    let d = incident
        .try_normalize()
        .ok_or_else(|| OpticsError::InvalidInput("incident direction must be nonzero".into()))?;
    let mut nrm = normal.try_normalize().ok_or_else(|| OpticsError::InvalidInput("normal must be nonzero".into()))?;
    if ratio == 1.0 {
        return Ok(d);
    }
    let mut cos_i = -d.dot(nrm);
    if cos_i < 0.0 {
        nrm = -nrm;
        cos_i = -cos_i;
    }
    let sin_i = d.cross(nrm).abs();
    let sin_t = sin_i / ratio;
    if sin_t > 1.0 {
        return Err(OpticsError::TotalInternalReflection { required_sine: sin_t });
    }
    let eta = 1.0 / ratio;
    let cos_t = (1.0 - sin_t * sin_t).sqrt();
    let t = d * eta + nrm * (eta * cos_i - cos_t);
    Ok(t.try_normalize().unwrap_or(d))
}
