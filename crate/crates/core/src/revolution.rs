//! Surfaces of revolution about the focal axis and the numerical
//! certificates that a surface is rotationally symmetric.

use std::f64::consts::TAU;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::conics::ConicSpec;
use crate::geom::{det3, Point2, Point3, Vec2, Vec3};
use crate::oval::CartesianOval;

/// Largest `|F|` accepted as "on the surface".
pub const SURFACE_TOL: f64 = 1e-9;

/// Magnitude above which a 2x2 Jacobian counts as nonzero.
pub const JACOBIAN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RevolutionError {
    #[error("OnAxis: point lies on the axis of revolution")]
    OnAxis,
    #[error("OffSurface: residual {residual:e} exceeds {tolerance:e}")]
    OffSurface { residual: f64, tolerance: f64 },
    #[error("CoincidentPoint: point coincides with a focus")]
    CoincidentPoint,
    #[error("ZeroGradient: field gradient vanishes or is not finite")]
    ZeroGradient,
    #[error("ParallelToAxis: normal is parallel to the axis")]
    ParallelToAxis,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLine {
    anchor: Point3,
    direction: Vec3,
}

impl AxisLine {
    /// Line through `anchor` along `direction` (normalized here).
    pub fn new(anchor: Point3, direction: Vec3) -> Result<Self, RevolutionError> {
        if !anchor.is_finite() {
            return Err(RevolutionError::InvalidParameter("axis anchor must be finite".into()));
        }
        let direction = direction
            .try_normalize()
            .ok_or_else(|| RevolutionError::InvalidParameter("axis direction must be nonzero".into()))?;
        Ok(Self { anchor, direction })
    }

    pub fn x_axis() -> Self {
        Self { anchor: Point3::ZERO, direction: Vec3::X }
    }

    pub fn anchor(&self) -> Point3 {
        self.anchor
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    /// Two unit vectors completing `direction` to a right-handed frame.
    fn frame(&self) -> (Vec3, Vec3) {
        let d = self.direction;
        let seed = if d.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        let e1 = d.cross(seed).try_normalize().unwrap_or(Vec3::Y);
        (e1, d.cross(e1))
    }
}

/// A differentiable scalar field on R^3.
pub trait ScalarField3: Sync {
    fn value(&self, p: Point3) -> f64;

    fn gradient(&self, p: Point3) -> Vec3 {
        fd_gradient(|q| self.value(q), p)
    }
}

/// Central-difference gradient with step `cbrt(eps) * max(1, |coord|)`.
pub fn fd_gradient(f: impl Fn(Point3) -> f64, p: Point3) -> Vec3 {
    let base = f64::EPSILON.cbrt();
    let mut g = [0.0; 3];
    for (axis, slot) in g.iter_mut().enumerate() {
        let h = base * p.get(axis).abs().max(1.0);
        let mut e = [0.0; 3];
        e[axis] = h;
        let e = Vec3::new(e[0], e[1], e[2]);
        *slot = (f(p + e) - f(p - e)) / (2.0 * h);
    }
    Vec3::new(g[0], g[1], g[2])
}

/// `(p.x, p.y cos(theta), p.y sin(theta))`.
pub fn revolve_point(p: Point2, theta: f64) -> Point3 {
    let (s, c) = theta.sin_cos();
    Point3::new(p.x, p.y * c, p.y * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Oval(CartesianOval),
    Conic(ConicSpec),
}

impl Profile {
    fn residual(&self, p: Point2) -> f64 {
        match self {
            Profile::Oval(o) => o.bipolar_residual(p),
            Profile::Conic(k) => k.residual(p),
        }
    }

    fn gradient(&self, p: Point2) -> Option<Vec2> {
        match self {
            Profile::Oval(o) => o.gradient(p).ok(),
            Profile::Conic(k) => k.gradient(p),
        }
    }
}

/// A profile curve revolved about the x-axis. The implicit function is the
/// profile residual evaluated at `(x, sqrt(y^2 + z^2))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RevolvedSurface {
    pub profile: Profile,
}

impl RevolvedSurface {
    pub fn oval(oval: CartesianOval) -> Self {
        Self { profile: Profile::Oval(oval) }
    }

    pub fn conic(conic: ConicSpec) -> Self {
        Self { profile: Profile::Conic(conic) }
    }

    pub fn axis(&self) -> AxisLine {
        AxisLine::x_axis()
    }
}

fn meridian(p: Point3) -> (Point2, f64) {
    let r = p.y.hypot(p.z);
    (Point2::new(p.x, r), r)
}

/// Lifts a meridian-plane vector `(gx, gr)` to 3D at `p`.
fn lift(g: Vec2, p: Point3, r: f64) -> Vec3 {
    if r > 0.0 {
        Vec3::new(g.x, g.y * p.y / r, g.y * p.z / r)
    } else {
        Vec3::new(g.x, 0.0, 0.0)
    }
}

impl ScalarField3 for RevolvedSurface {
    fn value(&self, p: Point3) -> f64 {
        self.profile.residual(meridian(p).0)
    }

    fn gradient(&self, p: Point3) -> Vec3 {
        let (q, r) = meridian(p);
        match self.profile.gradient(q) {
            Some(g) => lift(g, p, r),
            None => Vec3::new(f64::NAN, f64::NAN, f64::NAN),
        }
    }
}

/// `a x^2 + b y^2 + c z^2 - k`. Covers the sphere, the cylinder about the
/// x-axis and triaxial ellipsoids.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalQuadric {
    pub coeffs: Vec3,
    pub constant: f64,
}

impl DiagonalQuadric {
    pub fn sphere(radius: f64) -> Self {
        Self { coeffs: Vec3::new(1.0, 1.0, 1.0), constant: radius * radius }
    }

    /// `y^2 + z^2 - radius^2`, independent of `x`.
    pub fn cylinder(radius: f64) -> Self {
        Self { coeffs: Vec3::new(0.0, 1.0, 1.0), constant: radius * radius }
    }

    /// `x^2 + 2y^2 + 3z^2 - 1`.
    pub fn triaxial() -> Self {
        Self { coeffs: Vec3::new(1.0, 2.0, 3.0), constant: 1.0 }
    }

    /// Point at spherical-style parameters `(u, v)` on an ellipsoid.
    pub fn ellipsoid_point(&self, u: f64, v: f64) -> Option<Point3> {
        let Vec3 { x: a, y: b, z: c } = self.coeffs;
        if !(a > 0.0 && b > 0.0 && c > 0.0 && self.constant > 0.0) {
            return None;
        }
        let k = self.constant;
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Some(Point3::new(cu * (k / a).sqrt(), su * cv * (k / b).sqrt(), su * sv * (k / c).sqrt()))
    }
}

impl ScalarField3 for DiagonalQuadric {
    fn value(&self, p: Point3) -> f64 {
        let c = self.coeffs;
        c.x * p.x * p.x + c.y * p.y * p.y + c.z * p.z * p.z - self.constant
    }

    fn gradient(&self, p: Point3) -> Vec3 {
        let c = self.coeffs;
        Vec3::new(2.0 * c.x * p.x, 2.0 * c.y * p.y, 2.0 * c.z * p.z)
    }
}

/// `k * F`.
#[derive(Debug, Clone, Copy)]
pub struct Scaled<F> {
    pub factor: f64,
    pub field: F,
}

impl<F: ScalarField3> ScalarField3 for Scaled<F> {
    fn value(&self, p: Point3) -> f64 {
        self.factor * self.field.value(p)
    }

    fn gradient(&self, p: Point3) -> Vec3 {
        self.factor * self.field.gradient(p)
    }
}

/// A revolved oval whose radius is scaled by `1 + eps cos(lobes * theta)`,
/// breaking the rotational symmetry. Gradients are finite differences.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedOvoid {
    pub oval: CartesianOval,
    pub eps: f64,
    pub lobes: u32,
}

impl PerturbedOvoid {
    pub fn new(oval: CartesianOval, eps: f64, lobes: u32) -> Self {
        Self { oval, eps, lobes }
    }

    fn bump(&self, theta: f64) -> f64 {
        1.0 + self.eps * (self.lobes as f64 * theta).cos()
    }

    /// The surface point above profile point `p` at azimuth `theta`.
    pub fn surface_point(&self, p: Point2, theta: f64) -> Point3 {
        let r = p.y.abs() * self.bump(theta);
        let (s, c) = theta.sin_cos();
        Point3::new(p.x, r * c, r * s)
    }
}

impl ScalarField3 for PerturbedOvoid {
    fn value(&self, p: Point3) -> f64 {
        let theta = p.z.atan2(p.y);
        let r = p.y.hypot(p.z) / self.bump(theta);
        self.oval.bipolar_residual(Point2::new(p.x, r))
    }
}

/// Outward unit normal of a revolved surface: the profile normal rotated
/// into the meridian plane of `p`.
pub fn surface_normal(p: Point3, surf: &RevolvedSurface) -> Result<Vec3, RevolutionError> {
    let (q, r) = meridian(p);
    let residual = surf.profile.residual(q);
    if !(residual.abs() <= SURFACE_TOL) {
        return Err(RevolutionError::OffSurface { residual, tolerance: SURFACE_TOL });
    }
    let n2 = surf.profile.gradient(q).and_then(Vec2::try_normalize).ok_or(RevolutionError::OnAxis)?;
    if r == 0.0 && n2.y.abs() > SURFACE_TOL {
        return Err(RevolutionError::OnAxis);
    }
    lift(n2, p, r).try_normalize().ok_or(RevolutionError::OnAxis)
}

/// `det[N, P - F, P - F2] / (|P - F| |P - F2|)`: zero iff the normal lies in
/// the plane of the two focal rays.
pub fn coplanarity_residual(p: Point3, normal: Vec3, f: Point3, f2: Point3) -> Result<f64, RevolutionError> {
    let a = p - f;
    let b = p - f2;
    let scale = a.norm() * b.norm();
    if scale == 0.0 {
        return Err(RevolutionError::CoincidentPoint);
    }
    Ok(det3(normal, a, b) / scale)
}

/// `det[grad F(P); axis direction; P - axis anchor]`.
pub fn drucker_det(field: &impl ScalarField3, axis: &AxisLine, p: Point3) -> Result<f64, RevolutionError> {
    let g = field.gradient(p);
    if !g.is_finite() || g.norm() == 0.0 {
        return Err(RevolutionError::ZeroGradient);
    }
    Ok(det3(g, axis.direction, p - axis.anchor))
}

/// Largest `|F(P) - F(P')|` over `samples` deterministic pairs sharing the
/// axial coordinate and the distance to the axis, in the box
/// `|axial| <= 2`, `radius <= 2`.
///
/// `P'` is `P` turned a quarter about the axis or mirrored through a
/// meridian plane, so both points carry bit-identical frame coordinates up
/// to order and sign.
pub fn dependence_check(field: &impl ScalarField3, axis: &AxisLine, samples: usize) -> f64 {
    dependence_check_in(field, axis, samples, 2.0)
}

pub fn dependence_check_in(field: &impl ScalarField3, axis: &AxisLine, samples: usize, extent: f64) -> f64 {
    let (e1, e2) = axis.frame();
    let at = |t: f64, u: f64, v: f64| axis.anchor + t * axis.direction + u * e1 + v * e2;
    // additive recurrences, so the pairs are reproducible and well spread
    const G1: f64 = 0.618_033_988_749_894_9;
    const G2: f64 = 0.754_877_666_246_692_7;
    const G3: f64 = 0.569_840_290_998_053_3;
    let mut worst = 0.0f64;
    for k in 0..samples {
        let kf = k as f64;
        let t = extent * (2.0 * (kf * G1).fract() - 1.0);
        let r = extent * (kf * G2).fract();
        let (s, c) = (TAU * (kf * G3).fract()).sin_cos();
        let (u, v) = (r * c, r * s);
        let (u2, v2) = match k % 3 {
            0 => (-v, u),
            1 => (v, u),
            _ => (u, -v),
        };
        let d = (field.value(at(t, u, v)) - field.value(at(t, u2, v2))).abs();
        if d.is_finite() {
            worst = worst.max(d);
        }
    }
    worst
}

/// How many of the three 2x2 Jacobians of `u = d.(P - A)` and
/// `v = |P - A|^2` with respect to coordinate pairs exceed
/// [`JACOBIAN_FLOOR`]. They are the components of `2 d x (P - A)`.
pub fn jacobian_pair_rank(axis: &AxisLine, p: Point3) -> Result<usize, RevolutionError> {
    let j = 2.0 * axis.direction.cross(p - axis.anchor);
    let count = [j.x, j.y, j.z].iter().filter(|v| v.abs() > JACOBIAN_FLOOR).count();
    if count == 0 {
        return Err(RevolutionError::OnAxis);
    }
    Ok(count)
}

/// Distance between the normal line `P + s N` and the axis.
pub fn normal_axis_intersection(p: Point3, normal: Vec3, axis: &AxisLine) -> Result<f64, RevolutionError> {
    let m = normal.cross(axis.direction);
    let len = m.norm();
    if !(len >= 1e-12) {
        return Err(RevolutionError::ParallelToAxis);
    }
    Ok((p - axis.anchor).dot(m).abs() / len)
}

/// `grad F . (0, -z, y)`: the derivative along the circle of revolution
/// about the x-axis.
pub fn tangential_derivative(field: &impl ScalarField3, p: Point3) -> f64 {
    field.gradient(p).dot(Vec3::new(0.0, -p.z, p.y))
}

/// Revolves `count` profile points (cycled) by azimuths drawn from a seeded
/// generator.
pub fn revolved_samples(profile: &[Point2], count: usize, seed: u64) -> Vec<(Point2, f64)> {
    if profile.is_empty() {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|k| (profile[k % profile.len()], rng.gen_range(0.0..TAU))).collect()
}

/// Draws `count` points uniformly by area from the surface swept by the
/// ordered profile polyline: vertex `i` is picked with weight `|y_i| ds_i`,
/// the azimuth uniformly.
pub fn area_weighted_samples(profile: &[Point2], count: usize, seed: u64) -> Vec<(Point2, f64)> {
    let m = profile.len();
    if m < 2 {
        return revolved_samples(profile, count, seed);
    }
    let weights: Vec<f64> = (0..m)
        .map(|i| {
            let prev = profile[i.saturating_sub(1)];
            let next = profile[(i + 1).min(m - 1)];
            0.5 * (prev.distance(profile[i]) + profile[i].distance(next)) * profile[i].y.abs()
        })
        .collect();
    let Ok(pick) = WeightedIndex::new(&weights) else {
        return revolved_samples(profile, count, seed);
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (profile[pick.sample(&mut rng)], rng.gen_range(0.0..TAU))).collect()
}
