//! Cartesian-oval geometry.
//!
//! The oval is the locus `d1 + n * d2 = c` with the first focus `F` at the
//! origin and the second focus `F'` at `(b, 0)`. Only this branch is "the
//! oval": the rationalized quartic also vanishes on the other sign branches
//! `±d1 ± n*d2 = ±c`, and those are never sampled or traced here.
//!
//! Restricted to the focal segment, `d1 + n*d2` is linear with endpoint
//! values `n*b` (at `F`) and `b` (at `F'`), and it is at least `min(b, n*b)`
//! everywhere else. The locus is therefore empty for `c < min(b, n*b)` and
//! collapses onto a point or a segment when `c` equals that minimum.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Vec2};
use crate::roots::newton_bisect;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OvalError {
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("EmptyLocus: c = {c} is below min(b, n*b) = {min}")]
    EmptyLocus { c: f64, min: f64 },
    #[error("DegenerateLocus: c = {c} equals min(b, n*b) = {min}; the locus is a point or a segment")]
    DegenerateLocus { c: f64, min: f64 },
    #[error("AtFocus: point ({x}, {y}) coincides with a focus")]
    AtFocus { x: f64, y: f64 },
    #[error("OffCurve: bipolar residual {residual:e} exceeds tolerance {tolerance:e}")]
    OffCurve { residual: f64, tolerance: f64 },
    #[error("SolverFailure: no sign change found at polar angle {psi} where a root must exist")]
    SolverFailure { psi: f64 },
}

/// Numerical tolerances shared by the curve operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Maximum `|d1 + n*d2 - c|` for a point to count as on the curve.
    pub on_curve: f64,
    /// Maximum angle (radians) between two normals that should agree.
    pub normal_angle: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { on_curve: 1e-10, normal_angle: 1e-6 }
    }
}

/// Unvalidated `(b, n, c)` triple, the JSON shape `{"b":..,"n":..,"c":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvalParams {
    pub b: f64,
    pub n: f64,
    pub c: f64,
}

impl OvalParams {
    pub fn validate(self) -> Result<CartesianOval, OvalError> {
        CartesianOval::new(self.b, self.n, self.c)
    }
}

/// A validated, nondegenerate cartesian oval `d1 + n*d2 = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OvalParams", into = "OvalParams")]
pub struct CartesianOval {
    b: f64,
    n: f64,
    c: f64,
}

impl TryFrom<OvalParams> for CartesianOval {
    type Error = OvalError;
    fn try_from(p: OvalParams) -> Result<Self, Self::Error> {
        p.validate()
    }
}

impl From<CartesianOval> for OvalParams {
    fn from(o: CartesianOval) -> Self {
        OvalParams { b: o.b, n: o.n, c: o.c }
    }
}

/// Which foci lie inside the region `d1 + n*d2 < c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Enclosure {
    /// `F` inside, `F'` outside or on the curve.
    FirstOnly,
    /// `F` outside or on the curve, `F'` inside.
    SecondOnly,
    BothInside,
}

/// A curve point with its outward unit normal and its polar angle about `F`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OvalSample {
    pub point: Point2,
    pub normal: Vec2,
    pub psi: f64,
}

/// Intersections of a ray from `F` with the oval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayRoots {
    /// First crossing (smallest positive radius).
    pub near: f64,
    /// Exit crossing when `F` lies outside the oval.
    pub far: Option<f64>,
}

impl CartesianOval {
    pub fn new(b: f64, n: f64, c: f64) -> Result<Self, OvalError> {
        if !(b.is_finite() && n.is_finite() && c.is_finite()) {
            return Err(OvalError::InvalidParameter(format!("parameters must be finite (b = {b}, n = {n}, c = {c})")));
        }
        if b < 0.0 {
            return Err(OvalError::InvalidParameter(format!("b must be >= 0, got {b}")));
        }
        if n <= 0.0 {
            return Err(OvalError::InvalidParameter(format!("n must be > 0, got {n}")));
        }
        if c <= 0.0 {
            return Err(OvalError::InvalidParameter(format!("c must be > 0, got {c}")));
        }
        let min = b.min(n * b);
        if c < min {
            return Err(OvalError::EmptyLocus { c, min });
        }
        if c == min {
            return Err(OvalError::DegenerateLocus { c, min });
        }
        Ok(Self { b, n, c })
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn params(&self) -> OvalParams {
        (*self).into()
    }

    pub fn focus(&self) -> Point2 {
        Point2::ZERO
    }

    pub fn second_focus(&self) -> Point2 {
        Point2::new(self.b, 0.0)
    }

    /// The two focal distances `(d1, d2)` of `p`.
    #[inline]
    pub fn focal_distances(&self, p: Point2) -> (f64, f64) {
        (p.x.hypot(p.y), (p.x - self.b).hypot(p.y))
    }

    /// `d1 + n*d2 - c`; zero exactly on the oval.
    pub fn bipolar_residual(&self, p: Point2) -> f64 {
        let (d1, d2) = self.focal_distances(p);
        d1 + self.n * d2 - self.c
    }

    /// Left minus right side of the rationalized quartic
    /// `[(1-n^2)(x^2+y^2) + 2n^2 b x + c^2 - n^2 b^2]^2 = 4c^2(x^2+y^2)`.
    pub fn quartic_residual(&self, p: Point2) -> f64 {
        let (b, n, c) = (self.b, self.n, self.c);
        let n2 = n * n;
        let s = p.x * p.x + p.y * p.y;
        let inner = (1.0 - n2) * s + 2.0 * n2 * b * p.x + c * c - n2 * b * b;
        inner * inner - 4.0 * c * c * s
    }

    /// Gradient of `d1 + n*d2`, i.e. `u1 + n*u2` with `u1`, `u2` the unit
    /// vectors from each focus to `p`.
    pub fn gradient(&self, p: Point2) -> Result<Vec2, OvalError> {
        let (d1, d2) = self.focal_distances(p);
        if d1 == 0.0 || d2 == 0.0 {
            return Err(OvalError::AtFocus { x: p.x, y: p.y });
        }
        let u1 = p / d1;
        let u2 = (p - self.second_focus()) / d2;
        Ok(u1 + self.n * u2)
    }

    /// Outward unit normal at a curve point, using the default on-curve
    /// tolerance.
    pub fn normal_at(&self, p: Point2) -> Result<Vec2, OvalError> {
        self.normal_at_with(p, Tolerances::default().on_curve)
    }

    pub fn normal_at_with(&self, p: Point2, on_curve_tol: f64) -> Result<Vec2, OvalError> {
        let residual = self.bipolar_residual(p);
        if !(residual.abs() <= on_curve_tol) {
            return Err(OvalError::OffCurve { residual, tolerance: on_curve_tol });
        }
        let g = self.gradient(p)?;
        g.try_normalize().ok_or(OvalError::AtFocus { x: p.x, y: p.y })
    }

    pub fn enclosure(&self) -> Enclosure {
        let f_inside = self.n * self.b < self.c;
        let f2_inside = self.b < self.c;
        match (f_inside, f2_inside) {
            (true, true) => Enclosure::BothInside,
            (true, false) => Enclosure::FirstOnly,
            (false, _) => Enclosure::SecondOnly,
        }
    }

    /// Half-angle of the cone of rays from `F` that meet the oval, or `None`
    /// when `F` is enclosed and every direction meets it.
    ///
    /// With `F` outside (which forces `n > 1`) the minimum of `d1 + n*d2`
    /// along the ray at angle `psi` is `n b cos(psi - alpha)` with
    /// `cos(alpha) = 1/n`, valid for `|psi| <= alpha`.
    pub fn aperture(&self) -> Option<f64> {
        if self.n * self.b < self.c {
            return None;
        }
        let alpha = (1.0 / self.n).acos();
        let cut = (self.c / (self.n * self.b)).clamp(-1.0, 1.0).acos();
        Some(alpha - cut)
    }

    /// `g(r) = r + n*sqrt(r^2 - 2br cos(psi) + b^2) - c` and `g'(r)`.
    #[inline]
    fn radial(&self, r: f64, cos_psi: f64, sin_psi: f64) -> (f64, f64) {
        let u = r - self.b * cos_psi;
        let d2 = u.hypot(self.b * sin_psi);
        let g = r + self.n * d2 - self.c;
        let dg = if d2 > 0.0 { 1.0 + self.n * u / d2 } else { 1.0 - self.n };
        (g, dg)
    }

    /// Radii at which the ray from `F` at polar angle `psi` crosses the oval.
    ///
    /// `Ok(None)` means the ray misses; `F` itself (radius 0, when `c = n b`)
    /// is never reported.
    pub fn ray_roots(&self, psi: f64) -> Result<Option<RayRoots>, OvalError> {
        let (sin_psi, cos_psi) = psi.sin_cos();
        let f = |r: f64| self.radial(r, cos_psi, sin_psi);
        let ftol = 1e-15 * self.c.max(self.n * self.b).max(1.0);
        let solve =
            |lo: f64, hi: f64| newton_bisect(f, lo, hi, ftol, 200).map_err(|_| OvalError::SolverFailure { psi });
        // beyond this radius g > 0 since d2 >= r - b
        let r_hi = (self.c + self.n * self.b) / (1.0 + self.n) * (1.0 + 1e-12) + 1e-300;
        let g0 = self.n * self.b - self.c;
        if g0 < 0.0 {
            let near = solve(0.0, r_hi)?;
            return Ok(Some(RayRoots { near, far: None }));
        }
        if self.n <= 1.0 {
            return Ok(None);
        }
        let r_min = self.b * cos_psi - self.b * sin_psi.abs() / (self.n * self.n - 1.0).sqrt();
        if r_min <= 0.0 {
            return Ok(None);
        }
        let (g_min, _) = f(r_min);
        if g_min > 0.0 {
            return Ok(None);
        }
        if g_min == 0.0 {
            return Ok(Some(RayRoots { near: r_min, far: None }));
        }
        let far = solve(r_min, r_hi)?;
        if g0 == 0.0 {
            return Ok(Some(RayRoots { near: far, far: None }));
        }
        let near = solve(0.0, r_min)?;
        Ok(Some(RayRoots { near, far: Some(far) }))
    }

    fn sample_at(&self, psi: f64, r: f64) -> Result<OvalSample, OvalError> {
        let (s, c) = psi.sin_cos();
        let point = Point2::new(r * c, r * s);
        let normal = self.normal_at(point)?;
        Ok(OvalSample { point, normal, psi })
    }

    /// Samples the part of the oval first met by rays from `F`, over the
    /// uniform grid `psi_k = pi (2k - count) / count`, `k = 0..count`.
    ///
    /// Angles whose ray misses the oval are omitted. The grid is exactly
    /// symmetric, so the samples at `psi` and `-psi` mirror each other.
    pub fn sample_curve(&self, count: usize) -> Result<Vec<OvalSample>, OvalError> {
        if count < 2 {
            return Err(OvalError::InvalidParameter(format!("count must be >= 2, got {count}")));
        }
        let m = count as f64;
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let psi = PI * (2.0 * k as f64 - m) / m;
            if let Some(roots) = self.ray_roots(psi)? {
                out.push(self.sample_at(psi, roots.near)?);
            }
        }
        Ok(out)
    }

    /// Near-side samples at `count` angles evenly spaced over `[lo, hi]`
    /// (endpoints included).
    pub fn sample_arc(&self, count: usize, lo: f64, hi: f64) -> Result<Vec<OvalSample>, OvalError> {
        let mut out = Vec::with_capacity(count);
        for psi in linspace(lo, hi, count) {
            if let Some(roots) = self.ray_roots(psi)? {
                out.push(self.sample_at(psi, roots.near)?);
            }
        }
        Ok(out)
    }

    /// The whole closed oval as an ordered loop, including the far side
    /// when `F` is outside. Intended for plotting.
    pub fn outline(&self, count: usize) -> Result<Vec<OvalSample>, OvalError> {
        match self.aperture() {
            None => self.sample_curve(count.max(2)),
            Some(ap) => {
                let half = (count / 2).max(2);
                let edge = ap * (1.0 - 1e-9);
                let mut near = Vec::with_capacity(half);
                let mut far = Vec::with_capacity(half);
                for psi in linspace(-edge, edge, half) {
                    if let Some(roots) = self.ray_roots(psi)? {
                        near.push(self.sample_at(psi, roots.near)?);
                        if let Some(r) = roots.far {
                            far.push(self.sample_at(psi, r)?);
                        }
                    }
                }
                far.reverse();
                near.extend(far);
                Ok(near)
            }
        }
    }
}

/// `count` evenly spaced values over `[lo, hi]`; a single value yields `lo`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let step = if count > 1 { (hi - lo) / (count - 1) as f64 } else { 0.0 };
    (0..count).map(move |k| if k + 1 == count && count > 1 { hi } else { lo + step * k as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oval(b: f64, n: f64, c: f64) -> CartesianOval {
        CartesianOval::new(b, n, c).unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(CartesianOval::new(1.0, 2.0, 1.5).is_ok());
        assert!(matches!(CartesianOval::new(1.0, 2.0, 0.5), Err(OvalError::EmptyLocus { .. })));
        assert!(matches!(CartesianOval::new(1.0, 1.0, 1.0), Err(OvalError::DegenerateLocus { .. })));
        assert!(matches!(CartesianOval::new(1.0, 2.0, 1.0), Err(OvalError::DegenerateLocus { .. })));
        for (b, n, c) in [
            (-1.0, 2.0, 1.0),
            (1.0, 0.0, 1.0),
            (1.0, -2.0, 1.0),
            (1.0, 2.0, 0.0),
            (f64::NAN, 1.0, 1.0),
            (1.0, f64::INFINITY, 3.0),
        ] {
            assert!(matches!(CartesianOval::new(b, n, c), Err(OvalError::InvalidParameter(_))), "{b} {n} {c}");
        }
        // coincident foci: every c > 0 gives the circle of radius c / (1 + n)
        assert!(CartesianOval::new(0.0, 2.0, 1.0).is_ok());
    }

    #[test]
    fn error_messages_name_the_rule() {
        let msg = CartesianOval::new(1.0, 2.0, 0.5).unwrap_err().to_string();
        assert!(msg.starts_with("EmptyLocus"), "{msg}");
    }

    #[test]
    fn json_shape_and_validation_on_decode() {
        let o: CartesianOval = serde_json::from_str(r#"{"b":1.0,"n":2.0,"c":1.5}"#).unwrap();
        assert_eq!(o, oval(1.0, 2.0, 1.5));
        let back = serde_json::to_string(&o).unwrap();
        assert_eq!(back, r#"{"b":1.0,"n":2.0,"c":1.5}"#);
        assert!(serde_json::from_str::<CartesianOval>(r#"{"b":1.0,"n":2.0,"c":0.5}"#).is_err());
    }

    #[test]
    fn bipolar_residual_examples() {
        assert_eq!(oval(1.0, 2.0, 2.0).bipolar_residual(Point2::new(0.0, 0.0)), 0.0);
        assert_eq!(oval(1.0, 2.0, 1.5).bipolar_residual(Point2::new(0.5, 0.0)), 0.0);
        // 50-digit evaluation of sqrt(0.41) + 2 sqrt(0.41) - 1.5
        let r = oval(1.0, 2.0, 1.5).bipolar_residual(Point2::new(0.5, 0.4));
        assert!((r - 0.420_937_271_229_854_6).abs() < 1e-15, "{r}");
    }

    #[test]
    fn quartic_residual_examples() {
        let o = oval(1.0, 2.0, 1.5);
        assert_eq!(o.quartic_residual(Point2::new(0.5, 0.0)), 0.0);
        assert_eq!(oval(1.0, 2.0, 2.0).quartic_residual(Point2::ZERO), 0.0);
        // (-9.75)^2 - 72, exact in binary
        assert_eq!(o.quartic_residual(Point2::new(2.0, 2.0)), 23.0625);
        let p = Point2::new(0.3, 0.7);
        assert_eq!(o.quartic_residual(p), o.quartic_residual(Point2::new(p.x, -p.y)));
    }

    #[test]
    fn normal_examples() {
        let n = oval(1.0, 2.0, 1.5).normal_at(Point2::new(0.5, 0.0)).unwrap();
        assert_eq!(n, Vec2::new(-1.0, 0.0));
        // x + 0.5 (x - 1) = 2 gives x = 5/3
        let n = oval(1.0, 0.5, 2.0).normal_at(Point2::new(5.0 / 3.0, 0.0)).unwrap();
        assert_eq!(n, Vec2::new(1.0, 0.0));
    }

    #[test]
    fn normal_errors() {
        let o = oval(1.0, 2.0, 2.0);
        assert!(matches!(o.normal_at(Point2::ZERO), Err(OvalError::AtFocus { .. })));
        assert!(matches!(o.normal_at(Point2::new(0.3, 0.3)), Err(OvalError::OffCurve { .. })));
    }

    #[test]
    fn on_axis_samples() {
        let o = oval(1.0, 2.0, 1.5);
        let roots = o.ray_roots(0.0).unwrap().unwrap();
        assert!((roots.near - 0.5).abs() < 1e-15);
        // the ray leaves the oval again at r + 2(r - 1) = 1.5
        assert!((roots.far.unwrap() - 7.0 / 6.0).abs() < 1e-15);

        let o = oval(1.0, 2.0, 4.0);
        let roots = o.ray_roots(PI).unwrap().unwrap();
        assert!((roots.near - 2.0 / 3.0).abs() < 1e-15);
        assert!(roots.far.is_none());
        let s = o.sample_curve(8).unwrap();
        assert_eq!(s[0].psi, -PI);
        assert!((s[0].point.x + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn grid_contains_psi_zero() {
        let s = oval(1.0, 2.0, 1.5).sample_curve(256).unwrap();
        let axial = s.iter().find(|s| s.psi == 0.0).unwrap();
        assert_eq!(axial.point, Point2::new(0.5, 0.0));
    }

    #[test]
    fn mirror_symmetry_is_exact() {
        for o in [oval(1.0, 2.0, 1.5), oval(1.0, 1.5, 2.0), oval(2.0, 0.5, 1.5)] {
            let s = o.sample_curve(200).unwrap();
            for a in s.iter().filter(|a| a.psi != -PI) {
                let b = s.iter().find(|b| b.psi == -a.psi).expect("mirror angle present");
                assert_eq!(a.point.x, b.point.x);
                assert_eq!(a.point.y, -b.point.y);
            }
        }
    }

    #[test]
    fn coincident_foci_give_circle() {
        let o = oval(0.0, 2.0, 1.0);
        for s in o.sample_curve(64).unwrap() {
            assert!((s.point.norm() - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn aperture_bounds_the_sampled_angles() {
        let o = oval(1.0, 1.5, 1.2);
        let ap = o.aperture().unwrap();
        assert!(o.ray_roots(ap * 0.999).unwrap().is_some());
        assert!(o.ray_roots(ap * 1.001).unwrap().is_none());
        assert!(oval(1.0, 2.0, 4.0).aperture().is_none());
    }

    #[test]
    fn focus_on_curve_reports_far_root() {
        // c = n b puts F on the oval; the ray's first nontrivial crossing is returned
        let o = oval(1.0, 2.0, 2.0);
        let roots = o.ray_roots(0.1).unwrap().unwrap();
        assert!(roots.near > 0.1);
        assert!(o.bipolar_residual(Point2::from_angle(0.1) * roots.near).abs() < 1e-13);
    }

    #[test]
    fn outline_is_a_closed_loop_on_the_curve() {
        let o = oval(1.0, 2.0, 1.5);
        let loop_pts = o.outline(400).unwrap();
        assert!(loop_pts.len() > 300);
        for w in loop_pts.windows(2) {
            assert!(w[0].point.distance(w[1].point) < 0.1);
        }
        for s in &loop_pts {
            assert!(o.bipolar_residual(s.point).abs() < 1e-10);
        }
    }

    #[test]
    fn linspace_endpoints() {
        let v: Vec<f64> = linspace(-1.0, 1.0, 5).collect();
        assert_eq!(v, vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(linspace(0.3, 1.0, 1).collect::<Vec<_>>(), vec![0.3]);
    }
}
