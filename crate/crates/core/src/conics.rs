//! Limiting cases of the oval: unit index, source at infinity, and both
//! foci at infinity.
//!
//! Central conics are stored in the signed form
//! `(x - cx)^2 / ax + y^2 / ay = 1`, where a negative `ay` encodes a
//! hyperbola. Both the unit-index conic and the source-at-infinity conic are
//! read off directly in that form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Vec2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConicError {
    #[error("Degenerate: c = b collapses the conic onto the focal segment")]
    Degenerate,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("NoIntersection: the ray misses the curve")]
    NoIntersection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConicKind {
    Ellipse,
    Hyperbola,
    Parabola,
    Segment,
    VerticalLine,
}

/// A canonical conic (or degenerate limit) with its axis along `x`.
///
/// Only the fields meaningful for `kind` are populated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicSpec {
    pub kind: ConicKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axis_sq_x: Option<f64>,
    /// Signed: negative for a hyperbola.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semi_axis_sq_y: Option<f64>,
    /// The `4b` of `y^2 = 4bx`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parabola_4b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_ends: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line_x: Option<f64>,
    /// Absent for the vertical line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eccentricity: Option<f64>,
}

impl ConicSpec {
    fn blank(kind: ConicKind) -> Self {
        Self {
            kind,
            center_x: None,
            semi_axis_sq_x: None,
            semi_axis_sq_y: None,
            parabola_4b: None,
            segment_ends: None,
            line_x: None,
            eccentricity: None,
        }
    }

    /// Central conic from its signed squared semi-axes. The eccentricity is
    /// computed from the axes as `sqrt(1 - ay/ax)`.
    pub fn central(center_x: f64, ax: f64, ay: f64) -> Result<Self, ConicError> {
        if !(center_x.is_finite() && ax.is_finite() && ay.is_finite()) || ax <= 0.0 || ay == 0.0 {
            return Err(ConicError::InvalidParameter(format!(
                "central conic needs finite center, ax > 0 and ay != 0 (ax = {ax}, ay = {ay})"
            )));
        }
        let kind = if ay > 0.0 { ConicKind::Ellipse } else { ConicKind::Hyperbola };
        Ok(Self {
            center_x: Some(center_x),
            semi_axis_sq_x: Some(ax),
            semi_axis_sq_y: Some(ay),
            eccentricity: Some((1.0 - ay / ax).max(0.0).sqrt()),
            ..Self::blank(kind)
        })
    }

    pub fn parabola(four_b: f64) -> Self {
        Self { parabola_4b: Some(four_b), eccentricity: Some(1.0), ..Self::blank(ConicKind::Parabola) }
    }

    pub fn segment(from: f64, to: f64) -> Self {
        Self { segment_ends: Some((from, to)), eccentricity: Some(1.0), ..Self::blank(ConicKind::Segment) }
    }

    pub fn vertical_line(x: f64) -> Self {
        Self { line_x: Some(x), ..Self::blank(ConicKind::VerticalLine) }
    }

    /// Checks that the populated fields match `kind`. Used after decoding.
    pub fn validate(self) -> Result<Self, ConicError> {
        let bad = |what: &str| Err(ConicError::InvalidParameter(format!("{:?}: {what}", self.kind)));
        let finite = |v: Option<f64>| v.is_some_and(f64::is_finite);
        match self.kind {
            ConicKind::Ellipse | ConicKind::Hyperbola => {
                let (Some(cx), Some(ax), Some(ay)) = (self.center_x, self.semi_axis_sq_x, self.semi_axis_sq_y) else {
                    return bad("center_x, semi_axis_sq_x and semi_axis_sq_y are required");
                };
                let rebuilt = Self::central(cx, ax, ay)?;
                if rebuilt.kind != self.kind {
                    return bad("sign of semi_axis_sq_y does not match the kind");
                }
                Ok(rebuilt)
            }
            ConicKind::Parabola if finite(self.parabola_4b) && self.parabola_4b != Some(0.0) => {
                Ok(Self::parabola(self.parabola_4b.unwrap_or_default()))
            }
            ConicKind::Parabola => bad("parabola_4b must be finite and nonzero"),
            ConicKind::Segment => match self.segment_ends {
                Some((a, b)) if a.is_finite() && b.is_finite() => Ok(Self::segment(a, b)),
                _ => bad("segment_ends must be finite"),
            },
            ConicKind::VerticalLine if finite(self.line_x) => Ok(Self::vertical_line(self.line_x.unwrap_or_default())),
            ConicKind::VerticalLine => bad("line_x must be finite"),
        }
    }

    /// Signed residual: zero on the curve. Central conics use
    /// `(x-cx)^2/ax + y^2/ay - 1`; the parabola `y^2 - 4b x`; the line
    /// `x - line_x`; the segment the Euclidean distance to it.
    pub fn residual(&self, p: Point2) -> f64 {
        match self.kind {
            ConicKind::Ellipse | ConicKind::Hyperbola => {
                let (cx, ax, ay) = self.axes();
                (p.x - cx).powi(2) / ax + p.y * p.y / ay - 1.0
            }
            ConicKind::Parabola => p.y * p.y - self.parabola_4b.unwrap_or(0.0) * p.x,
            ConicKind::VerticalLine => p.x - self.line_x.unwrap_or(0.0),
            ConicKind::Segment => {
                let (a, b) = self.segment_ends.unwrap_or((0.0, 0.0));
                let x = p.x.clamp(a.min(b), a.max(b));
                Point2::new(x, 0.0).distance(p)
            }
        }
    }

    fn axes(&self) -> (f64, f64, f64) {
        (self.center_x.unwrap_or(0.0), self.semi_axis_sq_x.unwrap_or(1.0), self.semi_axis_sq_y.unwrap_or(1.0))
    }

    /// Gradient of [`ConicSpec::residual`]; `None` for the segment.
    pub fn gradient(&self, p: Point2) -> Option<Vec2> {
        match self.kind {
            ConicKind::Ellipse | ConicKind::Hyperbola => {
                let (cx, ax, ay) = self.axes();
                Some(Vec2::new(2.0 * (p.x - cx) / ax, 2.0 * p.y / ay))
            }
            ConicKind::Parabola => Some(Vec2::new(-self.parabola_4b.unwrap_or(0.0), 2.0 * p.y)),
            ConicKind::VerticalLine => Some(Vec2::new(1.0, 0.0)),
            ConicKind::Segment => None,
        }
    }

    /// Unit normal from the residual gradient; `None` for the segment or at
    /// a singular point.
    pub fn normal(&self, p: Point2) -> Option<Vec2> {
        self.gradient(p)?.try_normalize()
    }

    /// First crossing of the horizontal ray `y = height` travelling in `+x`
    /// from `x = -inf`.
    pub fn first_hit_from_left(&self, height: f64) -> Result<Point2, ConicError> {
        let x = match self.kind {
            ConicKind::Ellipse | ConicKind::Hyperbola => {
                let (cx, ax, ay) = self.axes();
                let q = 1.0 - height * height / ay;
                if !(q >= 0.0) {
                    return Err(ConicError::NoIntersection);
                }
                cx - (ax * q).sqrt()
            }
            ConicKind::Parabola => {
                let k = self.parabola_4b.unwrap_or(0.0);
                if k <= 0.0 {
                    return Err(ConicError::NoIntersection);
                }
                height * height / k
            }
            ConicKind::VerticalLine => self.line_x.unwrap_or(0.0),
            ConicKind::Segment => {
                if height != 0.0 {
                    return Err(ConicError::NoIntersection);
                }
                let (a, b) = self.segment_ends.unwrap_or((0.0, 0.0));
                a.min(b)
            }
        };
        Ok(Point2::new(x, height))
    }

    /// Points along the curve. Ellipses are sampled all the way round;
    /// hyperbolas on the branch whose vertex is nearest `vertex_hint`, out
    /// to `|y| = span`; parabolas and the line for `|y| <= span`.
    pub fn sample(&self, count: usize, vertex_hint: f64, span: f64) -> Vec<Point2> {
        let count = count.max(2);
        let ts = crate::oval::linspace(-1.0, 1.0, count);
        match self.kind {
            ConicKind::Ellipse => {
                let (cx, ax, ay) = self.axes();
                let (a, b) = (ax.sqrt(), ay.sqrt());
                ts.map(|t| {
                    let th = std::f64::consts::PI * t;
                    Point2::new(cx + a * th.cos(), b * th.sin())
                })
                .collect()
            }
            ConicKind::Hyperbola => {
                let (cx, ax, ay) = self.axes();
                let (a, b) = (ax.sqrt(), (-ay).sqrt());
                let side = if (cx + a - vertex_hint).abs() < (cx - a - vertex_hint).abs() { 1.0 } else { -1.0 };
                let t_max = (span / b).asinh();
                ts.map(|t| {
                    let u = t * t_max;
                    Point2::new(cx + side * a * u.cosh(), b * u.sinh())
                })
                .collect()
            }
            ConicKind::Parabola => {
                let k = self.parabola_4b.unwrap_or(1.0);
                ts.map(|t| {
                    let y = t * span;
                    Point2::new(y * y / k, y)
                })
                .collect()
            }
            ConicKind::VerticalLine => {
                let x = self.line_x.unwrap_or(0.0);
                ts.map(|t| Point2::new(x, t * span)).collect()
            }
            ConicKind::Segment => {
                let (a, b) = self.segment_ends.unwrap_or((0.0, 0.0));
                ts.map(|t| Point2::new(a + (b - a) * 0.5 * (t + 1.0), 0.0)).collect()
            }
        }
    }
}

/// The conic traced by `d1 ± d2 = c` with foci `(0,0)` and `(b,0)`:
/// `(x - b/2)^2 / (c/2)^2 + y^2 / ((c^2 - b^2)/4) = 1`.
///
/// An ellipse for `c > b` and a hyperbola for `c < b`. Both signs of the
/// unit index give the same quadric, so `sign` only has to be `±1`.
pub fn conic_n_unity(b: f64, c: f64, sign: i8) -> Result<ConicSpec, ConicError> {
    if sign != 1 && sign != -1 {
        return Err(ConicError::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
    }
    if !(b.is_finite() && c.is_finite()) || b < 0.0 || c <= 0.0 {
        return Err(ConicError::InvalidParameter(format!("need b >= 0 and c > 0 (b = {b}, c = {c})")));
    }
    if c == b {
        return Err(ConicError::Degenerate);
    }
    let mut spec = ConicSpec::central(b / 2.0, c * c / 4.0, (c * c - b * b) / 4.0)?;
    // focal half-distance over semi-major axis, exact for both kinds
    spec.eccentricity = Some(b / c);
    Ok(spec)
}

/// The refracting curve for a beam from `x = -inf` focused at `(b, 0)`,
/// normalized to pass through the origin (`c = n b`).
///
/// * `n^2 != 1`: `(x - nb/(n+1))^2 / (nb/(n+1))^2 + y^2 / (b^2 (n-1)/(n+1)) = 1`
/// * `n = 1`: the segment `0 <= x <= b`
/// * `n = -1`: the parabola `y^2 = 4 b x`
pub fn conic_infinite_source(b: f64, n: f64) -> Result<ConicSpec, ConicError> {
    if !(b.is_finite() && b > 0.0) {
        return Err(ConicError::InvalidParameter(format!("b must be finite and > 0, got {b}")));
    }
    if !n.is_finite() || n == 0.0 {
        return Err(ConicError::InvalidParameter(format!("n must be finite and nonzero, got {n}")));
    }
    if n == 1.0 {
        return Ok(ConicSpec::segment(0.0, b));
    }
    if n == -1.0 {
        return Ok(ConicSpec::parabola(4.0 * b));
    }
    let center = n * b / (n + 1.0);
    ConicSpec::central(center, center * center, b * b * (n - 1.0) / (n + 1.0))
}

/// Both foci at infinity: the flat interface `x = 0`.
pub fn both_infinite_curve() -> ConicSpec {
    ConicSpec::vertical_line(0.0)
}

/// `dist(P, (b,0)) - dist(P, x = c) / |n|`, zero on `x + n*sqrt((b-x)^2+y^2) = c`.
///
/// Squaring the curve equation gives `(c - x)^2 = n^2 ((b-x)^2 + y^2)`, so
/// the directrix is the line `x = c` and the focus-to-directrix distance
/// ratio is `1/|n|`.
pub fn focus_directrix_residual(p: Point2, b: f64, n: f64, c: f64) -> Result<f64, ConicError> {
    check_directrix_params(b, n, c)?;
    Ok(p.distance(Point2::new(b, 0.0)) - (p.x - c).abs() / n.abs())
}

/// `dist(P, (b,0)) / dist(P, x = c)`; constant `1/|n|` along the curve.
pub fn focus_directrix_ratio(p: Point2, b: f64, n: f64, c: f64) -> Result<f64, ConicError> {
    check_directrix_params(b, n, c)?;
    Ok(p.distance(Point2::new(b, 0.0)) / (p.x - c).abs())
}

fn check_directrix_params(b: f64, n: f64, c: f64) -> Result<(), ConicError> {
    if !(b.is_finite() && n.is_finite() && c.is_finite()) {
        return Err(ConicError::InvalidParameter("parameters must be finite".into()));
    }
    if n == 1.0 || n == 0.0 {
        return Err(ConicError::InvalidParameter(format!("n must differ from 0 and 1, got {n}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oval::CartesianOval;

    #[test]
    fn unit_index_examples() {
        let e = conic_n_unity(1.0, 2.0, 1).unwrap();
        assert_eq!(e.kind, ConicKind::Ellipse);
        assert_eq!(e.center_x, Some(0.5));
        assert_eq!(e.semi_axis_sq_x, Some(1.0));
        assert_eq!(e.semi_axis_sq_y, Some(0.75));
        assert_eq!(e.eccentricity, Some(0.5));

        let h = conic_n_unity(2.0, 1.0, -1).unwrap();
        assert_eq!(h.kind, ConicKind::Hyperbola);
        assert_eq!(h.semi_axis_sq_y, Some(-0.75));
        assert!(h.eccentricity.unwrap() > 1.0);

        let circle = conic_n_unity(0.0, 2.0, 1).unwrap();
        assert_eq!(circle.center_x, Some(0.0));
        assert_eq!(circle.semi_axis_sq_x, Some(1.0));
        assert_eq!(circle.semi_axis_sq_y, Some(1.0));
        assert_eq!(circle.eccentricity, Some(0.0));

        assert_eq!(conic_n_unity(1.0, 1.0, 1), Err(ConicError::Degenerate));
        assert!(conic_n_unity(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn unit_index_conic_matches_oval_zero_set() {
        let (b, c) = (1.0, 2.0);
        let conic = conic_n_unity(b, c, 1).unwrap();
        let oval = CartesianOval::new(b, 1.0, c).unwrap();
        for s in oval.sample_curve(1000).unwrap() {
            assert!(conic.residual(s.point).abs() < 1e-8);
        }
        for p in conic.sample(1000, 0.0, 0.0) {
            assert!(oval.bipolar_residual(p).abs() < 1e-8);
        }
    }

    #[test]
    fn unit_index_hyperbola_contains_difference_branch() {
        // |d1 - d2| = c on the hyperbola
        let (b, c) = (2.0, 1.0);
        let h = conic_n_unity(b, c, -1).unwrap();
        for p in h.sample(200, 2.0, 3.0) {
            let d = p.norm() - p.distance(Point2::new(b, 0.0));
            assert!((d.abs() - c).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn infinite_source_examples() {
        let e = conic_infinite_source(1.0, 2.0).unwrap();
        assert_eq!(e.kind, ConicKind::Ellipse);
        assert!((e.center_x.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.semi_axis_sq_x.unwrap() - 4.0 / 9.0).abs() < 1e-15);
        assert!((e.semi_axis_sq_y.unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.eccentricity.unwrap() - 0.5).abs() < 1e-15);

        let s = conic_infinite_source(1.0, 1.0).unwrap();
        assert_eq!(s.kind, ConicKind::Segment);
        assert_eq!(s.segment_ends, Some((0.0, 1.0)));

        let p = conic_infinite_source(1.0, -1.0).unwrap();
        assert_eq!(p.kind, ConicKind::Parabola);
        assert_eq!(p.parabola_4b, Some(4.0));
        assert_eq!(p.eccentricity, Some(1.0));

        assert_eq!(conic_infinite_source(1.0, 0.5).unwrap().kind, ConicKind::Hyperbola);
        assert!(conic_infinite_source(1.0, 0.0).is_err());
        assert!(conic_infinite_source(0.0, 2.0).is_err());
    }

    #[test]
    fn parabola_json() {
        let json = serde_json::to_string(&conic_infinite_source(1.0, -1.0).unwrap()).unwrap();
        assert_eq!(json, r#"{"kind":"Parabola","parabola_4b":4.0,"eccentricity":1.0}"#);
        let back: ConicSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.validate().unwrap(), conic_infinite_source(1.0, -1.0).unwrap());
    }

    #[test]
    fn decoded_conic_is_checked() {
        let bad: ConicSpec =
            serde_json::from_str(r#"{"kind":"Ellipse","center_x":0.0,"semi_axis_sq_x":1.0,"semi_axis_sq_y":-1.0}"#)
                .unwrap();
        assert!(bad.validate().is_err());
        let bad: ConicSpec = serde_json::from_str(r#"{"kind":"Parabola"}"#).unwrap();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn origin_branch_satisfies_curve_equation() {
        for n in [2.0, 3.0, 0.5, -2.0, -0.5, 1.5] {
            let b = 1.0;
            let conic = conic_infinite_source(b, n).unwrap();
            for p in conic.sample(300, 0.0, 2.0) {
                let q = p.x + n * (b - p.x).hypot(p.y);
                assert!((q - n * b).abs() < 1e-10, "n = {n}: {q}");
            }
        }
    }

    #[test]
    fn directrix_ratio_is_reciprocal_index() {
        let (b, n) = (1.0, 2.0);
        let c = n * b;
        let conic = conic_infinite_source(b, n).unwrap();
        for p in conic.sample(200, 0.0, 0.0) {
            assert!((focus_directrix_ratio(p, b, n, c).unwrap() - 0.5).abs() < 1e-12);
            assert!(focus_directrix_residual(p, b, n, c).unwrap().abs() < 1e-12);
        }
        // right vertex of the ellipse
        let v = Point2::new(4.0 / 3.0, 0.0);
        assert!((focus_directrix_ratio(v, b, n, c).unwrap() - 0.5).abs() < 1e-15);
        // origin is on the curve when c = n b
        assert!(focus_directrix_residual(Point2::ZERO, b, n, c).unwrap().abs() < 1e-15);
        assert!(focus_directrix_residual(Point2::ZERO, b, 1.0, c).is_err());
    }

    #[test]
    fn both_infinite_is_the_y_axis() {
        let l = both_infinite_curve();
        assert_eq!(l.kind, ConicKind::VerticalLine);
        assert_eq!(l.line_x, Some(0.0));
        assert_eq!(l.residual(Point2::new(0.0, 3.0)), 0.0);
    }
}
