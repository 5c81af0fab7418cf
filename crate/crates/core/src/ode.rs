//! The refraction ODEs and their integration.
//!
//! Two slope fields are covered: both foci finite (`F` at the origin, `F'` at
//! `(b, 0)`), and the radiant point at `x = -inf` with the image at `(b, 0)`.
//! Their solution curves keep a quantity constant:
//!
//! * both finite: `Q = l1 + n*l2`
//! * source at infinity: `Q = x + n*l2`
//!
//! The slope form `y'(x)` blows up wherever the curve has a vertical tangent,
//! which happens every time it crosses the axis. Integration therefore runs
//! in arc length on the unit tangent field `(den, num) / |(den, num)|`, where
//! `y' = num / den`. That field is smooth away from the foci, so following it
//! with a fixed orientation always continues the previous direction.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{Point2, Vec2};
use crate::oval::{CartesianOval, OvalError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("AxisSingularity: y = 0, the tangent is vertical")]
    AxisSingularity,
    #[error("FocusSingularity: the point coincides with a focus")]
    FocusSingularity,
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error("StartOffCurve: Q(start) = {q} differs from c = {c}")]
    StartOffCurve { q: f64, c: f64 },
    #[error("StepFailure: step size {h:e} fell below the minimum at arc length {s}")]
    StepFailure { h: f64, s: f64 },
    #[error("NoReturn: the trajectory did not come back to its start within {max_arc} arc length")]
    NoReturn { max_arc: f64 },
    #[error(transparent)]
    Oval(#[from] OvalError),
}

/// Parameters of the source-at-infinity curve `x + n*sqrt((b-x)^2 + y^2) = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfiniteSource {
    b: f64,
    n: f64,
    c: f64,
}

impl InfiniteSource {
    /// Accepts `b >= 0`, `n > 0` and any finite `c` for which the curve is
    /// nonempty and not a single point: for `n >= 1` that means `c > b`.
    pub fn new(b: f64, n: f64, c: f64) -> Result<Self, OdeError> {
        if !(b.is_finite() && n.is_finite() && c.is_finite()) {
            return Err(OdeError::InvalidParameter("parameters must be finite".into()));
        }
        if b < 0.0 {
            return Err(OdeError::InvalidParameter(format!("b must be >= 0, got {b}")));
        }
        if n <= 0.0 {
            return Err(OdeError::InvalidParameter(format!("n must be > 0, got {n}")));
        }
        if n >= 1.0 && c <= b {
            return Err(OdeError::InvalidParameter(format!("for n >= 1 the curve needs c > b (c = {c}, b = {b})")));
        }
        Ok(Self { b, n, c })
    }

    /// The curve through the origin, `c = n*b`.
    pub fn through_origin(b: f64, n: f64) -> Result<Self, OdeError> {
        Self::new(b, n, n * b)
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
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OdeKind {
    TwoFinite(CartesianOval),
    SourceAtInfinity(InfiniteSource),
}

impl OdeKind {
    /// The conserved quantity at `p`.
    pub fn conserved(&self, p: Point2) -> f64 {
        match self {
            OdeKind::TwoFinite(o) => {
                let (l1, l2) = o.focal_distances(p);
                l1 + o.n() * l2
            }
            OdeKind::SourceAtInfinity(s) => p.x + s.n * (s.b - p.x).hypot(p.y),
        }
    }

    /// The value `Q` takes on the solution curve.
    pub fn level(&self) -> f64 {
        match self {
            OdeKind::TwoFinite(o) => o.c(),
            OdeKind::SourceAtInfinity(s) => s.c,
        }
    }

    /// `(den, num)` with `y' = num / den`, i.e. the tangent field before
    /// normalization.
    fn tangent(&self, p: Point2) -> Vec2 {
        match self {
            OdeKind::TwoFinite(o) => {
                let (l1, l2) = o.focal_distances(p);
                let n = o.n();
                Vec2::new(p.y / l1 + n * p.y / l2, n * (o.b() - p.x) / l2 - p.x / l1)
            }
            OdeKind::SourceAtInfinity(s) => {
                let l = (s.b - p.x).hypot(p.y);
                Vec2::new(p.y, (s.b - p.x) - l / s.n)
            }
        }
    }

    fn unit_tangent(&self, p: Point2) -> Result<Vec2, OdeError> {
        self.tangent(p).try_normalize().ok_or(OdeError::FocusSingularity)
    }
}

/// Slope of the two-finite-foci refraction ODE at `(x, y)`:
/// `y' = [n(b-x)/l2 - x/l1] / [y/l1 + n*y/l2]`.
pub fn ode1_rhs(x: f64, y: f64, oval: &CartesianOval) -> Result<f64, OdeError> {
    let p = Point2::new(x, y);
    let (l1, l2) = oval.focal_distances(p);
    if l1 == 0.0 || l2 == 0.0 {
        return Err(OdeError::FocusSingularity);
    }
    if y == 0.0 {
        return Err(OdeError::AxisSingularity);
    }
    let n = oval.n();
    let num = n * (oval.b() - x) / l2 - x / l1;
    let den = y / l1 + n * y / l2;
    let slope = num / den;
    debug_assert!(y < 0.0 || snell1_residual(x, y, slope, oval).abs() < 1e-8);
    Ok(slope)
}

/// The Snell relation before it is solved for `y'`, written as
/// `sin(theta1) - n*sin(theta2)` with
///
/// * `sin(theta1) = [y' sqrt(1 - x^2/l1^2) + x/l1] / sqrt(1 + y'^2)`
/// * `sin(theta2) = [(b-x)/l2 - y' y / l2] / sqrt(1 + y'^2)`
///
/// and scaled by `1 / (|sin(theta1)| + n |sin(theta2)| + eps)`. Valid for
/// `y > 0`. The root `sqrt(1 - x^2/l1^2)` is evaluated as `|y| / l1`, which
/// avoids cancellation near the axis.
pub fn snell1_residual(x: f64, y: f64, slope: f64, oval: &CartesianOval) -> f64 {
    let (l1, l2) = oval.focal_distances(Point2::new(x, y));
    let n = oval.n();
    let w = 1.0 / slope.hypot(1.0);
    let s1 = w * (slope * y.abs() / l1 + x / l1);
    let s2 = w * ((oval.b() - x) / l2 - slope * y / l2);
    (s1 - n * s2) / (s1.abs() + n * s2.abs() + f64::EPSILON)
}

/// Slope of the source-at-infinity ODE `1 - n[(b-x) - y y'] / l = 0`:
/// `y' = [(b-x) - l/n] / y` with `l = sqrt((b-x)^2 + y^2)`.
pub fn ode2_rhs(x: f64, y: f64, b: f64, n: f64) -> Result<f64, OdeError> {
    if !(n != 0.0 && n.is_finite()) {
        return Err(OdeError::InvalidParameter(format!("n must be finite and nonzero, got {n}")));
    }
    if y == 0.0 {
        return Err(OdeError::AxisSingularity);
    }
    let l = (b - x).hypot(y);
    Ok(((b - x) - l / n) / y)
}

/// Integration settings. Defaults: `tol = 1e-10`, minimum step `1e-14` of the
/// arc span.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub tol: f64,
    pub min_step_fraction: f64,
    pub max_steps: usize,
    /// Start points must satisfy `|Q - level| <= start_tol * max(1, level)`.
    pub start_tol: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { tol: 1e-10, min_step_fraction: 1e-14, max_steps: 1_000_000, start_tol: 1e-8 }
    }
}

impl IntegratorConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

/// An integrated solution curve with its conserved-quantity record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: OdeKind,
    /// Accepted points in integration order, starting with the start point.
    pub points: Vec<Point2>,
    /// Arc length at each point.
    pub arc: Vec<f64>,
    /// `Q` at each point.
    pub q: Vec<f64>,
    pub conserved_start: f64,
    pub max_drift: f64,
}

impl Trajectory {
    fn new(kind: OdeKind, start: Point2) -> Self {
        let q0 = kind.conserved(start);
        Self { kind, points: vec![start], arc: vec![0.0], q: vec![q0], conserved_start: q0, max_drift: 0.0 }
    }

    fn push(&mut self, p: Point2, s: f64) {
        let q = self.kind.conserved(p);
        self.max_drift = self.max_drift.max((q - self.conserved_start).abs());
        self.points.push(p);
        self.arc.push(s);
        self.q.push(q);
    }

    pub fn end(&self) -> Point2 {
        *self.points.last().expect("trajectory always holds its start point")
    }
}

/// Largest `|Q(p) - Q(start)|` over the trajectory points, recomputed from
/// the points themselves.
pub fn conservation_drift(traj: &Trajectory) -> f64 {
    traj.points.iter().map(|&p| (traj.kind.conserved(p) - traj.conserved_start).abs()).fold(0.0, f64::max)
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus the embedded fourth-order ones
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Stepper<'a> {
    kind: &'a OdeKind,
    orientation: f64,
}

impl Stepper<'_> {
    fn field(&self, p: Point2) -> Result<Vec2, OdeError> {
        Ok(self.kind.unit_tangent(p)? * self.orientation)
    }

    /// One DP5 step of size `h` (> 0). Returns the fifth-order point and the
    /// max-norm of the embedded error estimate.
    fn step(&self, p: Point2, k1: Vec2, h: f64) -> Result<(Point2, Vec2, f64), OdeError> {
        let k2 = self.field(p + h * (A21 * k1))?;
        let k3 = self.field(p + h * (A31 * k1 + A32 * k2))?;
        let k4 = self.field(p + h * (A41 * k1 + A42 * k2 + A43 * k3))?;
        let k5 = self.field(p + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))?;
        let k6 = self.field(p + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))?;
        let next = p + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
        let k7 = self.field(next)?;
        let e = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        Ok((next, k7, e.x.abs().max(e.y.abs())))
    }
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// Adaptive driver shared by [`integrate`] and [`integrate_loop`].
///
/// `stop` sees each accepted step `(from, to)` and may return the arc length
/// (measured from `from`) at which to end inside that step.
fn drive<S>(
    kind: &OdeKind,
    start: Point2,
    arc_span: f64,
    cfg: &IntegratorConfig,
    mut stop: S,
) -> Result<Trajectory, OdeError>
where
    S: FnMut(&Stepper<'_>, Point2, Vec2, Point2, f64) -> Result<Option<f64>, OdeError>,
{
    if !(cfg.tol > 0.0) || !arc_span.is_finite() {
        return Err(OdeError::InvalidParameter("tol must be > 0 and arc span finite".into()));
    }
    if !start.is_finite() {
        return Err(OdeError::InvalidParameter("start must be finite".into()));
    }
    let level = kind.level();
    let q0 = kind.conserved(start);
    if !((q0 - level).abs() <= cfg.start_tol * level.abs().max(1.0)) {
        return Err(OdeError::StartOffCurve { q: q0, c: level });
    }
    let mut traj = Trajectory::new(*kind, start);
    if arc_span == 0.0 {
        return Ok(traj);
    }

    let stepper = Stepper { kind, orientation: arc_span.signum() };
    let span = arc_span.abs();
    let h_min = cfg.min_step_fraction * span;
    let mut h = (span / 64.0).min(0.05 * level.abs().max(1e-3));
    let mut err_prev: f64 = 1e-4;
    let mut s = 0.0;
    let mut p = start;
    let mut k1 = stepper.field(p)?;
    let mut last_step_rejected = false;

    for _ in 0..cfg.max_steps {
        let remaining = span - s;
        if remaining <= span * 1e-15 {
            return Ok(traj);
        }
        let clipped = h >= remaining;
        let h_try = if clipped { remaining } else { h };
        let (next, k_next, err_abs) = stepper.step(p, k1, h_try)?;
        let err = err_abs / cfg.tol;
        if !err.is_finite() {
            h = h_try * FAC_MIN;
            last_step_rejected = true;
            if h < h_min {
                return Err(OdeError::StepFailure { h, s });
            }
            continue;
        }
        if err <= 1.0 {
            if let Some(partial) = stop(&stepper, p, k1, next, h_try)? {
                let (end, _, _) = stepper.step(p, k1, partial)?;
                traj.push(end, (s + partial) * stepper.orientation);
                return Ok(traj);
            }
            s = if clipped { span } else { s + h_try };
            p = next;
            k1 = k_next;
            traj.push(p, s * stepper.orientation);
            // PI controller
            let fac = err.max(1e-10).powf(ALPHA) / err_prev.powf(BETA);
            let mut h_new = h_try / (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if last_step_rejected {
                h_new = h_new.min(h_try);
            }
            err_prev = err.max(1e-4);
            last_step_rejected = false;
            if !clipped {
                h = h_new;
            }
        } else {
            let fac = err.powf(ALPHA) / SAFETY;
            h = h_try / fac.min(1.0 / FAC_MIN);
            last_step_rejected = true;
            if h < h_min {
                return Err(OdeError::StepFailure { h, s });
            }
        }
    }
    Err(OdeError::StepFailure { h, s })
}

/// Integrates the curve through `start` for `|arc_span|` units of arc length.
///
/// A positive span follows the tangent `(den, num)`, i.e. the direction of
/// increasing `x` where `den > 0`; a negative span runs the other way.
pub fn integrate(kind: &OdeKind, start: Point2, arc_span: f64, tol: f64) -> Result<Trajectory, OdeError> {
    integrate_with(kind, start, arc_span, &IntegratorConfig::with_tol(tol))
}

pub fn integrate_with(
    kind: &OdeKind,
    start: Point2,
    arc_span: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory, OdeError> {
    drive(kind, start, arc_span, cfg, |_, _, _, _, _| Ok(None))
}

/// A convenient loop start on `oval`: the outline point farthest from the
/// axis.
pub fn loop_start(oval: &CartesianOval) -> Point2 {
    oval.outline(256).unwrap_or_default().into_iter().map(|s| s.point).fold(Point2::new(0.0, 0.0), |a, p| {
        if p.y > a.y {
            p
        } else {
            a
        }
    })
}

/// Integrates once around a closed solution curve and stops where the
/// trajectory crosses back through the line normal to the initial tangent at
/// `start`. `max_arc` bounds the search.
///
/// Returns the trajectory; its last arc value is the loop length.
pub fn integrate_loop(kind: &OdeKind, start: Point2, max_arc: f64, tol: f64) -> Result<Trajectory, OdeError> {
    let t0 = kind.unit_tangent(start)?;
    let mut farthest: f64 = 0.0;
    let traj = drive(kind, start, max_arc, &IntegratorConfig::with_tol(tol), |stepper, p, k1, next, h| {
        let g0 = (p - start).dot(t0);
        let g1 = (next - start).dot(t0);
        farthest = farthest.max(next.distance(start));
        let near_start = next.distance(start) < 0.5 * farthest;
        if !(g0 < 0.0 && g1 >= 0.0 && near_start) {
            return Ok(None);
        }
        // locate g = 0 inside the step by secant/bisection on sub-steps
        let (mut lo, mut hi, mut glo, mut ghi) = (0.0, h, g0, g1);
        let mut t = h;
        for _ in 0..100 {
            t = if ghi != glo { lo - glo * (hi - lo) / (ghi - glo) } else { 0.5 * (lo + hi) };
            if !(t > lo && t < hi) {
                t = 0.5 * (lo + hi);
            }
            let (q, _, _) = stepper.step(p, k1, t)?;
            let g = (q - start).dot(t0);
            if g.abs() < 1e-15 || (hi - lo) < 1e-15 * h.max(1e-300) {
                break;
            }
            if g < 0.0 {
                lo = t;
                glo = g;
            } else {
                hi = t;
                ghi = g;
            }
        }
        Ok(Some(t))
    })?;
    let closed = traj.arc.len() > 1 && traj.arc[traj.arc.len() - 1].abs() < max_arc.abs();
    if !closed {
        return Err(OdeError::NoReturn { max_arc });
    }
    Ok(traj)
}
