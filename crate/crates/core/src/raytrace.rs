//! Ray tracing against the oval and the limiting conics, measuring how
//! closely the refracted rays pass through the second focus.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::conics::{ConicKind, ConicSpec};
use crate::geom::{Point2, Vec2};
use crate::optics::{refract_direction, OpticsError, Ray2};
use crate::oval::{linspace, CartesianOval, OvalError};
use crate::roots::newton_bisect;

/// Residual accepted for a polished intersection.
pub const HIT_TOL: f64 = 1e-12;

/// Fans are pulled in from the aperture edge by this relative margin.
pub const APERTURE_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("NoIntersection: the ray misses the curve")]
    NoIntersection,
    #[error("SolverFailure: polish stalled at residual {residual:e}")]
    SolverFailure { residual: f64 },
    #[error("InvalidParameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Oval(#[from] OvalError),
}

impl TraceError {
    /// Short variant name used in reports.
    pub fn kind(&self) -> String {
        let text = self.to_string();
        text.split(':').next().unwrap_or(&text).to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayFailure {
    pub index: usize,
    pub kind: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusReport {
    pub ray_count: usize,
    pub max_angular_deviation: f64,
    pub rms_angular_deviation: f64,
    pub max_miss_distance: f64,
    pub failures: Vec<RayFailure>,
}

/// One traced ray. `param` is the polar angle for a fan from a focus and
/// the height for a parallel beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayRecord {
    pub index: usize,
    pub param: f64,
    pub hit: Point2,
    pub direction: Vec2,
    pub deviation: f64,
    pub miss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FanTrace {
    pub report: FocusReport,
    pub rays: Vec<RayRecord>,
}

impl FanTrace {
    fn collect(
        params: Vec<f64>,
        mut trace_one: impl FnMut(f64) -> Result<(Point2, Vec2, f64, f64), TraceError>,
    ) -> Self {
        let mut rays = Vec::with_capacity(params.len());
        let mut failures = Vec::new();
        for (index, &param) in params.iter().enumerate() {
            match trace_one(param) {
                Ok((hit, direction, deviation, miss)) => {
                    rays.push(RayRecord { index, param, hit, direction, deviation, miss })
                }
                Err(e) => failures.push(RayFailure { index, kind: e.kind() }),
            }
        }
        let max_dev = rays.iter().map(|r| r.deviation).fold(0.0, f64::max);
        let max_miss = rays.iter().map(|r| r.miss).fold(0.0, f64::max);
        let rms = if rays.is_empty() {
            0.0
        } else {
            (rays.iter().map(|r| r.deviation * r.deviation).sum::<f64>() / rays.len() as f64).sqrt()
        };
        let report = FocusReport {
            ray_count: params.len(),
            max_angular_deviation: max_dev,
            rms_angular_deviation: rms,
            max_miss_distance: max_miss,
            failures,
        };
        Self { report, rays }
    }
}

/// First crossing of `ray` with `d1 + n d2 = c`.
///
/// The residual is Lipschitz along the ray with constant `1 + n`, so steps
/// of `|f| / (1 + n)` (clamped to `[1e-9 c, c / 100]`) cannot jump over a
/// simple crossing. The bracket is then polished by Newton with bisection
/// fallback. A crossing at the ray origin itself is skipped.
pub fn intersect_ray_oval(ray: &Ray2, oval: &CartesianOval) -> Result<Point2, TraceError> {
    let (n, c) = (oval.n(), oval.c());
    let f = |t: f64| oval.bipolar_residual(ray.at(t));
    // every curve point has d1 <= c
    let t_end = ray.origin.norm() + c * (1.0 + 1e-9);
    let (h_min, h_max) = (c * 1e-9, c / 100.0);
    let lip = 1.0 + n;

    let mut t = 0.0;
    let mut ft = f(t);
    if ft.abs() <= HIT_TOL {
        t = h_min;
        ft = f(t);
    }
    const MAX_STEPS: usize = 10_000_000;
    for _ in 0..MAX_STEPS {
        if t > t_end {
            return Err(TraceError::NoIntersection);
        }
        let t_next = t + (ft.abs() / lip).clamp(h_min, h_max);
        let f_next = f(t_next);
        if !f_next.is_finite() {
            return Err(TraceError::SolverFailure { residual: f_next });
        }
        if f_next == 0.0 || f_next.signum() != ft.signum() {
            return polish(ray, oval, t, t_next);
        }
        t = t_next;
        ft = f_next;
    }
    Err(TraceError::NoIntersection)
}

fn polish(ray: &Ray2, oval: &CartesianOval, lo: f64, hi: f64) -> Result<Point2, TraceError> {
    let fdf = |t: f64| {
        let p = ray.at(t);
        let g = oval.gradient(p).map(|g| g.dot(ray.direction)).unwrap_or(f64::NAN);
        (oval.bipolar_residual(p), g)
    };
    let t = newton_bisect(fdf, lo, hi, 0.25 * HIT_TOL, 200)
        .map_err(|_| TraceError::SolverFailure { residual: f64::NAN })?;
    let p = ray.at(t);
    let residual = oval.bipolar_residual(p);
    if !(residual.abs() < HIT_TOL) {
        return Err(TraceError::SolverFailure { residual });
    }
    Ok(p)
}

/// Refracts `incident` at `hit` and measures it against `target`: returns
/// the transmitted direction, its angle to `hit -> target`, and the
/// distance from `target` to the transmitted line.
fn aim(incident: Vec2, hit: Point2, normal: Vec2, ratio: f64, target: Point2) -> Result<(Vec2, f64, f64), TraceError> {
    let t = refract_direction(incident, normal, ratio)?;
    let to = target - hit;
    Ok((t, t.angle_to(to), t.cross(to).abs()))
}

/// Clips `range` to the oval's aperture (when `F` is outside) and spreads
/// `count` angles evenly over it, ends included.
fn fan_angles(oval: &CartesianOval, count: usize, range: (f64, f64)) -> Result<Vec<f64>, TraceError> {
    if count == 0 {
        return Err(TraceError::InvalidParameter("count must be >= 1".into()));
    }
    let (mut lo, mut hi) = range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(TraceError::InvalidParameter(format!("bad angle range ({lo}, {hi})")));
    }
    if let Some(ap) = oval.aperture() {
        let edge = ap * (1.0 - APERTURE_MARGIN);
        lo = lo.max(-edge);
        hi = hi.min(edge);
        if lo > hi {
            return Err(TraceError::InvalidParameter(format!(
                "angle range lies outside the aperture (half-angle {ap})"
            )));
        }
    }
    Ok(linspace(lo, hi, count).collect())
}

/// Traces `count` rays from `F = (0,0)` at polar angles spread over
/// `psi_range` (clipped to the aperture), refracting with ratio `n` and
/// measuring convergence on `F' = (b, 0)`. Failed rays are recorded, never
/// fatal.
pub fn trace_fan(oval: &CartesianOval, count: usize, psi_range: (f64, f64)) -> Result<FanTrace, TraceError> {
    let psis = fan_angles(oval, count, psi_range)?;
    let (f, f2, n) = (oval.focus(), oval.second_focus(), oval.n());
    Ok(FanTrace::collect(psis, |psi| {
        let ray = Ray2::new(f, Vec2::from_angle(psi))?;
        let hit = intersect_ray_oval(&ray, oval)?;
        let normal = oval.normal_at_with(hit, 1e-9)?;
        let (dir, dev, miss) = aim(ray.direction, hit, normal, n, f2)?;
        Ok((hit, dir, dev, miss))
    }))
}

/// A bumped interface `r(psi) + eps cos(lobes psi + phase)` over the
/// oval's near side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub eps: f64,
    pub lobes: f64,
    pub phase: f64,
}

impl Perturbation {
    pub fn new(eps: f64) -> Self {
        Self { eps, lobes: 5.0, phase: 0.0 }
    }
}

/// Like [`trace_fan`] but against the perturbed interface. The normal comes
/// from the polar derivative `r' = -g_psi / g_r` of the oval's radial
/// residual plus the bump's derivative.
pub fn trace_fan_perturbed(
    oval: &CartesianOval,
    count: usize,
    psi_range: (f64, f64),
    bump: Perturbation,
) -> Result<FanTrace, TraceError> {
    let psis = fan_angles(oval, count, psi_range)?;
    let (b, n) = (oval.b(), oval.n());
    let f2 = oval.second_focus();
    Ok(FanTrace::collect(psis, |psi| {
        let r = oval.ray_roots(psi)?.ok_or(TraceError::NoIntersection)?.near;
        let (s, c) = psi.sin_cos();
        let u = r - b * c;
        let d2 = u.hypot(b * s);
        let g_r = 1.0 + n * u / d2;
        let g_psi = n * b * r * s / d2;
        let arg = bump.lobes * psi + bump.phase;
        let rho = r + bump.eps * arg.cos();
        let rho_d = -g_psi / g_r - bump.eps * bump.lobes * arg.sin();
        let radial = Vec2::new(c, s);
        let tangent = rho_d * radial + rho * radial.perp();
        let normal = tangent.perp().try_normalize().ok_or(TraceError::NoIntersection)?;
        let hit = rho * radial;
        let (dir, dev, miss) = aim(radial, hit, normal, n, f2)?;
        Ok((hit, dir, dev, miss))
    }))
}

/// Traces a beam parallel to `+x` from `x = -inf` onto the first surface of
/// `conic` and measures convergence on `(b, 0)`.
///
/// Heights are spread evenly over `|h| <= 0.9 H`, where `H` is the ellipse's
/// half-height, or `b` for open curves.
pub fn trace_parallel_fan(conic: &ConicSpec, b: f64, n: f64, count: usize) -> Result<FanTrace, TraceError> {
    if count == 0 {
        return Err(TraceError::InvalidParameter("count must be >= 1".into()));
    }
    if !(b.is_finite() && b > 0.0 && n.is_finite() && n > 0.0) {
        return Err(TraceError::InvalidParameter(format!("need b > 0 and n > 0 (b = {b}, n = {n})")));
    }
    let half = match (conic.kind, conic.semi_axis_sq_y) {
        (ConicKind::Ellipse, Some(ay)) => ay.sqrt(),
        _ => b,
    };
    let heights: Vec<f64> = linspace(-0.9 * half, 0.9 * half, count).collect();
    let target = Point2::new(b, 0.0);
    let incident = Vec2::new(1.0, 0.0);
    Ok(FanTrace::collect(heights, |h| {
        let hit = conic.first_hit_from_left(h).map_err(|_| TraceError::NoIntersection)?;
        let normal = conic.normal(hit).ok_or(TraceError::NoIntersection)?;
        let (dir, dev, miss) = aim(incident, hit, normal, n, target)?;
        Ok((hit, dir, dev, miss))
    }))
}

/// Refracts `count` parallel rays with direction `incidence` (radians from
/// `+x`) through the flat interface `x = line_x` and returns the largest
/// pairwise angle between the transmitted directions.
pub fn flat_interface_spread(conic: &ConicSpec, n: f64, incidence: f64, count: usize) -> Result<f64, TraceError> {
    let ConicKind::VerticalLine = conic.kind else {
        return Err(TraceError::InvalidParameter(format!("{:?} is not a flat interface", conic.kind)));
    };
    if !(n.is_finite() && n > 0.0) || !incidence.is_finite() || incidence.cos() <= 0.0 {
        return Err(TraceError::InvalidParameter("need n > 0 and a beam moving in +x".into()));
    }
    let x0 = conic.line_x.unwrap_or(0.0);
    let d = Vec2::from_angle(incidence);
    let mut dirs = Vec::with_capacity(count);
    for h in linspace(-1.0, 1.0, count) {
        let ray = Ray2::new(Point2::new(x0 - 1.0, h), d)?;
        let t = (x0 - ray.origin.x) / ray.direction.x;
        let hit = ray.at(t);
        let normal = conic.normal(hit).ok_or(TraceError::NoIntersection)?;
        dirs.push(refract_direction(ray.direction, normal, n)?);
    }
    // all directions are unit, so the pairwise spread is the angular range
    let angles: Vec<f64> = dirs.iter().map(|v| v.y.atan2(v.x)).collect();
    let lo = angles.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = angles.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(if angles.is_empty() { 0.0 } else { hi - lo })
}
