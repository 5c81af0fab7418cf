use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cartesian_lens::certify::{self, off_axis_samples, Bound, CriterionResult, Measurement};
use cartesian_lens::conics::{both_infinite_curve, conic_infinite_source, conic_n_unity, ConicKind, ConicSpec};
use cartesian_lens::ode::{integrate, integrate_loop, loop_start, InfiniteSource, OdeKind, Trajectory};
use cartesian_lens::raytrace::{trace_fan, trace_fan_perturbed, trace_parallel_fan, FanTrace, Perturbation};
use cartesian_lens::revolution::{
    area_weighted_samples, coplanarity_residual, dependence_check, drucker_det, jacobian_pair_rank,
    normal_axis_intersection, revolve_point, surface_normal, AxisLine, PerturbedOvoid, RevolvedSurface, ScalarField3,
};
use cartesian_lens::{CartesianOval, OvalParams, Point2, Point3, Vec3};

use crate::args::{
    Command, ConicArgs, ConicMode, Format, OdeArgs, OvalFlags, RevolveArgs, SampleArgs, TraceArgs, VerifyArgs,
};
use crate::{emit, usage, CliError};

const MAX_POINTS: usize = 10_000_000;

pub(crate) fn dispatch(command: &Command, notes: &mut String) -> Result<Vec<u8>, CliError> {
    match command {
        Command::Sample(a) => sample(a),
        Command::Ode(a) => ode(a, notes),
        Command::Trace(a) => trace(a),
        Command::Conic(a) => conic(a),
        Command::Revolve(a) => revolve(a),
        Command::Verify(a) => verify(a),
    }
}

pub(crate) fn out_path(command: &Command) -> Option<&Path> {
    let out = match command {
        Command::Sample(a) => &a.output,
        Command::Ode(a) => &a.output,
        Command::Trace(a) => &a.output,
        Command::Conic(a) => &a.output,
        Command::Revolve(a) => &a.output,
        Command::Verify(a) => &a.output,
    };
    out.out.as_deref()
}

fn format_of(
    requested: Option<Format>,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format, CliError> {
    let f = requested.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("InvalidParameter: {command} does not support format {f:?}")))
    }
}

fn check_count(name: &str, v: usize, min: usize, max: usize) -> Result<(), CliError> {
    if v < min || v > max {
        return Err(CliError::Usage(format!("InvalidParameter: --{name} must be in [{min}, {max}], got {v}")));
    }
    Ok(())
}

fn check_real(name: &str, v: f64, ok: impl Fn(f64) -> bool, rule: &str) -> Result<(), CliError> {
    if !v.is_finite() || !ok(v) {
        return Err(CliError::Usage(format!("InvalidParameter: --{name} must be finite and {rule}, got {v}")));
    }
    Ok(())
}

fn oval_from(f: &OvalFlags) -> Result<CartesianOval, CliError> {
    CartesianOval::new(f.b, f.n, f.c).map_err(usage)
}

#[derive(Serialize)]
struct SampleRow {
    psi: f64,
    x: f64,
    y: f64,
    nx: f64,
    ny: f64,
}

#[derive(Serialize)]
struct SampleDoc {
    params: OvalParams,
    samples: Vec<SampleRow>,
}

fn sample(a: &SampleArgs) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Csv, &[Format::Csv, Format::Json, Format::Svg], "sample")?;
    check_count("count", a.count, 2, MAX_POINTS)?;
    let oval = oval_from(&a.oval)?;
    if format == Format::Svg {
        let mut loop_pts: Vec<Point2> = oval.outline(a.count).map_err(usage)?.iter().map(|s| s.point).collect();
        if let Some(&first) = loop_pts.first() {
            loop_pts.push(first);
        }
        return Ok(emit::svg(&[loop_pts], &[oval.focus(), oval.second_focus()]));
    }
    let samples = oval.sample_curve(a.count).map_err(usage)?;
    let rows =
        samples.iter().map(|s| SampleRow { psi: s.psi, x: s.point.x, y: s.point.y, nx: s.normal.x, ny: s.normal.y });
    Ok(match format {
        Format::Json => emit::json(&SampleDoc { params: oval.params(), samples: rows.collect() }),
        _ => emit::csv(&["psi", "x", "y", "nx", "ny"], rows.map(|r| vec![r.psi, r.x, r.y, r.nx, r.ny])),
    })
}

#[derive(Serialize)]
struct OdePoint {
    s: f64,
    x: f64,
    y: f64,
    q: f64,
}

#[derive(Serialize)]
struct OdeDoc {
    equation: &'static str,
    b: f64,
    n: f64,
    c: f64,
    tol: f64,
    arc_length: f64,
    max_drift: f64,
    closure: f64,
    points: Vec<OdePoint>,
}

/// A point on `x + n l2 = c`: above the focus when `c > b`, else the axis
/// vertex left of it.
fn infinite_start(b: f64, n: f64, c: f64) -> Point2 {
    if c > b {
        Point2::new(b, (c - b) / n)
    } else {
        Point2::new((c - n * b) / (1.0 - n), 0.0)
    }
}

fn ode(a: &OdeArgs, notes: &mut String) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Csv, &[Format::Csv, Format::Json], "ode")?;
    check_real("tol", a.tol, |t| t > 0.0 && t <= 0.1, "in (0, 0.1]")?;
    check_real("max-drift", a.max_drift, |t| t >= 0.0, ">= 0")?;
    if let Some(span) = a.arc_span {
        check_real("arc-span", span, |s| s.abs() <= 1e6, "at most 1e6 in magnitude")?;
    }
    let OvalFlags { b, n, c } = a.oval;
    let (kind, start, closed) = if a.infinite {
        let src = InfiniteSource::new(b, n, c).map_err(usage)?;
        (OdeKind::SourceAtInfinity(src), infinite_start(b, n, c), n > 1.0)
    } else {
        let oval = oval_from(&a.oval)?;
        (OdeKind::TwoFinite(oval), loop_start(&oval), true)
    };
    let traj: Trajectory = match a.arc_span {
        Some(span) => integrate(&kind, start, span, a.tol).map_err(usage)?,
        None if closed => integrate_loop(&kind, start, 20.0 * c.max(b), a.tol).map_err(usage)?,
        None => {
            return Err(CliError::Usage("InvalidParameter: the curve is open for n <= 1; pass --arc-span".to_string()))
        }
    };
    let doc = OdeDoc {
        equation: if a.infinite { "x + n l2 = c" } else { "l1 + n l2 = c" },
        b,
        n,
        c,
        tol: a.tol,
        arc_length: traj.arc.last().copied().unwrap_or(0.0),
        max_drift: traj.max_drift,
        closure: traj.end().distance(start),
        points: traj
            .points
            .iter()
            .zip(&traj.arc)
            .zip(&traj.q)
            .map(|((p, &s), &q)| OdePoint { s, x: p.x, y: p.y, q })
            .collect(),
    };
    notes.push_str(&format!("max_drift {}\n", emit::num(doc.max_drift)));
    let bytes = match format {
        Format::Json => emit::json(&doc),
        _ => emit::csv(&["s", "x", "y", "q"], doc.points.iter().map(|p| vec![p.s, p.x, p.y, p.q])),
    };
    if !(doc.max_drift <= a.max_drift) {
        return Err(CliError::Verification {
            message: format!("DriftExceeded: max_drift {} > {}", emit::num(doc.max_drift), emit::num(a.max_drift)),
            stdout: bytes,
        });
    }
    Ok(bytes)
}

/// The bump's phase: none for seed 0, otherwise drawn from the seed.
fn phase_for(seed: u64) -> f64 {
    if seed == 0 {
        0.0
    } else {
        ChaCha8Rng::seed_from_u64(seed).gen_range(0.0..TAU)
    }
}

fn trace(a: &TraceArgs) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Json, &[Format::Json, Format::Csv], "trace")?;
    check_count("rays", a.rays, 1, MAX_POINTS)?;
    check_real("psi-min", a.psi_min, |_| true, "a number")?;
    check_real("psi-max", a.psi_max, |v| v >= a.psi_min, ">= --psi-min")?;
    check_real("perturb", a.perturb, |e| e.abs() <= 1.0, "at most 1 in magnitude")?;
    let (fan, param): (FanTrace, &str) = if a.parallel {
        check_real("b", a.b, |b| b > 0.0, "> 0")?;
        check_real("n", a.n, |n| n > 0.0 && n != 1.0, "> 0 and != 1")?;
        let conic = conic_infinite_source(a.b, a.n).map_err(usage)?;
        (trace_parallel_fan(&conic, a.b, a.n, a.rays).map_err(usage)?, "height")
    } else {
        let c = a.c.ok_or_else(|| CliError::Usage("InvalidParameter: --c is required unless --parallel".into()))?;
        let oval = oval_from(&OvalFlags { b: a.b, n: a.n, c })?;
        let range = (a.psi_min, a.psi_max);
        let fan = if a.perturb != 0.0 {
            let bump = Perturbation { phase: phase_for(a.seed), ..Perturbation::new(a.perturb) };
            trace_fan_perturbed(&oval, a.rays, range, bump)
        } else {
            trace_fan(&oval, a.rays, range)
        };
        (fan.map_err(usage)?, "psi")
    };
    Ok(match format {
        Format::Csv => emit::csv(
            &[param, "hit_x", "hit_y", "deviation", "miss"],
            fan.rays.iter().map(|r| vec![r.param, r.hit.x, r.hit.y, r.deviation, r.miss]),
        ),
        _ => emit::json(&fan.report),
    })
}

/// Curves to draw for a conic: both hyperbola branches when `both`.
fn conic_curves(spec: &ConicSpec, count: usize, span: f64, both: bool) -> Vec<Vec<Point2>> {
    match (spec.kind, both, spec.center_x, spec.semi_axis_sq_x) {
        (ConicKind::Hyperbola, true, Some(cx), Some(ax)) => {
            let a = ax.sqrt();
            vec![spec.sample(count, cx - a, span), spec.sample(count, cx + a, span)]
        }
        _ => vec![spec.sample(count, 0.0, span)],
    }
}

fn conic(a: &ConicArgs) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Json, &[Format::Json, Format::Csv, Format::Svg], "conic")?;
    check_count("count", a.count, 2, MAX_POINTS)?;
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| CliError::Usage(format!("InvalidParameter: --{name} is required for this mode")))
    };
    let (spec, foci, both) = match a.mode {
        ConicMode::Infinite => {
            let (b, n) = (need(a.b, "b")?, need(a.n, "n")?);
            (conic_infinite_source(b, n).map_err(usage)?, vec![Point2::new(b, 0.0)], false)
        }
        ConicMode::Unity => {
            let (b, n, c) = (need(a.b, "b")?, need(a.n, "n")?, need(a.c, "c")?);
            let sign = if n == 1.0 {
                1
            } else if n == -1.0 {
                -1
            } else {
                return Err(CliError::Usage(format!("InvalidParameter: --n must be 1 or -1 in unity mode, got {n}")));
            };
            (conic_n_unity(b, c, sign).map_err(usage)?, vec![Point2::new(0.0, 0.0), Point2::new(b, 0.0)], true)
        }
        ConicMode::BothInfinite => (both_infinite_curve(), Vec::new(), false),
    };
    let span = a.b.filter(|b| b.is_finite() && *b > 0.0).unwrap_or(1.0);
    Ok(match format {
        Format::Json => emit::json(&spec),
        Format::Csv => emit::csv(
            &["x", "y"],
            conic_curves(&spec, a.count, span, both).into_iter().flatten().map(|p| vec![p.x, p.y]),
        ),
        _ => emit::svg(&conic_curves(&spec, a.count, span, both), &foci),
    })
}

#[derive(Serialize)]
struct RevolveDoc {
    params: OvalParams,
    samples: usize,
    seed: u64,
    perturb: f64,
    max_abs_residual: f64,
    max_abs_drucker_det: f64,
    max_abs_coplanarity: f64,
    max_axis_distance: f64,
    min_jacobian_count: usize,
    dependence_discrepancy: f64,
}

fn revolve(a: &RevolveArgs) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Csv, &[Format::Csv, Format::Json], "revolve")?;
    check_count("samples", a.samples, 1, 1_000_000)?;
    check_real("perturb", a.perturb, |e| e.abs() <= 0.5, "at most 0.5 in magnitude")?;
    let oval = oval_from(&a.oval)?;
    let profile: Vec<Point2> = off_axis_samples(&oval, 2000).into_iter().map(|s| s.point).collect();
    let surf = RevolvedSurface::oval(oval);
    let bumped = PerturbedOvoid::new(oval, a.perturb, 3);
    let axis = AxisLine::x_axis();
    let (f, f2) = (Point3::ZERO, Point3::new(oval.b(), 0.0, 0.0));

    let mut rows = Vec::with_capacity(a.samples);
    let mut min_jac = usize::MAX;
    for (q, th) in area_weighted_samples(&profile, a.samples, a.seed) {
        let (p, normal, residual, det) = if a.perturb == 0.0 {
            let p = revolve_point(q, th);
            let n = surface_normal(p, &surf).unwrap_or(Vec3::new(f64::NAN, f64::NAN, f64::NAN));
            (p, n, surf.value(p), drucker_det(&surf, &axis, p).unwrap_or(f64::NAN))
        } else {
            let p = bumped.surface_point(q, th);
            let n = bumped.gradient(p).try_normalize().unwrap_or(Vec3::new(f64::NAN, f64::NAN, f64::NAN));
            (p, n, bumped.value(p), drucker_det(&bumped, &axis, p).unwrap_or(f64::NAN))
        };
        let cop = coplanarity_residual(p, normal, f, f2).unwrap_or(f64::NAN);
        let dist = normal_axis_intersection(p, normal, &axis).unwrap_or(f64::NAN);
        let jac = jacobian_pair_rank(&axis, p).unwrap_or(0);
        min_jac = min_jac.min(jac);
        rows.push(vec![p.x, p.y, p.z, normal.x, normal.y, normal.z, residual, det, cop, dist, jac as f64]);
    }
    let max_abs =
        |k: usize| rows.iter().map(|r| r[k].abs()).fold(0.0, |m: f64, v| if v.is_nan() { f64::NAN } else { m.max(v) });
    Ok(match format {
        Format::Json => {
            let dependence = if a.perturb == 0.0 {
                dependence_check(&surf, &axis, a.samples)
            } else {
                dependence_check(&bumped, &axis, a.samples)
            };
            emit::json(&RevolveDoc {
                params: oval.params(),
                samples: rows.len(),
                seed: a.seed,
                perturb: a.perturb,
                max_abs_residual: max_abs(6),
                max_abs_drucker_det: max_abs(7),
                max_abs_coplanarity: max_abs(8),
                max_axis_distance: max_abs(9),
                min_jacobian_count: if rows.is_empty() { 0 } else { min_jac },
                dependence_discrepancy: dependence,
            })
        }
        _ => emit::csv(
            &["x", "y", "z", "nx", "ny", "nz", "residual", "drucker_det", "coplanarity", "axis_distance", "jacobians"],
            rows,
        ),
    })
}

/// Flag sets exercised by the determinism check, one per output shape.
pub fn determinism_cases() -> Vec<Vec<&'static str>> {
    let oval = ["--b", "1", "--n", "2", "--c", "1.5"];
    let with = |head: &[&'static str], tail: &[&'static str]| -> Vec<&'static str> {
        let mut v = vec!["cartesian-lens"];
        v.extend_from_slice(head);
        v.extend_from_slice(tail);
        v
    };
    let mut cases = Vec::new();
    for f in ["csv", "json", "svg"] {
        cases.push(with(&["sample"], &[&oval[..], &["--count", "256", "--format", f]].concat()));
    }
    cases.push(with(&["sample", "--b", "0", "--n", "2", "--c", "1", "--count", "64"], &[]));
    for f in ["csv", "json"] {
        cases.push(with(&["ode"], &[&oval[..], &["--format", f]].concat()));
    }
    cases.push(with(&["ode", "--b", "1", "--n", "2", "--c", "2", "--infinite"], &[]));
    cases.push(with(&["ode"], &[&oval[..], &["--arc-span", "0"]].concat()));
    for f in ["json", "csv"] {
        cases.push(with(&["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--rays", "1000", "--format", f], &[]));
    }
    cases.push(with(
        &["trace", "--b", "1", "--n", "1.5", "--c", "1.2", "--rays", "500", "--perturb", "1e-3", "--seed", "7"],
        &[],
    ));
    cases.push(with(&["trace", "--b", "1", "--n", "2", "--rays", "500", "--parallel"], &[]));
    for f in ["json", "csv", "svg"] {
        cases.push(with(&["conic", "--b", "1", "--n", "-1", "--format", f], &[]));
    }
    cases.push(with(&["conic", "--b", "2", "--n", "1", "--c", "3", "--mode", "unity"], &[]));
    cases.push(with(&["conic", "--mode", "both-infinite"], &[]));
    for f in ["csv", "json"] {
        cases.push(with(&["revolve"], &[&oval[..], &["--samples", "300", "--format", f]].concat()));
    }
    cases.push(with(&["revolve"], &[&oval[..], &["--samples", "300", "--perturb", "0.01", "--seed", "3"]].concat()));
    cases
}

fn determinism(started: Instant) -> CriterionResult {
    let t = Instant::now();
    let cases = determinism_cases();
    let mut identical = 0usize;
    let mut clean = 0usize;
    for case in &cases {
        let first = crate::run(case.iter().copied());
        let second = crate::run(case.iter().copied());
        if first == second {
            identical += 1;
        }
        if first.code == 0 && !first.stdout.is_empty() {
            clean += 1;
        }
    }
    let total = cases.len() as f64;
    let m = |label: &str, value: f64, bound: Bound, limit: f64, timing: bool| Measurement {
        label: label.to_string(),
        value,
        bound,
        limit,
        timing,
    };
    let measurements = vec![
        m("identical reruns", identical as f64, Bound::AtLeast, total, false),
        m("runs exiting 0 with output", clean as f64, Bound::AtLeast, total, false),
        m("determinism runtime s", t.elapsed().as_secs_f64(), Bound::Below, 30.0, true),
        m("verify runtime s", started.elapsed().as_secs_f64(), Bound::Below, 30.0, true),
    ];
    let passed = measurements.iter().all(Measurement::holds);
    CriterionResult {
        id: 10,
        name: "CLI determinism".to_string(),
        passed,
        measurements,
        error: None,
        elapsed_s: t.elapsed().as_secs_f64(),
    }
}

fn bound_str(b: Bound) -> &'static str {
    match b {
        Bound::Below => "<",
        Bound::Above => ">",
        Bound::AtLeast => ">=",
    }
}

fn table(results: &[CriterionResult], timings: bool) -> String {
    let mut s = String::from(" id  result  criterion\n");
    for r in results {
        s.push_str(&format!("{:>3}  {:<6}  {}\n", r.id, if r.passed { "PASS" } else { "FAIL" }, r.name));
        for m in &r.measurements {
            let value = if m.timing && !timings { "measured".to_string() } else { emit::num(m.value) };
            let status = if m.holds() { "" } else { "  <-- fails" };
            s.push_str(&format!(
                "             {} = {} {} {}{}\n",
                m.label,
                value,
                bound_str(m.bound),
                emit::num(m.limit),
                status
            ));
        }
        if let Some(e) = &r.error {
            s.push_str(&format!("             error: {e}\n"));
        }
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    s.push_str(&format!("{} criteria: {} passed, {} failed\n", results.len(), results.len() - failed, failed));
    s
}

#[derive(Serialize)]
struct VerifyDoc {
    passed: bool,
    criteria: Vec<CriterionResult>,
}

fn verify(a: &VerifyArgs) -> Result<Vec<u8>, CliError> {
    let format = format_of(a.output.format, Format::Text, &[Format::Text, Format::Json], "verify")?;
    let started = Instant::now();
    let mut results = certify::run_all();
    results.push(determinism(started));
    if !a.timings {
        for m in results.iter_mut().flat_map(|r| r.measurements.iter_mut()).filter(|m| m.timing) {
            // keep pass/fail, drop the wall-clock value so reruns print the same bytes
            m.value = if m.holds() { 0.0 } else { f64::INFINITY };
        }
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| format!("{} ({})", r.id, r.name)).collect();
    let bytes = match format {
        Format::Json => emit::json(&VerifyDoc { passed: failed.is_empty(), criteria: results }),
        _ => table(&results, a.timings).into_bytes(),
    };
    if failed.is_empty() {
        Ok(bytes)
    } else {
        Err(CliError::Verification { message: format!("VerificationFailed: {}", failed.join(", ")), stdout: bytes })
    }
}
