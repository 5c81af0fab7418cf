use cartesian_lens::certify::{self, grid, off_axis_samples, ovoid};
use cartesian_lens::conics::conic_infinite_source;
use cartesian_lens::geom::Point3;
use cartesian_lens::ode::{integrate, OdeKind};
use cartesian_lens::oval::Enclosure;
use cartesian_lens::raytrace::{trace_fan, trace_parallel_fan};
use cartesian_lens::revolution::{
    area_weighted_samples, coplanarity_residual, drucker_det, normal_axis_intersection, revolve_point, surface_normal,
    AxisLine, PerturbedOvoid, RevolvedSurface, ScalarField3,
};
use cartesian_lens::Point2;

#[test]
fn every_library_criterion_holds() {
    for r in certify::run_all() {
        let failing: Vec<_> = r.failing().collect();
        assert!(r.passed, "criterion {} {}: {:?} {:?}", r.id, r.name, r.error, failing);
    }
}

#[test]
fn one_focus_grid_ovals_focus() {
    let mut checked = 0;
    for oval in grid() {
        let fan = trace_fan(&oval, 500, (-3.2, 3.2)).unwrap();
        assert_eq!(fan.report.ray_count, fan.rays.len() + fan.report.failures.len());
        if oval.enclosure() == Enclosure::BothInside {
            // both foci in one medium: refracted rays do not pass F'
            assert!(fan.report.max_miss_distance > 1e-2);
            continue;
        }
        assert!(fan.report.failures.is_empty());
        assert!(fan.report.max_angular_deviation < 1e-8, "{:?}", oval.params());
        checked += 1;
    }
    assert_eq!(checked, 8);
}

#[test]
fn certificates_agree_on_revolved_and_perturbed_surfaces() {
    let oval = ovoid();
    let axis = AxisLine::x_axis();
    let f2 = Point3::new(oval.b(), 0.0, 0.0);
    let profile: Vec<Point2> = off_axis_samples(&oval, 400).into_iter().map(|s| s.point).collect();
    let surf = RevolvedSurface::oval(oval);
    let bumped = PerturbedOvoid::new(oval, 0.01, 3);
    for (q, th) in area_weighted_samples(&profile, 300, 5) {
        let p = revolve_point(q, th);
        let n = surface_normal(p, &surf).unwrap();
        let cert = [
            drucker_det(&surf, &axis, p).unwrap().abs(),
            coplanarity_residual(p, n, Point3::ZERO, f2).unwrap().abs(),
            normal_axis_intersection(p, n, &axis).unwrap(),
        ];
        assert!(cert.iter().all(|&v| v < 1e-9), "{cert:?}");

        // well away from the bump's symmetry planes all three fire together
        let s3 = (3.0 * th).sin().abs();
        if s3 > 0.2 && q.y.abs() > 0.2 {
            let pb = bumped.surface_point(q, th);
            let nb = bumped.gradient(pb).try_normalize().unwrap();
            let cert = [
                drucker_det(&bumped, &axis, pb).unwrap().abs(),
                coplanarity_residual(pb, nb, Point3::ZERO, f2).unwrap().abs(),
                normal_axis_intersection(pb, nb, &axis).unwrap(),
            ];
            assert!(cert.iter().all(|&v| v > 1e-4), "{cert:?}");
        }
    }
}

#[test]
fn mirrored_starts_give_mirrored_paths() {
    let oval = cartesian_lens::CartesianOval::new(1.0, 1.5, 1.2).unwrap();
    let kind = OdeKind::TwoFinite(oval);
    for s in off_axis_samples(&oval, 12) {
        let up = Point2::new(s.point.x, s.point.y.abs());
        let down = Point2::new(up.x, -up.y);
        let a = integrate(&kind, up, 0.8, 1e-10).unwrap();
        let b = integrate(&kind, down, -0.8, 1e-10).unwrap();
        assert_eq!(a.points.len(), b.points.len());
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!((p.x - q.x).abs() < 1e-10 && (p.y + q.y).abs() < 1e-10);
        }
    }
}

#[test]
fn parallel_beam_for_several_indices() {
    for n in [1.5, 2.0, 3.0] {
        let conic = conic_infinite_source(1.0, n).unwrap();
        let fan = trace_parallel_fan(&conic, 1.0, n, 200).unwrap();
        assert!(fan.report.failures.is_empty());
        assert!(fan.report.max_angular_deviation < 1e-8, "n = {n}");
    }
}
