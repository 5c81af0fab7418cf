use cartesian_lens::conics::{conic_infinite_source, conic_n_unity, ConicKind};
use cartesian_lens::ode::ode2_rhs;
use cartesian_lens::optics::{refract_direction, OpticsError, Ray2};
use cartesian_lens::oval::{linspace, OvalError};
use cartesian_lens::raytrace::intersect_ray_oval;
use cartesian_lens::revolution::{fd_gradient, ScalarField3};
use cartesian_lens::{CartesianOval, Point2, Point3, Vec2};
use proptest::prelude::*;

fn valid_oval() -> impl Strategy<Value = CartesianOval> {
    (0.1f64..3.0, 0.2f64..4.0, 0.05f64..2.0).prop_map(|(b, n, extra)| {
        let c = b.min(n * b) + extra;
        CartesianOval::new(b, n, c).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn samples_satisfy_both_forms(oval in valid_oval()) {
        for s in oval.sample_curve(200).unwrap() {
            prop_assert!(oval.bipolar_residual(s.point).abs() < 1e-10);
            prop_assert!(oval.quartic_residual(s.point).abs() < 1e-8);
        }
    }

    #[test]
    fn quartic_is_mirror_symmetric(oval in valid_oval(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
        prop_assert_eq!(oval.quartic_residual(Point2::new(x, y)), oval.quartic_residual(Point2::new(x, -y)));
    }

    #[test]
    fn normals_follow_quartic_gradient(oval in valid_oval()) {
        for s in oval.sample_curve(64).unwrap() {
            if s.point.y.abs() < 1e-6 {
                continue;
            }
            let g = fd_gradient(|q| oval.quartic_residual(Point2::new(q.x, q.y)), Point3::new(s.point.x, s.point.y, 0.0));
            let a = s.normal.angle_to(Vec2::new(g.x, g.y));
            prop_assert!(a.min(std::f64::consts::PI - a) < 1e-6);
        }
    }

    #[test]
    fn validation_matches_grid_scan(b in 0.0f64..3.0, n in 0.1f64..4.0, c in 0.01f64..5.0) {
        let mut xs: Vec<f64> = linspace(-c, b + c, 41).collect();
        xs.extend([0.0, b]);
        let ys: Vec<f64> = linspace(-c, b + c, 41).chain([0.0]).collect();
        let (mut below, mut above) = (false, false);
        for &x in &xs {
            for &y in &ys {
                let q = Point2::new(x, y).norm() + n * Point2::new(x - b, y).norm();
                below |= q < c;
                above |= q > c;
            }
        }
        let accepted = CartesianOval::new(b, n, c).is_ok();
        prop_assert_eq!(accepted, below && above);
    }

    #[test]
    fn refraction_obeys_cross_product_law(
        a in -3.1f64..3.1, m in -3.1f64..3.1, ratio in 0.3f64..3.0
    ) {
        let d = Vec2::from_angle(a);
        let nrm = Vec2::from_angle(m);
        match refract_direction(d, nrm, ratio) {
            Ok(t) => {
                prop_assert!((t.cross(nrm).abs() * ratio - d.cross(nrm).abs()).abs() < 1e-12);
                // refracting back across the same interface recovers d
                let back = refract_direction(-t, nrm, 1.0 / ratio).unwrap();
                prop_assert!((-back - d).norm() < 1e-10);
            }
            Err(OpticsError::TotalInternalReflection { required_sine }) => prop_assert!(required_sine > 1.0),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn unit_ratio_is_identity(a in -3.1f64..3.1, m in -3.1f64..3.1) {
        let d = Vec2::from_angle(a);
        let t = refract_direction(d, Vec2::from_angle(m), 1.0).unwrap();
        prop_assert!((t - d).norm() < 1e-15);
    }

    #[test]
    fn ray_hits_satisfy_both_forms(oval in valid_oval(), psi in -3.1f64..3.1) {
        let ray = Ray2::new(Point2::ZERO, Vec2::from_angle(psi)).unwrap();
        match intersect_ray_oval(&ray, &oval) {
            Ok(p) => {
                prop_assert!(oval.bipolar_residual(p).abs() < 1e-12);
                prop_assert!(oval.quartic_residual(p).abs() < 1e-9);
            }
            Err(_) => prop_assert!(oval.ray_roots(psi).unwrap().is_none()),
        }
    }

    #[test]
    fn eccentricity_is_reciprocal_index(n in 0.1f64..10.0, negative in any::<bool>(), bi in 0usize..3) {
        let n = if negative { -n } else { n };
        prop_assume!((n * n - 1.0).abs() > 1e-9);
        let b = [0.5, 1.0, 2.0][bi];
        let conic = conic_infinite_source(b, n).unwrap();
        prop_assert_eq!(conic.kind, if n * n > 1.0 { ConicKind::Ellipse } else { ConicKind::Hyperbola });
        prop_assert!((conic.eccentricity.unwrap() - 1.0 / n.abs()).abs() < 1e-12);
    }

    #[test]
    fn conic_points_solve_the_infinite_source_equation(n in 1.05f64..5.0, bi in 0usize..3) {
        let b = [0.5, 1.0, 2.0][bi];
        let conic = conic_infinite_source(b, n).unwrap();
        for p in conic.sample(101, 0.0, b) {
            let l2 = Point2::new(b, 0.0).distance(p);
            prop_assert!((p.x + n * l2 - n * b).abs() < 1e-10);
            if p.y.abs() > 1e-3 {
                let g = conic.gradient(p).unwrap();
                let implicit = -g.x / g.y;
                let slope = ode2_rhs(p.x, p.y, b, n).unwrap();
                prop_assert!(((slope - implicit) / implicit.abs().max(1.0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn unit_index_conic_shares_the_zero_set(b in 0.1f64..3.0, extra in 0.05f64..3.0) {
        let c = b + extra;
        let conic = conic_n_unity(b, c, 1).unwrap();
        let oval = CartesianOval::new(b, 1.0, c).unwrap();
        for s in oval.sample_curve(100).unwrap() {
            prop_assert!(conic.residual(s.point).abs() < 1e-8);
        }
        for p in conic.sample(100, 0.0, 0.0) {
            prop_assert!(oval.bipolar_residual(p).abs() < 1e-8);
        }
    }
}

#[test]
fn empty_and_degenerate_parameters() {
    assert!(matches!(CartesianOval::new(1.0, 2.0, 0.5), Err(OvalError::EmptyLocus { .. })));
    assert!(matches!(CartesianOval::new(1.0, 2.0, 1.0), Err(OvalError::DegenerateLocus { .. })));
}

#[test]
fn revolved_field_has_no_azimuthal_derivative() {
    use cartesian_lens::revolution::{revolve_point, tangential_derivative, RevolvedSurface};
    let oval = CartesianOval::new(1.0, 1.5, 2.0).unwrap();
    let surf = RevolvedSurface::oval(oval);
    for s in oval.sample_curve(100).unwrap() {
        for th in [0.2, 1.3, 2.9, -2.2] {
            let p = revolve_point(s.point, th);
            assert!(tangential_derivative(&surf, p).abs() < 1e-10);
            assert!(surf.value(p).abs() < 1e-10);
        }
    }
}
