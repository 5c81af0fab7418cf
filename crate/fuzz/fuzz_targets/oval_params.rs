#![no_main]

use cartesian_lens::optics::Ray2;
use cartesian_lens::raytrace::intersect_ray_oval;
use cartesian_lens::{CartesianOval, Vec2};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: [u8; 32]| {
    let f = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().unwrap());
    let Ok(oval) = CartesianOval::new(f(0), f(1), f(2)) else { return };
    let scale = oval.c().abs().max(oval.b().abs()).max(1.0);
    let Ok(samples) = oval.sample_curve(16) else { return };
    for s in &samples {
        assert!(oval.bipolar_residual(s.point).abs() <= 1e-6 * scale, "{:?} {:?}", oval.params(), s);
    }
    let psi = f(3);
    if psi.is_finite() {
        let Ok(ray) = Ray2::new(Vec2::new(0.0, 0.0), Vec2::from_angle(psi)) else { return };
        if let Ok(hit) = intersect_ray_oval(&ray, &oval) {
            assert!(oval.bipolar_residual(hit).abs() <= 1e-6 * scale);
        }
    }
});
