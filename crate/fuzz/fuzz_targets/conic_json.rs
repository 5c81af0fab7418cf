#![no_main]

use cartesian_lens::ConicSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<ConicSpec>(data) else { return };
    let Ok(spec) = spec.validate() else { return };
    for p in spec.sample(16, 0.0, 1.0) {
        let _ = spec.residual(p);
        let _ = spec.normal(p);
    }
    let _ = spec.first_hit_from_left(0.25);
});
