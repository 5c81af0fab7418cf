#![no_main]

use cartesian_lens::CartesianOval;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(oval) = serde_json::from_slice::<CartesianOval>(data) else { return };
    let back: CartesianOval = serde_json::from_str(&serde_json::to_string(&oval).unwrap()).unwrap();
    assert_eq!(back, oval);
    if let Ok(samples) = oval.sample_curve(32) {
        for s in samples {
            assert!(s.point.is_finite());
        }
    }
});
