#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let args: Vec<&str> = text.split('\0').collect();
    // the full suite and huge point counts are slow by design, not bugs
    if args.iter().any(|a| *a == "verify" || a.starts_with("--out") || a.parse::<f64>().is_ok_and(|v| v.abs() > 1e5)) {
        return;
    }
    let outcome = cartesian_lens_cli::run(std::iter::once("cartesian-lens").chain(args.iter().copied()));
    assert!(matches!(outcome.code, 0..=2));
});
