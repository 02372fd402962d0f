#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(sweep) = augclust::formats::parse_sweep(s) {
            assert!(sweep.values.len() <= 100_000);
            assert!(sweep.values.iter().all(|v| v.is_finite()));
        }
    }
});
