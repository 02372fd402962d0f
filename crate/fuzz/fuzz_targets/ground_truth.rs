#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(gt) = augclust::formats::parse_ground_truth(s) {
            assert_eq!(gt.centers.k(), gt.k);
            assert_eq!(gt.centers.d(), gt.d);
        }
    }
});
