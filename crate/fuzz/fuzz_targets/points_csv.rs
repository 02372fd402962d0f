#![no_main]

use augclust::formats::{parse_points_csv, write_points_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // Anything that parses must survive a write/parse round trip unchanged.
    if let Ok(points) = parse_points_csv(data) {
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &points).unwrap();
        assert_eq!(parse_points_csv(&buf).unwrap(), points);
    }
});
