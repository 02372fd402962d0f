#![no_main]

use augclust::report::ClusterReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    // Accepted reports re-serialize to something that parses back identically.
    if let Ok(report) = ClusterReport::from_json(s) {
        let text = report.to_json();
        assert_eq!(ClusterReport::from_json(&text).unwrap(), report);
    }
});
