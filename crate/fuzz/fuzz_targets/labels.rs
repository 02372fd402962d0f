#![no_main]

use augclust::formats::{parse_labels, write_labels};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&k, rest)) = data.split_first() else { return };
    let Ok(text) = std::str::from_utf8(rest) else { return };
    let k = (k != 0).then_some(k as usize);
    if let Ok(labels) = parse_labels(text, k) {
        let mut buf = Vec::new();
        write_labels(&mut buf, &labels).unwrap();
        let again = parse_labels(std::str::from_utf8(&buf).unwrap(), k).unwrap();
        assert_eq!(again, labels);
    }
});
