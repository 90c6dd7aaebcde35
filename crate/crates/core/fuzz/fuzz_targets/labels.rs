#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_labels, write_labels};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(labels) = parse_labels(text) {
        assert_eq!(parse_labels(&write_labels(&labels)).unwrap(), labels);
    }
});
