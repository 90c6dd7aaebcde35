#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_dense_csv, write_dense_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(m) = parse_dense_csv(text) {
            assert_eq!(parse_dense_csv(&write_dense_csv(&m)).unwrap(), m);
        }
    }
});
