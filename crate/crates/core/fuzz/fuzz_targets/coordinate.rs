#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_coordinate, write_coordinate};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = parse_coordinate(text) {
        let again = parse_coordinate(&write_coordinate(&m)).unwrap();
        assert_eq!(again, m);
    }
});
