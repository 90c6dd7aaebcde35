#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_signal, write_signal};

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(v) = parse_signal(text) {
            let again = parse_signal(&write_signal(&v)).unwrap();
            assert_eq!(v.len(), again.len());
            assert!(v
                .iter()
                .zip(&again)
                .all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0)));
        }
    }
});
