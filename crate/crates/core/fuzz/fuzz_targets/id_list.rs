#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_id_list, write_id_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ids) = parse_id_list(text) {
        assert_eq!(parse_id_list(&write_id_list(&ids)).unwrap(), ids);
    }
});
