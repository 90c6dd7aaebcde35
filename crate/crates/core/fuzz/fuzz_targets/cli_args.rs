#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::cli::{parse_sweep, Response};

// `<--g value>\0<--m-sweep value>`
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let (response, sweep) = text.split_once('\0').unwrap_or((text, ""));
    if let Ok(r) = Response::parse(response) {
        let _ = r.eval(0.5);
    }
    if let Ok(range) = parse_sweep(sweep) {
        assert!(*range.start() >= 1 && range.start() <= range.end());
    }
});
