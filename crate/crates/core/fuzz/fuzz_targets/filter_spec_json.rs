#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::filters::FilterSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = FilterSpec::from_json(text) {
        let _ = spec.parameter_count();
        assert_eq!(FilterSpec::from_json(&spec.to_json()).unwrap(), spec);
    }
});
