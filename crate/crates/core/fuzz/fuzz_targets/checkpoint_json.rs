#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::gcn::Checkpoint;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(ckpt) = Checkpoint::from_json(text) {
        assert_eq!(Checkpoint::from_json(&ckpt.to_json()).unwrap(), ckpt);
    }
});
