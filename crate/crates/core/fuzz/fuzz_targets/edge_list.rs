#![no_main]

use libfuzzer_sys::fuzz_target;
use specgraph::formats::{parse_edge_list, write_edge_list};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(parsed) = parse_edge_list(text) else {
        return;
    };
    let Ok(graph) = parsed.to_graph() else { return };
    let again = parse_edge_list(&write_edge_list(&graph))
        .unwrap()
        .to_graph()
        .unwrap();
    assert_eq!(graph, again);
});
