#![no_main]

use hcmeta_core::graph::BipartiteGraph;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(g) = BipartiteGraph::from_json_str(s) else { return };
    let back = BipartiteGraph::from_json(&g.to_json()).expect("exported graph reloads");
    assert_eq!(back.edges(), g.edges());
    let _ = g.validate();
});
