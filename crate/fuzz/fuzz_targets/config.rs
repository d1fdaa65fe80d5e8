#![no_main]

use hcmeta_core::configspace::{is_independent, parse_config, parse_config_hex};
use hcmeta_core::graph::GraphSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if let Ok(x) = parse_config_hex(s) {
        assert_eq!(parse_config_hex(&format!("{x:#x}")).ok(), Some(x));
    }
    let g = "torus:4x4".parse::<GraphSpec>().unwrap().build().unwrap();
    if let Ok(x) = parse_config(&g, s) {
        assert!(is_independent(&g, x));
    }
});
