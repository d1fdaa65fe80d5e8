#![no_main]

use hcmeta_core::graph::GraphSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(spec) = s.parse::<GraphSpec>() else { return };
    // the printed form parses back to the same spec
    let again: GraphSpec = spec.to_string().parse().expect("canonical spec parses");
    assert_eq!(again, spec);
    // building may refuse oversized or degenerate graphs but must not panic
    if let Ok(g) = spec.build() {
        assert_eq!(g.n_sites(), g.n_u() + g.n_v());
    }
});
