#![no_main]

use hcmeta_core::exponent::{parse_rational, Alpha};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let _ = parse_rational(s);
    if let Ok(a) = s.parse::<Alpha>() {
        let x = a.as_f64();
        assert!(x > 0.0 && x < 1.0);
        let again: Alpha = a.to_string().parse().expect("printed alpha parses");
        assert_eq!(again.value(), a.value());
    }
});
