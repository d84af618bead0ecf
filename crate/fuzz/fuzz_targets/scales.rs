#![no_main]

use libfuzzer_sys::fuzz_target;
use matperturb_cli::parse_scales;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scales) = parse_scales(text) {
        assert!(!scales.is_empty());
        assert!(scales.iter().all(|t| t.is_finite()));
    }
});
