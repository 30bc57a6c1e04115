#![no_main]

use libfuzzer_sys::fuzz_target;
use nlpml::presets::Example;
use nlpml_cli::config::parse_real;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(v) = parse_real("h", text) {
        assert!(v.is_finite());
    }
    let _ = text.parse::<Example>();
});
