#![no_main]

use libfuzzer_sys::fuzz_target;
use nlpml_cli::config::parse_entries;
use nlpml_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_entries(text);
    if let Ok(cfg) = RunConfig::parse(text) {
        let again = RunConfig::parse(&cfg.to_manifest()).expect("manifest must parse");
        assert_eq!(again, cfg);
    }
});
