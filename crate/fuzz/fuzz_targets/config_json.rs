#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoconvex_cli::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_json(text) {
        // A resolved config re-serializes to something that resolves again.
        let again = serde_json::to_string(&cfg).unwrap();
        let back = RunConfig::from_json(&again).expect("round trip");
        assert_eq!(cfg.hash(), back.hash());
    }
});
