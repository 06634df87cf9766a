#![no_main]

use libfuzzer_sys::fuzz_target;
use thermoconvex::transforms::ChainSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<ChainSpec>(data) else { return };
    let text = serde_json::to_string(&spec).unwrap();
    let _: ChainSpec = serde_json::from_str(&text).expect("round trip");
});
