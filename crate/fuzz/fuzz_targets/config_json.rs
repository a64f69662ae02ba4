#![no_main]

use libfuzzer_sys::fuzz_target;
use ucls::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_json(text) else { return };
    // Accepted configs survive a round trip through the written form.
    let json = serde_json::to_string(&cfg).expect("config serializes");
    assert_eq!(ExperimentConfig::from_json(&json).expect("round trip parses"), cfg);
});
