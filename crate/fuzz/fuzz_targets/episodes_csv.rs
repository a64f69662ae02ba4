#![no_main]

use libfuzzer_sys::fuzz_target;
use ucls::harness::read_episodes;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_episodes(data) {
        assert!(rows.iter().all(|(_, e)| e.length > 0));
    }
});
