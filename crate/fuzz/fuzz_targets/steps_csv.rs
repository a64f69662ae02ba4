#![no_main]

use libfuzzer_sys::fuzz_target;
use ucls::harness::{read_steps, write_steps, Curves};

fuzz_target!(|data: &[u8]| {
    let Ok(runs) = read_steps(data) else { return };
    let _ = Curves::from_runs(&runs);
    let mut out = Vec::new();
    write_steps(&mut out, &runs).expect("write to memory");
    let again = read_steps(out.as_slice()).expect("written steps parse");
    assert_eq!(again.len(), runs.len());
    for (a, b) in again.iter().zip(&runs) {
        assert_eq!(a.steps.len(), b.steps.len());
        assert_eq!(a.num_episodes(), b.num_episodes());
    }
});
