#![no_main]

use libfuzzer_sys::fuzz_target;
use ucls::harness::{read_aggregate, write_aggregate};

fuzz_target!(|data: &[u8]| {
    let Ok(curve) = read_aggregate(data) else { return };
    let _ = curve.first_reaching(0.5);
    let mut out = Vec::new();
    write_aggregate(&mut out, &curve).expect("write to memory");
    let again = read_aggregate(out.as_slice()).expect("written curve parses");
    assert_eq!(again.len(), curve.len());
});
