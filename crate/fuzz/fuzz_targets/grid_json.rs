#![no_main]

use libfuzzer_sys::fuzz_target;
use ucls::harness::{ExperimentConfig, Named, SweepGrid};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(grid) = SweepGrid::from_json(text) else { return };
    let n = grid.num_cells();
    assert!(n >= 1);
    if n > 4096 {
        return;
    }
    let base = ExperimentConfig::new(Named::new("river_swim"), Named::new("ucls"));
    let cells = grid.cells();
    assert_eq!(cells.len(), n);
    for cell in &cells {
        assert_eq!(cell.len(), grid.names().count());
        let _ = grid.apply(&base, cell);
    }
});
