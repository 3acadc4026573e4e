#![no_main]

use libfuzzer_sys::fuzz_target;
use twsched::grid::Grid;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(grid) = Grid::parse_dump(text) else {
        return;
    };
    let dump = grid.dump();
    assert_eq!(Grid::parse_dump(&dump).expect("dump parses").dump(), dump);
});
