#![no_main]

use libfuzzer_sys::fuzz_target;
use twsched::scheduler::parse_schedule_dump;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(lines) = parse_schedule_dump(text) {
        assert!(lines.iter().all(|l| l.stream >= 1));
    }
});
