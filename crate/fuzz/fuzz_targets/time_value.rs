#![no_main]

use libfuzzer_sys::fuzz_target;
use twsched::time::Time;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(t) = text.parse::<Time>() {
        assert_eq!(t.to_string().parse::<Time>(), Ok(t));
    }
});
