#![no_main]

use libfuzzer_sys::fuzz_target;
use twsched::cli::parse_args;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let argv = std::iter::once("twsched").chain(text.split(' '));
    if let Ok(args) = parse_args(argv) {
        let _ = args.config();
    }
});
