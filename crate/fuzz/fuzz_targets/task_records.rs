#![no_main]

use libfuzzer_sys::fuzz_target;
use twsched::task_graph::{format_tasks, parse_tasks, TaskSet};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(records) = parse_tasks(text) else {
        return;
    };
    let canonical = format_tasks(&records);
    assert_eq!(
        parse_tasks(&canonical).expect("canonical form parses"),
        records
    );
    let _ = TaskSet::from_records(&records);
});
