#![no_main]

use homperc::experiments::{parse_records, records_to_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(records) = parse_records(text) {
        let back = parse_records(&records_to_jsonl(&records)).expect("own jsonl reparses");
        assert_eq!(back.len(), records.len());
    }
});
