#![no_main]

use homperc::persistence::Diagram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(d) = Diagram::from_json(text) {
        let json = d.to_json().expect("diagram serializes");
        let back = Diagram::from_json(&json).expect("own json reparses");
        assert_eq!(back.all_bars().len(), d.all_bars().len());
    }
});
