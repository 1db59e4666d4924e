#![no_main]

use homperc::persistence::Diagram;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(d) = Diagram::from_csv(text) {
        let back = Diagram::from_csv(&d.to_csv()).expect("own csv reparses");
        assert_eq!(back.all_bars().len(), d.all_bars().len());
    }
});
