#![no_main]

use homperc::filtration::Filtration;
use homperc::persistence::reduce;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(f) = Filtration::from_text(text) {
        // keep reductions cheap
        if f.len() <= 4096 {
            let _ = reduce(&f);
        }
    }
});
