#![no_main]

use homperc::experiments::ExperimentSpec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(spec) = ExperimentSpec::from_toml(text) {
        ExperimentSpec::from_toml(&spec.to_toml()).expect("echoed manifest reparses");
    }
});
