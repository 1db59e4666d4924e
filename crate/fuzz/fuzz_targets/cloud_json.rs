#![no_main]

use homperc::torus::PointCloud;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cloud) = PointCloud::from_json(text) {
        let back = PointCloud::from_json(&cloud.to_json()).expect("own json reparses");
        assert_eq!(back.fingerprint(), cloud.fingerprint());
    }
});
