#![no_main]

use homperc::torus::PointCloud;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(cloud) = PointCloud::from_csv(text, Some(10.0), 0) {
        let back = PointCloud::from_csv(&cloud.to_csv(), Some(10.0), 0).expect("own csv reparses");
        assert_eq!(back.fingerprint(), cloud.fingerprint());
    }
});
