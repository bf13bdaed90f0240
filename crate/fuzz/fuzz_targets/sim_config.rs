#![no_main]
use libfuzzer_sys::fuzz_target;
use weyl_cdma::formats::parse_sim_config;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(spec) = parse_sim_config(text) {
            assert!(!spec.users.is_empty());
            assert!(spec.template.validate().is_ok());
        }
    }
});
