#![no_main]
use libfuzzer_sys::fuzz_target;
use weyl_cdma::formats::read_profile_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_profile_csv(data);
});
