#![no_main]
use libfuzzer_sys::fuzz_target;
use weyl_cdma::formats::{read_ber_csv, read_ber_json, write_ber_csv};

fuzz_target!(|data: &[u8]| {
    let _ = read_ber_json(data);
    if let Ok(result) = read_ber_csv(data) {
        let mut buf = Vec::new();
        write_ber_csv(&result, &mut buf).unwrap();
        let again = read_ber_csv(buf.as_slice()).unwrap();
        assert_eq!(again.points.len(), result.points.len());
    }
});
