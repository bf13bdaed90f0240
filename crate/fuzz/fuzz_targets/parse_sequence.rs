#![no_main]
use libfuzzer_sys::fuzz_target;
use weyl_cdma::formats::{
    parse_sequence, read_sequence_csv, read_sequence_json, write_sequence_csv,
};

fuzz_target!(|data: &[u8]| {
    let _ = read_sequence_csv(data);
    let _ = read_sequence_json(data);
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // Anything accepted must survive a write/read cycle.
    if let Ok(seq) = parse_sequence(text) {
        let mut buf = Vec::new();
        write_sequence_csv(&seq, &mut buf).unwrap();
        assert_eq!(read_sequence_csv(buf.as_slice()).unwrap(), seq);
    }
});
