#![no_main]
use libfuzzer_sys::fuzz_target;
use weyl_cdma::decomposition::CoefficientKind;
use weyl_cdma::formats::read_coefficients_csv;

fuzz_target!(|data: &[u8]| {
    let _ = read_coefficients_csv(data, CoefficientKind::Alpha);
    let _ = read_coefficients_csv(data, CoefficientKind::Beta);
});
