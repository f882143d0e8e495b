#![no_main]

use dense_mimo::array::ArrayGeometry;
use dense_mimo::harness::parse_element_list;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(list) = parse_element_list(s) {
        assert!(!list.is_empty());
        for m in list {
            ArrayGeometry::fixed_aperture(2.5, m).expect("accepted counts are perfect squares");
        }
    }
});
