#![no_main]

use dense_mimo::harness::{read_rows_from, to_csv_bytes};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_rows_from(data) {
        // anything accepted must survive a write/read cycle unchanged
        let bytes = to_csv_bytes(&rows).expect("accepted rows serialize");
        let again = read_rows_from(&bytes[..]).expect("serialized rows parse");
        assert_eq!(to_csv_bytes(&again).unwrap(), bytes);
    }
});
