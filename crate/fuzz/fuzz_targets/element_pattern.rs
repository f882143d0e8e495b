#![no_main]

use dense_mimo::array::ElementPattern;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|s: &str| {
    if let Ok(p) = s.parse::<ElementPattern>() {
        assert_eq!(p.to_string().parse::<ElementPattern>().unwrap(), p);
    }
});
