#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiv::haar::SamplerId;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(sampler) = s.parse::<SamplerId>() {
        assert_eq!(sampler.to_string(), s);
    }
});
