#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiv_cli::args::RemapName;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(remap) = s.parse::<RemapName>() {
        assert_eq!(remap.as_str(), s);
    }
});
