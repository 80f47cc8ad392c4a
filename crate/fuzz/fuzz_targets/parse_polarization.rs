#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiv_cli::args::Polarization;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = s.parse::<Polarization>() {
        assert!(qdiv::scenarios::polarization(p.as_str()).is_some());
    }
});
