#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiv::scenarios::NamedState;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = s.parse::<NamedState>() {
        assert_eq!(state.as_str().parse::<NamedState>(), Ok(state));
        // Bell states only exist at D = 2; everything else resolves.
        for d in 2..=3 {
            let _ = state.spec(d).resolve();
        }
    }
});
