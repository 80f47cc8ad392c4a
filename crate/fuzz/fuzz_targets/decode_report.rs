#![no_main]

use libfuzzer_sys::fuzz_target;
use qdiv_cli::Report;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = Report::from_json(s) {
        let again = Report::from_json(&report.to_json()).expect("re-encoded report decodes");
        assert_eq!(again, report);
        let _ = report.to_csv();
    }
});
