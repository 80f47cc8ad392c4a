//! Arguments are NUL-separated. Parsing and config resolution must never
//! panic; commands are not executed.

#![no_main]

use clap::Parser;
use libfuzzer_sys::fuzz_target;
use qdiv_cli::{Cli, RunConfig};

fuzz_target!(|data: &[u8]| {
    let args = std::iter::once("qdiv".to_string()).chain(
        data.split(|&b| b == 0)
            .map(|a| String::from_utf8_lossy(a).into_owned()),
    );
    if let Ok(cli) = Cli::try_parse_from(args) {
        if let Ok(cfg) = RunConfig::from_cli(&cli) {
            assert!(cfg.dim >= 2 && cfg.samples >= 1 && cfg.shards >= 1);
            assert!(cfg.tolerance > 0.0 && cfg.tolerance.is_finite());
        }
    }
});
