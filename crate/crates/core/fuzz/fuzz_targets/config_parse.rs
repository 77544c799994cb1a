#![no_main]

use dyned::eval::{parse_config, ExperimentConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(settings) = parse_config(text) {
        if let Ok(config) = ExperimentConfig::from_settings(&settings) {
            assert!(config.validate().is_ok());
        }
    }
});
