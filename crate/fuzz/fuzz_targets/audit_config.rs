#![no_main]
use libfuzzer_sys::fuzz_target;
use mtmia::pipeline::AuditConfig;

fuzz_target!(|data: &str| {
    let _ = AuditConfig::from_json_str(data);
});
