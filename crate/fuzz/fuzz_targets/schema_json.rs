#![no_main]
use libfuzzer_sys::fuzz_target;
use mtmia::relgraph::RelationalSchema;

// Accepted schemas must survive a print/parse round trip.
fuzz_target!(|data: &str| {
    if let Ok(schema) = RelationalSchema::from_json_str(data) {
        let again = RelationalSchema::from_json_str(&schema.to_json_pretty()).expect("reparse");
        assert_eq!(schema, again);
    }
});
