#![no_main]
use libfuzzer_sys::fuzz_target;
use mtmia::datagen::toy_schema;
use mtmia::relgraph::{read_table_csv, write_table_csv};

fuzz_target!(|data: &[u8]| {
    let schema = toy_schema(2, 2).unwrap();
    // First byte picks the table, the rest is the file.
    let Some((&pick, body)) = data.split_first() else { return };
    let tables = schema.tables();
    let spec = &tables[pick as usize % tables.len()];
    if let Ok(table) = read_table_csv(body, spec) {
        let mut out = Vec::new();
        write_table_csv(&mut out, spec, &table).expect("write");
        let again = read_table_csv(out.as_slice(), spec).expect("reparse");
        assert_eq!(table.row_count(), again.row_count());
    }
});
