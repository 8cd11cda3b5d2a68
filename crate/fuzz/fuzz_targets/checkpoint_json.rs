#![no_main]
use libfuzzer_sys::fuzz_target;
use mtmia::datagen::toy_schema;
use mtmia::hgnn::{EncoderCheckpoint, EncoderParams};

fuzz_target!(|data: &str| {
    let Ok(ckpt) = EncoderCheckpoint::from_json_str(data) else { return };
    let again = EncoderCheckpoint::from_json_str(&ckpt.to_json()).expect("reparse");
    assert_eq!(ckpt.tensors.len(), again.tensors.len());
    // Restoring may reject the checkpoint but must not panic.
    let schema = toy_schema(2, 2).unwrap();
    let _ = EncoderParams::from_checkpoint(&ckpt, &schema);
});
