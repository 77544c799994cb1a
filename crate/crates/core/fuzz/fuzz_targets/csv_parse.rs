#![no_main]

use dyned::stream::{csv_from_reader, CsvOptions, LabelColumn, StreamSource};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let (flags, body) = match data.split_first() {
        Some((f, rest)) => (*f, rest),
        None => return,
    };
    let label_column = match flags % 3 {
        0 => LabelColumn::Last,
        1 => LabelColumn::Index((flags / 3 % 4) as usize),
        _ => LabelColumn::Name("class".into()),
    };
    let options = CsvOptions {
        label_column,
        has_header: flags & 0x80 != 0,
        schema_hint: None,
    };
    if let Ok(mut source) = csv_from_reader(body, &options) {
        let schema = source.schema();
        while let Some(inst) = source.next_instance() {
            assert!(schema.check(&inst).is_ok());
        }
    }
});
