#![no_main]

use dyned::eval::{rank_table, read_results_from, write_results_to};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = read_results_from(data) else {
        return;
    };
    for r in &rows {
        assert!((0.0..=1.0).contains(&r.accuracy));
    }
    let mut buf = Vec::new();
    write_results_to(&mut buf, &rows).unwrap();
    let _ = rank_table(&rows);
});
