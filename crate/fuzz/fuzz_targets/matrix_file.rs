#![no_main]

use libfuzzer_sys::fuzz_target;
use matperturb_cli::MatrixFile;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(file) = MatrixFile::parse(text) else {
        return;
    };
    // accepted documents satisfy the invariants and survive a
    // serialize/reparse cycle bit for bit
    assert!(file.rows > 0 && file.cols > 0);
    assert_eq!(file.data.len(), file.rows * file.cols);
    assert!(file.data.iter().all(|(re, im)| re.is_finite() && im.is_finite()));

    let rewritten = file.to_json_string();
    let back = MatrixFile::parse(&rewritten).expect("writer output must reparse");
    assert_eq!(back.rows, file.rows);
    assert_eq!(back.cols, file.cols);
    assert_eq!(back.kind, file.kind);
    for (a, b) in file.data.iter().zip(&back.data) {
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
    }
});
