mod common;

use common::files::transfer;
use nopsys::fabric::Word;
use nopsys::kernel::fileserver::CHUNK;
use proptest::prelude::*;

#[test]
fn three_hundred_words_take_three_chunks() {
    assert_eq!(CHUNK, 128);
    let data: Vec<Word> = (0..300).collect();
    let o = transfer(data.clone(), 50);
    assert!(o.write_ok);
    assert_eq!(o.chunks, 3);
    assert_eq!(o.read, data);
}

#[test]
fn chunk_boundaries() {
    for n in [0, 1, CHUNK - 1, CHUNK, CHUNK + 1, 2 * CHUNK, 10_000] {
        let data: Vec<Word> = (0..n as Word).map(|w| w.wrapping_mul(0x9e37_79b9)).collect();
        let o = transfer(data.clone(), CHUNK);
        assert_eq!(o.read, data, "{n} words");
        assert_eq!(o.chunks, n.div_ceil(CHUNK), "{n} words");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn write_then_read_is_identity(data in prop::collection::vec(any::<Word>(), 0..=10_000), chunk in 1usize..300) {
        let o = transfer(data.clone(), chunk);
        prop_assert!(o.write_ok);
        prop_assert_eq!(o.stored.as_ref(), Some(&data));
        prop_assert_eq!(&o.read, &data);
        prop_assert_eq!(o.chunks, data.len().div_ceil(CHUNK));
    }
}
