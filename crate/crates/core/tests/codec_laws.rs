mod common;

use mastermind_core::codec::{
    binary_decode, binary_encode, ceil_log2, substitute_block, LayoutOptions, LayoutParams,
};
use mastermind_core::{Code, GameParams};
use proptest::prelude::*;

#[test]
fn exhaustive_and_random_codec_laws() {
    let cases = common::codec_laws(2_000, 5).unwrap();
    assert!(cases > 10_000);
}

#[test]
fn white_pegs_match_permutation_definition() {
    common::white_peg_laws(2_000, 6).unwrap();
}

#[test]
fn binary_rejects_overflow() {
    assert!(binary_encode(8, 3).is_err());
    assert_eq!(binary_encode(7, 3).unwrap().as_slice(), &[1, 1, 1]);
}

#[test]
fn feasible_layouts_fit() {
    for k in [2u8, 3] {
        for n in [24usize, 64, 100, 144, 256, 1000, 1024, 4096] {
            let p = GameParams::new(n, k).unwrap();
            for l in [
                LayoutParams::size_one(p, &LayoutOptions::default()),
                LayoutParams::size_two(p, &LayoutOptions::default()),
            ]
            .into_iter()
            .flatten()
            {
                assert!(l.storage_requirement() <= n, "{l}");
            }
        }
    }
}

proptest! {
    #[test]
    fn binary_round_trip(n in 1usize..100_000, frac in 0.0f64..=1.0) {
        let h = (n as f64 * frac) as u64;
        let w = ceil_log2(n) + 1;
        prop_assert_eq!(binary_decode(binary_encode(h, w).unwrap().as_slice()).unwrap(), h);
    }

    #[test]
    fn substitute_inverse(x in proptest::collection::vec(0u8..3, 1..40), a in 0usize..40, len in 0usize..40, fill in 0u8..3) {
        let x = Code::new(x);
        let a = a.min(x.len());
        let b = (a + len).min(x.len());
        let r = vec![fill; b - a];
        let y = substitute_block(&x, a..b, &r).unwrap();
        prop_assert_eq!(&y.as_slice()[a..b], &r[..]);
        prop_assert_eq!(substitute_block(&y, a..b, &x.as_slice()[a..b]).unwrap(), x);
    }
}
