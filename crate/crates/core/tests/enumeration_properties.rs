use pdilab_core::sign_enumeration::{combination_magnitudes, sign_matrix};
use pdilab_core::CorrelatorBlock;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sorted_magnitudes(block: &CorrelatorBlock) -> Vec<f64> {
    let mut v: Vec<f64> = combination_magnitudes(block).unwrap().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn naive_sorted_magnitudes(block: &CorrelatorBlock) -> Vec<f64> {
    let m = sign_matrix(block.len()).unwrap();
    let mut v: Vec<f64> = m
        .apply(block)
        .into_iter()
        .map(|(a, b)| a.hypot(b))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

fn assert_same_multiset(x: &[f64], y: &[f64], rel: f64) {
    assert_eq!(x.len(), y.len());
    for (p, q) in x.iter().zip(y) {
        assert!(
            (p - q).abs() <= rel * p.abs().max(q.abs()).max(1e-12),
            "{p} vs {q}"
        );
    }
}

#[test]
fn gray_code_matches_sign_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let n = 1 + trial % 12;
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)))
            .collect();
        let block = CorrelatorBlock::from_pairs(&pairs).unwrap();
        assert_same_multiset(
            &sorted_magnitudes(&block),
            &naive_sorted_magnitudes(&block),
            1e-9,
        );
    }
}

fn block_and_signs() -> impl Strategy<Value = (CorrelatorBlock, Vec<i8>)> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..=10).prop_flat_map(|pairs| {
        let n = pairs.len();
        (
            Just(CorrelatorBlock::from_pairs(&pairs).unwrap()),
            prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn multiset_survives_sign_flips((block, signs) in block_and_signs()) {
        assert_same_multiset(&sorted_magnitudes(&block), &sorted_magnitudes(&block.with_signs(&signs)), 1e-9);
    }

    #[test]
    fn multiset_survives_rotation((block, _) in block_and_signs(), theta in -7.0f64..7.0) {
        assert_same_multiset(&sorted_magnitudes(&block), &sorted_magnitudes(&block.rotated(theta)), 1e-9);
    }
}
