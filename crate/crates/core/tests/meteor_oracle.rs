mod common;

use common::meteor_oracle::oracle_meteor;
use hprr_core::meteor::{align, meteor_score, MeteorStats};
use hprr_core::textproc::TokenSeq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const VOCAB: &[&str] = &["the", "cat", "cats", "run", "runs", "running", "a", "dog", "dogs", "model"];

fn random_tokens(rng: &mut ChaCha8Rng, max: usize, vocab: &[&str]) -> Vec<String> {
    let n = rng.gen_range(0..=max);
    (0..n).map(|_| vocab[rng.gen_range(0..vocab.len())].to_owned()).collect()
}

#[test]
fn agrees_with_exhaustive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..600 {
        let vocab = &VOCAB[..rng.gen_range(3..=VOCAB.len())];
        let c = random_tokens(&mut rng, 8, vocab);
        let r = random_tokens(&mut rng, 8, vocab);
        let oracle = oracle_meteor(&c, &r);
        let cs: TokenSeq = c.iter().collect();
        let rs: TokenSeq = r.iter().collect();
        let a = align(&cs, &rs);
        assert!(a.exact, "case {case}");
        assert_eq!((a.matches(), a.chunks), (oracle.matches, oracle.chunks), "case {case}: {c:?} vs {r:?}");
        let s: MeteorStats<f64> = meteor_score(&cs, &rs);
        assert!((s.score - oracle.score).abs() < 1e-6, "case {case}");
    }
}

#[test]
fn alignment_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let c: TokenSeq = random_tokens(&mut rng, 30, VOCAB).iter().collect();
        let r: TokenSeq = random_tokens(&mut rng, 60, VOCAB).iter().collect();
        let a = align(&c, &r);
        assert!(a.pairs.windows(2).all(|w| w[0].candidate < w[1].candidate));
        let mut refs: Vec<_> = a.pairs.iter().map(|p| p.reference).collect();
        refs.sort_unstable();
        refs.dedup();
        assert_eq!(refs.len(), a.pairs.len());
        assert!(a.chunks <= a.matches());
        assert_eq!(a.chunks == 0, a.matches() == 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn score_in_unit_interval(
        c in prop::collection::vec(prop::sample::select(VOCAB), 0..40),
        r in prop::collection::vec(prop::sample::select(VOCAB), 0..80),
    ) {
        let s: MeteorStats<f64> = meteor_score(&c.iter().collect(), &r.iter().collect());
        prop_assert!((0.0..=1.0).contains(&s.score));
        prop_assert!((0.0..=1.0).contains(&s.precision));
        prop_assert!((0.0..=1.0).contains(&s.recall));
        prop_assert!((0.0..=0.5).contains(&s.penalty));
    }

    #[test]
    fn permuting_candidate_never_helps_a_single_chunk(
        words in prop::collection::hash_set("[a-z]{3,6}", 2..10),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        let words: Vec<String> = words.into_iter().collect();
        let reference: TokenSeq = words.iter().collect();
        let mut shuffled = words.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let base: MeteorStats<f64> = meteor_score(&reference, &reference);
        let perm: MeteorStats<f64> = meteor_score(&shuffled.iter().collect(), &reference);
        prop_assert_eq!(perm.matches, base.matches);
        prop_assert!(perm.score <= base.score + 1e-12);
    }
}
