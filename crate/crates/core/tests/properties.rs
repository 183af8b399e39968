//! Property tests for the metric, crossover, selection and game invariants.

use std::sync::Arc;

use gaspace::crossover::{
    classify_outcome, conserves_pair_distance, conserves_power_sum, crossover, decompose,
    decompose_exact, generalized_circumference, generalized_circumference_exact,
    linf_sum_preserved, offspring_distance_tradeoff, rel_close, CrossoverMask, OutcomeConfig,
};
use gaspace::guessgame::{
    analytic_win_probability, simulate_game, win_rate_sigma, PairDistribution, Strategy as GuessStrategy,
};
use gaspace::selection::{
    quartiles, ArctanCurve, ArctanSequence, Direction, SelectionCurve, TanhCurve,
};
use gaspace::{distance, distance_pow, distance_pow_exact, Chromosome, Gene, Metric, Schema};
use proptest::prelude::*;
use rand::SeedableRng;

const METRICS_DISCRETE: [Metric; 5] =
    [Metric::Hamming, Metric::Lp(1), Metric::Lp(2), Metric::Lp(3), Metric::Linf];
const METRICS_REAL: [Metric; 4] = [Metric::Lp(1), Metric::Lp(2), Metric::Lp(3), Metric::Linf];

fn bit_triple() -> impl proptest::strategy::Strategy<Value = (Vec<bool>, Vec<bool>, Vec<bool>)> {
    (2usize..=64).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(any::<bool>(), n),
        )
    })
}

fn int_triple() -> impl proptest::strategy::Strategy<Value = (Vec<i64>, Vec<i64>, Vec<i64>)> {
    (2usize..=16).prop_flat_map(|n| {
        (
            prop::collection::vec(-1000i64..=1000, n),
            prop::collection::vec(-1000i64..=1000, n),
            prop::collection::vec(-1000i64..=1000, n),
        )
    })
}

fn real_triple() -> impl proptest::strategy::Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..=16).prop_flat_map(|n| {
        (
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )
    })
}

fn mask_for(len: usize) -> impl proptest::strategy::Strategy<Value = CrossoverMask> {
    prop::collection::btree_set(1..len, 1..len).prop_map(move |cuts| {
        CrossoverMask::new(len, cuts.into_iter().collect()).unwrap()
    })
}

fn bits(schema: &Arc<Schema>, v: &[bool]) -> Chromosome {
    Chromosome::new(schema, v.iter().map(|&b| Gene::Bit(b)).collect()).unwrap()
}

fn all_three<T>(f: impl Fn(&[T]) -> Chromosome, t: &(Vec<T>, Vec<T>, Vec<T>)) -> [Chromosome; 3] {
    [f(&t.0), f(&t.1), f(&t.2)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn metric_axioms_on_integers(t in int_triple()) {
        let schema = Schema::integers(t.0.len(), -1000, 1000).unwrap();
        let [a, b, c] = all_three(|v| Chromosome::from_ints(&schema, v).unwrap(), &t);
        for m in METRICS_DISCRETE {
            let (ab, ba, bc, ac) = (
                distance(&a, &b, m).unwrap(),
                distance(&b, &a, m).unwrap(),
                distance(&b, &c, m).unwrap(),
                distance(&a, &c, m).unwrap(),
            );
            prop_assert_eq!(ab, ba);
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(ab == 0.0, a == b);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12), "{m}: {ac} > {ab} + {bc}");
        }
    }

    #[test]
    fn metric_axioms_on_reals(t in real_triple()) {
        let schema = Schema::reals(t.0.len(), -100.0, 100.0).unwrap();
        let [a, b, c] = all_three(|v| Chromosome::from_reals(&schema, v).unwrap(), &t);
        for m in METRICS_REAL {
            let (ab, bc, ac) = (
                distance(&a, &b, m).unwrap(),
                distance(&b, &c, m).unwrap(),
                distance(&a, &c, m).unwrap(),
            );
            prop_assert_eq!(ab, distance(&b, &a, m).unwrap());
            prop_assert!(ab > 0.0 || a == b);
            prop_assert_eq!(distance(&a, &a, m).unwrap(), 0.0);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12), "{m}: {ac} > {ab} + {bc}");
        }
    }

    #[test]
    fn l1_equals_hamming_on_bits(t in bit_triple()) {
        let schema = Schema::bits(t.0.len()).unwrap();
        let [a, b, _] = all_three(|v| bits(&schema, v), &t);
        let count = t.0.iter().zip(&t.1).filter(|(x, y)| x != y).count() as f64;
        prop_assert_eq!(distance(&a, &b, Metric::Hamming).unwrap(), count);
        prop_assert_eq!(distance(&a, &b, Metric::Lp(1)).unwrap(), count);
    }

    #[test]
    fn power_sum_matches_root_form(t in real_triple(), p in 1u32..=4) {
        let schema = Schema::reals(t.0.len(), -100.0, 100.0).unwrap();
        let [a, b, _] = all_three(|v| Chromosome::from_reals(&schema, v).unwrap(), &t);
        let root = distance(&a, &b, Metric::Lp(p)).unwrap();
        let pow = distance_pow(&a, &b, p).unwrap();
        prop_assert!(rel_close(root.powi(p as i32), pow, 1e-9), "{root}^{p} vs {pow}");
    }

    #[test]
    fn exact_power_sum_on_integers(t in int_triple(), p in 1u32..=4) {
        let schema = Schema::integers(t.0.len(), -1000, 1000).unwrap();
        let [a, b, _] = all_three(|v| Chromosome::from_ints(&schema, v).unwrap(), &t);
        let oracle: u128 = t.0.iter().zip(&t.1)
            .map(|(x, y)| (i128::from(*x) - i128::from(*y)).unsigned_abs().pow(p))
            .sum();
        prop_assert_eq!(distance_pow_exact(&a, &b, p).unwrap(), oracle);
        prop_assert_eq!(distance_pow(&a, &b, p).unwrap(), oracle as f64);
    }

    #[test]
    fn crossover_conserves_on_bits((t, mask) in bit_triple().prop_flat_map(|t| {
        let n = t.0.len();
        (Just(t), mask_for(n))
    })) {
        let schema = Schema::bits(t.0.len()).unwrap();
        let [pa, pb, r] = all_three(|v| bits(&schema, v), &t);
        let (oa, ob) = crossover(&pa, &pb, &mask).unwrap();
        for m in METRICS_DISCRETE {
            prop_assert!(conserves_pair_distance((&pa, &pb), (&oa, &ob), m).unwrap());
        }
        for p in 1..=3 {
            prop_assert!(conserves_power_sum((&pa, &pb), (&oa, &ob), &r, p).unwrap());
            prop_assert_eq!(
                generalized_circumference_exact(&pa, &pb, &r, p).unwrap(),
                generalized_circumference_exact(&oa, &ob, &r, p).unwrap()
            );
        }
        // Each locus keeps its pair of values.
        for k in 0..pa.len() {
            let mut before = [pa.genes()[k].as_f64(), pb.genes()[k].as_f64()];
            let mut after = [oa.genes()[k].as_f64(), ob.genes()[k].as_f64()];
            before.sort_by(f64::total_cmp);
            after.sort_by(f64::total_cmp);
            prop_assert_eq!(before, after);
        }
    }

    #[test]
    fn crossover_conserves_on_integers((t, mask) in int_triple().prop_flat_map(|t| {
        let n = t.0.len();
        (Just(t), mask_for(n))
    }), p in 1u32..=4) {
        let schema = Schema::integers(t.0.len(), -1000, 1000).unwrap();
        let [pa, pb, r] = all_three(|v| Chromosome::from_ints(&schema, v).unwrap(), &t);
        let (oa, ob) = crossover(&pa, &pb, &mask).unwrap();
        prop_assert!(conserves_power_sum((&pa, &pb), (&oa, &ob), &r, p).unwrap());
        prop_assert!(conserves_pair_distance((&pa, &pb), (&oa, &ob), Metric::Linf).unwrap());

        let d = decompose_exact(&pa, &pb, &r, &mask, p).unwrap();
        prop_assert_eq!(d.parent_a(), distance_pow_exact(&pa, &r, p).unwrap());
        prop_assert_eq!(d.parent_b(), distance_pow_exact(&pb, &r, p).unwrap());
        prop_assert_eq!(d.offspring_a(), distance_pow_exact(&oa, &r, p).unwrap());
        prop_assert_eq!(d.offspring_b(), distance_pow_exact(&ob, &r, p).unwrap());
    }

    #[test]
    fn crossover_conserves_on_reals((t, mask) in real_triple().prop_flat_map(|t| {
        let n = t.0.len();
        (Just(t), mask_for(n))
    })) {
        let schema = Schema::reals(t.0.len(), -100.0, 100.0).unwrap();
        let [pa, pb, r] = all_three(|v| Chromosome::from_reals(&schema, v).unwrap(), &t);
        let (oa, ob) = crossover(&pa, &pb, &mask).unwrap();
        for m in METRICS_REAL {
            prop_assert!(conserves_pair_distance((&pa, &pb), (&oa, &ob), m).unwrap());
        }
        for p in 1..=3 {
            prop_assert!(conserves_power_sum((&pa, &pb), (&oa, &ob), &r, p).unwrap());
            prop_assert!(rel_close(
                generalized_circumference(&pa, &pb, &r, p).unwrap(),
                generalized_circumference(&oa, &ob, &r, p).unwrap(),
                1e-9,
            ));
            let d = decompose(&pa, &pb, &r, &mask, p).unwrap();
            prop_assert!(rel_close(d.offspring_a(), distance_pow(&oa, &r, p).unwrap(), 1e-9));
            prop_assert!(rel_close(d.offspring_b(), distance_pow(&ob, &r, p).unwrap(), 1e-9));
        }
        for m in [Metric::Lp(1), Metric::Lp(2), Metric::Lp(3)] {
            let outcome = classify_outcome(&pa, &pb, &oa, &ob, &r, m).unwrap();
            prop_assert!(
                matches!(outcome, OutcomeConfig::Oppo | OutcomeConfig::Poop | OutcomeConfig::Tie),
                "{m}: {outcome}"
            );
        }
    }

    #[test]
    fn tradeoff_identity_and_sign(d1 in 0.01f64..100.0, d2 in 0.01f64..100.0,
                                  frac in 0.001f64..0.999, p in 1u32..=3) {
        let pi = p as i32;
        let total = d1.powi(pi) + d2.powi(pi);
        let da = frac * total.powf(1.0 / f64::from(p));
        let db = offspring_distance_tradeoff(d1, d2, da, p).unwrap();
        prop_assert!(rel_close(total, da.powi(pi) + db.powi(pi), 1e-9));
        if da < d1 { prop_assert!(db > d2); }
        if da > d1 { prop_assert!(db < d2); }
        prop_assert_eq!(offspring_distance_tradeoff(d1, d2, d1, p).unwrap(), d2);
    }

    #[test]
    fn soft_curves_are_strictly_increasing(
        sample in prop::collection::vec(-50.0f64..50.0, 1..40),
        z1 in -6.0f64..6.0, gap in 0.01f64..3.0,
    ) {
        let summary = quartiles(&sample).unwrap();
        let k1 = summary.median + z1 * summary.denom / 2.0;
        let k2 = k1 + gap * summary.denom / 2.0;
        let curves: [(Box<dyn SelectionCurve>, Direction); 4] = [
            (Box::new(ArctanCurve { summary, direction: Direction::Maximize }), Direction::Maximize),
            (Box::new(TanhCurve { summary, direction: Direction::Maximize }), Direction::Maximize),
            (Box::new(ArctanCurve { summary, direction: Direction::Minimize }), Direction::Minimize),
            (Box::new(TanhCurve { summary, direction: Direction::Minimize }), Direction::Minimize),
        ];
        for (curve, dir) in &curves {
            let (c1, c2) = (curve.select_probability(k1).unwrap(), curve.select_probability(k2).unwrap());
            prop_assert!(c1 > 0.0 && c1 < 1.0 && c2 > 0.0 && c2 < 1.0);
            match dir {
                Direction::Maximize => prop_assert!(c1 < c2, "{} {c1} !< {c2}", curve.name()),
                Direction::Minimize => prop_assert!(c1 > c2, "{} {c1} !> {c2}", curve.name()),
            }
            prop_assert_eq!(curve.select_probability(summary.median).unwrap(), 0.5);
        }
    }

    #[test]
    fn soft_selection_beats_even_odds(seed in any::<u64>(), len in 1usize..8) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = PairDistribution::random(&mut rng, len, -10, 10).unwrap();
        let values = d.support_values();
        let summary = quartiles(&values).unwrap();
        for strategy in [
            GuessStrategy::new(Box::new(ArctanSequence)),
            GuessStrategy::new(Box::new(ArctanCurve { summary, direction: Direction::Maximize })),
            GuessStrategy::new(Box::new(TanhCurve { summary, direction: Direction::Maximize })),
        ] {
            prop_assert!(analytic_win_probability(&d, &strategy).unwrap() > 0.5);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn simulation_agrees_with_analytic(seed in any::<u64>(), len in 1usize..6) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = PairDistribution::random(&mut rng, len, -5, 5).unwrap();
        let s = GuessStrategy::new(Box::new(ArctanSequence));
        let rounds = 100_000;
        let q = analytic_win_probability(&d, &s).unwrap();
        let rate = simulate_game(&d, &s, rounds, seed).unwrap();
        prop_assert!((rate - q).abs() <= 4.0 * win_rate_sigma(q, rounds), "{rate} vs {q}");
    }
}

#[test]
fn linf_identity_fails_on_small_integer_instance() {
    let schema = Schema::integers(2, -10, 10).unwrap();
    let pa = Chromosome::from_ints(&schema, &[1, 5]).unwrap();
    let pb = Chromosome::from_ints(&schema, &[2, 0]).unwrap();
    let r = Chromosome::from_ints(&schema, &[0, 0]).unwrap();
    let (oa, ob) = crossover(&pa, &pb, &CrossoverMask::single_point(2, 1).unwrap()).unwrap();
    let d = |c: &Chromosome| distance(c, &r, Metric::Linf).unwrap();
    assert_eq!(d(&pa) + d(&pb), 7.0);
    assert_eq!(d(&oa) + d(&ob), 6.0);
    assert!(!linf_sum_preserved((&pa, &pb), (&oa, &ob), &r).unwrap());
}

#[test]
fn linf_identity_fails_often_on_random_reals() {
    use rand::Rng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let schema = Schema::reals(4, -10.0, 10.0).unwrap();
    let mut violations = 0;
    for _ in 0..2000 {
        let [pa, pb, r] = [(); 3].map(|_| Chromosome::random(&schema, &mut rng));
        let cut = rng.random_range(1..4);
        let (oa, ob) = crossover(&pa, &pb, &CrossoverMask::single_point(4, cut).unwrap()).unwrap();
        if !linf_sum_preserved((&pa, &pb), (&oa, &ob), &r).unwrap() {
            violations += 1;
        }
    }
    assert!(violations > 0);
}

/// Exhaustive over N <= 4 bits: every pair, every reference, every mask.
#[test]
fn impossible_outcomes_never_occur_in_small_bit_spaces() {
    let mut seen = std::collections::BTreeMap::new();
    for n in 2..=4usize {
        let schema = Schema::bits(n).unwrap();
        let all: Vec<Chromosome> = (0..1u32 << n)
            .map(|v| bits(&schema, &(0..n).map(|i| v >> i & 1 == 1).collect::<Vec<_>>()))
            .collect();
        for pa in &all {
            for pb in &all {
                for mask in CrossoverMask::all(n) {
                    let (oa, ob) = crossover(pa, pb, &mask).unwrap();
                    for r in &all {
                        let c = classify_outcome(pa, pb, &oa, &ob, r, Metric::Hamming).unwrap();
                        *seen.entry(c).or_insert(0u64) += 1;
                    }
                }
            }
        }
    }
    assert!(!seen.contains_key(&OutcomeConfig::Oopp));
    assert!(!seen.contains_key(&OutcomeConfig::Ppoo));
    // The distance sum is conserved, so with strict ordering a < b < c < d the
    // interleaved patterns would need a + c = b + d. Only nesting survives.
    assert!(!seen.contains_key(&OutcomeConfig::Opop));
    assert!(!seen.contains_key(&OutcomeConfig::Popo));
    for row in [OutcomeConfig::Oppo, OutcomeConfig::Poop] {
        assert!(seen.get(&row).copied().unwrap_or(0) > 0, "{row} never seen");
    }
}
