use std::collections::HashSet;

use ccq::agnostic::{chunked_refining, generalized_halving, refining, HalvingConfig};
use ccq::hypothesis::{Domain, Hypothesis, HypothesisSpace, Label};
use ccq::measures::{class_disagreement_coefficient, rho_splits, split_quantile};
use ccq::oracle::{CcqOracle, CcqResponse, DataSet, DirectOracle, GroundTruth, QuerySet};
use ccq::reductions::{support_restriction, ReductionOracle};
use ccq::splitting::{eliminate, elimination_threshold, select_in_window, PairSet, SplitCounters};
use proptest::prelude::*;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_space(rng: &mut ChaCha8Rng, n: usize, k: Label, want: usize) -> HypothesisSpace {
    let mut seen = HashSet::new();
    let mut hyps = Vec::new();
    for _ in 0..want {
        let h = Hypothesis::new((0..n).map(|_| rng.random_range(1..=k)).collect());
        if seen.insert(h.clone()) {
            hyps.push(h);
        }
    }
    HypothesisSpace::new(k, hyps, None).unwrap()
}

fn random_domain(rng: &mut ChaCha8Rng, n: usize) -> Domain {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    Domain::new(raw.iter().map(|w| w / total).collect()).unwrap()
}

fn random_pairs(rng: &mut ChaCha8Rng, m: usize, count: usize) -> PairSet {
    PairSet::new((0..count).map(|_| (rng.random_range(0..m), rng.random_range(0..m))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refining_labels_exactly(seed in any::<u64>(), k in 2u16..=4, n in 1usize..30, size in 1usize..400, chunk in 1usize..50) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = Hypothesis::new((0..n).map(|_| rng.random_range(1..=k)).collect());
        let h = Hypothesis::new((0..n).map(|_| rng.random_range(1..=k)).collect());
        let gt = GroundTruth::rcn(Domain::uniform(n).unwrap(), &target, k, 0.2).unwrap();
        let ds = DataSet::draw(gt, 1000, seed).unwrap();
        let u: Vec<usize> = sample(&mut rng, 1000, size).into_vec();
        let wrong = |ps: &[usize]| ps.iter().filter(|&&p| h.label(ds.point(p)) != ds.reveal_label(p)).count() as u64;

        let mut o = DirectOracle::new(&ds);
        let out = refining(&mut o, &u, &h, None).unwrap();
        prop_assert!(out.complete);
        prop_assert_eq!(out.calls, wrong(&u) + 1);
        prop_assert!(out.sample.iter().all(|&(p, y)| ds.reveal_label(p) == y));

        let mut o = DirectOracle::new(&ds);
        let out = chunked_refining(&mut o, &u, &h, chunk, None).unwrap();
        let expected: u64 = u.chunks(chunk).map(|c| wrong(c) + 1).sum();
        prop_assert!(out.complete);
        prop_assert_eq!(out.calls, expected);
        let got: HashSet<usize> = out.sample.iter().map(|e| e.0).collect();
        prop_assert_eq!(got, u.iter().copied().collect::<HashSet<_>>());
        prop_assert!(out.sample.iter().all(|&(p, y)| ds.reveal_label(p) == y));
    }

    #[test]
    fn short_budget_leaves_refining_incomplete(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 20;
        let target = Hypothesis::new((0..n).map(|_| rng.random_range(1..=2)).collect());
        let h = Hypothesis::new(target.labels().iter().map(|&y| 3 - y).collect());
        let gt = GroundTruth::realizable(Domain::uniform(n).unwrap(), &target, 2).unwrap();
        let ds = DataSet::draw(gt, 200, seed).unwrap();
        let u: Vec<usize> = (0..200).collect();
        let mut o = DirectOracle::new(&ds);
        let out = refining(&mut o, &u, &h, Some(50)).unwrap();
        prop_assert!(!out.complete);
        prop_assert_eq!(out.calls, 50);
        prop_assert!(out.sample.iter().all(|&(p, y)| ds.reveal_label(p) == y));
    }

    #[test]
    fn halving_removes_a_quarter_per_round(seed in any::<u64>(), k in 2u16..=4, rate in 0.003f64..0.03) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 16;
        let space = random_space(&mut rng, n, k, 40);
        let target = space.get(0).clone();
        let gt = GroundTruth::rcn(Domain::uniform(n).unwrap(), &target, k, rate / 2.0).unwrap();
        let ds = DataSet::draw(gt, 2000, seed).unwrap();
        let pool: Vec<usize> = (0..2000).collect();
        let cfg = HalvingConfig::for_rate(rate, space.len(), 0.1, 48.0, 24).unwrap();
        let mut o = DirectOracle::new(&ds);
        if let Ok(out) = generalized_halving(&mut o, &pool, &space, cfg, &mut rng) {
            prop_assert!(!out.survivors.is_empty());
            let mut size = space.len();
            for r in &out.rounds {
                prop_assert_eq!(r.size_before, size);
                prop_assert!(r.removed * 4 >= r.size_before);
                prop_assert!(r.mistake_sets * 3 > r.n_draws);
                size -= r.removed;
            }
            prop_assert_eq!(size, out.survivors.len());
        }
    }

    #[test]
    fn pair_set_is_normalized(seed in any::<u64>(), m in 2usize..12, count in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = random_pairs(&mut rng, m, count);
        let v: Vec<(usize, usize)> = q.iter().collect();
        prop_assert!(v.iter().all(|&(a, b)| a < b));
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(PairSet::new(v.iter().map(|&(a, b)| (b, a))), q.clone());

        let space = random_space(&mut rng, 6, 3, 40);
        if space.len() >= m {
            let x = rng.random_range(0..6);
            let counts = q.agreement_counts(&space, x);
            prop_assert!(counts.iter().sum::<usize>() <= q.len());
            for y in 1..=3u16 {
                let sub = q.agreeing(&space, x, y);
                prop_assert_eq!(sub.len(), counts[y as usize - 1]);
                prop_assert!(sub.iter().all(|p| v.contains(&p)));
            }
            let alive: Vec<bool> = (0..space.len()).map(|_| rng.random_bool(0.6)).collect();
            let mut kept = q.clone();
            kept.retain_alive(&alive);
            prop_assert_eq!(kept.len(), v.iter().filter(|&&(a, b)| alive[a] && alive[b]).count());
        }
    }

    #[test]
    fn counters_and_elimination_match_definition(seed in any::<u64>(), c_e in 0.01f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 6, 3, 12);
        let m = space.len();
        let alive: Vec<bool> = (0..m).map(|_| rng.random_bool(0.8)).collect();
        let points: Vec<(usize, Label)> = (0..rng.random_range(0..200)).map(|_| (rng.random_range(0..6), rng.random_range(1..=3))).collect();
        let mut counters = SplitCounters::new(m);
        for &(x, y) in &points {
            counters.record(&space, &alive, x, y);
        }
        let hyps = space.hypotheses();
        for h in 0..m {
            for g in 0..m {
                let expected = if alive[h] && alive[g] {
                    points.iter().filter(|&&(x, y)| hyps[h].label(x) != y && hyps[g].label(x) == y).count() as u64
                } else {
                    0
                };
                prop_assert_eq!(counters.get(h, g), expected);
            }
        }
        let (d, eps0) = (1usize, 0.01);
        let l = d as f64 * (1.0f64 / eps0).ln();
        let doomed: Vec<bool> = (0..m)
            .map(|h| {
                alive[h]
                    && (0..m).any(|g| {
                        let (a, b) = (counters.get(h, g) as f64, counters.get(g, h) as f64);
                        alive[g] && a - b > c_e * ((a.max(b) * l).sqrt() + l)
                    })
            })
            .collect();
        let mut after = alive.clone();
        let removed = eliminate(&mut after, &counters, d, eps0, c_e);
        prop_assert_eq!(removed, doomed.iter().filter(|&&x| x).count());
        for h in 0..m {
            prop_assert_eq!(after[h], alive[h] && !doomed[h]);
        }
    }

    #[test]
    fn threshold_grows_with_counts(a in 0u64..10_000, b in 0u64..10_000) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(elimination_threshold(lo, 2, 0.01, 1.0) <= elimination_threshold(hi, 2, 0.01, 1.0));
    }

    #[test]
    fn window_choice_is_minimax(seed in any::<u64>(), k in 2u16..=4, w in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 10;
        let space = random_space(&mut rng, n, k, 14);
        let q = random_pairs(&mut rng, space.len(), 30);
        let window: Vec<usize> = (0..w).map(|_| rng.random_range(0..n)).collect();
        let (i, y, top) = select_in_window(&space, &q, &window).unwrap();
        let worst = |x: usize| q.agreement_counts(&space, x).into_iter().max().unwrap();
        prop_assert_eq!(top, worst(window[i]));
        prop_assert!(window.iter().all(|&x| worst(x) >= top));
        prop_assert!(window[..i].iter().all(|&x| worst(x) > top));
        prop_assert_eq!(q.agreement_counts(&space, window[i])[y as usize - 1], top);
    }

    #[test]
    fn rho_splitting_is_monotone(seed in any::<u64>(), r1 in 0.0f64..=1.0, r2 in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_space(&mut rng, 8, 3, 12);
        let q = random_pairs(&mut rng, space.len(), 20);
        prop_assume!(!q.is_empty());
        let (lo, hi) = (r1.min(r2), r1.max(r2));
        for x in 0..8 {
            if rho_splits(&space, x, &q, hi).unwrap() {
                prop_assert!(rho_splits(&space, x, &q, lo).unwrap());
            }
        }
    }

    #[test]
    fn split_quantile_matches_enumeration(seed in any::<u64>(), tau in 0.01f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 9;
        let dom = random_domain(&mut rng, n);
        let space = random_space(&mut rng, n, 3, 12);
        let q = random_pairs(&mut rng, space.len(), 25);
        prop_assume!(!q.is_empty());
        let got = split_quantile(&space, &dom, &q, tau);
        let split: Vec<f64> = (0..n)
            .map(|x| 1.0 - q.agreement_counts(&space, x).into_iter().max().unwrap() as f64 / q.len() as f64)
            .collect();
        let expected = split
            .iter()
            .copied()
            .filter(|&s| (0..n).filter(|&x| split[x] >= s).map(|x| dom.weight(x)).sum::<f64>() + 1e-12 >= tau)
            .fold(0.0f64, f64::max);
        prop_assert!((got - expected).abs() < 1e-12);
        let mass: f64 = (0..n).filter(|&x| rho_splits(&space, x, &q, got).unwrap()).map(|x| dom.weight(x)).sum();
        prop_assert!(mass + 1e-9 >= tau);
        prop_assert!(split_quantile(&space, &dom, &q, tau / 2.0) >= got);
    }

    #[test]
    fn disagreement_coefficient_matches_enumeration(seed in any::<u64>(), eps in 0.02f64..0.9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 7;
        let dom = random_domain(&mut rng, n);
        let space = random_space(&mut rng, n, 2, 20);
        let got = class_disagreement_coefficient(&space, &dom, eps).unwrap();
        let dist = |a: &Hypothesis, b: &Hypothesis| (0..n).filter(|&x| a.label(x) != b.label(x)).map(|x| dom.weight(x)).sum::<f64>();
        let mut best = 0.0f64;
        for h in space.hypotheses() {
            let mut radii: Vec<f64> = space.hypotheses().iter().map(|g| dist(h, g).max(eps)).collect();
            radii.push(eps);
            for r in radii {
                let dis: f64 = (0..n)
                    .filter(|&x| space.hypotheses().iter().any(|g| dist(h, g) <= r + 1e-12 && g.label(x) != h.label(x)))
                    .map(|x| dom.weight(x))
                    .sum();
                best = best.max(dis / r);
            }
        }
        prop_assert!((got - best).abs() < 1e-9, "got {} expected {}", got, best);
    }

    #[test]
    fn reduction_answers_are_truthful(seed in any::<u64>(), k in 2u16..=4, alpha in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 12;
        let target = Hypothesis::new((0..n).map(|_| rng.random_range(1..=k)).collect());
        let gt = GroundTruth::rcn(Domain::uniform(n).unwrap(), &target, k, alpha).unwrap();
        let ds = DataSet::draw(gt.clone(), 3000, seed).unwrap();
        let mut plain = ReductionOracle::new(&ds, seed);
        let mut restricted = ReductionOracle::new(&ds, seed).with_restriction(support_restriction(&gt));
        for _ in 0..50 {
            let size = rng.random_range(1..40);
            let set: Vec<usize> = sample(&mut rng, 3000, size).into_vec();
            let y = rng.random_range(1..=k);
            let exists = set.iter().any(|&p| ds.reveal_label(p) == y);
            for o in [&mut plain, &mut restricted] {
                match o.class_conditional(y, QuerySet::Positions(&set)).unwrap() {
                    CcqResponse::Found { position, label } => {
                        prop_assert_eq!(label, y);
                        prop_assert!(set.contains(&position));
                        prop_assert_eq!(ds.reveal_label(position), y);
                    }
                    CcqResponse::NoneSuch => prop_assert!(!exists),
                }
            }
        }
        prop_assert_eq!(plain.stats().trace.len(), 50);
        prop_assert_eq!(plain.stats().trace.iter().sum::<u64>(), plain.stats().label_requests_spent);
        prop_assert!(restricted.stats().label_requests_spent <= 3000);
    }
}
