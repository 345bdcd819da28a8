mod common;

use std::collections::BTreeSet;

use coset_core::game::{
    deterministic_value, dualize, p_win, random_strategy, theorem1_bound, theorem1_bound_exact,
    unentangled_value, winning_rate_envelope, DeterministicStrategy, RandomStrategyShape, Strategy,
};
use coset_core::gf2::{
    enumerate_grassmannian, gaussian_binomial, intersection_count, GF2Vector, Subspace, DEFAULT_CAP,
};
use coset_core::perms::{
    build_intersection_graph, full_family, matching_decomposition, orient_eulerian, orthogonal_family,
    verify_family,
};
use coset_core::qstate::{
    coset_indicator, coset_state, inner_product_formula, operator_norm, subspace_state, HermitianOperator,
    Matrix, C64,
};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vectors(n: usize, bits: &[u32]) -> Vec<GF2Vector> {
    bits.iter().map(|&b| GF2Vector::from_bits(n, b & ((1 << n) - 1)).unwrap()).collect()
}

proptest! {
    #[test]
    fn span_matches_brute_force(n in 1usize..=6, raw in proptest::collection::vec(any::<u32>(), 0..6)) {
        let vs = vectors(n, &raw);
        let w = Subspace::from_vectors(n, &vs).unwrap();
        let mask = span_mask(n, &vs.iter().map(|v| v.bits()).collect::<Vec<_>>());
        prop_assert_eq!(mask_of(&w), mask);
        prop_assert_eq!(1u32 << w.dim(), mask.count_ones());
        for x in 0..(1u32 << n) {
            let v = GF2Vector::from_bits(n, x).unwrap();
            prop_assert_eq!(w.contains(&v).unwrap(), mask >> x & 1 == 1);
        }
    }

    #[test]
    fn rref_shape(n in 1usize..=8, raw in proptest::collection::vec(any::<u32>(), 0..8)) {
        let w = Subspace::from_vectors(n, &vectors(n, &raw)).unwrap();
        let pivots = w.pivots();
        prop_assert!(pivots.windows(2).all(|p| p[0] < p[1]));
        for (i, &p) in pivots.iter().enumerate() {
            for (j, b) in w.basis().iter().enumerate() {
                prop_assert_eq!(b.get(p), i == j);
            }
        }
    }

    #[test]
    fn dual_by_definition(n in 1usize..=6, raw in proptest::collection::vec(any::<u32>(), 0..6)) {
        let w = Subspace::from_vectors(n, &vectors(n, &raw)).unwrap();
        let elems = w.elements();
        let expected: Vec<u32> = (0..(1u32 << n))
            .filter(|&y| elems.iter().all(|e| (e.bits() & y).count_ones() % 2 == 0))
            .collect();
        let dual = w.dual();
        let mut got: Vec<u32> = dual.elements().iter().map(|e| e.bits()).collect();
        got.sort_unstable();
        prop_assert_eq!(got, expected);
        prop_assert_eq!(dual.dual(), w);
    }

    #[test]
    fn coset_rep_constant_on_cosets(n in 1usize..=10, raw in proptest::collection::vec(any::<u32>(), 0..5), x in any::<u32>(), pick in any::<u32>()) {
        let w = Subspace::from_vectors(n, &vectors(n, &raw)).unwrap();
        let x = GF2Vector::from_bits(n, x & ((1 << n) - 1)).unwrap();
        let elems = w.elements();
        let u = elems[pick as usize % elems.len()];
        let rep = w.coset_rep(&x).unwrap();
        prop_assert_eq!(rep, w.coset_rep(&(x + u)).unwrap());
        for p in w.pivots() {
            prop_assert!(!rep.get(p));
        }
        prop_assert_eq!(w.coset_reps()[w.coset_index(&x).unwrap()], rep);
    }

    #[test]
    fn intersection_and_sum_by_masks(n in 1usize..=6, a in proptest::collection::vec(any::<u32>(), 0..4), b in proptest::collection::vec(any::<u32>(), 0..4)) {
        let (va, vb) = (vectors(n, &a), vectors(n, &b));
        let (v, w) = (Subspace::from_vectors(n, &va).unwrap(), Subspace::from_vectors(n, &vb).unwrap());
        let common = mask_of(&v) & mask_of(&w);
        prop_assert_eq!(mask_of(&v.intersection(&w).unwrap()), common);
        prop_assert_eq!(1u32 << v.intersect_dim(&w).unwrap(), common.count_ones());
        let all: Vec<u32> = va.iter().chain(vb.iter()).map(|x| x.bits()).collect();
        prop_assert_eq!(mask_of(&v.sum(&w).unwrap()), span_mask(n, &all));
    }

    #[test]
    fn eq3_random_pairs(n in 1usize..=5, a in proptest::collection::vec(any::<u32>(), 0..5), b in proptest::collection::vec(any::<u32>(), 0..5), xs in any::<[u32; 4]>()) {
        let v = Subspace::from_vectors(n, &vectors(n, &a)).unwrap();
        let w = Subspace::from_vectors(n, &vectors(n, &b)).unwrap();
        prop_assume!(v.dim() == w.dim());
        let [x, z, x2, z2] = xs.map(|e| GF2Vector::from_bits(n, e & ((1 << n) - 1)).unwrap());
        let lhs = coset_vector(n, mask_of(&v), x.bits(), z.bits()).dotc(&coset_vector(n, mask_of(&w), x2.bits(), z2.bits())).norm();
        let formula = inner_product_formula(&v, &w, &x, &z, &x2, &z2).unwrap();
        prop_assert!((lhs - formula).abs() <= 1e-10, "{} vs {}", lhs, formula);
    }

    #[test]
    fn projector_norms_are_one(n in 1usize..=5, raw in proptest::collection::vec(any::<u32>(), 0..5), x in any::<u32>()) {
        let w = Subspace::from_vectors(n, &vectors(n, &raw)).unwrap();
        let x = GF2Vector::from_bits(n, x & ((1 << n) - 1)).unwrap();
        let p = HermitianOperator::symmetrized(&subspace_state(&w).unwrap().projector());
        prop_assert!((operator_norm(&p).unwrap() - 1.0).abs() <= 1e-9);
        prop_assert!((operator_norm(&coset_indicator(&w, &x).unwrap()).unwrap() - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn operator_norm_monotone_on_psd_sums(seed in any::<u64>(), dim in 1usize..=12, terms in 1usize..=5) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut acc = Matrix::zeros(dim, dim);
        let mut last = 0.0;
        for _ in 0..terms {
            let g = Matrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            acc += &g * g.adjoint();
            let h = HermitianOperator::symmetrized(&acc);
            let norm = operator_norm(&h).unwrap();
            prop_assert!(norm >= last - 1e-9 * norm.max(1.0));
            prop_assert!((norm - power_norm(h.matrix())).abs() <= 1e-6 * norm.max(1.0));
            last = norm;
        }
    }

    #[test]
    fn random_strategies_match_oracle(seed in any::<u64>(), case in 0usize..4) {
        let (n, k) = [(1, 0), (2, 1), (2, 2), (3, 1)][case];
        let s = random_strategy(n, k, seed, RandomStrategyShape::natural(n, k)).unwrap();
        let value = p_win(&s).unwrap();
        prop_assert!((value - p_win_oracle(&s)).abs() <= 1e-9);
        prop_assert!(value <= theorem1_bound(n, k).unwrap() + 1e-9);
        prop_assert!((p_win(&dualize(&s).unwrap()).unwrap() - value).abs() <= 1e-9);
    }
}

#[test]
fn enumeration_matches_brute_force() {
    for n in 0..=5 {
        for k in 0..=n {
            let grass = enumerate_grassmannian(n, k, DEFAULT_CAP).unwrap();
            let masks: BTreeSet<u64> = grass.iter().map(mask_of).collect();
            assert_eq!(masks.len(), grass.len(), "duplicates in Gr({n},{k})");
            assert_eq!(masks, brute_grassmannian(n, k), "Gr({n},{k})");
            assert_eq!(gaussian_binomial(n, k), q_binomial(n, k));
            let hist = brute_intersection_histogram(n, k);
            for (m, &h) in hist.iter().enumerate() {
                assert_eq!(intersection_count(n, k, m), h.into(), "f({n},{k},{m})");
            }
            let sorted: Vec<_> = grass.subspaces().to_vec();
            assert!(sorted.windows(2).all(|w| w[0] < w[1]), "canonical order");
        }
    }
}

#[test]
fn gaussian_binomial_recurrence_and_symmetry() {
    for n in 0..=30 {
        for k in 0..=n {
            assert_eq!(gaussian_binomial(n, k), q_binomial(n, k));
            assert_eq!(gaussian_binomial(n, k), gaussian_binomial(n, n - k));
        }
        assert_eq!(gaussian_binomial(n, n + 1), 0u32.into());
    }
}

#[test]
fn graphs_and_families() {
    for n in 1..=5 {
        for k in 0..=n {
            let size = gaussian_binomial(n, k);
            for m in 0..k {
                let g = build_intersection_graph(n, k, m, DEFAULT_CAP).unwrap();
                let deg = g.regular_degree().expect("regular");
                assert_eq!(intersection_count(n, k, m), deg.into());
                assert_eq!(deg % 2, 0);
                let d = orient_eulerian(&g).unwrap();
                let matchings = matching_decomposition(&d).unwrap();
                let mut from_matchings: Vec<(usize, usize)> = matchings
                    .iter()
                    .flat_map(|p| p.iter().enumerate().map(|(u, &v)| (u, v)))
                    .collect();
                let mut edges: Vec<(usize, usize)> = d
                    .out
                    .iter()
                    .enumerate()
                    .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
                    .collect();
                from_matchings.sort_unstable();
                edges.sort_unstable();
                assert_eq!(from_matchings, edges, "({n},{k},{m}) matchings partition the edges");

                let fam = orthogonal_family(n, k, m, DEFAULT_CAP).unwrap();
                assert_eq!(intersection_count(n, k, m), fam.len().into());
                assert!(verify_family(&fam, DEFAULT_CAP).unwrap().passed);
            }
            let fam = full_family(n, k, DEFAULT_CAP).unwrap();
            assert_eq!(size, fam.len().into());
            let report = verify_family(&fam, DEFAULT_CAP).unwrap();
            assert!(report.passed && report.covers, "({n},{k})");
            let len = fam.len();
            for w in 0..len {
                let images: BTreeSet<usize> = fam.entries.iter().map(|e| e.perm[w]).collect();
                assert_eq!(images.len(), len);
            }
        }
    }
}

#[test]
fn coset_states_match_definition() {
    for n in 1..=4 {
        for k in 0..=n {
            for w in enumerate_grassmannian(n, k, DEFAULT_CAP).unwrap().iter() {
                for x in w.coset_reps() {
                    for z in w.dual().coset_reps() {
                        let lib = coset_state(w, &x, &z).unwrap();
                        let ours = coset_vector(n, mask_of(w), x.bits(), z.bits());
                        assert!((lib.amplitudes() - ours).norm() < 1e-12);
                    }
                }
            }
        }
    }
}

#[test]
fn closed_forms_against_float_sums() {
    for n in 0..=20 {
        for k in 0..=n {
            let b = theorem1_bound(n, k).unwrap();
            assert!((b - bound_f64(n, k)).abs() <= 1e-12 * b, "g({n},{k})");
            let u = unentangled_value(n, k).unwrap();
            assert!((u - unentangled_f64(n, k)).abs() <= 1e-12 * u, "u({n},{k})");
            assert_eq!(theorem1_bound_exact(n, k).unwrap(), theorem1_bound_exact(n, n - k).unwrap());
        }
    }
}

#[test]
fn deterministic_exhaustive_2_1() {
    let optimum = unentangled_value(2, 1).unwrap();
    let all: Vec<GF2Vector> = (0..4).map(|b| GF2Vector::from_bits(2, b).unwrap()).collect();
    let mut best: f64 = 0.0;
    for fi in 0..64usize {
        for gi in 0..64usize {
            let f = (0..3).map(|w| all[(fi >> (2 * w)) & 3]).collect();
            let g = (0..3).map(|w| all[(gi >> (2 * w)) & 3]).collect();
            let v = deterministic_value(&DeterministicStrategy { f, g }, 2, 1).unwrap();
            assert!(v <= optimum + 1e-9);
            best = best.max(v);
        }
    }
    assert!((best - optimum).abs() <= 1e-9);
}

#[test]
fn deterministic_random_sweeps() {
    for (n, k) in [(3, 1), (4, 2)] {
        let optimum = unentangled_value(n, k).unwrap();
        let size = enumerate_grassmannian(n, k, DEFAULT_CAP).unwrap().len();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let ds = DeterministicStrategy::random(n, size, &mut rng).unwrap();
            assert!(deterministic_value(&ds, n, k).unwrap() <= optimum + 1e-9);
        }
    }
}

#[test]
fn envelope_consistency() {
    for n in 8..=16 {
        for r in [0.25, 0.5] {
            let k = (n as f64 * r).floor() as usize;
            let root = theorem1_bound(n, k).unwrap().powf(1.0 / n as f64);
            assert!(root <= winning_rate_envelope(r).unwrap() + 0.05, "n={n} R={r}");
        }
    }
    // Convex on [0, 1]: midpoint below the chord.
    for i in 0..20 {
        let (a, b) = (i as f64 / 20.0, (i + 1) as f64 / 20.0);
        let mid = winning_rate_envelope((a + b) / 2.0).unwrap();
        let chord = (winning_rate_envelope(a).unwrap() + winning_rate_envelope(b).unwrap()) / 2.0;
        assert!(mid <= chord + 1e-15 || (a < 0.5 && b > 0.5));
    }
}

#[test]
fn reference_strategies_match_oracle() {
    for (n, k) in [(2, 1), (3, 1), (3, 3)] {
        for s in [
            Strategy::discard_and_guess(n, k).unwrap(),
            Strategy::bob_takes_all(n, k).unwrap(),
            Strategy::charlie_takes_all(n, k).unwrap(),
        ] {
            assert!((p_win(&s).unwrap() - p_win_oracle(&s)).abs() <= 1e-12);
        }
    }
}
