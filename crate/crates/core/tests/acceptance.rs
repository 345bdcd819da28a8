//! Acceptance gate: one line per criterion, then a single assertion.
//!
//! Run with `cargo test -p coset-core --test acceptance -- --nocapture` to
//! see the report.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use coset_core::game::{
    deterministic_value_on, dualize, norm_sum_bound_check, p_win, p_win_extended, random_strategy,
    ratio_check, theorem1_bound, theorem1_bound_exact, unentangled_value, unentangled_value_exact,
    unentangled_value_oracle, winning_rate_envelope, DeterministicStrategy, RandomStrategyShape, Strategy,
};
use coset_core::gf2::{enumerate_grassmannian, Subspace, DEFAULT_CAP};
use coset_core::perms::{full_family, verify_family, IntersectionTable};
use coset_core::qstate::{coset_state, hadamard_dual, inner_product_formula, verify_lemma2, Matrix, Tolerances};
use coset_core::surd::QuadSurd;
use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    ensure!(t <= limit, "took {t:?}, limit {limit:?}");
    Ok(t)
}

fn counting() -> Outcome {
    let mut library = Duration::ZERO;
    let mut checked = 0;
    for n in 0..=6 {
        for k in 0..=n {
            let start = Instant::now();
            let grass = ok(enumerate_grassmannian(n, k, DEFAULT_CAP))?;
            let table = IntersectionTable::new(&grass);
            let hists: Vec<Vec<usize>> = (0..grass.len()).map(|v| table.histogram(v, k)).collect();
            library += start.elapsed();

            let expected = q_binomial(n, k);
            ensure!(expected == grass.len().into(), "|Gr({n},{k})| = {} != {expected}", grass.len());
            let masks: std::collections::BTreeSet<u64> = grass.iter().map(mask_of).collect();
            ensure!(masks == brute_grassmannian(n, k), "Gr({n},{k}) differs from brute force");
            let hist = brute_intersection_histogram(n, k);
            for (v, h) in hists.iter().enumerate() {
                ensure!(*h == hist, "histogram of Gr({n},{k}) vertex {v}");
            }
            checked += 1;
        }
    }
    ensure!(library <= Duration::from_secs(60), "enumeration took {library:?}");
    Ok(format!("{checked} Grassmannians, enumeration {library:.2?}"))
}

fn permutation_families() -> Outcome {
    let start = Instant::now();
    let mut members = 0;
    for n in 0..=6 {
        for k in 0..=n {
            let grass = ok(enumerate_grassmannian(n, k, DEFAULT_CAP))?;
            let masks: Vec<u64> = grass.iter().map(mask_of).collect();
            let fam = ok(full_family(n, k, DEFAULT_CAP))?;
            ensure!(q_binomial(n, k) == fam.len().into(), "({n},{k}) family size {}", fam.len());
            let report = ok(verify_family(&fam, DEFAULT_CAP))?;
            ensure!(report.passed, "({n},{k}) rejected: {:?}", report.counterexample);
            // Independent check on element masks.
            let len = grass.len();
            let mut seen = vec![vec![false; len]; len];
            for e in &fam.entries {
                let mut hit = vec![false; len];
                for (w, &img) in e.perm.iter().enumerate() {
                    ensure!(!hit[img], "({n},{k}) member is not a bijection");
                    hit[img] = true;
                    let common = (masks[w] & masks[img]).count_ones();
                    ensure!(common == 1 << e.m, "({n},{k}) member fails the {}-intersection property", e.m);
                    ensure!(!seen[w][img], "({n},{k}) members collide at {w}");
                    seen[w][img] = true;
                }
            }
            members += fam.len();
            if (n, k) == (4, 2) {
                let split: Vec<usize> = (0..=2).map(|m| fam.entries.iter().filter(|e| e.m == m).count()).collect();
                ensure!(split == [16, 18, 1], "(4,2) split {split:?}");
            }
        }
    }
    let t = within(start, Duration::from_secs(120))?;
    Ok(format!("{members} permutations, (4,2) split 16/18/1, {t:.2?}"))
}

fn sum_mask(n: usize, a: u64, b: u64) -> u64 {
    let gens: Vec<u32> = (0..1u32 << n).filter(|&u| (a | b) >> u & 1 == 1).collect();
    span_mask(n, &gens)
}

fn inner_products() -> Outcome {
    let mut pairs = 0u64;
    let mut worst: f64 = 0.0;
    for n in 1..=4 {
        for k in 0..=n {
            let grass = ok(enumerate_grassmannian(n, k, DEFAULT_CAP))?;
            let states: Vec<Vec<_>> = grass
                .iter()
                .map(|w| {
                    let mut out = Vec::new();
                    for x in w.coset_reps() {
                        for z in w.dual().coset_reps() {
                            out.push((x, z, coset_state(w, &x, &z).unwrap()));
                        }
                    }
                    out
                })
                .collect();
            let masks: Vec<u64> = grass.iter().map(mask_of).collect();
            let duals: Vec<u64> = masks.iter().map(|&m| dual_mask(n, m)).collect();
            for (vi, v) in grass.iter().enumerate() {
                for (wi, w) in grass.iter().enumerate() {
                    let primal = sum_mask(n, masks[vi], masks[wi]);
                    let dual = sum_mask(n, duals[vi], duals[wi]);
                    let overlap = 2f64.powi((masks[vi] & masks[wi]).count_ones().trailing_zeros() as i32 - k as i32);
                    for (x, z, a) in &states[vi] {
                        for (x2, z2, b) in &states[wi] {
                            let numeric = a.inner(b).norm();
                            let formula = ok(inner_product_formula(v, w, x, z, x2, z2))?;
                            let oracle = if primal >> (x.bits() ^ x2.bits()) & 1 == 1 && dual >> (z.bits() ^ z2.bits()) & 1 == 1 {
                                overlap
                            } else {
                                0.0
                            };
                            ensure!(formula == oracle, "formula disagrees with oracle at n={n}");
                            worst = worst.max((numeric - formula).abs());
                            pairs += 1;
                        }
                    }
                }
            }
            // H^n |W_{x,z}> = phase |W^perp_{z,x}>.
            for (wi, w) in grass.iter().enumerate() {
                let d = duals[wi];
                for (x, z, s) in &states[wi] {
                    let h = hadamard_dual(s);
                    let expected = coset_vector(n, d, z.bits(), x.bits());
                    let dev = (h.amplitudes().dotc(&expected).norm() - 1.0).abs();
                    worst = worst.max(dev);
                    ensure!(dev <= 1e-10, "Hadamard duality fails for {} at n={n}", w.to_text());
                }
            }
        }
    }
    ensure!(worst <= 1e-10, "worst deviation {worst:e}");
    Ok(format!("{pairs} pairs, worst deviation {worst:.1e}"))
}

/// `C(V, z) B(W, x')` built from coset vectors.
fn product_oracle(n: usize, v: &Subspace, w: &Subspace, z: u32, x2: u32) -> Matrix {
    let dim = 1 << n;
    let mut c = Matrix::zeros(dim, dim);
    for x in v.coset_reps() {
        let s = coset_vector(n, mask_of(v), x.bits(), z);
        c += &s * s.adjoint();
    }
    let mut b = Matrix::zeros(dim, dim);
    for z2 in w.dual().coset_reps() {
        let s = coset_vector(n, mask_of(w), x2, z2.bits());
        b += &s * s.adjoint();
    }
    c * b
}

fn product_norm_sweep() -> Outcome {
    let tol = Tolerances::default();
    let mut tuples = 0u64;
    let mut min_slack = f64::INFINITY;
    for n in 1..=4 {
        for k in 0..=n {
            let grass = ok(enumerate_grassmannian(n, k, DEFAULT_CAP))?;
            let mut tight = false;
            for v in grass.iter() {
                for w in grass.iter() {
                    for z in v.dual().coset_reps() {
                        for x2 in w.coset_reps() {
                            let r = ok(verify_lemma2(v, w, &z, &x2, &tol))?;
                            let m = product_oracle(n, v, w, z.bits(), x2.bits());
                            let oracle = power_norm(&(&m * m.adjoint())).sqrt();
                            ensure!((oracle - r.lhs).abs() <= 1e-9, "eigensolver {} vs oracle {oracle} at n={n}", r.lhs);
                            let bound = 2f64.powf((mask_of(v) & mask_of(w)).count_ones().trailing_zeros() as f64 - k as f64).sqrt();
                            ensure!(r.lhs <= bound + 1e-9, "({n},{k}) violated: {} > {bound}", r.lhs);
                            tight |= (r.lhs - bound).abs() <= 1e-9;
                            min_slack = min_slack.min(bound - r.lhs);
                            tuples += 1;
                        }
                    }
                }
            }
            ensure!(tight, "no tightness witness at ({n},{k})");
        }
    }
    Ok(format!("{tuples} tuples, min slack {min_slack:.1e}, tight for every (n,k)"))
}

fn unentangled_values() -> Outcome {
    let q = |p: i64, r: i64| BigRational::new(BigInt::from(p), BigInt::from(r));
    ensure!(ok(unentangled_value_exact(2, 1))? == q(2, 3), "u(2,1) != 2/3");
    ensure!(ok(unentangled_value_exact(4, 2))? == q(2, 5), "u(4,2) != 2/5");
    let mut worst: f64 = 0.0;
    let mut sampled = 0;
    for n in 0..=5 {
        for k in 0..=n {
            let value = ok(unentangled_value(n, k))?;
            let oracle = ok(unentangled_value_oracle(n, k))?;
            worst = worst.max((value - oracle).abs()).max((value - unentangled_f64(n, k)).abs());
            let grass = ok(enumerate_grassmannian(n, k, DEFAULT_CAP))?;
            let mut rng = ChaCha8Rng::seed_from_u64(1000 * n as u64 + k as u64);
            for _ in 0..200 {
                let ds = ok(DeterministicStrategy::random(n, grass.len(), &mut rng))?;
                let v = ok(deterministic_value_on(&ds, &grass))?;
                ensure!(v <= value + 1e-9, "deterministic strategy at ({n},{k}) scores {v} > {value}");
                sampled += 1;
            }
        }
    }
    ensure!(worst <= 1e-9, "oracle disagreement {worst:e}");
    Ok(format!("exact 2/3 and 2/5, oracle deviation {worst:.1e}, {sampled} deterministic strategies"))
}

fn seeded(n: usize, k: usize) -> impl Iterator<Item = (u64, Strategy)> {
    (0..20u64).map(move |seed| (seed, random_strategy(n, k, seed, RandomStrategyShape::natural(n, k)).unwrap()))
}

fn bound_pipeline() -> Outcome {
    let tol = Tolerances::default();
    let mut runs = 0;
    for (n, k) in [(2, 1), (3, 1)] {
        for seed in 0..20u64 {
            let r = ok(norm_sum_bound_check(n, k, seed, &tol))?;
            ensure!(r.stages.len() == 4, "expected four stages");
            for s in &r.stages {
                ensure!(s.passed, "({n},{k}) seed {seed} stage {} slack {}", s.stage, s.slack);
            }
            ensure!(r.passed, "({n},{k}) seed {seed}");
            runs += 1;
        }
    }
    let mut ratios = 0;
    for n in 0..=20 {
        for k in 0..=n / 2 {
            let r = ok(ratio_check(n, k))?;
            ensure!(r.ratios.iter().all(|e| e.within && e.closed_form_agrees), "ratio at ({n},{k})");
            ensure!(r.induction_holds && r.constant_bound_holds && r.passed, "closing bound at ({n},{k})");
            ratios += 1;
        }
    }
    Ok(format!("{runs} strategies through all four stages, {ratios} ratio checks"))
}

fn choi_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, k) in [(2, 1), (3, 1)] {
        for (seed, s) in seeded(n, k) {
            let a = ok(p_win(&s))?;
            let b = ok(p_win_extended(&s))?;
            ensure!((a - p_win_oracle(&s)).abs() <= 1e-9, "({n},{k}) seed {seed} disagrees with oracle");
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    ensure!(worst <= 1e-9, "worst |p_win - p_win_extended| = {worst:e}");
    Ok(format!("{count} strategies, worst {worst:.1e}"))
}

fn duality() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (n, k) in [(1, 0), (2, 1), (3, 1), (3, 2)] {
        let canned = [
            Strategy::discard_and_guess(n, k),
            Strategy::bob_takes_all(n, k),
            Strategy::charlie_takes_all(n, k),
        ];
        let strategies = seeded(n, k).map(|(_, s)| s).chain(canned.into_iter().map(Result::unwrap));
        for s in strategies {
            let a = ok(p_win(&s))?;
            let d = ok(dualize(&s))?;
            let b = ok(p_win(&d))?;
            ensure!(d.k() == n - k, "dual has k = {}", d.k());
            worst = worst.max((a - b).abs());
            count += 1;
        }
    }
    ensure!(worst <= 1e-9, "worst {worst:e}");
    for n in 0..=20 {
        for k in 0..=n {
            ensure!(ok(theorem1_bound_exact(n, k))? == ok(theorem1_bound_exact(n, n - k))?, "g({n},{k}) != g({n},{})", n - k);
        }
    }
    Ok(format!("{count} strategies, worst {worst:.1e}, bound symmetric for n <= 20"))
}

fn envelope() -> Outcome {
    let e = ok(winning_rate_envelope(0.5))?;
    let target = 2f64.powf(-0.25);
    ensure!((e - target).abs() <= 1e-12, "envelope(1/2) = {e}, expected {target}");
    for n in 0..=12 {
        for k in 0..=n {
            let g = ok(theorem1_bound_exact(n, k))?;
            let u = QuadSurd::rational(ok(unentangled_value_exact(n, k))?);
            ensure!(g >= u, "g({n},{k}) < u({n},{k})");
            ensure!((ok(theorem1_bound(n, k))? - bound_f64(n, k)).abs() <= 1e-12, "g({n},{k}) float oracle");
        }
    }
    Ok(format!("envelope(1/2) - 2^(-1/4) = {:.1e}, bound >= unentangled for n <= 12", e - target))
}

fn reproducibility() -> Outcome {
    let start = Instant::now();
    let mut outputs = Vec::new();
    for threads in ["1", "2"] {
        let o = ok(Command::new(env!("CARGO_BIN_EXE_coset"))
            .args(["--threads", threads, "verify", "--level", "full"])
            .output())?;
        ensure!(o.status.code() == Some(0), "exit {:?} with {threads} thread(s)", o.status.code());
        outputs.push(o.stdout);
    }
    let t = start.elapsed();
    ensure!(outputs[0] == outputs[1], "reports differ between thread counts");
    ensure!(t <= Duration::from_secs(1200), "two runs took {t:?}");
    Ok(format!("byte-identical, {} bytes, two runs in {t:.1?}", outputs[0].len()))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("counting exactness", counting),
        ("permutation families", permutation_families),
        ("coset inner products and Hadamard duality", inner_products),
        ("product-norm sweep", product_norm_sweep),
        ("unentangled values", unentangled_values),
        ("entangled bound pipeline", bound_pipeline),
        ("Choi equivalence", choi_equivalence),
        ("duality", duality),
        ("rate envelope and bound consistency", envelope),
        ("reproducibility", reproducibility),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(reason) => {
                println!("criterion {}: FAIL {name}: {reason}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
