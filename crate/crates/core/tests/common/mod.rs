//! Independent oracles shared by the integration tests. Nothing here calls
//! the library routine it is used to check.

#![allow(dead_code)]

use std::collections::BTreeSet;

use coset_core::game::Strategy;
use coset_core::qstate::{Matrix, C64};
use nalgebra::DVector;
use num_bigint::BigUint;

/// `binom(n, k)_2` by the q-Pascal recurrence
/// `[n, k] = [n-1, k-1] + 2^k [n-1, k]`.
pub fn q_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut row = vec![BigUint::from(1u32)];
    for i in 1..=n {
        let mut next = vec![BigUint::from(1u32); i + 1];
        for j in 1..i {
            next[j] = &row[j - 1] + (BigUint::from(1u32) << j) * &row[j];
        }
        row = next;
    }
    row[k].clone()
}

/// Same recurrence in floating point.
pub fn q_binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut row = vec![1.0f64];
    for i in 1..=n {
        let mut next = vec![1.0; i + 1];
        for j in 1..i {
            next[j] = row[j - 1] + 2f64.powi(j as i32) * row[j];
        }
        row = next;
    }
    row[k]
}

/// Element set of the span of `vectors` as a bitmask over `F_2^n`
/// (bit `v` set when `v` is in the span). Needs `n <= 6`.
pub fn span_mask(n: usize, vectors: &[u32]) -> u64 {
    assert!(n <= 6);
    let mut elems = vec![0u32];
    for &v in vectors {
        if elems.contains(&v) {
            continue;
        }
        let shifted: Vec<u32> = elems.iter().map(|e| e ^ v).collect();
        elems.extend(shifted);
    }
    elems.iter().fold(0u64, |m, &e| m | (1u64 << e))
}

/// Orthogonal complement of an element mask, straight from the definition.
pub fn dual_mask(n: usize, mask: u64) -> u64 {
    (0..1u32 << n)
        .filter(|&y| (0..1u32 << n).all(|u| mask >> u & 1 == 0 || (u & y).count_ones() % 2 == 0))
        .fold(0, |m, y| m | 1 << y)
}

/// All `k`-dimensional subspaces of `F_2^n` as element bitmasks, found by
/// spanning every `k`-subset of nonzero vectors. Above `n/2` the
/// complements of the `(n-k)`-dimensional ones are taken instead.
pub fn brute_grassmannian(n: usize, k: usize) -> BTreeSet<u64> {
    if 2 * k > n {
        return brute_grassmannian(n, n - k).into_iter().map(|m| dual_mask(n, m)).collect();
    }
    let nonzero: Vec<u32> = (1..(1u32 << n)).collect();
    let mut out = BTreeSet::new();
    let mut pick = Vec::new();
    fn rec(start: usize, k: usize, nonzero: &[u32], pick: &mut Vec<u32>, n: usize, out: &mut BTreeSet<u64>) {
        if pick.len() == k {
            let m = span_mask(n, pick);
            if m.count_ones() == 1 << k {
                out.insert(m);
            }
            return;
        }
        for i in start..nonzero.len() {
            pick.push(nonzero[i]);
            rec(i + 1, k, nonzero, pick, n, out);
            pick.pop();
        }
    }
    rec(0, k, &nonzero, &mut pick, n, &mut out);
    out
}

/// Bitmask of the elements of a library subspace.
pub fn mask_of(w: &coset_core::gf2::Subspace) -> u64 {
    w.elements().iter().fold(0u64, |m, e| m | (1u64 << e.bits()))
}

/// `f(n, k, m)` by counting over a brute-force Grassmannian, for the
/// subspace spanned by the first `k` unit vectors.
pub fn brute_intersection_histogram(n: usize, k: usize) -> Vec<usize> {
    let all = brute_grassmannian(n, k);
    let fixed = span_mask(n, &(0..k).map(|i| 1u32 << i).collect::<Vec<_>>());
    let mut hist = vec![0; k + 1];
    for w in all {
        let common = (w & fixed).count_ones();
        hist[common.trailing_zeros() as usize] += 1;
    }
    hist
}

/// Entangled bound summed in floating point.
pub fn bound_f64(n: usize, k: usize) -> f64 {
    let mut s = 0.0;
    for m in 0..=k.min(n - k) {
        s += 2f64.powi((m * m) as i32) * q_binomial_f64(n - k, m) * q_binomial_f64(k, m) * 2f64.powf(-(m as f64) / 2.0);
    }
    s / q_binomial_f64(n, k)
}

/// Unentangled optimum summed in floating point.
pub fn unentangled_f64(n: usize, k: usize) -> f64 {
    let mut s = 0.0;
    for m in 0..=k.min(n - k) {
        s += 2f64.powi((m * m) as i32) * q_binomial_f64(n - k, m) * q_binomial_f64(k, m) * 2f64.powi(-(m as i32));
    }
    s / q_binomial_f64(n, k)
}

fn parity(x: u32) -> bool {
    x.count_ones() % 2 == 1
}

/// Coset state from its definition: amplitude `±2^(-k/2)` on `x + u`,
/// sign `(-1)^(z.u)`, for every `u` in the element mask.
pub fn coset_vector(n: usize, elements: u64, x: u32, z: u32) -> DVector<C64> {
    let k = elements.count_ones().trailing_zeros();
    let amp = 2f64.powf(-(k as f64) / 2.0);
    let mut v = DVector::zeros(1 << n);
    for u in 0..(1u32 << n) {
        if elements >> u & 1 == 1 {
            let s = if parity(z & u) { -amp } else { amp };
            v[(x ^ u) as usize] = C64::new(s, 0.0);
        }
    }
    v
}

/// Winning probability with explicit Kronecker products and traces.
pub fn p_win_oracle(s: &Strategy) -> f64 {
    let n = s.n();
    let grass = s.grassmannian();
    let mut total = 0.0;
    for (wi, w) in grass.iter().enumerate() {
        let mask = mask_of(w);
        for (xi, x) in w.coset_reps().iter().enumerate() {
            for (zi, z) in w.dual().coset_reps().iter().enumerate() {
                let psi = coset_vector(n, mask, x.bits(), z.bits());
                let rho = &psi * psi.adjoint();
                let mut sigma = Matrix::zeros(s.channel().dim_b() * s.channel().dim_c(), s.channel().dim_b() * s.channel().dim_c());
                for k in s.channel().kraus() {
                    sigma += k * &rho * k.adjoint();
                }
                let m = s.bob(wi)[xi].kronecker(&s.charlie(wi)[zi]);
                total += (m * sigma).trace().re;
            }
        }
    }
    total / (grass.len() as f64 * 2f64.powi(n as i32))
}

/// Largest eigenvalue modulus of a Hermitian matrix by power iteration on
/// `A^2`, stopped once the Rayleigh quotient settles.
pub fn power_norm(a: &Matrix) -> f64 {
    let sq = a * a;
    let dim = a.nrows();
    let mut v = DVector::from_fn(dim, |i, _| C64::new(1.0 + (i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()));
    v /= C64::new(v.norm(), 0.0);
    let mut last = 0.0;
    for _ in 0..100_000 {
        let w = &sq * &v;
        let lambda = v.dotc(&w).re;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / C64::new(norm, 0.0);
        if (lambda - last).abs() <= 1e-15 * lambda.abs().max(1e-300) {
            return lambda.sqrt();
        }
        last = lambda;
    }
    last.sqrt()
}
