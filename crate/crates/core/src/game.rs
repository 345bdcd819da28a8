//! The `(n, k)` coset monogamy game.
//!
//! A referee picks `W` in `Gr_2(n, k)` and `x, z` uniformly, sends
//! `|W_{x,z}>` through the players' channel into `H_B ⊗ H_C`, then announces
//! `W`. Bob must name the coset `x + W`, Charlie the coset `z + W^⊥`.
//! Outcomes are indexed by the canonical representatives
//! [`Subspace::coset_reps`], so "guessed the right coset" is plain index
//! equality.
//!
//! Joint output spaces are ordered `H_B ⊗ H_C` (index `b * dim_c + c`);
//! tripartite operators add the referee's register in front.

use std::collections::BTreeMap;
use std::collections::HashMap;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{
    enumerate_grassmannian, gaussian_binomial, intersection_count, GF2Vector, Grassmannian,
    DEFAULT_CAP,
};
use crate::perms::full_family_from_table;
use crate::perms::IntersectionTable;
use crate::qstate::{
    coset_state, hadamard_matrix, max_abs_diff, operator_norm, spectral_norm, subspace_state,
    HermitianOperator, Matrix, Tolerances, C64,
};
use crate::surd::{biguint_to_rational, pow2_rational, ratio_to_f64, QuadSurd};

/// A completely positive, trace preserving map from `n_in` qubits into
/// `H_B ⊗ H_C`, stored as Kraus operators.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    n_in: usize,
    dim_b: usize,
    dim_c: usize,
    kraus: Vec<Matrix>,
}

impl Channel {
    /// Checks shapes and `Σ K^† K = Id` entrywise within `tol`.
    pub fn new(n_in: usize, dim_b: usize, dim_c: usize, kraus: Vec<Matrix>, tol: f64) -> Result<Self> {
        let (rows, cols) = (dim_b * dim_c, 1usize << n_in);
        for (i, k) in kraus.iter().enumerate() {
            if k.shape() != (rows, cols) {
                return Err(Error::InvalidStrategy {
                    what: "Kraus operator",
                    pointer: format!("/channel/kraus/{i}"),
                    reason: format!("shape {:?}, expected ({rows}, {cols})", k.shape()),
                });
            }
        }
        let mut sum = Matrix::zeros(cols, cols);
        for k in &kraus {
            sum += k.adjoint() * k;
        }
        let dev = max_abs_diff(&sum, &Matrix::identity(cols, cols));
        if dev > tol {
            return Err(Error::InvalidStrategy {
                what: "channel",
                pointer: "/channel/kraus".into(),
                reason: format!("not trace preserving: |Σ K†K - Id| = {dev:e}"),
            });
        }
        Ok(Self {
            n_in,
            dim_b,
            dim_c,
            kraus,
        })
    }

    /// Everything goes to Bob; Charlie's space is trivial.
    pub fn all_to_bob(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n_in: n,
            dim_b: d,
            dim_c: 1,
            kraus: vec![Matrix::identity(d, d)],
        }
    }

    /// Everything goes to Charlie; Bob's space is trivial.
    pub fn all_to_charlie(n: usize) -> Self {
        let d = 1 << n;
        Self {
            n_in: n,
            dim_b: 1,
            dim_c: d,
            kraus: vec![Matrix::identity(d, d)],
        }
    }

    /// Traces the input out: both output spaces are one-dimensional.
    pub fn discard(n: usize) -> Self {
        let d = 1 << n;
        let kraus = (0..d)
            .map(|i| {
                let mut k = Matrix::zeros(1, d);
                k[(0, i)] = C64::new(1.0, 0.0);
                k
            })
            .collect();
        Self {
            n_in: n,
            dim_b: 1,
            dim_c: 1,
            kraus,
        }
    }

    pub fn input_qubits(&self) -> usize {
        self.n_in
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    pub fn kraus(&self) -> &[Matrix] {
        &self.kraus
    }

    /// `Φ(ρ) = Σ K ρ K^†`.
    pub fn apply(&self, rho: &Matrix) -> Matrix {
        let d = self.dim_b * self.dim_c;
        let mut out = Matrix::zeros(d, d);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// `Φ(|ψ><ψ|)`.
    pub fn apply_pure(&self, psi: &DVector<C64>) -> Matrix {
        let d = self.dim_b * self.dim_c;
        let mut out = Matrix::zeros(d, d);
        for k in &self.kraus {
            let v = k * psi;
            out += &v * v.adjoint();
        }
        out
    }
}

/// `Tr[(B ⊗ C) σ]` without forming the Kronecker product.
fn kron_trace(b: &Matrix, c: &Matrix, sigma: &Matrix) -> C64 {
    let (db, dc) = (b.nrows(), c.nrows());
    let mut acc = C64::new(0.0, 0.0);
    for b1 in 0..db {
        for b2 in 0..db {
            let bv = b[(b1, b2)];
            if bv == C64::new(0.0, 0.0) {
                continue;
            }
            for c1 in 0..dc {
                for c2 in 0..dc {
                    acc += bv * c[(c1, c2)] * sigma[(b2 * dc + c2, b1 * dc + c1)];
                }
            }
        }
    }
    acc
}

/// Channel plus, for every subspace in canonical order, Bob's POVM over
/// `CS(W)` and Charlie's POVM over `CS(W^⊥)`.
#[derive(Clone, Debug)]
pub struct Strategy {
    n: usize,
    k: usize,
    grass: Grassmannian,
    channel: Channel,
    bob: Vec<Vec<Matrix>>,
    charlie: Vec<Vec<Matrix>>,
}

fn check_povm(
    elements: &[Matrix],
    dim: usize,
    outcomes: usize,
    pointer: &str,
    tol: f64,
) -> Result<()> {
    let err = |pointer: String, reason: String| Error::InvalidStrategy {
        what: "POVM",
        pointer,
        reason,
    };
    if elements.len() != outcomes {
        return Err(err(
            pointer.to_string(),
            format!("{} elements, expected {outcomes}", elements.len()),
        ));
    }
    let mut sum = Matrix::zeros(dim, dim);
    for (i, e) in elements.iter().enumerate() {
        let at = format!("{pointer}/{i}");
        if e.shape() != (dim, dim) {
            return Err(err(at, format!("shape {:?}, expected ({dim}, {dim})", e.shape())));
        }
        let h = HermitianOperator::new(e.clone(), tol).map_err(|e| err(at.clone(), e.to_string()))?;
        let min = h.eigenvalues()?.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(err(at, format!("not positive semidefinite: eigenvalue {min:e}")));
        }
        sum += e;
    }
    let dev = max_abs_diff(&sum, &Matrix::identity(dim, dim));
    if dev > tol {
        return Err(err(pointer.to_string(), format!("elements sum to identity only within {dev:e}")));
    }
    Ok(())
}

impl Strategy {
    /// Validates every POVM (positive semidefinite within `tol.amplitude`,
    /// complete within `tol.amplitude`, one element per coset).
    pub fn new(
        n: usize,
        k: usize,
        channel: Channel,
        bob: Vec<Vec<Matrix>>,
        charlie: Vec<Vec<Matrix>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
        if channel.n_in != n {
            return Err(Error::InvalidStrategy {
                what: "channel",
                pointer: "/channel".into(),
                reason: format!("channel takes {} qubits, game has n = {n}", channel.n_in),
            });
        }
        for (name, list) in [("bob", &bob), ("charlie", &charlie)] {
            if list.len() != grass.len() {
                return Err(Error::InvalidStrategy {
                    what: "POVM family",
                    pointer: format!("/{name}"),
                    reason: format!("{} subspaces covered, expected {}", list.len(), grass.len()),
                });
            }
        }
        for w in 0..grass.len() {
            check_povm(&bob[w], channel.dim_b, 1 << (n - k), &format!("/bob/{w}"), tol.amplitude)?;
            check_povm(&charlie[w], channel.dim_c, 1 << k, &format!("/charlie/{w}"), tol.amplitude)?;
        }
        Ok(Self {
            n,
            k,
            grass,
            channel,
            bob,
            charlie,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn grassmannian(&self) -> &Grassmannian {
        &self.grass
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    /// Bob's POVM for the subspace with canonical index `w`.
    pub fn bob(&self, w: usize) -> &[Matrix] {
        &self.bob[w]
    }

    /// Charlie's POVM for the subspace with canonical index `w`.
    pub fn charlie(&self, w: usize) -> &[Matrix] {
        &self.charlie[w]
    }

    /// The channel discards the state and both players guess uniformly at
    /// random. Wins with probability `2^-n`.
    pub fn discard_and_guess(n: usize, k: usize) -> Result<Self> {
        let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
        let uniform = |outcomes: usize| vec![Matrix::from_element(1, 1, C64::new(1.0 / outcomes as f64, 0.0)); outcomes];
        let bob = vec![uniform(1 << (n - k)); grass.len()];
        let charlie = vec![uniform(1 << k); grass.len()];
        Self::new(n, k, Channel::discard(n), bob, charlie, &Tolerances::default())
    }

    /// Bob receives every qubit and measures the computational coset
    /// projectors; Charlie always answers the zero coset. Wins with
    /// probability `2^-k`.
    pub fn bob_takes_all(n: usize, k: usize) -> Result<Self> {
        let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
        let bob = grass
            .iter()
            .map(|w| {
                w.coset_reps()
                    .iter()
                    .map(|x| crate::qstate::coset_indicator(w, x).map(HermitianOperator::into_matrix))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let charlie = vec![blind_guess(1 << k); grass.len()];
        Self::new(n, k, Channel::all_to_bob(n), bob, charlie, &Tolerances::default())
    }

    /// Charlie receives every qubit and measures in the Hadamard coset
    /// basis; Bob always answers the zero coset. Wins with probability
    /// `2^-(n-k)`.
    pub fn charlie_takes_all(n: usize, k: usize) -> Result<Self> {
        let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
        let charlie = grass
            .iter()
            .map(|w| {
                w.dual()
                    .coset_reps()
                    .iter()
                    .map(|z| crate::qstate::coset_projector_sum_c(w, z).map(HermitianOperator::into_matrix))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let bob = vec![blind_guess(1 << (n - k)); grass.len()];
        Self::new(n, k, Channel::all_to_charlie(n), bob, charlie, &Tolerances::default())
    }
}

/// One-dimensional POVM that always answers outcome 0.
fn blind_guess(outcomes: usize) -> Vec<Matrix> {
    (0..outcomes)
        .map(|i| Matrix::from_element(1, 1, C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)))
        .collect()
}

/// Winning probability of `s`: the uniform average over `W`, `x ∈ CS(W)`
/// and `z ∈ CS(W^⊥)` of `Tr[(B_x^W ⊗ C_z^W) Φ(|W_{x,z}><W_{x,z}|)]`.
pub fn p_win(s: &Strategy) -> Result<f64> {
    let per_subspace: Vec<f64> = (0..s.grass.len())
        .into_par_iter()
        .map(|wi| -> Result<f64> {
            let w = &s.grass[wi];
            let mut acc = 0.0;
            for (xi, x) in w.coset_reps().iter().enumerate() {
                for (zi, z) in w.dual().coset_reps().iter().enumerate() {
                    let psi = coset_state(w, x, z)?;
                    let sigma = s.channel.apply_pure(psi.amplitudes());
                    acc += kron_trace(&s.bob[wi][xi], &s.charlie[wi][zi], &sigma).re;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total: f64 = per_subspace.iter().sum();
    Ok(total / (s.grass.len() as f64 * (1u64 << s.n) as f64))
}

/// Choi state `(Id ⊗ Φ)(|φ><φ|)` of the channel, with `|φ>` the unit-norm
/// maximally entangled state on two copies of the input. The referee's
/// register comes first.
pub fn choi_state(c: &Channel) -> Result<HermitianOperator> {
    let d = 1usize << c.n_in;
    let out = c.dim_b * c.dim_c;
    let mut rho = Matrix::zeros(d * out, d * out);
    let scale = 1.0 / d as f64;
    for k in &c.kraus {
        for i in 0..d {
            let ci = k.column(i);
            for j in 0..d {
                let block = (&ci * k.column(j).adjoint()).scale(scale);
                let mut view = rho.view_mut((i * out, j * out), (out, out));
                view += block;
            }
        }
    }
    HermitianOperator::new(rho, 1e-10)
}

/// Winning probability evaluated as an extended non-local game against the
/// Choi state: `E_W Σ_{x,z} Tr[(|W_{x,z}><W_{x,z}| ⊗ B_x^W ⊗ C_z^W) ρ]`.
///
/// With `|φ>` normalized the Choi identity gives
/// `Tr[(A ⊗ M) ρ] = Tr[M Φ(A^T)] / 2^n`, and the `1/2^n` is exactly the
/// average over `(x, z)`; coset states are real, so `A^T = A`. No extra
/// factor is needed for equality with [`p_win`].
pub fn p_win_extended(s: &Strategy) -> Result<f64> {
    let rho = choi_state(&s.channel)?;
    let rho = rho.matrix();
    let d = 1usize << s.n;
    let out = s.channel.dim_b * s.channel.dim_c;
    let block = |i: usize, j: usize| rho.view((i * out, j * out), (out, out)).into_owned();
    let blocks: Vec<Matrix> = (0..d * d).map(|ij| block(ij / d, ij % d)).collect();

    let per_subspace: Vec<f64> = (0..s.grass.len())
        .into_par_iter()
        .map(|wi| -> Result<f64> {
            let w = &s.grass[wi];
            let mut acc = 0.0;
            for (xi, x) in w.coset_reps().iter().enumerate() {
                for (zi, z) in w.dual().coset_reps().iter().enumerate() {
                    let psi = coset_state(w, x, z)?;
                    let support: Vec<(usize, C64)> = psi
                        .amplitudes()
                        .iter()
                        .enumerate()
                        .filter(|(_, a)| a.norm() > 0.0)
                        .map(|(i, &a)| (i, a))
                        .collect();
                    // Tr[(A ⊗ M) ρ] = Σ_{ij} A_ij Tr[M ρ_[j,i]].
                    for &(i, ai) in &support {
                        for &(j, aj) in &support {
                            let a_ij = ai * aj.conj();
                            let t = kron_trace(&s.bob[wi][xi], &s.charlie[wi][zi], &blocks[j * d + i]);
                            acc += (a_ij * t).re;
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total: f64 = per_subspace.iter().sum();
    Ok(total / s.grass.len() as f64)
}

fn check_nk(n: usize, k: usize) -> Result<()> {
    if k > n {
        return Err(Error::InvalidParameters(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// Exact norm-sum bound
/// `g(n, k) = (1/N) Σ_m 2^(m^2) binom(n-k, m)_2 binom(k, m)_2 2^(-m/2)`.
pub fn theorem1_bound_exact(n: usize, k: usize) -> Result<QuadSurd> {
    check_nk(n, k)?;
    let mut sum = QuadSurd::zero();
    for m in 0..=k.min(n - k) {
        let count = (num_bigint::BigUint::from(1u32) << (m * m))
            * gaussian_binomial(n - k, m)
            * gaussian_binomial(k, m);
        sum = sum + QuadSurd::pow2_half(-(m as i64)).scale(&biguint_to_rational(&count));
    }
    let n_sub = biguint_to_rational(&gaussian_binomial(n, k));
    Ok(sum.scale(&n_sub.recip()))
}

/// The same bound written before the reflection `m -> k - m`:
/// `(1/N) Σ_m f(n, k, m) sqrt(2^(m-k))`.
pub fn theorem1_bound_by_intersection(n: usize, k: usize) -> Result<QuadSurd> {
    check_nk(n, k)?;
    let mut sum = QuadSurd::zero();
    for m in 0..=k {
        let f = biguint_to_rational(&intersection_count(n, k, m));
        sum = sum + QuadSurd::pow2_half(m as i64 - k as i64).scale(&f);
    }
    let n_sub = biguint_to_rational(&gaussian_binomial(n, k));
    Ok(sum.scale(&n_sub.recip()))
}

/// Upper bound on the winning probability of any strategy, as a double.
pub fn theorem1_bound(n: usize, k: usize) -> Result<f64> {
    Ok(theorem1_bound_exact(n, k)?.to_f64())
}

/// Per-qubit rate envelope `2^(-min(R, 1-R)/2)`.
pub fn winning_rate_envelope(rate: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::InvalidParameters(format!("rate {rate} outside [0, 1]")));
    }
    Ok(2f64.powf(-rate.min(1.0 - rate) / 2.0))
}

/// The constant `9 / (2 (9/(2√2) - 1)) + 1 = (109 + 81√2) / 73` multiplying
/// `2^(-k/2)` in the geometric-sum bound.
pub fn geometric_bound_constant() -> QuadSurd {
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    // 9 / (2√2) = (9/4)√2
    let ratio = QuadSurd::new(q(0, 1), q(9, 4));
    let denom = (ratio - QuadSurd::from_integer(1)).scale(&q(2, 1));
    let frac = denom.recip().expect("nonzero").scale(&q(9, 1));
    frac + QuadSurd::from_integer(1)
}

/// Consecutive intersection-count ratio checked by [`ratio_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub m: usize,
    /// `f(n, k, k-m) / f(n, k, k-m-1)` as `p/q`.
    pub ratio: String,
    pub value: f64,
    pub within: bool,
    /// The closed form `2^-(2m+1) (2^(m+1)-1)^2 / ((2^(n-k-m)-1)(2^(k-m)-1))`
    /// agrees with the direct ratio.
    pub closed_form_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub n: usize,
    pub k: usize,
    pub ratios: Vec<RatioEntry>,
    /// `f(n, k, k-m) <= (2/9)^(k-1-m) f(n, k, 1)` for `0 <= m <= k-1`.
    pub induction_holds: bool,
    pub g: f64,
    pub constant_bound: f64,
    /// `g(n, k) <= C 2^(-k/2)`, decided exactly.
    pub constant_bound_holds: bool,
    pub passed: bool,
}

/// Verifies in exact arithmetic that consecutive intersection counts
/// shrink by at least `2/9` and that `g(n, k)` sits under the geometric
/// constant bound. Requires `k <= n/2`.
pub fn ratio_check(n: usize, k: usize) -> Result<RatioReport> {
    check_nk(n, k)?;
    if 2 * k > n {
        return Err(Error::InvalidParameters(format!(
            "ratio check needs k <= n/2, got n = {n}, k = {k}"
        )));
    }
    let f = |m: usize| biguint_to_rational(&intersection_count(n, k, m));
    let two_ninths = BigRational::new(2.into(), 9.into());
    let one = BigRational::from_integer(1.into());
    let ratios: Vec<RatioEntry> = (0..k.saturating_sub(1))
        .map(|m| {
            let ratio = f(k - m) / f(k - m - 1);
            let pm1 = pow2_rational(m as i64 + 1) - &one;
            let closed = pow2_rational(-(2 * m as i64 + 1)) * &pm1 * &pm1
                / ((pow2_rational((n - k - m) as i64) - &one) * (pow2_rational((k - m) as i64) - &one));
            RatioEntry {
                m,
                value: ratio_to_f64(&ratio),
                within: ratio <= two_ninths,
                closed_form_agrees: closed == ratio,
                ratio: ratio.to_string(),
            }
        })
        .collect();
    let induction_holds = k == 0
        || (0..k).all(|m| {
            let scale = (0..k - 1 - m).fold(one.clone(), |acc, _| acc * &two_ninths);
            f(k - m) <= scale * f(1)
        });
    let g = theorem1_bound_exact(n, k)?;
    let bound = geometric_bound_constant() * QuadSurd::pow2_half(-(k as i64));
    let constant_bound_holds = g <= bound;
    let passed = ratios.iter().all(|r| r.within && r.closed_form_agrees) && induction_holds && constant_bound_holds;
    Ok(RatioReport {
        n,
        k,
        ratios,
        induction_holds,
        g: g.to_f64(),
        constant_bound: bound.to_f64(),
        constant_bound_holds,
        passed,
    })
}

/// Exact optimum over unentangled strategies,
/// `(1/N) Σ_m 2^(m^2) binom(n-k, m)_2 binom(k, m)_2 2^(-m)`.
pub fn unentangled_value_exact(n: usize, k: usize) -> Result<BigRational> {
    check_nk(n, k)?;
    let mut sum = BigRational::zero();
    for m in 0..=k.min(n - k) {
        let count = (num_bigint::BigUint::from(1u32) << (m * m))
            * gaussian_binomial(n - k, m)
            * gaussian_binomial(k, m);
        sum += biguint_to_rational(&count) * pow2_rational(-(m as i64));
    }
    Ok(sum / biguint_to_rational(&gaussian_binomial(n, k)))
}

pub fn unentangled_value(n: usize, k: usize) -> Result<f64> {
    Ok(ratio_to_f64(&unentangled_value_exact(n, k)?))
}

/// Largest eigenvalue of `E_W |W><W|`, computed by dense diagonalization.
pub fn unentangled_value_oracle(n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
    let zero = GF2Vector::zero(n)?;
    let ds = DeterministicStrategy {
        f: vec![zero; grass.len()],
        g: vec![zero; grass.len()],
    };
    deterministic_value_on(&ds, &grass)
}

/// Bob answers `f(W)` and Charlie answers `g(W)` regardless of the state.
/// Both maps are indexed by canonical Grassmannian position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub f: Vec<GF2Vector>,
    pub g: Vec<GF2Vector>,
}

impl DeterministicStrategy {
    /// Uniformly random answers from all of `F_2^n`.
    pub fn random<R: Rng>(n: usize, size: usize, rng: &mut R) -> Result<Self> {
        let mut pick = || GF2Vector::from_bits(n, rng.gen_range(0..(1u32 << n)));
        let f = (0..size).map(|_| pick()).collect::<Result<_>>()?;
        let g = (0..size).map(|_| pick()).collect::<Result<_>>()?;
        Ok(Self { f, g })
    }
}

/// `‖E_W |W_{f(W), g(W)}><W_{f(W), g(W)}|‖`.
pub fn deterministic_value(ds: &DeterministicStrategy, n: usize, k: usize) -> Result<f64> {
    check_nk(n, k)?;
    let grass = enumerate_grassmannian(n, k, DEFAULT_CAP)?;
    deterministic_value_on(ds, &grass)
}

pub fn deterministic_value_on(ds: &DeterministicStrategy, grass: &Grassmannian) -> Result<f64> {
    if ds.f.len() != grass.len() || ds.g.len() != grass.len() {
        return Err(Error::DimensionMismatch {
            expected: grass.len(),
            found: ds.f.len().min(ds.g.len()),
        });
    }
    let d = 1usize << grass.n();
    let mut avg = Matrix::zeros(d, d);
    let scale = 1.0 / grass.len() as f64;
    for (i, w) in grass.iter().enumerate() {
        let psi = if ds.f[i].is_zero() && ds.g[i].is_zero() {
            subspace_state(w)?
        } else {
            coset_state(w, &ds.f[i], &ds.g[i])?
        };
        avg += psi.projector().scale(scale);
    }
    operator_norm(&HermitianOperator::symmetrized(&avg))
}

/// The `(n, n-k)` strategy with the same winning probability: Bob and
/// Charlie swap roles and spaces, and the channel first applies `H^{⊗n}`,
/// then swaps the output factors.
pub fn dualize(s: &Strategy) -> Result<Strategy> {
    let (n, k) = (s.n, s.k);
    let dual_grass = enumerate_grassmannian(n, n - k, DEFAULT_CAP)?;
    let (db, dc) = (s.channel.dim_b, s.channel.dim_c);
    let out = db * dc;
    let mut swap = Matrix::zeros(out, out);
    for b in 0..db {
        for c in 0..dc {
            swap[(c * db + b, b * dc + c)] = C64::new(1.0, 0.0);
        }
    }
    let h = hadamard_matrix(n)?;
    let kraus = s.channel.kraus.iter().map(|k| &swap * k * &h).collect();
    let channel = Channel {
        n_in: n,
        dim_b: dc,
        dim_c: db,
        kraus,
    };
    let mut bob = Vec::with_capacity(dual_grass.len());
    let mut charlie = Vec::with_capacity(dual_grass.len());
    for wd in dual_grass.iter() {
        let wi = s
            .grass
            .index_of(&wd.dual())
            .ok_or_else(|| Error::InvariantViolation("dual subspace missing from Grassmannian".into()))?;
        bob.push(s.charlie[wi].clone());
        charlie.push(s.bob[wi].clone());
    }
    Ok(Strategy {
        n,
        k: n - k,
        grass: dual_grass,
        channel,
        bob,
        charlie,
    })
}

/// Dimensions for [`random_strategy`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStrategyShape {
    pub dim_b: usize,
    pub dim_c: usize,
    pub kraus_rank: usize,
}

impl RandomStrategyShape {
    /// Bob's space sized for his `2^(n-k)` answers, Charlie's for her `2^k`,
    /// and two Kraus operators.
    pub fn natural(n: usize, k: usize) -> Self {
        Self {
            dim_b: 1 << (n - k),
            dim_c: 1 << k,
            kraus_rank: 2,
        }
    }
}

fn gaussian_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `rows x cols` matrix with orthonormal columns, from the QR factor of a
/// complex Gaussian matrix. Needs `rows >= cols`.
fn random_isometry<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let q = gaussian_matrix(rows, cols, rng).qr().q();
    q.columns(0, cols).into_owned()
}

/// Random projective measurement: a random orthonormal basis whose vectors
/// are dealt to outcomes at random. Some outcomes may receive nothing.
fn random_pvm<R: Rng>(dim: usize, outcomes: usize, rng: &mut R) -> Vec<Matrix> {
    let basis = random_isometry(dim, dim, rng);
    let mut elements = vec![Matrix::zeros(dim, dim); outcomes];
    for c in 0..dim {
        let target = rng.gen_range(0..outcomes);
        let v = basis.column(c);
        elements[target] += &v * v.adjoint();
    }
    elements
}

/// Seeded random strategy: a Haar-like random isometry split into
/// `kraus_rank` Kraus operators, and random projective measurements.
pub fn random_strategy(n: usize, k: usize, seed: u64, shape: RandomStrategyShape) -> Result<Strategy> {
    check_nk(n, k)?;
    let d = 1usize << n;
    let out = shape.dim_b * shape.dim_c;
    if out * shape.kraus_rank < d || shape.kraus_rank == 0 {
        return Err(Error::InvalidParameters(format!(
            "output {out} x rank {} cannot hold {d} input dimensions",
            shape.kraus_rank
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iso = random_isometry(out * shape.kraus_rank, d, &mut rng);
    let kraus = (0..shape.kraus_rank)
        .map(|e| iso.rows(e * out, out).into_owned())
        .collect();
    let tol = Tolerances::default();
    let channel = Channel::new(n, shape.dim_b, shape.dim_c, kraus, tol.amplitude)?;
    let size = gaussian_binomial(n, k)
        .to_usize()
        .ok_or_else(|| Error::InvalidParameters("Grassmannian too large".into()))?;
    let bob = (0..size).map(|_| random_pvm(shape.dim_b, 1 << (n - k), &mut rng)).collect();
    let charlie = (0..size).map(|_| random_pvm(shape.dim_c, 1 << k, &mut rng)).collect();
    Strategy::new(n, k, channel, bob, charlie, &tol)
}

/// Monte Carlo estimate of the winning probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub shots: u64,
    pub wins: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Plays `shots` rounds: `(W, x, z)` uniform, the joint outcome of Bob and
/// Charlie drawn from the Born rule.
pub fn p_win_monte_carlo(s: &Strategy, shots: u64, seed: u64) -> Result<McEstimate> {
    if shots == 0 {
        return Err(Error::InvalidParameters("shots must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nx, nz) = (1usize << (s.n - s.k), 1usize << s.k);
    let mut cache: HashMap<(usize, usize, usize), Vec<f64>> = HashMap::new();
    let mut wins = 0u64;
    for _ in 0..shots {
        let wi = rng.gen_range(0..s.grass.len());
        let xi = rng.gen_range(0..nx);
        let zi = rng.gen_range(0..nz);
        let dist = match cache.get(&(wi, xi, zi)) {
            Some(d) => d,
            None => {
                let w = &s.grass[wi];
                let x = w.coset_reps()[xi];
                let z = w.dual().coset_reps()[zi];
                let sigma = s.channel.apply_pure(coset_state(w, &x, &z)?.amplitudes());
                let mut dist = Vec::with_capacity(nx * nz);
                for b in &s.bob[wi] {
                    for c in &s.charlie[wi] {
                        dist.push(kron_trace(b, c, &sigma).re.max(0.0));
                    }
                }
                cache.entry((wi, xi, zi)).or_insert(dist)
            }
        };
        let total: f64 = dist.iter().sum();
        let mut u = rng.gen::<f64>() * total;
        let mut outcome = dist.len() - 1;
        for (i, p) in dist.iter().enumerate() {
            if u < *p {
                outcome = i;
                break;
            }
            u -= p;
        }
        if outcome == xi * nz + zi {
            wins += 1;
        }
    }
    let mean = wins as f64 / shots as f64;
    Ok(McEstimate {
        shots,
        wins,
        mean,
        std_error: (mean * (1.0 - mean) / shots as f64).sqrt(),
    })
}

/// One inequality stage of [`norm_sum_bound_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    /// Smallest `rhs - lhs` over every instance checked.
    pub slack: f64,
    pub instances: usize,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSumReport {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub p_win: f64,
    pub norm_of_sum: f64,
    pub permutation_sum: f64,
    pub bound: f64,
    pub stages: Vec<StageReport>,
    pub passed: bool,
}

fn stage(name: &str, slacks: &[f64], tol: f64) -> StageReport {
    let slack = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    StageReport {
        stage: name.to_string(),
        slack,
        instances: slacks.len(),
        passed: slacks.iter().all(|&s| s >= -tol),
    }
}

/// Walks the operator chain behind the entangled bound for one projective
/// strategy:
///
/// - `(a)` `p_win <= (1/N) ‖Σ_W Π^W‖`
/// - `(b)` `‖Π^V Π^W‖ <= ‖P^V Q^W‖` for every pair
/// - `(c)` `‖P^V Q^W‖ <= sqrt(2^(dim(V∩W) - k))` for every pair
/// - `(d)` `‖Σ Π^W‖ <= Σ_i max_W ‖Π^W Π^{π_i(W)}‖ <= N g(n, k)` over the full
///   orthogonal permutation family
///
/// Stages b to d rely on every `Π^W` being a projector, so they are only
/// meaningful for projective strategies.
pub fn norm_sum_bound_check_for(s: &Strategy, seed: u64, tol: &Tolerances) -> Result<NormSumReport> {
    let (n, k) = (s.n, s.k);
    let grass = &s.grass;
    let size = grass.len();
    let (db, dc) = (s.channel.dim_b, s.channel.dim_c);
    let id_b = Matrix::identity(db, db);
    let id_c = Matrix::identity(dc, dc);

    struct Ops {
        pi: Matrix,
        p: Matrix,
        q: Matrix,
    }
    let ops: Vec<Ops> = (0..size)
        .into_par_iter()
        .map(|wi| -> Result<Ops> {
            let w = &grass[wi];
            let d = 1usize << n;
            let dim = d * db * dc;
            let (mut pi, mut p, mut q) = (Matrix::zeros(dim, dim), Matrix::zeros(dim, dim), Matrix::zeros(dim, dim));
            for (xi, x) in w.coset_reps().iter().enumerate() {
                for (zi, z) in w.dual().coset_reps().iter().enumerate() {
                    let proj = coset_state(w, x, z)?.projector();
                    let b = &s.bob[wi][xi];
                    let c = &s.charlie[wi][zi];
                    pi += proj.kronecker(b).kronecker(c);
                    p += proj.kronecker(&id_b).kronecker(c);
                    q += proj.kronecker(b).kronecker(&id_c);
                }
            }
            Ok(Ops { pi, p, q })
        })
        .collect::<Result<_>>()?;

    let dim = ops.first().map_or(0, |o| o.pi.nrows());
    let mut total = Matrix::zeros(dim, dim);
    for o in &ops {
        total += &o.pi;
    }
    let norm_of_sum = operator_norm(&HermitianOperator::symmetrized(&total))?;
    let win = p_win(s)?;
    let stage_a = stage("a: p_win <= ||sum Pi||/N", &[norm_of_sum / size as f64 - win], tol.spectral);

    // Pairwise products, row-major over (V, W).
    let pairs: Vec<(f64, f64, f64)> = (0..size * size)
        .into_par_iter()
        .map(|vw| -> Result<(f64, f64, f64)> {
            let (v, w) = (vw / size, vw % size);
            let pi_pi = spectral_norm(&(&ops[v].pi * &ops[w].pi))?;
            let p_q = spectral_norm(&(&ops[v].p * &ops[w].q))?;
            let m = grass[v].intersect_dim(&grass[w])?;
            let bound = 2f64.powf(m as f64 - k as f64).sqrt();
            Ok((pi_pi, p_q, bound))
        })
        .collect::<Result<_>>()?;
    let stage_b = stage(
        "b: ||Pi^V Pi^W|| <= ||P^V Q^W||",
        &pairs.iter().map(|(a, b, _)| b - a).collect::<Vec<_>>(),
        tol.spectral,
    );
    let stage_c = stage(
        "c: ||P^V Q^W|| <= sqrt(2^(dim(V^W)-k))",
        &pairs.iter().map(|(_, b, c)| c - b).collect::<Vec<_>>(),
        tol.spectral,
    );

    let table = IntersectionTable::new(grass);
    let family = full_family_from_table(grass, &table)?;
    let permutation_sum: f64 = family
        .entries
        .iter()
        .map(|e| {
            (0..size)
                .map(|w| pairs[w * size + e.perm[w]].0)
                .fold(0.0, f64::max)
        })
        .sum();
    let bound = theorem1_bound(n, k)?;
    let stage_d = stage(
        "d: ||sum Pi|| <= sum_i max_W ||Pi^W Pi^pi_i(W)|| <= N g(n,k)",
        &[
            permutation_sum - norm_of_sum,
            size as f64 * bound - permutation_sum,
        ],
        tol.spectral,
    );

    let stages = vec![stage_a, stage_b, stage_c, stage_d];
    let passed = stages.iter().all(|s| s.passed);
    Ok(NormSumReport {
        n,
        k,
        seed,
        p_win: win,
        norm_of_sum,
        permutation_sum,
        bound,
        stages,
        passed,
    })
}

/// [`norm_sum_bound_check_for`] on the seeded random projective strategy
/// with natural dimensions.
pub fn norm_sum_bound_check(n: usize, k: usize, seed: u64, tol: &Tolerances) -> Result<NormSumReport> {
    let s = random_strategy(n, k, seed, RandomStrategyShape::natural(n, k))?;
    norm_sum_bound_check_for(&s, seed, tol)
}

/// Summary of a strategy evaluation against the entangled bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
}

impl GameReport {
    /// Clamps `value` into `[0, 1]` and compares it with `g(n, k)`.
    pub fn new(value: f64, n: usize, k: usize, seed: Option<u64>, tol: Tolerances) -> Result<Self> {
        let value = value.clamp(0.0, 1.0);
        let bound = theorem1_bound(n, k)?;
        Ok(Self {
            value,
            bound,
            slack: bound - value,
            passed: value <= bound + tol.spectral,
            seed,
            tolerances: tol,
        })
    }
}

/// On-disk strategy. Matrices are row-major lists of `[re, im]` pairs;
/// subspace keys are canonical Grassmannian indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub n: usize,
    pub k: usize,
    pub channel: ChannelFile,
    pub bob: BTreeMap<usize, Vec<MatrixJson>>,
    pub charlie: BTreeMap<usize, Vec<MatrixJson>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    #[serde(rename = "dimB")]
    pub dim_b: usize,
    #[serde(rename = "dimC")]
    pub dim_c: usize,
    pub kraus: Vec<MatrixJson>,
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_to_json(m: &Matrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn matrix_from_json(raw: &MatrixJson, pointer: String) -> Result<Matrix> {
    let rows = raw.len();
    let cols = raw.first().map_or(0, Vec::len);
    if let Some(bad) = raw.iter().position(|r| r.len() != cols) {
        return Err(Error::Format {
            pointer: format!("{pointer}/{bad}"),
            reason: format!("row has {} entries, expected {cols}", raw[bad].len()),
        });
    }
    Ok(Matrix::from_fn(rows, cols, |i, j| C64::new(raw[i][j][0], raw[i][j][1])))
}

impl StrategyFile {
    pub fn from_strategy(s: &Strategy) -> Self {
        let povms = |list: &[Vec<Matrix>]| {
            list.iter()
                .enumerate()
                .map(|(i, p)| (i, p.iter().map(matrix_to_json).collect()))
                .collect()
        };
        Self {
            n: s.n,
            k: s.k,
            channel: ChannelFile {
                dim_b: s.channel.dim_b,
                dim_c: s.channel.dim_c,
                kraus: s.channel.kraus.iter().map(matrix_to_json).collect(),
            },
            bob: povms(&s.bob),
            charlie: povms(&s.charlie),
        }
    }

    /// Parses JSON; syntax and schema errors carry a JSON pointer to the
    /// offending field.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Format {
            pointer: json_pointer(e.path()),
            reason: e.inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("strategy serializes")
    }

    /// Rebuilds and validates the strategy.
    pub fn into_strategy(self, tol: &Tolerances) -> Result<Strategy> {
        let Self {
            n,
            k,
            channel,
            bob,
            charlie,
        } = self;
        check_nk(n, k).map_err(|e| Error::Format {
            pointer: "/k".into(),
            reason: e.to_string(),
        })?;
        if n > crate::qstate::MAX_QUBITS {
            return Err(Error::Format {
                pointer: "/n".into(),
                reason: format!("n = {n} exceeds {}", crate::qstate::MAX_QUBITS),
            });
        }
        let size = check_size(n, k)?;
        let kraus = channel
            .kraus
            .iter()
            .enumerate()
            .map(|(i, m)| matrix_from_json(m, format!("/channel/kraus/{i}")))
            .collect::<Result<Vec<_>>>()?;
        let channel = Channel::new(n, channel.dim_b, channel.dim_c, kraus, tol.amplitude)?;
        let povms = |name: &str, map: BTreeMap<usize, Vec<MatrixJson>>| -> Result<Vec<Vec<Matrix>>> {
            if let Some(extra) = map.keys().find(|&&i| i >= size) {
                return Err(Error::Format {
                    pointer: format!("/{name}/{extra}"),
                    reason: format!("subspace index out of range (N = {size})"),
                });
            }
            (0..size)
                .map(|i| {
                    let elems = map.get(&i).ok_or_else(|| Error::Format {
                        pointer: format!("/{name}/{i}"),
                        reason: "missing POVM".into(),
                    })?;
                    elems
                        .iter()
                        .enumerate()
                        .map(|(j, m)| matrix_from_json(m, format!("/{name}/{i}/{j}")))
                        .collect()
                })
                .collect()
        };
        let bob = povms("bob", bob)?;
        let charlie = povms("charlie", charlie)?;
        Strategy::new(n, k, channel, bob, charlie, tol)
    }
}

fn check_size(n: usize, k: usize) -> Result<usize> {
    crate::gf2::check_grassmannian_size(n, k, DEFAULT_CAP)
}

pub(crate) fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        match seg {
            Segment::Seq { index } => out.push_str(&format!("/{index}")),
            Segment::Map { key } => out.push_str(&format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => out.push_str(&format!("/{variant}")),
            Segment::Unknown => {}
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}
