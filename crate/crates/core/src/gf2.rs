//! Linear algebra over the binary field.
//!
//! Vectors of `F_2^n` are packed into a single machine word. Coordinate `i`
//! (counting from the left of the printed bit string) lives at bit `n - 1 - i`,
//! so the packed word read as an integer is also the computational basis
//! label used by the dense state layer.
//!
//! Subspaces are kept in reduced row echelon form (RREF), which makes them
//! canonical: two [`Subspace`] values are equal exactly when their RREF
//! matrices agree bit for bit. Coset representatives are canonical too: a
//! vector is reduced against the RREF basis until it has a zero in every
//! pivot column.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign};
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 20;

/// Default limit on the number of subspaces materialized at once.
pub const DEFAULT_CAP: u64 = 1_000_000;

/// An element of `F_2^n`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GF2Vector {
    n: u8,
    bits: u32,
}

impl GF2Vector {
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_bits(n, 0)
    }

    /// Builds a vector from its packed word. Bits above position `n` must be
    /// clear.
    pub fn from_bits(n: usize, bits: u32) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
        }
        if n < 32 && bits >> n != 0 {
            return Err(Error::InvalidParameters(format!(
                "bits {bits:#x} do not fit in dimension {n}"
            )));
        }
        Ok(Self { n: n as u8, bits })
    }

    /// Unit vector with a one in coordinate `i`.
    pub fn unit(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidParameters(format!(
                "coordinate {i} out of range for dimension {n}"
            )));
        }
        Self::from_bits(n, 1 << (n - 1 - i))
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Computational basis label of this vector.
    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.dim());
        (self.bits >> (self.dim() - 1 - i)) & 1 == 1
    }

    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Standard bilinear form `x . y = sum_i x_i y_i` over `F_2`.
    pub fn dot(&self, other: &Self) -> bool {
        debug_assert_eq!(self.n, other.n);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

impl Add for GF2Vector {
    type Output = GF2Vector;

    fn add(self, rhs: Self) -> Self {
        debug_assert_eq!(self.n, rhs.n);
        Self {
            n: self.n,
            bits: self.bits ^ rhs.bits,
        }
    }
}

impl AddAssign for GF2Vector {
    fn add_assign(&mut self, rhs: Self) {
        debug_assert_eq!(self.n, rhs.n);
        self.bits ^= rhs.bits;
    }
}

impl fmt::Display for GF2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.dim() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for GF2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF2Vector({self})")
    }
}

impl FromStr for GF2Vector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.len() > MAX_DIM {
            return Err(Error::DimensionTooLarge {
                n: s.len(),
                max: MAX_DIM,
            });
        }
        let mut bits = 0u32;
        for c in s.chars() {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                _ => return Err(Error::InvalidBitString(s.to_string())),
            }
        }
        Self::from_bits(s.len(), bits)
    }
}

/// Column index of the leading one of a packed row of width `n`.
fn leading_column(row: u64, n: usize) -> usize {
    debug_assert!(row != 0);
    n - 1 - (63 - row.leading_zeros() as usize)
}

/// In-place Gauss-Jordan elimination on packed rows of width `n` (at most
/// 64). On return the first `rank` rows hold the RREF with pivot columns
/// strictly increasing; the remaining rows are zero and truncated.
fn rref_words(rows: &mut Vec<u64>, n: usize) -> usize {
    let mut rank = 0;
    for col in 0..n {
        let mask = 1u64 << (n - 1 - col);
        let Some(found) = (rank..rows.len()).find(|&r| rows[r] & mask != 0) else {
            continue;
        };
        rows.swap(rank, found);
        let pivot = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row & mask != 0 {
                *row ^= pivot;
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);
    rank
}

/// Row-reduces `rows` and returns the RREF basis of their span together with
/// its rank. An empty input has rank zero.
pub fn rref(rows: &[GF2Vector]) -> Result<(Vec<GF2Vector>, usize)> {
    let Some(first) = rows.first() else {
        return Ok((Vec::new(), 0));
    };
    let n = first.dim();
    for row in rows {
        first.check_same_dim(row)?;
    }
    let mut words: Vec<u64> = rows.iter().map(|r| r.bits as u64).collect();
    let rank = rref_words(&mut words, n);
    let basis = words
        .into_iter()
        .map(|w| GF2Vector {
            n: n as u8,
            bits: w as u32,
        })
        .collect();
    Ok((basis, rank))
}

/// Incremental echelon basis indexed by leading bit, used for fast rank
/// computations in the all-pairs sweeps.
#[derive(Clone, Copy)]
struct XorBasis {
    slots: [u32; 32],
    rank: usize,
}

impl XorBasis {
    fn new() -> Self {
        Self {
            slots: [0; 32],
            rank: 0,
        }
    }

    fn insert(&mut self, mut x: u32) -> bool {
        while x != 0 {
            let top = 31 - x.leading_zeros() as usize;
            if self.slots[top] == 0 {
                self.slots[top] = x;
                self.rank += 1;
                return true;
            }
            x ^= self.slots[top];
        }
        false
    }
}

/// A subspace of `F_2^n` held as its canonical RREF basis.
///
/// Ordering is lexicographic on the basis rows read as bit strings, row by
/// row, which is the canonical Grassmannian order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    n: u8,
    rows: Vec<u32>,
}

impl Subspace {
    /// The span of `vectors` inside `F_2^n`.
    pub fn from_vectors(n: usize, vectors: &[GF2Vector]) -> Result<Self> {
        if n > MAX_DIM {
            return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
        }
        for v in vectors {
            if v.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.dim(),
                });
            }
        }
        let mut words: Vec<u64> = vectors.iter().map(|v| v.bits as u64).collect();
        rref_words(&mut words, n);
        Ok(Self::from_rref_words(n, &words))
    }

    fn from_rref_words(n: usize, words: &[u64]) -> Self {
        Self {
            n: n as u8,
            rows: words.iter().map(|&w| w as u32).collect(),
        }
    }

    /// Parses basis rows written as bit strings. The rows need not be
    /// reduced or independent.
    pub fn from_strings<S: AsRef<str>>(n: usize, rows: &[S]) -> Result<Self> {
        let vectors = rows
            .iter()
            .map(|r| r.as_ref().parse::<GF2Vector>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(n, &vectors)
    }

    /// The zero subspace `{0}`.
    pub fn zero(n: usize) -> Result<Self> {
        Self::from_vectors(n, &[])
    }

    /// The whole space `F_2^n`.
    pub fn full(n: usize) -> Result<Self> {
        let units = (0..n)
            .map(|i| GF2Vector::unit(n, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_vectors(n, &units)
    }

    /// Ambient dimension `n`.
    pub fn ambient_dim(&self) -> usize {
        self.n as usize
    }

    /// Subspace dimension `k`.
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> Vec<GF2Vector> {
        self.rows
            .iter()
            .map(|&bits| GF2Vector { n: self.n, bits })
            .collect()
    }

    /// Packed RREF rows.
    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    /// Pivot columns, strictly increasing.
    pub fn pivots(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|&r| leading_column(r as u64, self.ambient_dim()))
            .collect()
    }

    fn check_vector(&self, x: &GF2Vector) -> Result<()> {
        if x.dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: x.dim(),
            });
        }
        Ok(())
    }

    fn check_subspace(&self, other: &Subspace) -> Result<()> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            });
        }
        Ok(())
    }

    fn reduce_bits(&self, mut bits: u32) -> u32 {
        let n = self.ambient_dim();
        for &row in &self.rows {
            let pivot = 1u32 << (63 - (row as u64).leading_zeros() as usize);
            debug_assert!(leading_column(row as u64, n) < n);
            if bits & pivot != 0 {
                bits ^= row;
            }
        }
        bits
    }

    /// Canonical representative of the coset `x + W`.
    pub fn coset_rep(&self, x: &GF2Vector) -> Result<GF2Vector> {
        self.check_vector(x)?;
        Ok(GF2Vector {
            n: self.n,
            bits: self.reduce_bits(x.bits),
        })
    }

    pub fn contains(&self, x: &GF2Vector) -> Result<bool> {
        self.check_vector(x)?;
        Ok(self.reduce_bits(x.bits) == 0)
    }

    /// The dual space `W^perp = { y : x . y = 0 for all x in W }`.
    pub fn dual(&self) -> Subspace {
        let n = self.ambient_dim();
        let pivots = self.pivots();
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        // One kernel vector per free column j: e_j plus, for every row i,
        // row_i[j] placed in pivot column p_i.
        let mut kernel = Vec::with_capacity(n - self.dim());
        for j in (0..n).filter(|&j| !is_pivot[j]) {
            let mut bits = 1u64 << (n - 1 - j);
            for (row, &p) in self.rows.iter().zip(&pivots) {
                if (row >> (n - 1 - j)) & 1 == 1 {
                    bits |= 1 << (n - 1 - p);
                }
            }
            kernel.push(bits);
        }
        rref_words(&mut kernel, n);
        Self::from_rref_words(n, &kernel)
    }

    /// `dim(V + W)`.
    pub fn sum_dim(&self, other: &Subspace) -> Result<usize> {
        self.check_subspace(other)?;
        let mut basis = XorBasis::new();
        for &r in self.rows.iter().chain(&other.rows) {
            basis.insert(r);
        }
        Ok(basis.rank)
    }

    /// `dim(V ∩ W) = dim V + dim W - dim(V + W)`.
    pub fn intersect_dim(&self, other: &Subspace) -> Result<usize> {
        Ok(self.dim() + other.dim() - self.sum_dim(other)?)
    }

    /// `V + W`.
    pub fn sum(&self, other: &Subspace) -> Result<Subspace> {
        self.check_subspace(other)?;
        let mut words: Vec<u64> = self
            .rows
            .iter()
            .chain(&other.rows)
            .map(|&r| r as u64)
            .collect();
        let n = self.ambient_dim();
        rref_words(&mut words, n);
        Ok(Self::from_rref_words(n, &words))
    }

    /// Basis of `V ∩ W` by the Zassenhaus construction: reduce the rows
    /// `[v | v]` and `[w | 0]` of width `2n`; the rows whose left half
    /// vanishes carry a basis of the intersection in their right half.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        self.check_subspace(other)?;
        let n = self.ambient_dim();
        let mut words: Vec<u64> = self
            .rows
            .iter()
            .map(|&v| ((v as u64) << n) | v as u64)
            .chain(other.rows.iter().map(|&w| (w as u64) << n))
            .collect();
        rref_words(&mut words, 2 * n);
        let low_mask = (1u64 << n) - 1;
        let mut meet: Vec<u64> = words
            .into_iter()
            .filter(|w| w >> n == 0)
            .map(|w| w & low_mask)
            .collect();
        rref_words(&mut meet, n);
        Ok(Self::from_rref_words(n, &meet))
    }

    /// All `2^k` elements, in the order of the binary counter over basis
    /// coefficients.
    pub fn elements(&self) -> Vec<GF2Vector> {
        let k = self.dim();
        let mut out = Vec::with_capacity(1 << k);
        for mask in 0u32..(1u32 << k) {
            let mut bits = 0;
            for (i, &row) in self.rows.iter().enumerate() {
                if (mask >> i) & 1 == 1 {
                    bits ^= row;
                }
            }
            out.push(GF2Vector { n: self.n, bits });
        }
        out
    }

    /// The canonical coset representatives `CS(W)`: every vector with zeros
    /// in all pivot columns, in increasing order. There are `2^(n-k)`.
    pub fn coset_reps(&self) -> Vec<GF2Vector> {
        let n = self.ambient_dim();
        let pivot_mask: u32 = self.pivots().iter().map(|&p| 1u32 << (n - 1 - p)).sum();
        let free: Vec<u32> = (0..n)
            .rev()
            .map(|b| 1u32 << b)
            .filter(|bit| pivot_mask & bit == 0)
            .collect();
        let count = 1u32 << free.len();
        let mut out = Vec::with_capacity(count as usize);
        for mask in 0..count {
            // free[] runs from the most significant free bit down, so spread
            // the counter from its top bit to keep the output sorted.
            let mut bits = 0;
            for (j, &bit) in free.iter().enumerate() {
                if (mask >> (free.len() - 1 - j)) & 1 == 1 {
                    bits |= bit;
                }
            }
            out.push(GF2Vector { n: self.n, bits });
        }
        out
    }

    /// Position of the canonical representative of `x + W` within
    /// [`Subspace::coset_reps`].
    pub fn coset_index(&self, x: &GF2Vector) -> Result<usize> {
        let rep = self.coset_rep(x)?;
        let n = self.ambient_dim();
        let pivot_mask: u32 = self.pivots().iter().map(|&p| 1u32 << (n - 1 - p)).sum();
        let mut idx = 0usize;
        for b in (0..n).rev() {
            let bit = 1u32 << b;
            if pivot_mask & bit == 0 {
                idx = (idx << 1) | ((rep.bits & bit != 0) as usize);
            }
        }
        Ok(idx)
    }

    /// Basis rows as `0`/`1` strings, most significant coordinate first.
    pub fn row_strings(&self) -> Vec<String> {
        self.basis().iter().map(|v| v.to_string()).collect()
    }

    /// One line per basis row.
    pub fn to_text(&self) -> String {
        self.row_strings()
            .iter()
            .map(|r| format!("{r}\n"))
            .collect()
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{{}}}", self.row_strings().join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    n: usize,
    k: usize,
    basis: Vec<String>,
}

impl Serialize for Subspace {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            n: self.ambient_dim(),
            k: self.dim(),
            basis: self.row_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SubspaceJson::deserialize(d)?;
        let sub = Subspace::from_strings(raw.n, &raw.basis).map_err(D::Error::custom)?;
        if sub.dim() != raw.k || raw.basis.len() != raw.k {
            return Err(D::Error::custom(format!(
                "basis has rank {} but k = {}",
                sub.dim(),
                raw.k
            )));
        }
        Ok(sub)
    }
}

/// A coset `rep + W` with `rep` the canonical representative.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CosetLabel {
    subspace: Subspace,
    rep: GF2Vector,
}

impl CosetLabel {
    /// The coset of `subspace` containing `x`.
    pub fn new(subspace: Subspace, x: &GF2Vector) -> Result<Self> {
        let rep = subspace.coset_rep(x)?;
        Ok(Self { subspace, rep })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn rep(&self) -> GF2Vector {
        self.rep
    }
}

/// Gaussian binomial coefficient `binom(n, k)_2`, the number of
/// `k`-dimensional subspaces of `F_2^n`. Zero when `k > n`.
pub fn gaussian_binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let one = BigUint::one();
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= (BigUint::one() << (n - i)) - &one;
        den *= (BigUint::one() << (k - i)) - &one;
    }
    num / den
}

/// Number of `V` in `Gr_2(n, k)` meeting a fixed `W` in dimension `m`:
/// `2^((k-m)^2) * binom(n-k, k-m)_2 * binom(k, m)_2`. Zero outside
/// `m <= k <= n`.
pub fn intersection_count(n: usize, k: usize, m: usize) -> BigUint {
    if m > k || k > n {
        return BigUint::zero();
    }
    let d = k - m;
    (BigUint::one() << (d * d)) * gaussian_binomial(n - k, d) * gaussian_binomial(k, m)
}

/// The Grassmannian `Gr_2(n, k)` in canonical order, with a reverse index.
#[derive(Clone, Debug)]
pub struct Grassmannian {
    n: usize,
    k: usize,
    subspaces: Vec<Subspace>,
    index: HashMap<Subspace, usize>,
}

impl Grassmannian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Subspace> {
        self.subspaces.get(i)
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn index_of(&self, w: &Subspace) -> Option<usize> {
        self.index.get(w).copied()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Subspace> {
        self.subspaces.iter()
    }
}

impl std::ops::Index<usize> for Grassmannian {
    type Output = Subspace;

    fn index(&self, i: usize) -> &Subspace {
        &self.subspaces[i]
    }
}

/// Checks `n`, `k` and the size cap without building anything. Returns the
/// Grassmannian size.
pub fn check_grassmannian_size(n: usize, k: usize, cap: u64) -> Result<usize> {
    if n > MAX_DIM {
        return Err(Error::DimensionTooLarge { n, max: MAX_DIM });
    }
    if k > n {
        return Err(Error::InvalidParameters(format!("k = {k} exceeds n = {n}")));
    }
    let required = gaussian_binomial(n, k);
    match required.to_u64() {
        Some(c) if c <= cap => Ok(c as usize),
        _ => Err(Error::CapExceeded { required, cap }),
    }
}

/// Lists every `k`-dimensional subspace of `F_2^n` exactly once, sorted
/// lexicographically by RREF rows.
pub fn enumerate_grassmannian(n: usize, k: usize, cap: u64) -> Result<Grassmannian> {
    let count = check_grassmannian_size(n, k, cap)?;
    let mut subspaces = Vec::with_capacity(count);
    for pivot_mask in 0u32..(1u32 << n) {
        if pivot_mask.count_ones() as usize != k {
            continue;
        }
        // Pivot columns in increasing order, and for each row the free
        // positions to its right.
        let pivots: Vec<usize> = (0..n)
            .filter(|&c| pivot_mask & (1 << (n - 1 - c)) != 0)
            .collect();
        let free: Vec<Vec<u32>> = pivots
            .iter()
            .map(|&p| {
                (p + 1..n)
                    .filter(|&c| pivot_mask & (1 << (n - 1 - c)) == 0)
                    .map(|c| 1u32 << (n - 1 - c))
                    .collect()
            })
            .collect();
        let total_free: usize = free.iter().map(Vec::len).sum();
        for assignment in 0u64..(1u64 << total_free) {
            let mut shift = 0;
            let rows = pivots
                .iter()
                .zip(&free)
                .map(|(&p, cols)| {
                    let mut row = 1u32 << (n - 1 - p);
                    for (j, &bit) in cols.iter().enumerate() {
                        if (assignment >> (shift + j)) & 1 == 1 {
                            row |= bit;
                        }
                    }
                    shift += cols.len();
                    row
                })
                .collect();
            subspaces.push(Subspace { n: n as u8, rows });
        }
    }
    subspaces.sort_unstable();
    debug_assert_eq!(subspaces.len(), count);
    let index = subspaces
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    Ok(Grassmannian {
        n,
        k,
        subspaces,
        index,
    })
}
