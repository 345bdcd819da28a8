//! Dense states and operators on `n <= 10` qubits.
//!
//! Computational basis label `|u>` sits at index `u.index()`, i.e. the bit
//! string of `u` read as a binary number with coordinate 0 most
//! significant. Coset states have real amplitudes `±2^(-k/2)`.

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{GF2Vector, Subspace};

pub type C64 = Complex<f64>;
pub type Matrix = DMatrix<C64>;

/// Largest qubit count handled by the dense layer.
pub const MAX_QUBITS: usize = 10;

/// Numerical tolerances shared by every check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Operator norms and spectral inequalities.
    pub spectral: f64,
    /// Amplitudes, inner products, entrywise operator identities.
    pub amplitude: f64,
    /// Normalization and Hermiticity of constructed objects.
    pub construction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectral: 1e-9,
            amplitude: 1e-10,
            construction: 1e-12,
        }
    }
}

/// Iteration cap handed to the Hermitian eigensolver.
const EIGEN_MAX_ITER: usize = 100_000;

fn check_qubits(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::DimensionTooLarge { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// A pure state on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes; the length must be `2^n`.
    pub fn from_amplitudes(n: usize, amps: DVector<C64>) -> Result<Self> {
        check_qubits(n)?;
        if amps.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    /// `|u>` for a computational basis label.
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        check_qubits(n)?;
        let mut amps = DVector::zeros(1 << n);
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    /// `|self><self|`.
    pub fn projector(&self) -> Matrix {
        &self.amps * self.amps.adjoint()
    }

    /// Equality up to a global phase: `|<a|b>| = 1` within `tol`, for
    /// normalized states.
    pub fn equal_up_to_phase(&self, other: &StateVector, tol: f64) -> bool {
        self.dim() == other.dim() && (self.inner(other).norm() - 1.0).abs() <= tol
    }
}

/// A Hermitian matrix, checked at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    mat: Matrix,
}

impl HermitianOperator {
    pub fn new(mat: Matrix, tol: f64) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidParameters(format!(
                "operator is {}x{}, not square",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let dev = hermitian_deviation(&mat);
        if dev > tol {
            return Err(Error::InvariantViolation(format!(
                "operator deviates from Hermitian by {dev:e}"
            )));
        }
        Ok(Self { mat })
    }

    /// Hermitian part `(A + A^†)/2`, for matrices already Hermitian up to
    /// rounding.
    pub fn symmetrized(mat: &Matrix) -> Self {
        Self {
            mat: (mat + mat.adjoint()).scale(0.5),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: Matrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    /// `P^2 = P` entrywise within `tol`.
    pub fn is_projector(&self, tol: f64) -> bool {
        max_abs_diff(&(&self.mat * &self.mat), &self.mat) <= tol
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = eigen(&self.mat)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

/// Largest entrywise deviation of `A` from `A^†`.
pub fn hermitian_deviation(mat: &Matrix) -> f64 {
    max_abs_diff(mat, &mat.adjoint())
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Hermitian eigendecomposition.
///
/// The solver is run on `A + 2‖A‖_F Id`, whose spectrum lies in
/// `[‖A‖_F, 3‖A‖_F]`, and the shift is removed afterwards. Without it,
/// matrices with many (near-)zero eigenvalues drive off-diagonal entries
/// into subnormals and the solver returns NaN.
fn eigen(mat: &Matrix) -> Result<SymmetricEigen<C64, nalgebra::Dyn>> {
    let dim = mat.nrows();
    let shift = 2.0 * mat.norm();
    let shifted = mat + Matrix::identity(dim, dim).scale(shift);
    let mut eig = SymmetricEigen::try_new(shifted, f64::EPSILON, EIGEN_MAX_ITER).ok_or(Error::NoConvergence {
        iterations: EIGEN_MAX_ITER,
    })?;
    eig.eigenvalues.iter_mut().for_each(|l| *l -= shift);
    if eig.eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(Error::NoConvergence {
            iterations: EIGEN_MAX_ITER,
        });
    }
    Ok(eig)
}

/// `|W> = 2^(-k/2) sum_{u in W} |u>`.
pub fn subspace_state(w: &Subspace) -> Result<StateVector> {
    let zero = GF2Vector::zero(w.ambient_dim())?;
    coset_state(w, &zero, &zero)
}

/// `|W_{x,z}> = X^x Z^z |W>`: amplitude `2^(-k/2) (-1)^(z.u)` on `|x+u>`
/// for `u in W`.
pub fn coset_state(w: &Subspace, x: &GF2Vector, z: &GF2Vector) -> Result<StateVector> {
    let n = w.ambient_dim();
    check_qubits(n)?;
    for v in [x, z] {
        if v.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.dim(),
            });
        }
    }
    let scale = (0.5f64).powf(w.dim() as f64 / 2.0);
    let mut amps = DVector::zeros(1 << n);
    for u in w.elements() {
        let sign = if z.dot(&u) { -scale } else { scale };
        amps[(*x + u).index()] = C64::new(sign, 0.0);
    }
    Ok(StateVector { n, amps })
}

/// Closed form of `|<V_{x,z}|W_{x',z'}>|`: `2^(dim(V∩W) - k)` when
/// `x - x' ∈ V + W` and `z - z' ∈ V^⊥ + W^⊥`, else zero.
pub fn inner_product_formula(
    v: &Subspace,
    w: &Subspace,
    x: &GF2Vector,
    z: &GF2Vector,
    x2: &GF2Vector,
    z2: &GF2Vector,
) -> Result<f64> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let primal = v.sum(w)?;
    let dual = v.dual().sum(&w.dual())?;
    if primal.contains(&(*x + *x2))? && dual.contains(&(*z + *z2))? {
        let exp = v.intersect_dim(w)? as i32 - v.dim() as i32;
        Ok(2f64.powi(exp))
    } else {
        Ok(0.0)
    }
}

/// Applies `H^{⊗n}` with a fast Walsh-Hadamard transform.
pub fn hadamard_dual(s: &StateVector) -> StateVector {
    let mut amps = s.amps.clone();
    let dim = amps.len();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut half = 1;
    while half < dim {
        for block in (0..dim).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (amps[i], amps[i + half]);
                amps[i] = (a + b) * r;
                amps[i + half] = (a - b) * r;
            }
        }
        half *= 2;
    }
    StateVector { n: s.n, amps }
}

/// `H^{⊗n}` as a matrix.
pub fn hadamard_matrix(n: usize) -> Result<Matrix> {
    check_qubits(n)?;
    let dim = 1usize << n;
    let scale = (0.5f64).powf(n as f64 / 2.0);
    Ok(Matrix::from_fn(dim, dim, |i, j| {
        let sign = if (i & j).count_ones() % 2 == 1 { -scale } else { scale };
        C64::new(sign, 0.0)
    }))
}

fn sum_of_projectors(dim: usize, states: impl Iterator<Item = Result<StateVector>>) -> Result<HermitianOperator> {
    let mut acc = Matrix::zeros(dim, dim);
    for s in states {
        acc += s?.projector();
    }
    Ok(HermitianOperator { mat: acc })
}

/// `Σ_{z' ∈ CS(W^⊥)} |W_{x',z'}><W_{x',z'}|`.
pub fn coset_projector_sum_b(w: &Subspace, x: &GF2Vector) -> Result<HermitianOperator> {
    check_qubits(w.ambient_dim())?;
    let dual = w.dual();
    sum_of_projectors(
        1 << w.ambient_dim(),
        dual.coset_reps().into_iter().map(|z| coset_state(w, x, &z)),
    )
}

/// `Σ_{x ∈ CS(V)} |V_{x,z}><V_{x,z}|`.
pub fn coset_projector_sum_c(v: &Subspace, z: &GF2Vector) -> Result<HermitianOperator> {
    check_qubits(v.ambient_dim())?;
    sum_of_projectors(
        1 << v.ambient_dim(),
        v.coset_reps().into_iter().map(|x| coset_state(v, &x, z)),
    )
}

/// Diagonal projector onto the computational labels in `x + W`.
pub fn coset_indicator(w: &Subspace, x: &GF2Vector) -> Result<HermitianOperator> {
    let n = w.ambient_dim();
    check_qubits(n)?;
    let dim = 1 << n;
    let mut mat = Matrix::zeros(dim, dim);
    for u in w.elements() {
        let i = (*x + u).index();
        mat[(i, i)] = C64::new(1.0, 0.0);
    }
    Ok(HermitianOperator { mat })
}

/// Largest absolute eigenvalue.
pub fn operator_norm(h: &HermitianOperator) -> Result<f64> {
    if h.dim() == 0 {
        return Ok(0.0);
    }
    let eig = eigen(&h.mat)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max))
}

/// Largest eigenvalue together with a unit eigenvector.
pub fn top_eigenpair(h: &HermitianOperator) -> Result<(f64, DVector<C64>)> {
    let eig = eigen(&h.mat)?;
    let (i, &val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::InvalidParameters("empty operator".into()))?;
    Ok((val, eig.eigenvectors.column(i).into_owned()))
}

/// Spectral norm of an arbitrary matrix, `sqrt(‖A A^†‖)`.
pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    let gram = HermitianOperator::symmetrized(&(a * a.adjoint()));
    Ok(operator_norm(&gram)?.max(0.0).sqrt())
}

/// Principal square root of a positive semidefinite operator; negative
/// eigenvalues from rounding are clipped to zero.
pub fn psd_sqrt(h: &HermitianOperator) -> Result<Matrix> {
    let eig = eigen(&h.mat)?;
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    );
    let v = &eig.eigenvectors;
    Ok(v * Matrix::from_diagonal(&roots) * v.adjoint())
}

/// Outcome of checking `‖Σ P_i‖ <= Σ_j max_i ‖√P_i √P_{π_j(i)}‖`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub passed: bool,
}

/// Whether `perms` are bijections on `0..len` that pairwise disagree at
/// every point.
pub fn mutually_orthogonal(perms: &[Vec<usize>], len: usize) -> bool {
    for p in perms {
        let mut seen = vec![false; len];
        if p.len() != len || p.iter().any(|&v| v >= len || std::mem::replace(&mut seen[v], true)) {
            return false;
        }
    }
    (0..len).all(|i| {
        let mut seen = vec![false; len];
        perms.iter().all(|p| !std::mem::replace(&mut seen[p[i]], true))
    })
}

/// Numerically checks the norm-of-sum inequality for PSD `ops` and the
/// given mutually orthogonal permutations of their indices. Projector
/// inputs may pass `projectors = true` to skip the square roots.
pub fn verify_lemma1(
    ops: &[HermitianOperator],
    perms: &[Vec<usize>],
    projectors: bool,
    tol: &Tolerances,
) -> Result<Lemma1Report> {
    let len = ops.len();
    if !mutually_orthogonal(perms, len) {
        return Err(Error::InvalidParameters(
            "index maps are not mutually orthogonal bijections".into(),
        ));
    }
    let Some(first) = ops.first() else {
        return Ok(Lemma1Report {
            lhs: 0.0,
            rhs: 0.0,
            slack: 0.0,
            passed: true,
        });
    };
    let dim = first.dim();
    if let Some(bad) = ops.iter().find(|o| o.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    let roots: Vec<Matrix> = if projectors {
        ops.iter().map(|o| o.mat.clone()).collect()
    } else {
        ops.iter().map(psd_sqrt).collect::<Result<_>>()?
    };
    let mut total = Matrix::zeros(dim, dim);
    for o in ops {
        total += &o.mat;
    }
    let lhs = operator_norm(&HermitianOperator::symmetrized(&total))?;
    let mut rhs = 0.0;
    for p in perms {
        let mut worst: f64 = 0.0;
        for (i, &j) in p.iter().enumerate() {
            worst = worst.max(spectral_norm(&(&roots[i] * &roots[j]))?);
        }
        rhs += worst;
    }
    Ok(Lemma1Report {
        lhs,
        rhs,
        slack: rhs - lhs,
        passed: lhs <= rhs + tol.spectral,
    })
}

/// `‖C(V, z) B(W, x')‖` against its bound `sqrt(2^(dim(V∩W) - k))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub lhs: f64,
    pub bound: f64,
    pub passed: bool,
}

pub fn verify_lemma2(
    v: &Subspace,
    w: &Subspace,
    z: &GF2Vector,
    x: &GF2Vector,
    tol: &Tolerances,
) -> Result<Lemma2Report> {
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    let c = coset_projector_sum_c(v, z)?;
    let b = coset_projector_sum_b(w, x)?;
    let lhs = spectral_norm(&(c.matrix() * b.matrix()))?;
    let exp = v.intersect_dim(w)? as f64 - v.dim() as f64;
    let bound = 2f64.powf(exp).sqrt();
    Ok(Lemma2Report {
        lhs,
        bound,
        passed: lhs <= bound + tol.spectral,
    })
}

/// Debug dump of a state or operator: real and imaginary parts, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDump {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl OperatorDump {
    pub fn from_matrix(m: &Matrix) -> Self {
        let (rows, cols) = m.shape();
        let mut re = Vec::with_capacity(rows * cols);
        let mut im = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                re.push(m[(i, j)].re);
                im.push(m[(i, j)].im);
            }
        }
        Self { rows, cols, re, im }
    }

    pub fn from_state(s: &StateVector) -> Self {
        Self {
            rows: s.dim(),
            cols: 1,
            re: s.amps.iter().map(|a| a.re).collect(),
            im: s.amps.iter().map(|a| a.im).collect(),
        }
    }
}
