//! Named verification suite behind `coset verify`.
//!
//! Every check is deterministic: random inputs come from seeds derived from
//! the run seed, parallel work is collected in index order, and reductions
//! run sequentially. The report is therefore byte-identical across runs and
//! thread counts.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    dualize, norm_sum_bound_check, p_win, p_win_extended, random_strategy, ratio_check,
    theorem1_bound_by_intersection, theorem1_bound_exact, unentangled_value,
    unentangled_value_exact, unentangled_value_oracle, winning_rate_envelope,
    deterministic_value_on, DeterministicStrategy, RandomStrategyShape, Strategy,
};
use crate::gf2::{enumerate_grassmannian, gaussian_binomial, intersection_count, Grassmannian, Subspace};
use crate::perms::{full_family_from_table, verify_family_on, IntersectionTable};
use crate::qstate::{
    coset_indicator, coset_projector_sum_b, coset_projector_sum_c, coset_state, hadamard_dual,
    inner_product_formula, max_abs_diff, spectral_norm, subspace_state, verify_lemma1,
    HermitianOperator, Matrix, StateVector, Tolerances,
};
use crate::surd::ratio_to_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Fast,
    Full,
}

impl Level {
    /// Largest `n` for exact combinatorial checks.
    pub fn combinatorics_max(self) -> usize {
        match self {
            Level::Fast => 4,
            Level::Full => 6,
        }
    }

    /// Largest `n` for dense single-register checks.
    pub fn spectral_max(self) -> usize {
        match self {
            Level::Fast => 4,
            Level::Full => 5,
        }
    }

    /// Largest `n` for checks on referee ⊗ Bob ⊗ Charlie operators.
    pub fn tripartite_max(self) -> usize {
        3
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Fast => "fast",
            Level::Full => "full",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Level::Fast),
            "full" => Ok(Level::Full),
            other => Err(Error::InvalidParameters(format!("unknown level {other:?}"))),
        }
    }
}

/// Deliberate defects used to confirm that the suite notices them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Faults {
    /// Flip the sign of the amplitude on the last element of `W` in every
    /// coset state fed to the inner-product check.
    pub inner_product_sign: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub instances: u64,
    /// Worst margin to failure; `null` for exact checks.
    pub slack: Option<f64>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub level: Level,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Running minimum of `margin` values, where a check passes while every
/// margin stays at or above `-tol`.
struct Slack {
    min: f64,
    count: u64,
    first_failure: Option<String>,
}

impl Slack {
    fn new() -> Self {
        Self {
            min: f64::INFINITY,
            count: 0,
            first_failure: None,
        }
    }

    fn add(&mut self, margin: f64, tol: f64, what: impl FnOnce() -> String) {
        self.count += 1;
        if margin < self.min {
            self.min = margin;
        }
        if (margin < -tol || margin.is_nan()) && self.first_failure.is_none() {
            self.first_failure = Some(what());
        }
    }

    fn report(self, name: &str, extra: Option<String>) -> CheckReport {
        let passed = self.first_failure.is_none();
        CheckReport {
            name: name.into(),
            passed,
            instances: self.count,
            slack: Some(if self.count == 0 { 0.0 } else { self.min }),
            detail: self.first_failure.or(extra),
        }
    }
}

fn exact(name: &str, instances: u64, failure: Option<String>) -> CheckReport {
    CheckReport {
        name: name.into(),
        passed: failure.is_none(),
        instances,
        slack: None,
        detail: failure,
    }
}

fn grassmannians(max_n: usize) -> Result<Vec<Grassmannian>> {
    let mut out = Vec::new();
    for n in 0..=max_n {
        for k in 0..=n {
            out.push(enumerate_grassmannian(n, k, u64::MAX)?);
        }
    }
    Ok(out)
}

/// Enumeration size and the intersection histogram of every subspace.
fn check_counts(grass: &[Grassmannian]) -> CheckReport {
    let mut instances = 0;
    for g in grass {
        let (n, k) = (g.n(), g.k());
        instances += 1;
        if gaussian_binomial(n, k) != g.len().into() {
            return exact("grassmannian_counts", instances, Some(format!("|Gr({n},{k})| = {}", g.len())));
        }
        let expected: Vec<usize> = (0..=k)
            .map(|m| intersection_count(n, k, m).try_into().unwrap_or(usize::MAX))
            .collect();
        let table = IntersectionTable::new(g);
        if let Some(v) = (0..g.len()).find(|&v| table.histogram(v, k) != expected) {
            return exact(
                "grassmannian_counts",
                instances,
                Some(format!("({n},{k}) subspace {v}: histogram {:?}", table.histogram(v, k))),
            );
        }
    }
    exact("grassmannian_counts", instances, None)
}

fn check_families(grass: &[Grassmannian]) -> Result<CheckReport> {
    let mut instances = 0;
    for g in grass {
        instances += 1;
        let table = IntersectionTable::new(g);
        let fam = full_family_from_table(g, &table)?;
        let report = verify_family_on(&fam, g);
        let failure = if !report.passed {
            Some(format!("({},{}): {:?}", g.n(), g.k(), report.counterexample))
        } else if fam.len() != g.len() || !report.covers {
            Some(format!("({},{}): {} members for {} subspaces", g.n(), g.k(), fam.len(), g.len()))
        } else {
            None
        };
        if failure.is_some() {
            return Ok(exact("permutation_families", instances, failure));
        }
    }
    Ok(exact("permutation_families", instances, None))
}

fn faulty_coset_state(w: &Subspace, x: &crate::gf2::GF2Vector, z: &crate::gf2::GF2Vector) -> Result<StateVector> {
    let s = coset_state(w, x, z)?;
    let Some(last) = w.basis().last().copied() else {
        return Ok(s);
    };
    let mut amps = s.amplitudes().clone();
    let i = (*x + last).index();
    amps[i] = -amps[i];
    StateVector::from_amplitudes(w.ambient_dim(), amps)
}

/// All coset states of one Grassmannian, in `(W, x, z)` canonical order.
fn coset_states(g: &Grassmannian, faults: Faults) -> Result<Vec<(usize, usize, usize, StateVector)>> {
    let mut out = Vec::new();
    for (wi, w) in g.iter().enumerate() {
        let dual = w.dual();
        for (xi, x) in w.coset_reps().iter().enumerate() {
            for (zi, z) in dual.coset_reps().iter().enumerate() {
                let s = if faults.inner_product_sign {
                    faulty_coset_state(w, x, z)?
                } else {
                    coset_state(w, x, z)?
                };
                out.push((wi, xi, zi, s));
            }
        }
    }
    Ok(out)
}

fn check_inner_products(grass: &[Grassmannian], tol: &Tolerances, faults: Faults) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for g in grass {
        let states = coset_states(g, faults)?;
        let subs = g.subspaces();
        let reps: Vec<(Vec<_>, Vec<_>)> = subs.iter().map(|w| (w.coset_reps(), w.dual().coset_reps())).collect();
        let rows: Vec<(f64, Option<String>)> = states
            .par_iter()
            .map(|(vi, xi, zi, a)| -> Result<(f64, Option<String>)> {
                let mut worst = f64::INFINITY;
                let mut fail = None;
                let (x, z) = (reps[*vi].0[*xi], reps[*vi].1[*zi]);
                for (wi, xj, zj, b) in &states {
                    let (x2, z2) = (reps[*wi].0[*xj], reps[*wi].1[*zj]);
                    let formula = inner_product_formula(&subs[*vi], &subs[*wi], &x, &z, &x2, &z2)?;
                    let margin = tol.amplitude - (a.inner(b).norm() - formula).abs();
                    if margin < worst {
                        worst = margin;
                    }
                    if margin < 0.0 && fail.is_none() {
                        fail = Some(format!(
                            "n={} V={} x={x} z={z} W={} x'={x2} z'={z2}",
                            g.n(),
                            subs[*vi].to_text(),
                            subs[*wi].to_text()
                        ));
                    }
                }
                Ok((worst, fail))
            })
            .collect::<Result<_>>()?;
        for (margin, fail) in rows {
            slack.add(margin, 0.0, || fail.unwrap_or_default());
        }
    }
    Ok(slack.report("inner_product_formula", None))
}

fn check_coset_basis(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut completeness = Slack::new();
    for g in grass {
        let dim = 1usize << g.n();
        let margins: Vec<f64> = g
            .subspaces()
            .par_iter()
            .map(|w| -> Result<f64> {
                let mut sum = Matrix::zeros(dim, dim);
                for x in w.coset_reps() {
                    sum += coset_projector_sum_b(w, &x)?.matrix();
                }
                Ok(tol.amplitude - max_abs_diff(&sum, &Matrix::identity(dim, dim)))
            })
            .collect::<Result<_>>()?;
        for (i, m) in margins.into_iter().enumerate() {
            completeness.add(m, 0.0, || format!("Gr({},{}) subspace {i}", g.n(), g.k()));
        }
    }
    Ok(completeness.report("coset_basis_completeness", None))
}

fn check_projector_identity(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for g in grass {
        for (i, w) in g.iter().enumerate() {
            for x in w.coset_reps() {
                let sum = coset_projector_sum_b(w, &x)?;
                let ind = coset_indicator(w, &x)?;
                let dev = max_abs_diff(sum.matrix(), ind.matrix());
                slack.add(tol.construction - dev, 0.0, || format!("Gr({},{}) subspace {i} x={x}", g.n(), g.k()));
            }
        }
    }
    Ok(slack.report("projector_sum_identity", None))
}

fn check_duality_states(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for g in grass {
        for (i, w) in g.iter().enumerate() {
            let dual = w.dual();
            for x in w.coset_reps() {
                for z in dual.coset_reps() {
                    let lhs = hadamard_dual(&coset_state(w, &x, &z)?);
                    let rhs = coset_state(&dual, &z, &x)?;
                    let overlap = lhs.inner(&rhs).norm();
                    slack.add(tol.amplitude - (1.0 - overlap).abs(), 0.0, || {
                        format!("Gr({},{}) subspace {i} x={x} z={z}", g.n(), g.k())
                    });
                }
            }
        }
    }
    Ok(slack.report("hadamard_duality", None))
}

/// `‖C(V,z) B(W,x')‖ <= sqrt(2^(dim(V∩W)-k))` with a tightness witness for
/// every `(n, k)`. Exhaustive up to `n = 4`; above that only `z = x' = 0`
/// is tried for each pair `(V, W)`.
fn check_product_norms(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    let mut missing_witness = Vec::new();
    for g in grass {
        let subs = g.subspaces();
        let c_ops: Vec<Vec<Matrix>> = subs
            .iter()
            .map(|v| {
                v.dual()
                    .coset_reps()
                    .iter()
                    .map(|z| coset_projector_sum_c(v, z).map(HermitianOperator::into_matrix))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let b_ops: Vec<Vec<Matrix>> = subs
            .iter()
            .map(|w| {
                w.coset_reps()
                    .iter()
                    .map(|x| coset_projector_sum_b(w, x).map(HermitianOperator::into_matrix))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let size = subs.len();
        let rows: Vec<Vec<(f64, f64)>> = (0..size * size)
            .into_par_iter()
            .map(|vw| -> Result<Vec<(f64, f64)>> {
                let (v, w) = (vw / size, vw % size);
                let bound = 2f64.powf(subs[v].intersect_dim(&subs[w])? as f64 - g.k() as f64).sqrt();
                let (cs, bs) = if g.n() <= 4 { (&c_ops[v][..], &b_ops[w][..]) } else { (&c_ops[v][..1], &b_ops[w][..1]) };
                let mut out = Vec::new();
                for c in cs {
                    for b in bs {
                        out.push((spectral_norm(&(c * b))?, bound));
                    }
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        let mut tight = false;
        for (vw, row) in rows.iter().enumerate() {
            for &(lhs, bound) in row {
                slack.add(bound - lhs, tol.spectral, || {
                    format!("Gr({},{}) V={} W={} norm {lhs} > {bound}", g.n(), g.k(), vw / size, vw % size)
                });
                tight |= (bound - lhs).abs() <= tol.spectral;
            }
        }
        if !tight {
            missing_witness.push(format!("({},{})", g.n(), g.k()));
        }
    }
    let mut report = slack.report("product_norm_sweep", None);
    if !missing_witness.is_empty() {
        report.passed = false;
        report.detail.get_or_insert(format!("no tight tuple for {}", missing_witness.join(" ")));
    }
    Ok(report)
}

/// The norm-of-sum inequality on the subspace-state projectors of each
/// Grassmannian, using the full orthogonal permutation family.
fn check_projector_sums(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for g in grass {
        let ops: Vec<HermitianOperator> = g
            .iter()
            .map(|w| subspace_state(w).map(|s| HermitianOperator::symmetrized(&s.projector())))
            .collect::<Result<_>>()?;
        let fam = full_family_from_table(g, &IntersectionTable::new(g))?;
        let perms: Vec<Vec<usize>> = fam.entries.into_iter().map(|e| e.perm).collect();
        let r = verify_lemma1(&ops, &perms, true, tol)?;
        slack.add(r.slack, tol.spectral, || format!("Gr({},{}) lhs {} rhs {}", g.n(), g.k(), r.lhs, r.rhs));
    }
    Ok(slack.report("projector_sum_norm", None))
}

fn check_unentangled(grass: &[Grassmannian], tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for g in grass {
        let exact = unentangled_value(g.n(), g.k())?;
        let oracle = unentangled_value_oracle(g.n(), g.k())?;
        slack.add(tol.spectral - (exact - oracle).abs(), 0.0, || {
            format!("({},{}) closed form {exact} oracle {oracle}", g.n(), g.k())
        });
    }
    Ok(slack.report("unentangled_oracle", None))
}

/// 200 seeded deterministic strategies per `(n, k)` never beat the
/// unentangled optimum. Ties with it are counted, not interpreted.
fn check_deterministic(grass: &[Grassmannian], seed: u64, tol: &Tolerances) -> Result<CheckReport> {
    const PER_GRASSMANNIAN: u64 = 200;
    let mut slack = Slack::new();
    let mut ties = 0u64;
    for (gi, g) in grass.iter().enumerate() {
        let optimum = unentangled_value(g.n(), g.k())?;
        let values: Vec<f64> = (0..PER_GRASSMANNIAN)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((gi as u64) << 32) ^ i);
                let ds = DeterministicStrategy::random(g.n(), g.len(), &mut rng)?;
                deterministic_value_on(&ds, g)
            })
            .collect::<Result<_>>()?;
        for (i, v) in values.into_iter().enumerate() {
            slack.add(optimum - v, tol.spectral, || format!("({},{}) strategy {i}: {v} > {optimum}", g.n(), g.k()));
            if (optimum - v).abs() <= tol.spectral {
                ties += 1;
            }
        }
    }
    Ok(slack.report("deterministic_strategies", Some(format!("{ties} ties with the optimum"))))
}

fn check_exact_values() -> Result<CheckReport> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let q = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let mut failure = None;
    if unentangled_value_exact(2, 1)? != q(2, 3) {
        failure = Some("unentangled (2,1) != 2/3".to_string());
    } else if unentangled_value_exact(4, 2)? != q(2, 5) {
        failure = Some("unentangled (4,2) != 2/5".to_string());
    }
    Ok(exact("unentangled_exact_values", 2, failure))
}

/// Bound symmetry under `k -> n-k`, agreement of the two summation orders,
/// and the bound dominating the unentangled value, all for `n <= 12`.
fn check_bound_consistency() -> Result<CheckReport> {
    let mut instances = 0;
    for n in 0..=12 {
        for k in 0..=n {
            instances += 1;
            let g = theorem1_bound_exact(n, k)?;
            if g != theorem1_bound_exact(n, n - k)? {
                return Ok(exact("bound_consistency", instances, Some(format!("g({n},{k}) != g({n},{})", n - k))));
            }
            if g != theorem1_bound_by_intersection(n, k)? {
                return Ok(exact("bound_consistency", instances, Some(format!("({n},{k}) summation orders differ"))));
            }
            let u = unentangled_value_exact(n, k)?;
            let u = crate::surd::QuadSurd::rational(u);
            if g < u {
                return Ok(exact(
                    "bound_consistency",
                    instances,
                    Some(format!("({n},{k}) bound {} below unentangled {}", g.to_f64(), ratio_to_f64(u.rational_part()))),
                ));
            }
        }
    }
    Ok(exact("bound_consistency", instances, None))
}

fn check_ratios() -> Result<CheckReport> {
    let mut instances = 0;
    for n in 0..=20 {
        for k in 0..=n / 2 {
            instances += 1;
            let r = ratio_check(n, k)?;
            if !r.passed {
                return Ok(exact("ratio_check", instances, Some(format!("({n},{k}) {r:?}"))));
            }
        }
    }
    Ok(exact("ratio_check", instances, None))
}

fn check_envelope() -> Result<CheckReport> {
    let mut slack = Slack::new();
    let target = 2f64.powf(-0.25);
    let got = winning_rate_envelope(0.5)?;
    slack.add(1e-12 - (got - target).abs(), 0.0, || format!("envelope(1/2) = {got}"));
    for (r, expected) in [(0.0, 1.0), (1.0, 1.0), (0.25, 2f64.powf(-0.125)), (0.75, 2f64.powf(-0.125))] {
        let got = winning_rate_envelope(r)?;
        slack.add(1e-12 - (got - expected).abs(), 0.0, || format!("envelope({r}) = {got}"));
    }
    Ok(slack.report("rate_envelope", None))
}

fn check_reference_strategies(max_n: usize, tol: &Tolerances) -> Result<CheckReport> {
    let mut slack = Slack::new();
    for n in 1..=max_n {
        for k in 0..=n {
            let cases = [
                ("discard", Strategy::discard_and_guess(n, k)?, 2f64.powi(-(n as i32))),
                ("bob", Strategy::bob_takes_all(n, k)?, 2f64.powi(-(k as i32))),
                ("charlie", Strategy::charlie_takes_all(n, k)?, 2f64.powi(-((n - k) as i32))),
            ];
            for (name, s, expected) in cases {
                let got = p_win(&s)?;
                slack.add(tol.spectral - (got - expected).abs(), 0.0, || {
                    format!("{name} ({n},{k}): {got} != {expected}")
                });
            }
        }
    }
    Ok(slack.report("reference_strategies", None))
}

fn seeded_strategies(nk: &[(usize, usize)], seed: u64, count: u64) -> Result<Vec<(usize, usize, u64, Strategy)>> {
    let jobs: Vec<(usize, usize, u64)> = nk
        .iter()
        .flat_map(|&(n, k)| (0..count).map(move |i| (n, k, seed.wrapping_add(i))))
        .collect();
    jobs.into_par_iter()
        .map(|(n, k, s)| Ok((n, k, s, random_strategy(n, k, s, RandomStrategyShape::natural(n, k))?)))
        .collect()
}

/// `(n, k)` pairs for the tripartite checks.
fn tripartite_pairs(level: Level) -> Vec<(usize, usize)> {
    match level {
        Level::Fast => vec![(2, 1), (3, 1)],
        Level::Full => (1..=level.tripartite_max())
            .flat_map(|n| (0..=n).map(move |k| (n, k)))
            .collect(),
    }
}

const STRATEGIES_PER_PAIR: u64 = 20;

fn check_choi(strategies: &[(usize, usize, u64, Strategy)], tol: &Tolerances) -> Result<CheckReport> {
    let diffs: Vec<f64> = strategies
        .par_iter()
        .map(|(_, _, _, s)| Ok((p_win(s)? - p_win_extended(s)?).abs()))
        .collect::<Result<_>>()?;
    let mut slack = Slack::new();
    for ((n, k, seed, _), d) in strategies.iter().zip(diffs) {
        slack.add(tol.spectral - d, 0.0, || format!("({n},{k}) seed {seed}: differ by {d}"));
    }
    Ok(slack.report("choi_equivalence", None))
}

fn check_dualize(strategies: &[(usize, usize, u64, Strategy)], tol: &Tolerances) -> Result<CheckReport> {
    let diffs: Vec<f64> = strategies
        .par_iter()
        .map(|(_, _, _, s)| Ok((p_win(s)? - p_win(&dualize(s)?)?).abs()))
        .collect::<Result<_>>()?;
    let mut slack = Slack::new();
    for ((n, k, seed, _), d) in strategies.iter().zip(diffs) {
        slack.add(tol.spectral - d, 0.0, || format!("({n},{k}) seed {seed}: differ by {d}"));
    }
    Ok(slack.report("dualize", None))
}

fn check_norm_sum(nk: &[(usize, usize)], seed: u64, tol: &Tolerances) -> Result<Vec<CheckReport>> {
    let jobs: Vec<(usize, usize, u64)> = nk
        .iter()
        .flat_map(|&(n, k)| (0..STRATEGIES_PER_PAIR).map(move |i| (n, k, seed.wrapping_add(i))))
        .collect();
    // Each job is already parallel inside; run them one after another.
    let reports = jobs
        .iter()
        .map(|&(n, k, s)| norm_sum_bound_check(n, k, s, tol))
        .collect::<Result<Vec<_>>>()?;
    let names = ["norm_sum_stage_a", "norm_sum_stage_b", "norm_sum_stage_c", "norm_sum_stage_d"];
    let mut out = Vec::new();
    for (i, name) in names.iter().enumerate() {
        let mut slack = Slack::new();
        for r in &reports {
            let st = &r.stages[i];
            slack.add(if st.passed { st.slack.max(-tol.spectral) } else { st.slack }, tol.spectral, || {
                format!("({},{}) seed {}: {} slack {}", r.n, r.k, r.seed, st.stage, st.slack)
            });
        }
        out.push(slack.report(name, None));
    }
    Ok(out)
}

/// Runs the whole suite. Failures are recorded in the report; errors are
/// reserved for things that stop a check from running at all.
pub fn run_suite(level: Level, seed: u64, tol: &Tolerances, faults: Faults) -> Result<VerifyReport> {
    let comb = grassmannians(level.combinatorics_max())?;
    let spectral: Vec<Grassmannian> = comb.iter().filter(|g| g.n() <= level.spectral_max()).cloned().collect();

    let mut checks = vec![
        check_counts(&comb),
        check_families(&comb)?,
        check_inner_products(&spectral, tol, faults)?,
        check_coset_basis(&spectral, tol)?,
        check_projector_identity(&spectral, tol)?,
        check_duality_states(&spectral, tol)?,
        check_product_norms(&spectral, tol)?,
        check_projector_sums(&spectral, tol)?,
        check_exact_values()?,
        check_unentangled(&spectral, tol)?,
        check_deterministic(&spectral, seed, tol)?,
        check_bound_consistency()?,
        check_ratios()?,
        check_envelope()?,
        check_reference_strategies(level.tripartite_max(), tol)?,
    ];
    let pairs = tripartite_pairs(level);
    let strategies = seeded_strategies(&pairs, seed, STRATEGIES_PER_PAIR)?;
    checks.push(check_choi(&strategies, tol)?);
    checks.push(check_dualize(&strategies, tol)?);
    checks.extend(check_norm_sum(&pairs, seed, tol)?);

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        level,
        seed,
        tolerances: *tol,
        checks,
        passed,
    })
}
