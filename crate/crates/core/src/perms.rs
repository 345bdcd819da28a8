//! Mutually orthogonal permutations of the Grassmannian.
//!
//! For `m < k` the graph on `Gr_2(n, k)` joining subspaces that meet in
//! dimension exactly `m` is `f(n, k, m)`-regular with even degree. Orienting
//! every connected component along an Euler circuit makes each vertex have
//! in- and out-degree `f/2`; the oriented graph is then an `f/2`-regular
//! bipartite graph (tails on the left, heads on the right), which splits
//! into `f/2` perfect matchings. Each matching read as `u -> head(u)` is a
//! permutation whose cycles are oriented cycles of the undirected graph, so
//! the matchings together with their inverses give `f` permutations that
//! pairwise never agree on any vertex. For `m = k` the identity is the only
//! member.
//!
//! Every step breaks ties towards the lowest vertex index, so families are
//! reproducible.

use std::collections::VecDeque;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{enumerate_grassmannian, intersection_count, Grassmannian};

/// Dense table of `dim(V ∩ W)` over all pairs of a Grassmannian.
#[derive(Clone, Debug)]
pub struct IntersectionTable {
    size: usize,
    dims: Vec<u8>,
}

impl IntersectionTable {
    pub fn new(grass: &Grassmannian) -> Self {
        let size = grass.len();
        let subspaces = grass.subspaces();
        let rows: Vec<Vec<u8>> = subspaces
            .par_iter()
            .map(|v| {
                subspaces
                    .iter()
                    .map(|w| v.intersect_dim(w).expect("same ambient space") as u8)
                    .collect()
            })
            .collect();
        Self {
            size,
            dims: rows.concat(),
        }
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn get(&self, v: usize, w: usize) -> usize {
        self.dims[v * self.size + w] as usize
    }

    /// Histogram of `dim(V ∩ W)` over all `W`, for fixed `V`, indexed by `m`.
    pub fn histogram(&self, v: usize, k: usize) -> Vec<usize> {
        let mut hist = vec![0; k + 1];
        for w in 0..self.size {
            hist[self.get(v, w)] += 1;
        }
        hist
    }
}

/// Simple undirected graph on Grassmannian indices joining subspaces that
/// meet in dimension `m`.
#[derive(Clone, Debug)]
pub struct IntersectionGraph {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Sorted neighbor lists.
    pub adjacency: Vec<Vec<usize>>,
}

impl IntersectionGraph {
    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    /// The common degree, or `None` if the graph is not regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.adjacency.first().map_or(0, Vec::len);
        self.adjacency.iter().all(|a| a.len() == d).then_some(d)
    }
}

/// Directed graph on `0..len` given by sorted out-neighbor lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectedGraph {
    pub out: Vec<Vec<usize>>,
}

impl DirectedGraph {
    pub fn vertex_count(&self) -> usize {
        self.out.len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.out.len()];
        for heads in &self.out {
            for &v in heads {
                deg[v] += 1;
            }
        }
        deg
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }
}

fn check_m(k: usize, m: usize) -> Result<()> {
    if m > k {
        return Err(Error::InvalidParameters(format!("m = {m} exceeds k = {k}")));
    }
    Ok(())
}

fn expected_degree(n: usize, k: usize, m: usize) -> Result<usize> {
    let f = intersection_count(n, k, m);
    f.to_usize()
        .ok_or_else(|| Error::InvalidParameters(format!("degree {f} does not fit in memory")))
}

/// Builds the `m`-intersection graph for `m < k`.
pub fn build_intersection_graph(n: usize, k: usize, m: usize, cap: u64) -> Result<IntersectionGraph> {
    let grass = enumerate_grassmannian(n, k, cap)?;
    let table = IntersectionTable::new(&grass);
    intersection_graph_from_table(&grass, &table, m)
}

/// Same as [`build_intersection_graph`] on an already tabulated
/// Grassmannian.
pub fn intersection_graph_from_table(
    grass: &Grassmannian,
    table: &IntersectionTable,
    m: usize,
) -> Result<IntersectionGraph> {
    let (n, k) = (grass.n(), grass.k());
    check_m(k, m)?;
    if m == k {
        return Err(Error::InvalidParameters(format!(
            "m = k = {k} has no intersection graph; the identity covers it"
        )));
    }
    let size = table.len();
    let adjacency: Vec<Vec<usize>> = (0..size)
        .into_par_iter()
        .map(|v| (0..size).filter(|&w| w != v && table.get(v, w) == m).collect())
        .collect();
    let graph = IntersectionGraph { n, k, m, adjacency };
    let expected = expected_degree(n, k, m)?;
    if let Some((v, adj)) = graph
        .adjacency
        .iter()
        .enumerate()
        .find(|(_, a)| a.len() != expected)
    {
        return Err(Error::InvariantViolation(format!(
            "vertex {v} of the m = {m} graph has degree {}, expected {expected}",
            adj.len()
        )));
    }
    Ok(graph)
}

/// Directs every edge along an Euler circuit of its component
/// (Hierholzer), so that in- and out-degree are both half the degree.
pub fn orient_eulerian(g: &IntersectionGraph) -> Result<DirectedGraph> {
    let size = g.vertex_count();
    if let Some((v, adj)) = g.adjacency.iter().enumerate().find(|(_, a)| a.len() % 2 == 1) {
        return Err(Error::InvariantViolation(format!(
            "vertex {v} has odd degree {}",
            adj.len()
        )));
    }
    // Number the undirected edges and keep (neighbor, edge id) lists in
    // neighbor order.
    let mut incident: Vec<Vec<(usize, usize)>> = vec![Vec::new(); size];
    let mut edges = 0;
    for (u, adj) in g.adjacency.iter().enumerate() {
        for &v in adj {
            if u < v {
                incident[u].push((v, edges));
                incident[v].push((u, edges));
                edges += 1;
            }
        }
    }
    for list in &mut incident {
        list.sort_unstable();
    }
    let mut used = vec![false; edges];
    let mut cursor = vec![0usize; size];
    let mut out = vec![Vec::new(); size];
    let mut stack = Vec::new();
    for start in 0..size {
        stack.push(start);
        while let Some(&u) = stack.last() {
            let list = &incident[u];
            while cursor[u] < list.len() && used[list[cursor[u]].1] {
                cursor[u] += 1;
            }
            if let Some(&(v, e)) = list.get(cursor[u]) {
                used[e] = true;
                out[u].push(v);
                stack.push(v);
            } else {
                stack.pop();
            }
        }
    }
    for heads in &mut out {
        heads.sort_unstable();
    }
    Ok(DirectedGraph { out })
}

/// Maximum bipartite matching by Hopcroft-Karp on left/right copies of the
/// same vertex set. Returns `mate[u] = Some(v)` for matched left vertices.
fn hopcroft_karp(adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    const INF: usize = usize::MAX;
    let size = adj.len();
    let mut mate_left: Vec<Option<usize>> = vec![None; size];
    let mut mate_right: Vec<Option<usize>> = vec![None; size];

    // Greedy start, lowest free head first.
    for u in 0..size {
        if let Some(&v) = adj[u].iter().find(|&&v| mate_right[v].is_none()) {
            mate_left[u] = Some(v);
            mate_right[v] = Some(u);
        }
    }

    let mut dist = vec![INF; size];
    loop {
        // Layered BFS from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..size {
            if mate_left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                match mate_right[v] {
                    None => found = true,
                    Some(w) if dist[w] == INF => {
                        dist[w] = dist[u] + 1;
                        queue.push_back(w);
                    }
                    Some(_) => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; size];
        for u in 0..size {
            if mate_left[u].is_none() {
                augment(u, adj, &mut dist, &mut next, &mut mate_left, &mut mate_right);
            }
        }
    }
    mate_left
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    dist: &mut [usize],
    next: &mut [usize],
    mate_left: &mut [Option<usize>],
    mate_right: &mut [Option<usize>],
) -> bool {
    while next[u] < adj[u].len() {
        let v = adj[u][next[u]];
        next[u] += 1;
        let ok = match mate_right[v] {
            None => true,
            Some(w) => {
                dist[w] == dist[u] + 1 && augment(w, adj, dist, next, mate_left, mate_right)
            }
        };
        if ok {
            mate_left[u] = Some(v);
            mate_right[v] = Some(u);
            return true;
        }
    }
    dist[u] = usize::MAX;
    false
}

/// Splits an `r`-regular directed graph (in = out = `r` everywhere) into
/// `r` permutations whose edge sets partition the edges.
pub fn matching_decomposition(d: &DirectedGraph) -> Result<Vec<Vec<usize>>> {
    let size = d.vertex_count();
    let r = d.out.first().map_or(0, Vec::len);
    let in_deg = d.in_degrees();
    if let Some(v) = (0..size).find(|&v| d.out[v].len() != r || in_deg[v] != r) {
        return Err(Error::InvariantViolation(format!(
            "vertex {v} has out-degree {} and in-degree {}, expected {r}",
            d.out[v].len(),
            in_deg[v]
        )));
    }
    let mut remaining = d.out.clone();
    let mut perms = Vec::with_capacity(r);
    for round in 0..r {
        let mate = hopcroft_karp(&remaining);
        let perm: Vec<usize> = mate
            .iter()
            .enumerate()
            .map(|(u, m)| {
                m.ok_or_else(|| {
                    Error::InvariantViolation(format!(
                        "no perfect matching in round {round}: vertex {u} unmatched"
                    ))
                })
            })
            .collect::<Result<_>>()?;
        for (u, &v) in perm.iter().enumerate() {
            let pos = remaining[u]
                .binary_search(&v)
                .expect("matched edge is present");
            remaining[u].remove(pos);
        }
        perms.push(perm);
    }
    Ok(perms)
}

/// One member of a family: a permutation of Grassmannian indices with the
/// `m`-intersection property.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyEntry {
    pub m: usize,
    pub perm: Vec<usize>,
}

/// Permutations of `Gr_2(n, k)` in canonical index order, each tagged with
/// its intersection dimension.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationFamily {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<FamilyEntry>,
}

impl PermutationFamily {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of members with intersection dimension `m`.
    pub fn count_with(&self, m: usize) -> usize {
        self.entries.iter().filter(|e| e.m == m).count()
    }
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (u, &v) in perm.iter().enumerate() {
        inv[v] = u;
    }
    inv
}

fn family_entries(grass: &Grassmannian, table: &IntersectionTable, m: usize) -> Result<Vec<FamilyEntry>> {
    check_m(grass.k(), m)?;
    if m == grass.k() {
        return Ok(vec![FamilyEntry {
            m,
            perm: (0..grass.len()).collect(),
        }]);
    }
    let graph = intersection_graph_from_table(grass, table, m)?;
    let oriented = orient_eulerian(&graph)?;
    let matchings = matching_decomposition(&oriented)?;
    let mut entries = Vec::with_capacity(2 * matchings.len());
    for perm in matchings {
        let inv = invert(&perm);
        entries.push(FamilyEntry { m, perm });
        entries.push(FamilyEntry { m, perm: inv });
    }
    Ok(entries)
}

/// `f(n, k, m)` mutually orthogonal permutations with the `m`-intersection
/// property (the identity alone when `m = k`).
pub fn orthogonal_family(n: usize, k: usize, m: usize, cap: u64) -> Result<PermutationFamily> {
    check_m(k, m)?;
    let grass = enumerate_grassmannian(n, k, cap)?;
    let table = IntersectionTable::new(&grass);
    Ok(PermutationFamily {
        n,
        k,
        entries: family_entries(&grass, &table, m)?,
    })
}

/// `binom(n, k)_2` mutually orthogonal permutations: the families for
/// `m = 0..=k` concatenated.
pub fn full_family(n: usize, k: usize, cap: u64) -> Result<PermutationFamily> {
    let grass = enumerate_grassmannian(n, k, cap)?;
    let table = IntersectionTable::new(&grass);
    full_family_from_table(&grass, &table)
}

pub fn full_family_from_table(grass: &Grassmannian, table: &IntersectionTable) -> Result<PermutationFamily> {
    let mut entries = Vec::with_capacity(grass.len());
    for m in 0..=grass.k() {
        entries.extend(family_entries(grass, table, m)?);
    }
    Ok(PermutationFamily {
        n: grass.n(),
        k: grass.k(),
        entries,
    })
}

/// First property violation found by [`verify_family`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    WrongLength { entry: usize, len: usize },
    BadIntersectionDim { entry: usize, m: usize },
    NotBijective { entry: usize, image: usize },
    WrongIntersection { entry: usize, vertex: usize, expected: usize, found: usize },
    Collision { first: usize, second: usize, vertex: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub n: usize,
    pub k: usize,
    pub members: usize,
    pub vertices: usize,
    pub passed: bool,
    /// Whether at every vertex the images under all members cover the whole
    /// Grassmannian (holds for a passing family of full size).
    pub covers: bool,
    pub counterexample: Option<Counterexample>,
}

/// Checks bijectivity, the `m`-intersection property of every member, and
/// pairwise orthogonality. Failures are reported, not raised.
pub fn verify_family(fam: &PermutationFamily, cap: u64) -> Result<FamilyReport> {
    let grass = enumerate_grassmannian(fam.n, fam.k, cap)?;
    Ok(verify_family_on(fam, &grass))
}

pub fn verify_family_on(fam: &PermutationFamily, grass: &Grassmannian) -> FamilyReport {
    let size = grass.len();
    let report = |counterexample: Option<Counterexample>, covers: bool| FamilyReport {
        n: fam.n,
        k: fam.k,
        members: fam.len(),
        vertices: size,
        passed: counterexample.is_none(),
        covers,
        counterexample,
    };

    let per_entry = fam.entries.par_iter().enumerate().find_map_first(|(i, e)| {
        if e.perm.len() != size {
            return Some(Counterexample::WrongLength {
                entry: i,
                len: e.perm.len(),
            });
        }
        if e.m > fam.k {
            return Some(Counterexample::BadIntersectionDim { entry: i, m: e.m });
        }
        let mut hit = vec![false; size];
        for &v in &e.perm {
            if v >= size || hit[v] {
                return Some(Counterexample::NotBijective { entry: i, image: v });
            }
            hit[v] = true;
        }
        e.perm.iter().enumerate().find_map(|(w, &v)| {
            let found = grass[w].intersect_dim(&grass[v]).expect("same ambient space");
            (found != e.m).then_some(Counterexample::WrongIntersection {
                entry: i,
                vertex: w,
                expected: e.m,
                found,
            })
        })
    });
    if per_entry.is_some() {
        return report(per_entry, false);
    }

    let collision = (0..size).into_par_iter().find_map_first(|w| {
        let mut owner = vec![usize::MAX; size];
        for (i, e) in fam.entries.iter().enumerate() {
            let v = e.perm[w];
            if owner[v] != usize::MAX {
                return Some(Counterexample::Collision {
                    first: owner[v],
                    second: i,
                    vertex: w,
                });
            }
            owner[v] = i;
        }
        None
    });
    // With no collisions every vertex has `members` distinct images.
    let covers = collision.is_none() && fam.len() == size;
    report(collision, covers)
}
