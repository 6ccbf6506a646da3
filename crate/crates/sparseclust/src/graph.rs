//! Weighted undirected graphs and their exact combinatorial quantities:
//! volume, conductance, normalized cut, and a brute-force k-way expansion
//! oracle for small graphs.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// An undirected edge with `u < v` and strictly positive weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Undirected weighted graph stored as a canonical coalesced edge list.
///
/// Parallel input edges are merged by weight addition, so the edge list is a
/// well-defined function of the input multiset. Weighted degrees and
/// connected components are computed once at construction.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    degrees: Vec<f64>,
    component: Vec<usize>,
    num_components: usize,
}

impl WeightedGraph {
    /// Build a graph from raw `(u, v, w)` triples. Self-loops and
    /// non-positive or non-finite weights are rejected; duplicate pairs are
    /// coalesced by summing weights.
    pub fn new<I>(n: usize, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in raw {
            if u >= n {
                return Err(Error::VertexOutOfRange { id: u, n });
            }
            if v >= n {
                return Err(Error::VertexOutOfRange { id: v, n });
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            let key = (u.min(v), u.max(v));
            *merged.entry(key).or_insert(0.0) += w;
        }
        let edges: Vec<Edge> = merged
            .into_iter()
            .map(|((u, v), w)| Edge { u, v, w })
            .collect();

        let mut degrees = vec![0.0; n];
        for e in &edges {
            degrees[e.u] += e.w;
            degrees[e.v] += e.w;
        }

        let (component, num_components) = components_of(n, &edges);
        Ok(Self {
            n,
            edges,
            degrees,
            component,
            num_components,
        })
    }

    /// Graph with no edges.
    pub fn empty(n: usize) -> Self {
        Self::new(n, std::iter::empty()).expect("empty edge list is always valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weighted degree d_v.
    pub fn degree(&self, v: usize) -> f64 {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn max_degree(&self) -> f64 {
        self.degrees.iter().cloned().fold(0.0, f64::max)
    }

    /// Sum of all edge weights.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).sum()
    }

    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).fold(0.0, f64::max)
    }

    pub fn min_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.w).fold(f64::INFINITY, f64::min)
    }

    /// Component id per vertex (ids are contiguous from 0).
    pub fn component_ids(&self) -> &[usize] {
        &self.component
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn is_connected(&self) -> bool {
        self.num_components <= 1
    }

    /// Vertices grouped by component id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_components];
        for v in 0..self.n {
            out[self.component[v]].push(v);
        }
        out
    }
}

fn components_of(n: usize, edges: &[Edge]) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut c = x;
        while parent[c] != r {
            let next = parent[c];
            parent[c] = r;
            c = next;
        }
        r
    }
    for e in edges {
        let (a, b) = (find(&mut parent, e.u), find(&mut parent, e.v));
        if a != b {
            parent[a] = b;
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut next = 0;
    for v in 0..n {
        let r = find(&mut parent, v);
        if ids[r] == usize::MAX {
            ids[r] = next;
            next += 1;
        }
        ids[v] = ids[r];
    }
    (ids, next)
}

/// A subset of the vertex set, with membership mask for O(1) lookups.
#[derive(Debug, Clone)]
pub struct VertexSet {
    n: usize,
    mask: Vec<bool>,
    members: Vec<usize>,
}

impl VertexSet {
    pub fn new<I>(n: usize, iter: I) -> Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut mask = vec![false; n];
        for v in iter {
            if v >= n {
                return Err(Error::VertexOutOfRange { id: v, n });
            }
            mask[v] = true;
        }
        let members: Vec<usize> = (0..n).filter(|&v| mask[v]).collect();
        Ok(Self { n, mask, members })
    }

    pub fn full(n: usize) -> Self {
        Self::new(n, 0..n).expect("range is in bounds")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.mask[v]
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// Symmetric difference with another set over the same vertex universe.
    pub fn symmetric_difference(&self, other: &VertexSet) -> VertexSet {
        let n = self.n.max(other.n);
        VertexSet::new(
            n,
            (0..n).filter(|&v| {
                let a = v < self.n && self.mask[v];
                let b = v < other.n && other.mask[v];
                a != b
            }),
        )
        .expect("indices in bounds")
    }
}

/// Volume μ(S) = Σ_{v∈S} d_v.
pub fn volume(g: &WeightedGraph, s: &VertexSet) -> Result<f64> {
    if s.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "vertex set over {} vertices applied to graph on {}",
            s.n(),
            g.n()
        )));
    }
    Ok(s.members().iter().map(|&v| g.degree(v)).sum())
}

/// Total weight crossing from S to its complement.
pub fn cut_weight(g: &WeightedGraph, s: &VertexSet) -> Result<f64> {
    if s.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "vertex set over {} vertices applied to graph on {}",
            s.n(),
            g.n()
        )));
    }
    Ok(g.edges()
        .iter()
        .filter(|e| s.contains(e.u) != s.contains(e.v))
        .map(|e| e.w)
        .sum())
}

/// Conductance φ(S) = w(S, V∖S) / μ(S). Errors if μ(S) = 0.
pub fn conductance(g: &WeightedGraph, s: &VertexSet) -> Result<f64> {
    let vol = volume(g, s)?;
    if vol <= 0.0 {
        return Err(Error::DegenerateSet(
            "conductance undefined on a set of zero volume".into(),
        ));
    }
    Ok(cut_weight(g, s)? / vol)
}

/// Check that `parts` is a partition of the vertex set; returns the part id
/// of every vertex.
pub fn partition_coloring(n: usize, parts: &[VertexSet]) -> Result<Vec<usize>> {
    let mut color = vec![usize::MAX; n];
    for (i, p) in parts.iter().enumerate() {
        if p.n() != n {
            return Err(Error::InvalidInput(
                "partition part over wrong vertex universe".into(),
            ));
        }
        for &v in p.members() {
            if color[v] != usize::MAX {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} appears in parts {} and {i}",
                    color[v]
                )));
            }
            color[v] = i;
        }
    }
    if let Some(v) = color.iter().position(|&c| c == usize::MAX) {
        return Err(Error::InvalidInput(format!(
            "vertex {v} is not covered by the partition"
        )));
    }
    Ok(color)
}

/// Normalized cut of a partition: (1/2) Σ_i w(A_i, V∖A_i)/μ(A_i).
///
/// Every part must have positive volume; a zero-volume part is an error so
/// pipeline bugs surface instead of producing infinities.
pub fn ncut(g: &WeightedGraph, parts: &[VertexSet]) -> Result<f64> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("empty partition".into()));
    }
    let color = partition_coloring(g.n(), parts)?;
    let k = parts.len();
    let mut cut = vec![0.0; k];
    let mut vol = vec![0.0; k];
    for e in g.edges() {
        if color[e.u] != color[e.v] {
            cut[color[e.u]] += e.w;
            cut[color[e.v]] += e.w;
        }
    }
    for v in 0..g.n() {
        vol[color[v]] += g.degree(v);
    }
    let mut total = 0.0;
    for i in 0..k {
        if vol[i] <= 0.0 {
            return Err(Error::DegenerateSet(format!(
                "partition part {i} has zero volume"
            )));
        }
        total += cut[i] / vol[i];
    }
    Ok(0.5 * total)
}

/// Largest n for which the exhaustive k-way expansion search is allowed.
pub const KWAY_BRUTEFORCE_LIMIT: usize = 14;

/// Exact k-way expansion constant ρ(k) = min over partitions into k
/// nonempty parts of max_i φ(A_i), by exhaustive enumeration of set
/// partitions (restricted growth strings). Test oracle; refuses n > 14.
///
/// Partitions containing a zero-volume part are skipped since their
/// conductance is undefined.
pub fn kway_expansion_bruteforce(
    g: &WeightedGraph,
    k: usize,
) -> Result<(f64, Vec<VertexSet>)> {
    let n = g.n();
    if n > KWAY_BRUTEFORCE_LIMIT {
        return Err(Error::SizeRefused {
            what: "kway_expansion_bruteforce",
            n,
            limit: KWAY_BRUTEFORCE_LIMIT,
        });
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!(
            "k = {k} is not in 1..={n}"
        )));
    }

    let mut colors = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    enumerate_partitions(g, k, &mut colors, 1, 1, &mut best);

    match best {
        Some((rho, coloring)) => {
            let parts = (0..k)
                .map(|c| {
                    VertexSet::new(n, (0..n).filter(|&v| coloring[v] == c))
                        .expect("coloring indices in bounds")
                })
                .collect();
            Ok((rho, parts))
        }
        None => Err(Error::DegenerateSet(
            "no k-partition with all parts of positive volume exists".into(),
        )),
    }
}

fn enumerate_partitions(
    g: &WeightedGraph,
    k: usize,
    colors: &mut Vec<usize>,
    pos: usize,
    used: usize,
    best: &mut Option<(f64, Vec<usize>)>,
) {
    let n = g.n();
    if pos == n {
        if used == k {
            if let Some(score) = evaluate_partition(g, colors, k) {
                if best.as_ref().map_or(true, |(b, _)| score < *b) {
                    *best = Some((score, colors.clone()));
                }
            }
        }
        return;
    }
    // Colors needed by the remaining vertices must still be reachable.
    if used + (n - pos) < k {
        return;
    }
    let cap = (used + 1).min(k);
    for c in 0..cap {
        colors[pos] = c;
        let next_used = used.max(c + 1);
        enumerate_partitions(g, k, colors, pos + 1, next_used, best);
    }
    colors[pos] = 0;
}

fn evaluate_partition(g: &WeightedGraph, colors: &[usize], k: usize) -> Option<f64> {
    let mut cut = vec![0.0; k];
    let mut vol = vec![0.0; k];
    for e in g.edges() {
        if colors[e.u] != colors[e.v] {
            cut[colors[e.u]] += e.w;
            cut[colors[e.v]] += e.w;
        }
    }
    for v in 0..g.n() {
        vol[colors[v]] += g.degree(v);
    }
    let mut worst = 0.0f64;
    for i in 0..k {
        if vol[i] <= 0.0 {
            return None;
        }
        worst = worst.max(cut[i] / vol[i]);
    }
    Some(worst)
}
