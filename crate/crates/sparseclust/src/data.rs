//! Dataset generators (scaled two-moons, Gaussian blobs, planted
//! partitions, and the set-disjointness fixture graph) plus the text file
//! formats shared by the CLI stages.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geo::WeightedPointSet;
use crate::graph::{VertexSet, WeightedGraph};
use crate::hashing;

/// Neighborhood rule of a similarity graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NeighborRule {
    /// Keep a pair when either endpoint ranks the other among its c nearest.
    Knn(usize),
    Complete,
}

/// Gaussian-kernel similarity: w(u,v) = exp(−‖u−v‖²/σ²).
#[derive(Debug, Clone, Copy)]
pub struct SimilarityConfig {
    pub sigma: f64,
    pub rule: NeighborRule,
}

/// Edges whose kernel weight falls below max-weight·n^{−10} are dropped so
/// similarity graphs always satisfy the polynomial weight-ratio bound the
/// sparsifier chain enforces. At σ = 0.1 the farthest pairs underflow f64
/// anyway; the cutoff only formalizes the floor.
pub const SIMILARITY_RELATIVE_CUTOFF_EXP: f64 = 10.0;

/// Build the similarity graph of a point set.
pub fn similarity_graph(points: &WeightedPointSet, cfg: &SimilarityConfig) -> Result<WeightedGraph> {
    if !(cfg.sigma > 0.0) {
        return Err(Error::Config("kernel bandwidth must be positive".into()));
    }
    let n = points.len();
    let inv_s2 = 1.0 / (cfg.sigma * cfg.sigma);
    let mut candidate: Vec<(usize, usize)> = Vec::new();
    match cfg.rule {
        NeighborRule::Complete => {
            for u in 0..n {
                for v in (u + 1)..n {
                    candidate.push((u, v));
                }
            }
        }
        NeighborRule::Knn(c) if c + 1 >= n => {
            // Requesting at least n−1 neighbors degenerates to the complete
            // graph.
            for u in 0..n {
                for v in (u + 1)..n {
                    candidate.push((u, v));
                }
            }
        }
        NeighborRule::Knn(c) => {
            let mut nbr = vec![false; n * n];
            let mut dists: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
            for u in 0..n {
                dists.clear();
                for v in 0..n {
                    if v != u {
                        let d2: f64 = points
                            .point(u)
                            .iter()
                            .zip(points.point(v))
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum();
                        dists.push((d2, v));
                    }
                }
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for &(_, v) in dists.iter().take(c) {
                    nbr[u * n + v] = true;
                }
            }
            for u in 0..n {
                for v in (u + 1)..n {
                    if nbr[u * n + v] || nbr[v * n + u] {
                        candidate.push((u, v));
                    }
                }
            }
        }
    }

    let mut weighted: Vec<(usize, usize, f64)> = Vec::with_capacity(candidate.len());
    let mut wmax = 0.0f64;
    for (u, v) in candidate {
        let d2: f64 = points
            .point(u)
            .iter()
            .zip(points.point(v))
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        let w = (-d2 * inv_s2).exp();
        if w > 0.0 {
            wmax = wmax.max(w);
            weighted.push((u, v, w));
        }
    }
    let cutoff = wmax * (n.max(2) as f64).powf(-SIMILARITY_RELATIVE_CUTOFF_EXP);
    WeightedGraph::new(n, weighted.into_iter().filter(|&(_, _, w)| w >= cutoff))
}

/// A generated instance: geometry (when the dataset has one), its
/// similarity graph, and the planted labels.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub points: Option<WeightedPointSet>,
    pub graph: WeightedGraph,
    pub truth_labels: Option<Vec<usize>>,
}

impl GeneratedDataset {
    pub fn truth_partition(&self) -> Option<Vec<VertexSet>> {
        let labels = self.truth_labels.as_ref()?;
        let k = labels.iter().max().map(|m| m + 1)?;
        Some(crate::cluster::labels_to_partition(labels.len(), labels, k))
    }
}

fn normal_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u1: f64 = rng.gen_range(1e-300..1.0);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

/// Two interleaved half-moons (radius 1, offset (1, 0.5), Gaussian noise
/// 0.05) with a kNN Gaussian-kernel similarity graph.
pub fn gen_twomoons(n: usize, sigma: f64, knn: usize, seed: u64) -> Result<GeneratedDataset> {
    if n < 4 {
        return Err(Error::Config("two-moons needs at least 4 points".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hashing::mix(seed, 0x4D00));
    let noise = 0.05;
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    let first = n / 2;
    for i in 0..n {
        let t = rng.gen_range(0.0..std::f64::consts::PI);
        let (nx, ny) = normal_pair(&mut rng);
        let (x, y, label) = if i < first {
            (t.cos(), t.sin(), 0)
        } else {
            (1.0 - t.cos(), 0.5 - t.sin(), 1)
        };
        coords.push(x + noise * nx);
        coords.push(y + noise * ny);
        labels.push(label);
    }
    let points = WeightedPointSet::unweighted(2, coords)?;
    let graph = similarity_graph(
        &points,
        &SimilarityConfig {
            sigma,
            rule: NeighborRule::Knn(knn),
        },
    )?;
    Ok(GeneratedDataset {
        points: Some(points),
        graph,
        truth_labels: Some(labels),
    })
}

/// Side length of the square the default Gaussian blob means sit on.
const GAUSS_MEAN_SPACING: f64 = 3.4;
/// Blob standard deviation; samples are redrawn until within 3σ of the mean
/// so the kernel weight ratio stays polynomially bounded.
const GAUSS_BLOB_SIGMA: f64 = 0.4;
/// Blob mass fractions at k = 4; the deliberately small last blob makes
/// under-sampled runs visibly lose vertices.
const GAUSS_FRACTIONS_K4: [f64; 4] = [0.47, 0.35, 0.15, 0.03];

/// k Gaussian blobs on a circle with a complete Gaussian-kernel similarity
/// graph (`sigma` is the kernel bandwidth). At k = 4 the blob masses are
/// (0.47, 0.35, 0.15, 0.03) of n; other k use equal masses.
pub fn gen_gauss(n: usize, k: usize, sigma: f64, seed: u64) -> Result<GeneratedDataset> {
    if k == 0 || n < 2 * k {
        return Err(Error::Config(format!("need n ≥ 2k, got n = {n}, k = {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(hashing::mix(seed, 0x6A00));
    let mut sizes: Vec<usize> = if k == 4 {
        GAUSS_FRACTIONS_K4
            .iter()
            .map(|f| ((f * n as f64).round() as usize).max(2))
            .collect()
    } else {
        vec![n / k; k]
    };
    let assigned: usize = sizes.iter().sum();
    if assigned > n {
        return Err(Error::Config("n too small for the blob fractions".into()));
    }
    sizes[0] += n - assigned;

    let radius = if k == 1 {
        0.0
    } else {
        GAUSS_MEAN_SPACING / (2.0 * (std::f64::consts::PI / k as f64).sin())
    };
    let mut coords = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for (c, &size) in sizes.iter().enumerate() {
        let angle = 2.0 * std::f64::consts::PI * c as f64 / k as f64;
        let (mx, my) = (radius * angle.cos(), radius * angle.sin());
        for _ in 0..size {
            let (dx, dy) = loop {
                let (a, b) = normal_pair(&mut rng);
                let (dx, dy) = (GAUSS_BLOB_SIGMA * a, GAUSS_BLOB_SIGMA * b);
                if (dx * dx + dy * dy).sqrt() <= 3.0 * GAUSS_BLOB_SIGMA {
                    break (dx, dy);
                }
            };
            coords.push(mx + dx);
            coords.push(my + dy);
            labels.push(c);
        }
    }
    let points = WeightedPointSet::unweighted(2, coords)?;
    let graph = similarity_graph(
        &points,
        &SimilarityConfig {
            sigma,
            rule: NeighborRule::Complete,
        },
    )?;
    Ok(GeneratedDataset {
        points: Some(points),
        graph,
        truth_labels: Some(labels),
    })
}

/// Planted k-block partition: unit-weight edges appear independently with
/// probability p_in inside blocks and q_out across.
pub fn gen_planted(
    n: usize,
    k: usize,
    p_in: f64,
    q_out: f64,
    seed: u64,
) -> Result<GeneratedDataset> {
    if k == 0 || n < k {
        return Err(Error::Config(format!(
            "cannot split {n} vertices into {k} nonempty blocks"
        )));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&q_out) {
        return Err(Error::Config("probabilities must lie in [0, 1]".into()));
    }
    let labels: Vec<usize> = (0..n).map(|v| v * k / n).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels[u] == labels[v] { p_in } else { q_out };
            if p > 0.0 && hashing::coin_pair(seed, u as u64, v as u64) < p {
                edges.push((u, v, 1.0));
            }
        }
    }
    Ok(GeneratedDataset {
        points: None,
        graph: WeightedGraph::new(n, edges)?,
        truth_labels: Some(labels),
    })
}

/// Input regimes for the set-disjointness fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DisjRegime {
    /// Every cell an independent fair coin (the probability-1/2 branch of
    /// the hard distribution); DISJ = 0 with high probability.
    Disjoint,
    /// Same, with one all-ones column planted.
    Intersecting,
}

/// The bipartite reduction graph from multiparty set disjointness: left
/// vertices ℓ_1..ℓ_n (items), right vertices r_1..r_s (sites), an edge
/// (ℓ_j, r_i) iff X_i^j = 0 (item j appears at site i). A column of all
/// ones leaves its item vertex isolated.
#[derive(Debug, Clone)]
pub struct DisjInstance {
    pub s: usize,
    pub n_items: usize,
    /// matrix[i][j] = X_i^j.
    pub matrix: Vec<Vec<bool>>,
    pub graph: WeightedGraph,
}

impl DisjInstance {
    /// Vertex id of item ℓ_j.
    pub fn item_vertex(&self, j: usize) -> usize {
        j
    }

    /// Vertex id of site r_i.
    pub fn site_vertex(&self, i: usize) -> usize {
        self.n_items + i
    }

    pub fn all_ones_columns(&self) -> usize {
        (0..self.n_items)
            .filter(|&j| (0..self.s).all(|i| self.matrix[i][j]))
            .count()
    }

    pub fn isolated_items(&self) -> usize {
        (0..self.n_items)
            .filter(|&j| self.graph.degree(j) == 0.0)
            .count()
    }
}

pub fn gen_disj_graph(s: usize, n_items: usize, regime: DisjRegime, seed: u64) -> Result<DisjInstance> {
    if s == 0 || n_items == 0 {
        return Err(Error::Config("need at least one site and one item".into()));
    }
    let mut matrix = vec![vec![false; n_items]; s];
    for i in 0..s {
        for j in 0..n_items {
            matrix[i][j] = hashing::coin_pair(seed, i as u64, j as u64) < 0.5;
        }
    }
    if regime == DisjRegime::Intersecting {
        let planted = (hashing::mix(seed, 0xD15) % n_items as u64) as usize;
        for row in matrix.iter_mut() {
            row[planted] = true;
        }
    }
    let mut edges = Vec::new();
    for i in 0..s {
        for j in 0..n_items {
            if !matrix[i][j] {
                edges.push((j, n_items + i, 1.0));
            }
        }
    }
    let graph = WeightedGraph::new(n_items + s, edges)?;
    Ok(DisjInstance {
        s,
        n_items,
        matrix,
        graph,
    })
}

// --- file formats -----------------------------------------------------

/// Write a graph as the interchange edge list: header `n m`, then one
/// `u v w` line per edge. Weights use the shortest exponent form that
/// round-trips bit-exactly.
pub fn save_graph(path: &Path, g: &WeightedGraph) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", g.n(), g.m()));
    for e in g.edges() {
        out.push_str(&format!("{} {} {:e}\n", e.u, e.v, e.w));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_graph(path: &Path) -> Result<WeightedGraph> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (n, m) = match lines.next() {
        Some((_, header)) => {
            let mut it = header.split_whitespace();
            let n = parse_field::<usize>(it.next(), 1, "vertex count")?;
            let m = parse_field::<usize>(it.next(), 1, "edge count")?;
            (n, m)
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty graph file".into(),
            })
        }
    };
    let mut edges = Vec::with_capacity(m);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let u = parse_field::<usize>(it.next(), idx + 1, "source vertex")?;
        let v = parse_field::<usize>(it.next(), idx + 1, "target vertex")?;
        let w = parse_field::<f64>(it.next(), idx + 1, "weight")?;
        edges.push((u, v, w));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: edges.len() + 1,
            msg: format!("header promises {m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::new(n, edges)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize, what: &str) -> Result<T> {
    let raw = field.ok_or_else(|| Error::Parse {
        line,
        msg: format!("missing {what}"),
    })?;
    raw.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse {what} from `{raw}`"),
    })
}

/// Point CSV: header `d n`, then one comma-separated row per point with d
/// coordinates and an optional trailing weight column.
pub fn save_points(path: &Path, points: &WeightedPointSet, with_weights: bool) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", points.dim(), points.len()));
    for i in 0..points.len() {
        let row: Vec<String> = points.point(i).iter().map(|c| format!("{c:e}")).collect();
        out.push_str(&row.join(","));
        if with_weights {
            out.push_str(&format!(",{:e}", points.weight(i)));
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_points(path: &Path) -> Result<WeightedPointSet> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (dim, n) = match lines.next() {
        Some((_, header)) => {
            let mut it = header.split_whitespace();
            let d = parse_field::<usize>(it.next(), 1, "dimension")?;
            let n = parse_field::<usize>(it.next(), 1, "point count")?;
            (d, n)
        }
        None => {
            return Err(Error::Parse {
                line: 1,
                msg: "empty point file".into(),
            })
        }
    };
    let mut coords = Vec::with_capacity(dim * n);
    let mut weights = Vec::with_capacity(n);
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() != dim && fields.len() != dim + 1 {
            return Err(Error::Parse {
                line: idx + 1,
                msg: format!("expected {dim} or {} fields, found {}", dim + 1, fields.len()),
            });
        }
        for f in fields.iter().take(dim) {
            coords.push(parse_field::<f64>(Some(f), idx + 1, "coordinate")?);
        }
        weights.push(if fields.len() == dim + 1 {
            parse_field::<f64>(Some(fields[dim]), idx + 1, "weight")?
        } else {
            1.0
        });
    }
    if weights.len() != n {
        return Err(Error::Parse {
            line: weights.len() + 1,
            msg: format!("header promises {n} points, found {}", weights.len()),
        });
    }
    WeightedPointSet::new(dim, coords, weights)
}

/// Partition export: one `vertex_id,cluster_id` line per vertex.
pub fn save_partition(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::new();
    for (v, c) in labels.iter().enumerate() {
        out.push_str(&format!("{v},{c}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn load_partition(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split(',');
        let v = parse_field::<usize>(it.next(), idx + 1, "vertex id")?;
        let c = parse_field::<usize>(it.next(), idx + 1, "cluster id")?;
        pairs.push((v, c));
    }
    pairs.sort();
    for (i, &(v, _)) in pairs.iter().enumerate() {
        if v != i {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("vertex ids must cover 0..n, missing {i} (found {v})"),
            });
        }
    }
    Ok(pairs.into_iter().map(|(_, c)| c).collect())
}

/// Labels to vertex sets, using the maximum label to fix k.
pub fn labels_to_truth(labels: &[usize]) -> Vec<VertexSet> {
    let k = labels.iter().max().map(|m| m + 1).unwrap_or(0);
    crate::cluster::labels_to_partition(labels.len(), labels, k)
}
