//! The spectral clustering pipeline: degree-scaled eigenvector embedding,
//! weighted k-means, and volume-weighted partition agreement.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::{partition_coloring, VertexSet, WeightedGraph};
use crate::hashing;
use crate::laplacian::normalized_laplacian;
use crate::linalg::smallest_eigpairs;

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITERS: usize = 100;
pub const KMEANS_REL_TOL: f64 = 1e-9;

/// The map F(v) = (1/√d_v)·(f_1(v), …, f_k(v)) over the bottom-k
/// eigenvectors of the normalized Laplacian.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// n×k coordinates, row per vertex.
    pub coords: Array2<f64>,
}

pub fn spectral_embed(g: &WeightedGraph, k: usize, seed: u64) -> Result<SpectralEmbedding> {
    if k == 0 || k > g.n() {
        return Err(Error::InvalidInput(format!("k = {k} not in 1..={}", g.n())));
    }
    let l = normalized_laplacian(g)?;
    let eig = smallest_eigpairs(&l, k, 1e-8, seed)?;
    let mut coords = Array2::zeros((g.n(), k));
    for v in 0..g.n() {
        let scale = 1.0 / g.degree(v).sqrt();
        for j in 0..k {
            coords[[v, j]] = eig.vectors[[v, j]] * scale;
        }
    }
    if coords.iter().any(|x| !x.is_finite()) {
        return Err(Error::DegenerateSet("non-finite embedding entry".into()));
    }
    Ok(SpectralEmbedding { coords })
}

/// Output of weighted Lloyd iterations with k-means++ seeding.
#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub centers: Array2<f64>,
    pub labels: Vec<usize>,
    pub cost: f64,
    pub iterations: usize,
    /// Cost after each Lloyd update; non-increasing.
    pub cost_history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Weighted k-means: k-means++ seeding, Lloyd to convergence (relative cost
/// change below 1e−9) or `max_iters`, best of `restarts` by (cost, restart
/// index). Empty clusters are re-seeded at the point farthest from its
/// current center.
pub fn kmeans(
    points: &Array2<f64>,
    weights: Option<&[f64]>,
    k: usize,
    restarts: usize,
    max_iters: usize,
    seed: u64,
) -> Result<KMeansResult> {
    let n = points.nrows();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} not in 1..={n}")));
    }
    let w: Vec<f64> = match weights {
        Some(w) => {
            if w.len() != n {
                return Err(Error::InvalidInput("weights length mismatch".into()));
            }
            if w.iter().any(|x| !(*x > 0.0)) {
                return Err(Error::InvalidInput("weights must be positive".into()));
            }
            w.to_vec()
        }
        None => vec![1.0; n],
    };

    // Count distinct points; k beyond that is degenerate.
    let mut rows: Vec<Vec<u64>> = points
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|x| x.to_bits()).collect())
        .collect();
    rows.sort();
    rows.dedup();
    if k > rows.len() {
        return Err(Error::DegenerateSet(format!(
            "k = {k} exceeds the {} distinct points",
            rows.len()
        )));
    }

    let mut best: Option<KMeansResult> = None;
    for restart in 0..restarts.max(1) {
        let run = lloyd_once(
            points,
            &w,
            k,
            max_iters,
            hashing::mix(seed, restart as u64),
        );
        if best.as_ref().map_or(true, |b| run.cost < b.cost) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn lloyd_once(
    points: &Array2<f64>,
    w: &[f64],
    k: usize,
    max_iters: usize,
    seed: u64,
) -> KMeansResult {
    let n = points.nrows();
    let dim = points.ncols();
    let row = |i: usize| points.row(i);

    // k-means++ seeding on weighted D² probabilities.
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    let total_w: f64 = w.iter().sum();
    let first = weighted_pick(w, total_w, hashing::coin(seed, 0));
    centers.push(row(first).to_vec());
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(row(i).as_slice().unwrap(), &centers[0]))
        .collect();
    for c in 1..k {
        let probs: Vec<f64> = (0..n).map(|i| w[i] * d2[i]).collect();
        let mass: f64 = probs.iter().sum();
        let pick = if mass > 0.0 {
            weighted_pick(&probs, mass, hashing::coin(seed, c as u64))
        } else {
            // All points coincide with existing centers; any point works.
            ((hashing::coin(seed, c as u64) * n as f64) as usize).min(n - 1)
        };
        centers.push(row(pick).to_vec());
        for i in 0..n {
            d2[i] = d2[i].min(sq_dist(row(i).as_slice().unwrap(), &centers[c]));
        }
    }

    let mut labels = vec![0usize; n];
    let mut cost_history = Vec::new();
    let mut prev_cost = f64::INFINITY;
    let mut iterations = 0;
    for it in 0..max_iters {
        // Assignment.
        let mut new_cost = 0.0;
        for i in 0..n {
            let p = row(i);
            let mut best_c = 0;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = sq_dist(p.as_slice().unwrap(), center);
                if d < best_d {
                    best_d = d;
                    best_c = c;
                }
            }
            labels[i] = best_c;
            new_cost += w[i] * best_d;
        }

        // Update with empty-cluster repair: re-seed at the point farthest
        // from its own center.
        let mut sums = vec![vec![0.0; dim]; k];
        let mut mass = vec![0.0; k];
        for i in 0..n {
            mass[labels[i]] += w[i];
            for j in 0..dim {
                sums[labels[i]][j] += w[i] * points[[i, j]];
            }
        }
        for c in 0..k {
            if mass[c] > 0.0 {
                for j in 0..dim {
                    centers[c][j] = sums[c][j] / mass[c];
                }
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        let da = sq_dist(row(a).as_slice().unwrap(), &centers[labels[a]]);
                        let db = sq_dist(row(b).as_slice().unwrap(), &centers[labels[b]]);
                        da.partial_cmp(&db).unwrap()
                    })
                    .unwrap();
                centers[c] = row(far).to_vec();
            }
        }

        cost_history.push(new_cost);
        iterations = it + 1;
        if prev_cost.is_finite()
            && (prev_cost - new_cost).abs() <= KMEANS_REL_TOL * prev_cost.max(1e-300)
        {
            break;
        }
        prev_cost = new_cost;
    }

    // Final assignment against the last centers so labels and cost agree.
    let mut final_cost = 0.0;
    for i in 0..n {
        let p = row(i);
        let mut best_c = 0;
        let mut best_d = f64::INFINITY;
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p.as_slice().unwrap(), center);
            if d < best_d {
                best_d = d;
                best_c = c;
            }
        }
        labels[i] = best_c;
        final_cost += w[i] * best_d;
    }

    let mut centers_arr = Array2::zeros((k, dim));
    for c in 0..k {
        for j in 0..dim {
            centers_arr[[c, j]] = centers[c][j];
        }
    }
    KMeansResult {
        centers: centers_arr,
        labels,
        cost: final_cost,
        iterations,
        cost_history,
    }
}

fn weighted_pick(weights: &[f64], total: f64, u: f64) -> usize {
    let target = u * total;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        if target < acc {
            return i;
        }
    }
    weights.len() - 1
}

/// Labels as vertex sets (clusters that received no vertex are dropped).
pub fn labels_to_partition(n: usize, labels: &[usize], k: usize) -> Vec<VertexSet> {
    (0..k)
        .filter_map(|c| {
            let members: Vec<usize> = (0..n).filter(|&v| labels[v] == c).collect();
            if members.is_empty() {
                None
            } else {
                Some(VertexSet::new(n, members).expect("indices in bounds"))
            }
        })
        .collect()
}

/// Volume-weighted agreement between a found and a reference partition:
/// per-cluster ratios μ(A_i △ S_σ(i))/μ(S_σ(i)) under the matching σ that
/// minimizes the maximum ratio (exact over permutations for k ≤ 8,
/// Hungarian on the sum objective for larger k).
#[derive(Debug, Clone)]
pub struct AgreementScore {
    pub permutation: Vec<usize>,
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

pub fn cluster_agreement(
    g: &WeightedGraph,
    found: &[VertexSet],
    truth: &[VertexSet],
) -> Result<AgreementScore> {
    let k = found.len();
    if truth.len() != k {
        return Err(Error::InvalidInput(format!(
            "partition sizes differ: {k} vs {}",
            truth.len()
        )));
    }
    let n = g.n();
    let found_color = partition_coloring(n, found)?;
    let truth_color = partition_coloring(n, truth)?;

    let mut vol_found = vec![0.0; k];
    let mut vol_truth = vec![0.0; k];
    let mut vol_inter = vec![vec![0.0; k]; k];
    for v in 0..n {
        let d = g.degree(v);
        vol_found[found_color[v]] += d;
        vol_truth[truth_color[v]] += d;
        vol_inter[found_color[v]][truth_color[v]] += d;
    }
    if let Some(j) = vol_truth.iter().position(|&x| x <= 0.0) {
        return Err(Error::DegenerateSet(format!(
            "reference cluster {j} has zero volume"
        )));
    }
    // ratio[i][j] = μ(A_i △ S_j)/μ(S_j).
    let ratio: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| (vol_found[i] + vol_truth[j] - 2.0 * vol_inter[i][j]) / vol_truth[j])
                .collect()
        })
        .collect();

    let perm = if k <= 8 {
        minimax_assignment(&ratio)
    } else {
        hungarian_min_sum(&ratio)
    };
    let ratios: Vec<f64> = (0..k).map(|i| ratio[i][perm[i]]).collect();
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(AgreementScore {
        permutation: perm,
        ratios,
        max_ratio,
    })
}

fn minimax_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let k = cost.len();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best_perm = perm.clone();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let worst = (0..k).map(|i| cost[i][p[i]]).fold(0.0f64, f64::max);
        if worst < best {
            best = worst;
            best_perm = p.to_vec();
        }
    });
    best_perm
}

fn permute<F: FnMut(&[usize])>(items: &mut Vec<usize>, at: usize, visit: &mut F) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute(items, at + 1, visit);
        items.swap(at, i);
    }
}

/// O(k³) Hungarian algorithm minimizing Σ_i cost[i][σ(i)].
fn hungarian_min_sum(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // p[j] = row matched to column j (1-based)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0usize; n];
    for j in 1..=n {
        if p[j] != 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disjoint_cliques(k: usize, size: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        for c in 0..k {
            let base = c * size;
            for a in 0..size {
                for b in (a + 1)..size {
                    edges.push((base + a, base + b, 1.0));
                }
            }
        }
        WeightedGraph::new(k * size, edges).unwrap()
    }

    #[test]
    fn embedding_constant_within_cliques() {
        let g = disjoint_cliques(3, 5);
        let emb = spectral_embed(&g, 3, 4).unwrap();
        for c in 0..3 {
            let base = c * 5;
            for v in 1..5 {
                let d = sq_dist(
                    emb.coords.row(base).as_slice().unwrap(),
                    emb.coords.row(base + v).as_slice().unwrap(),
                );
                assert!(d < 1e-12, "clique {c} spread {d}");
            }
        }
    }

    #[test]
    fn single_edge_embedding_equal_points() {
        let g = WeightedGraph::new(2, [(0, 1, 1.0)]).unwrap();
        let emb = spectral_embed(&g, 1, 0).unwrap();
        assert_abs_diff_eq!(emb.coords[[0, 0]], emb.coords[[1, 0]], epsilon = 1e-12);
    }

    #[test]
    fn embedding_distance_ratios_invariant_to_weight_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut edges = Vec::new();
        for u in 0..12 {
            for v in (u + 1)..12 {
                if rng.gen_bool(0.5) {
                    edges.push((u, v, rng.gen_range(0.5..2.0)));
                }
            }
        }
        for u in 0..11 {
            edges.push((u, u + 1, 1.0));
        }
        let g = WeightedGraph::new(12, edges.clone()).unwrap();
        let scaled =
            WeightedGraph::new(12, edges.iter().map(|&(u, v, w)| (u, v, 7.0 * w))).unwrap();
        let e1 = spectral_embed(&g, 3, 9).unwrap();
        let e2 = spectral_embed(&scaled, 3, 9).unwrap();
        // 𝓛 is unchanged; degrees scale by 7, so F scales by 1/√7 uniformly:
        // pairwise distance ratios must match.
        let d1a = sq_dist(
            e1.coords.row(0).as_slice().unwrap(),
            e1.coords.row(5).as_slice().unwrap(),
        );
        let d1b = sq_dist(
            e1.coords.row(2).as_slice().unwrap(),
            e1.coords.row(9).as_slice().unwrap(),
        );
        let d2a = sq_dist(
            e2.coords.row(0).as_slice().unwrap(),
            e2.coords.row(5).as_slice().unwrap(),
        );
        let d2b = sq_dist(
            e2.coords.row(2).as_slice().unwrap(),
            e2.coords.row(9).as_slice().unwrap(),
        );
        if d1b > 1e-14 && d2b > 1e-14 {
            assert_abs_diff_eq!(d1a / d1b, d2a / d2b, epsilon = 1e-6);
        }
    }

    #[test]
    fn kmeans_zero_cost_on_repeated_locations() {
        let mut pts = Array2::zeros((9, 2));
        for i in 0..9 {
            let c = i / 3;
            pts[[i, 0]] = c as f64 * 10.0;
            pts[[i, 1]] = -(c as f64);
        }
        let res = kmeans(&pts, None, 3, 5, 50, 3).unwrap();
        assert_abs_diff_eq!(res.cost, 0.0, epsilon = 1e-18);
    }

    #[test]
    fn one_cluster_center_is_weighted_mean() {
        let mut pts = Array2::zeros((3, 1));
        pts[[0, 0]] = 0.0;
        pts[[1, 0]] = 1.0;
        pts[[2, 0]] = 5.0;
        let res = kmeans(&pts, Some(&[1.0, 3.0, 6.0]), 1, 3, 50, 1).unwrap();
        assert_abs_diff_eq!(res.centers[[0, 0]], (0.0 + 3.0 + 30.0) / 10.0, epsilon = 1e-12);
    }

    #[test]
    fn kmeans_recovers_separated_gaussians() {
        let mut hits = 0;
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pts = Array2::zeros((80, 2));
            let mut truth = vec![0usize; 80];
            let means = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)];
            for i in 0..80 {
                let c = i % 4;
                truth[i] = c;
                pts[[i, 0]] = means[c].0 + rng.gen_range(-0.15..0.15);
                pts[[i, 1]] = means[c].1 + rng.gen_range(-0.15..0.15);
            }
            let res = kmeans(&pts, None, 4, KMEANS_RESTARTS, KMEANS_MAX_ITERS, seed).unwrap();
            // Exact label match up to permutation.
            let mut map = [usize::MAX; 4];
            let mut ok = true;
            for i in 0..80 {
                let t = truth[i];
                if map[t] == usize::MAX {
                    map[t] = res.labels[i];
                } else if map[t] != res.labels[i] {
                    ok = false;
                    break;
                }
            }
            let mut seen = [false; 4];
            for &m in &map {
                if m == usize::MAX || seen[m] {
                    ok = false;
                    break;
                }
                seen[m] = true;
            }
            if ok {
                hits += 1;
            }
        }
        assert!(hits >= 95, "recovered {hits}/100");
    }

    #[test]
    fn kmeans_cost_history_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut pts = Array2::zeros((60, 3));
        for i in 0..60 {
            for j in 0..3 {
                pts[[i, j]] = rng.gen_range(-1.0..1.0);
            }
        }
        let res = kmeans(&pts, None, 5, 1, 100, 7).unwrap();
        for w in res.cost_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "cost increased: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn kmeans_degenerate_k() {
        let pts = Array2::zeros((5, 2)); // all identical
        assert!(kmeans(&pts, None, 2, 2, 10, 0).is_err());
    }

    #[test]
    fn agreement_identity_and_permutation() {
        let g = disjoint_cliques(3, 4);
        let truth = labels_to_partition(12, &(0..12).map(|v| v / 4).collect::<Vec<_>>(), 3);
        let same = cluster_agreement(&g, &truth, &truth).unwrap();
        assert_abs_diff_eq!(same.max_ratio, 0.0);

        let relabeled =
            labels_to_partition(12, &(0..12).map(|v| (v / 4 + 1) % 3).collect::<Vec<_>>(), 3);
        let score = cluster_agreement(&g, &relabeled, &truth).unwrap();
        assert_abs_diff_eq!(score.max_ratio, 0.0);
    }

    #[test]
    fn agreement_single_misplaced_vertex() {
        // Two clusters of 3 vertices on a 6-cycle; move one vertex across.
        let g = WeightedGraph::new(
            6,
            [
                (0, 1, 1.0),
                (1, 2, 1.0),
                (2, 3, 1.0),
                (3, 4, 1.0),
                (4, 5, 1.0),
                (5, 0, 1.0),
            ],
        )
        .unwrap();
        let truth = vec![
            VertexSet::new(6, [0, 1, 2]).unwrap(),
            VertexSet::new(6, [3, 4, 5]).unwrap(),
        ];
        let found = vec![
            VertexSet::new(6, [0, 1]).unwrap(),
            VertexSet::new(6, [2, 3, 4, 5]).unwrap(),
        ];
        let score = cluster_agreement(&g, &found, &truth).unwrap();
        // Vertex 2 (degree 2) is missing from the donor and extra in the
        // receiver: both ratios are d/μ(S_i) = 2/6.
        assert_abs_diff_eq!(score.ratios[0], 2.0 / 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(score.ratios[1], 2.0 / 6.0, epsilon = 1e-12);
    }

    #[test]
    fn agreement_is_symmetric() {
        let g = disjoint_cliques(2, 5);
        let a = vec![
            VertexSet::new(10, [0, 1, 2, 3, 4]).unwrap(),
            VertexSet::new(10, [5, 6, 7, 8, 9]).unwrap(),
        ];
        let b = vec![
            VertexSet::new(10, [0, 1, 2, 3, 9]).unwrap(),
            VertexSet::new(10, [4, 5, 6, 7, 8]).unwrap(),
        ];
        let ab = cluster_agreement(&g, &a, &b).unwrap();
        let ba = cluster_agreement(&g, &b, &a).unwrap();
        assert_abs_diff_eq!(ab.max_ratio, ba.max_ratio, epsilon = 1e-12);
    }

    #[test]
    fn agreement_k_mismatch_errors() {
        let g = disjoint_cliques(2, 3);
        let a = labels_to_partition(6, &[0, 0, 0, 1, 1, 1], 2);
        let b = vec![VertexSet::full(6)];
        assert!(cluster_agreement(&g, &a, &b).is_err());
    }

    #[test]
    fn hungarian_matches_minimax_on_small_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let k = 5;
            let cost: Vec<Vec<f64>> =
                (0..k).map(|_| (0..k).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
            let perm = hungarian_min_sum(&cost);
            let sum: f64 = (0..k).map(|i| cost[i][perm[i]]).sum();
            // Exhaustive check of optimality on the sum objective.
            let mut ids: Vec<usize> = (0..k).collect();
            let mut best = f64::INFINITY;
            permute(&mut ids, 0, &mut |p| {
                let s: f64 = (0..k).map(|i| cost[i][p[i]]).sum();
                if s < best {
                    best = s;
                }
            });
            assert_abs_diff_eq!(sum, best, epsilon = 1e-9);
        }
    }
}
