//! Blackboard-model geometric clustering: parallel-guessing k-center and
//! the successive-sampling coreset for k-median/k-means, over simulated
//! sites holding weighted point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cluster::kmeans;
use crate::error::{Error, Result};
use crate::hashing;
use crate::netsim::{CommLedger, Direction};

/// Default slack of the radius-guess grid; 2(1+δ) ≤ 2.01.
pub const KCENTER_DELTA: f64 = 0.005;

/// Default covered fraction per successive-sampling round.
pub const COVER_FRACTION: f64 = 0.9;

/// Multiplicative pitch of the radius grid used in place of an exact binary
/// search over pairwise distances.
pub const RADIUS_GRID_FACTOR: f64 = 1e-3;

/// Cap on binary-search probes per round.
pub const RADIUS_PROBE_CAP: usize = 64;

/// Points in R^d with strictly positive weights.
#[derive(Debug, Clone)]
pub struct WeightedPointSet {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(dim: usize, coords: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be positive".into()));
        }
        if coords.len() != dim * weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} coordinates for {} weights in dimension {dim}",
                coords.len(),
                weights.len()
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        Ok(Self {
            dim,
            coords,
            weights,
        })
    }

    pub fn unweighted(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let n = coords.len() / dim.max(1);
        Self::new(dim, coords, vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The three geometric objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeoObjective {
    /// max_p d(p, C)
    Center,
    /// Σ_p w_p · d(p, C)
    Median,
    /// Σ_p w_p · d(p, C)²
    Means,
}

impl GeoObjective {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Center => "center",
            Self::Median => "median",
            Self::Means => "means",
        }
    }
}

/// Evaluate an objective for a center set over one or more point sets.
pub fn evaluate_objective(
    sets: &[&WeightedPointSet],
    centers: &[Vec<f64>],
    objective: GeoObjective,
) -> f64 {
    let mut acc = 0.0f64;
    for set in sets {
        for i in 0..set.len() {
            let d = centers
                .iter()
                .map(|c| dist(set.point(i), c))
                .fold(f64::INFINITY, f64::min);
            match objective {
                GeoObjective::Center => acc = acc.max(d),
                GeoObjective::Median => acc += set.weight(i) * d,
                GeoObjective::Means => acc += set.weight(i) * d * d,
            }
        }
    }
    acc
}

/// Result of a geometric clustering routine.
#[derive(Debug, Clone)]
pub struct GeoResult {
    pub centers: Vec<Vec<f64>>,
    pub objective: GeoObjective,
    pub value: f64,
}

fn charge_points(ledger: &mut CommLedger, site: usize, count: u64, dim: usize) {
    if count > 0 {
        // Coordinates plus the point's weight, 64 bits each.
        ledger.charge_bits(
            site,
            "geo_points",
            count * 64 * (dim as u64 + 1),
            Direction::Uplink,
        );
    }
}

fn charge_scalars(ledger: &mut CommLedger, site: usize, count: u64) {
    if count > 0 {
        ledger.charge_bits(site, "geo_scalars", count * 64, Direction::Uplink);
    }
}

/// Parallel-guessing k-center in the blackboard model.
///
/// Radius guesses sweep r_min·(1+δ)^t upward from the smallest nonzero
/// pairwise distance. For each guess the greedy runs on the board: any site
/// holding a point farther than 2r from every posted center posts it
/// (lowest site id, then lowest local index); a guess fails once k+1
/// centers are forced. The smallest succeeding guess is returned, giving a
/// 2(1+δ)-approximation against the best input-point center set. Only point
/// postings are charged.
pub fn kcenter_parallel_guess(
    site_points: &[WeightedPointSet],
    k: usize,
    delta: f64,
    ledger: &mut CommLedger,
) -> Result<GeoResult> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidInput("delta must be positive".into()));
    }
    let dim = match site_points.iter().find(|s| !s.is_empty()) {
        Some(s) => s.dim(),
        None => return Err(Error::InvalidInput("no points".into())),
    };
    if site_points.iter().any(|s| !s.is_empty() && s.dim() != dim) {
        return Err(Error::InvalidInput("sites disagree on dimension".into()));
    }

    // Distinct locations decide the degenerate case k ≥ #distinct.
    let mut distinct: Vec<Vec<f64>> = Vec::new();
    for set in site_points {
        for i in 0..set.len() {
            let p = set.point(i);
            if !distinct.iter().any(|q| dist(q, p) == 0.0) {
                distinct.push(p.to_vec());
            }
        }
    }
    if distinct.len() <= k {
        for (site, set) in site_points.iter().enumerate() {
            charge_points(ledger, site, set.len().min(k) as u64, dim);
        }
        return Ok(GeoResult {
            centers: distinct,
            objective: GeoObjective::Center,
            value: 0.0,
        });
    }

    // Smallest nonzero pairwise distance bounds OPT from below for discrete
    // centers; the guess grid ascends from it.
    let mut r_min = f64::INFINITY;
    for (i, a) in distinct.iter().enumerate() {
        for b in distinct.iter().skip(i + 1) {
            let d = dist(a, b);
            if d > 0.0 {
                r_min = r_min.min(d);
            }
        }
    }

    let mut guess = r_min;
    loop {
        if let Some(centers) = kcenter_greedy(site_points, k, guess, ledger, dim) {
            let value = evaluate_objective(
                &site_points.iter().collect::<Vec<_>>(),
                &centers,
                GeoObjective::Center,
            );
            return Ok(GeoResult {
                centers,
                objective: GeoObjective::Center,
                value,
            });
        }
        guess *= 1.0 + delta;
    }
}

/// One greedy feasibility check at radius `guess`: Some(centers) on
/// success, None once more than k centers are forced.
fn kcenter_greedy(
    site_points: &[WeightedPointSet],
    k: usize,
    guess: f64,
    ledger: &mut CommLedger,
    dim: usize,
) -> Option<Vec<Vec<f64>>> {
    let mut centers: Vec<Vec<f64>> = Vec::new();
    loop {
        let mut objection: Option<(usize, usize)> = None;
        'sites: for (site, set) in site_points.iter().enumerate() {
            for i in 0..set.len() {
                let p = set.point(i);
                if centers.iter().all(|c| dist(p, c) > 2.0 * guess) {
                    objection = Some((site, i));
                    break 'sites;
                }
            }
        }
        match objection {
            None => return Some(centers),
            Some((site, i)) => {
                if centers.len() == k {
                    // The objection itself is posted before the guess is
                    // declared failed.
                    charge_points(ledger, site, 1, dim);
                    return None;
                }
                charge_points(ledger, site, 1, dim);
                centers.push(site_points[site].point(i).to_vec());
            }
        }
    }
}

/// One round of the successive-sampling coreset construction.
#[derive(Debug, Clone)]
pub struct CoresetRound {
    pub index: usize,
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
    pub covered: usize,
    pub surviving_before: usize,
}

/// Successive sampling in the blackboard model.
///
/// Per round: sites post surviving counts; the board draws a uniform sample
/// of max(8, 4k) surviving points (allocated across sites by global rank);
/// the owning sites post them. A geometric radius grid between the posted
/// min/max distances is binary-searched — the board posts each probe t,
/// sites reply covered counts — for the smallest t covering at least
/// `fraction` of the surviving points. Covered points are then removed
/// locally. The coreset is the union of sampled centers, each weighted by
/// the total weight of the points it covered (nearest-center assignment),
/// with exact duplicate locations coalesced.
pub fn successive_sampling(
    site_points: &[WeightedPointSet],
    k: usize,
    fraction: f64,
    seed: u64,
    ledger: &mut CommLedger,
) -> Result<(WeightedPointSet, Vec<CoresetRound>)> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidInput(format!(
            "fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let dim = match site_points.iter().find(|s| !s.is_empty()) {
        Some(s) => s.dim(),
        None => {
            return Ok((
                WeightedPointSet {
                    dim: 1,
                    coords: Vec::new(),
                    weights: Vec::new(),
                },
                Vec::new(),
            ))
        }
    };
    if site_points.iter().any(|s| !s.is_empty() && s.dim() != dim) {
        return Err(Error::InvalidInput("sites disagree on dimension".into()));
    }

    let per_round = 8.max(4 * k);
    let mut alive: Vec<Vec<usize>> = site_points.iter().map(|s| (0..s.len()).collect()).collect();
    let mut rounds: Vec<CoresetRound> = Vec::new();
    let mut coreset_coords: Vec<f64> = Vec::new();
    let mut coreset_weights: Vec<f64> = Vec::new();

    loop {
        let counts: Vec<usize> = alive.iter().map(|a| a.len()).collect();
        let total: usize = counts.iter().sum();
        for site in 0..site_points.len() {
            charge_scalars(ledger, site, 1);
        }
        if total == 0 {
            break;
        }

        // Draw distinct global ranks; the board's draw is free, the posted
        // sample points are charged to their owners.
        let sample_size = per_round.min(total);
        let mut rng = ChaCha8Rng::seed_from_u64(hashing::mix(seed, rounds.len() as u64));
        let mut ranks = std::collections::BTreeSet::new();
        while ranks.len() < sample_size {
            ranks.insert(rng.gen_range(0..total));
        }
        let mut prefix = vec![0usize; site_points.len() + 1];
        for (i, c) in counts.iter().enumerate() {
            prefix[i + 1] = prefix[i] + c;
        }
        let mut centers: Vec<Vec<f64>> = Vec::with_capacity(sample_size);
        for &rank in &ranks {
            let site = match prefix.binary_search(&rank) {
                Ok(mut i) => {
                    while prefix[i + 1] == rank {
                        i += 1;
                    }
                    i
                }
                Err(i) => i - 1,
            };
            let local = alive[site][rank - prefix[site]];
            centers.push(site_points[site].point(local).to_vec());
            charge_points(ledger, site, 1, dim);
        }

        // Radius grid bounds from per-site extremes (2 scalars each).
        let mut tmin = f64::INFINITY;
        let mut tmax = 0.0f64;
        for (site, set) in site_points.iter().enumerate() {
            if alive[site].is_empty() {
                continue;
            }
            charge_scalars(ledger, site, 2);
            for &i in &alive[site] {
                let d = centers
                    .iter()
                    .map(|c| dist(set.point(i), c))
                    .fold(f64::INFINITY, f64::min);
                tmin = tmin.min(d);
                tmax = tmax.max(d);
            }
        }

        let needed = ((fraction * total as f64).ceil() as usize).min(total);
        let covered_at = |t: f64| -> usize {
            let mut covered = 0;
            for (site, set) in site_points.iter().enumerate() {
                for &i in &alive[site] {
                    let d = centers
                        .iter()
                        .map(|c| dist(set.point(i), c))
                        .fold(f64::INFINITY, f64::min);
                    if d <= t {
                        covered += 1;
                    }
                }
            }
            covered
        };

        // Binary search on the geometric grid t = tmin·(1+RADIUS_GRID_FACTOR)^i.
        let radius = if covered_at(tmin) >= needed {
            ledger.post_broadcast("geo_probe", 64);
            for site in 0..site_points.len() {
                charge_scalars(ledger, site, 1);
            }
            tmin
        } else {
            let cells = if tmin > 0.0 {
                ((tmax / tmin).ln() / RADIUS_GRID_FACTOR.ln_1p()).ceil() as i64 + 1
            } else {
                1
            };
            let t_of = |i: i64| -> f64 {
                if tmin > 0.0 {
                    (tmin * (1.0 + RADIUS_GRID_FACTOR).powi(i as i32)).min(tmax)
                } else {
                    tmax
                }
            };
            let mut lo = 0i64;
            let mut hi = cells;
            let mut probes = 0;
            while lo < hi && probes < RADIUS_PROBE_CAP {
                let mid = (lo + hi) / 2;
                ledger.post_broadcast("geo_probe", 64);
                for site in 0..site_points.len() {
                    charge_scalars(ledger, site, 1);
                }
                if covered_at(t_of(mid)) >= needed {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
                probes += 1;
            }
            t_of(hi.min(cells))
        };

        // Assign covered points to their nearest sampled center and remove
        // them locally (no communication).
        let mut center_weight = vec![0.0f64; centers.len()];
        let mut covered_count = 0usize;
        for (site, set) in site_points.iter().enumerate() {
            let mut still = Vec::new();
            for &i in &alive[site] {
                let p = set.point(i);
                let (mut best_c, mut best_d) = (0usize, f64::INFINITY);
                for (c, center) in centers.iter().enumerate() {
                    let d = dist(p, center);
                    if d < best_d {
                        best_d = d;
                        best_c = c;
                    }
                }
                if best_d <= radius {
                    center_weight[best_c] += set.weight(i);
                    covered_count += 1;
                } else {
                    still.push(i);
                }
            }
            alive[site] = still;
        }

        rounds.push(CoresetRound {
            index: rounds.len(),
            centers: centers.clone(),
            radius,
            covered: covered_count,
            surviving_before: total,
        });
        for (c, center) in centers.iter().enumerate() {
            if center_weight[c] > 0.0 {
                coreset_coords.extend_from_slice(center);
                coreset_weights.push(center_weight[c]);
            }
        }
        ledger.next_round();
    }

    // Coalesce exact duplicate locations.
    let mut dedup_coords: Vec<f64> = Vec::new();
    let mut dedup_weights: Vec<f64> = Vec::new();
    'points: for i in 0..coreset_weights.len() {
        let p = &coreset_coords[i * dim..(i + 1) * dim];
        let existing = dedup_weights.len();
        for j in 0..existing {
            let q = &dedup_coords[j * dim..(j + 1) * dim];
            if p == q {
                dedup_weights[j] += coreset_weights[i];
                continue 'points;
            }
        }
        dedup_coords.extend_from_slice(p);
        dedup_weights.push(coreset_weights[i]);
    }

    Ok((
        WeightedPointSet::new(dim, dedup_coords, dedup_weights)?,
        rounds,
    ))
}

/// Cluster a coreset: weighted k-means (Lloyd with k-means++ restarts) or
/// weighted discrete k-median by single-swap local search over the coreset
/// points.
pub fn cluster_coreset(
    coreset: &WeightedPointSet,
    k: usize,
    objective: GeoObjective,
    seed: u64,
) -> Result<GeoResult> {
    if coreset.is_empty() {
        return Err(Error::InvalidInput("empty coreset".into()));
    }
    match objective {
        GeoObjective::Means => {
            let n = coreset.len();
            let mut pts = ndarray::Array2::zeros((n, coreset.dim()));
            for i in 0..n {
                for j in 0..coreset.dim() {
                    pts[[i, j]] = coreset.point(i)[j];
                }
            }
            let km = kmeans(&pts, Some(coreset.weights()), k, 10, 100, seed)?;
            let centers: Vec<Vec<f64>> = (0..k)
                .map(|c| km.centers.row(c).to_vec())
                .collect();
            let value = evaluate_objective(&[coreset], &centers, GeoObjective::Means);
            Ok(GeoResult {
                centers,
                objective,
                value,
            })
        }
        GeoObjective::Median => kmedian_local_search(coreset, k),
        GeoObjective::Center => Err(Error::InvalidInput(
            "cluster_coreset supports median and means; use kcenter_parallel_guess".into(),
        )),
    }
}

/// Discrete weighted k-median: farthest-first start, then single swaps
/// while the relative improvement exceeds 1e−4.
fn kmedian_local_search(points: &WeightedPointSet, k: usize) -> Result<GeoResult> {
    let n = points.len();
    if k > n {
        return Err(Error::DegenerateSet(format!(
            "k = {k} exceeds the {n} coreset points"
        )));
    }
    let cost_of = |centers: &[usize]| -> f64 {
        (0..n)
            .map(|i| {
                let d = centers
                    .iter()
                    .map(|&c| dist(points.point(i), points.point(c)))
                    .fold(f64::INFINITY, f64::min);
                points.weight(i) * d
            })
            .sum()
    };

    // Farthest-first start from the heaviest point.
    let first = (0..n)
        .max_by(|&a, &b| points.weight(a).partial_cmp(&points.weight(b)).unwrap())
        .unwrap();
    let mut centers = vec![first];
    while centers.len() < k {
        let far = (0..n)
            .max_by(|&a, &b| {
                let da = centers
                    .iter()
                    .map(|&c| dist(points.point(a), points.point(c)))
                    .fold(f64::INFINITY, f64::min);
                let db = centers
                    .iter()
                    .map(|&c| dist(points.point(b), points.point(c)))
                    .fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        centers.push(far);
    }

    let mut cost = cost_of(&centers);
    loop {
        let mut best_swap: Option<(usize, usize, f64)> = None;
        for ci in 0..k {
            for cand in 0..n {
                if centers.contains(&cand) {
                    continue;
                }
                let old = centers[ci];
                centers[ci] = cand;
                let c = cost_of(&centers);
                centers[ci] = old;
                if c < cost && best_swap.map_or(true, |(_, _, b)| c < b) {
                    best_swap = Some((ci, cand, c));
                }
            }
        }
        match best_swap {
            Some((ci, cand, c)) if (cost - c) > 1e-4 * cost.max(1e-300) => {
                centers[ci] = cand;
                cost = c;
            }
            _ => break,
        }
    }

    Ok(GeoResult {
        centers: centers.iter().map(|&c| points.point(c).to_vec()).collect(),
        objective: GeoObjective::Median,
        value: cost,
    })
}

/// Size limits for the exact oracle.
pub const BRUTE_MEDIAN_LIMIT: usize = 16;
pub const BRUTE_CENTER_LIMIT: usize = 200;
pub const BRUTE_CENTER_K_LIMIT: usize = 3;

/// Exact optimum with centers restricted to input points, by exhaustive
/// enumeration of center subsets. Test oracle; refuses large instances.
pub fn geo_bruteforce_opt(
    points: &WeightedPointSet,
    k: usize,
    objective: GeoObjective,
) -> Result<GeoResult> {
    let n = points.len();
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    match objective {
        GeoObjective::Center => {
            if n > BRUTE_CENTER_LIMIT || k > BRUTE_CENTER_K_LIMIT {
                return Err(Error::SizeRefused {
                    what: "geo_bruteforce_opt (k-center)",
                    n,
                    limit: BRUTE_CENTER_LIMIT,
                });
            }
        }
        _ => {
            if n > BRUTE_MEDIAN_LIMIT {
                return Err(Error::SizeRefused {
                    what: "geo_bruteforce_opt (k-median/means)",
                    n,
                    limit: BRUTE_MEDIAN_LIMIT,
                });
            }
        }
    }
    if k >= n {
        let centers: Vec<Vec<f64>> = (0..n).map(|i| points.point(i).to_vec()).collect();
        return Ok(GeoResult {
            centers,
            objective,
            value: 0.0,
        });
    }

    // Distance matrix once.
    let mut d = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = dist(points.point(i), points.point(j));
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }

    let mut best_value = f64::INFINITY;
    let mut best: Vec<usize> = (0..k).collect();
    let mut comb: Vec<usize> = (0..k).collect();
    loop {
        let mut value = 0.0f64;
        match objective {
            GeoObjective::Center => {
                for i in 0..n {
                    let di = comb.iter().map(|&c| d[i * n + c]).fold(f64::INFINITY, f64::min);
                    value = value.max(di);
                    if value >= best_value {
                        break;
                    }
                }
            }
            GeoObjective::Median => {
                for i in 0..n {
                    let di = comb.iter().map(|&c| d[i * n + c]).fold(f64::INFINITY, f64::min);
                    value += points.weight(i) * di;
                }
            }
            GeoObjective::Means => {
                for i in 0..n {
                    let di = comb.iter().map(|&c| d[i * n + c]).fold(f64::INFINITY, f64::min);
                    value += points.weight(i) * di * di;
                }
            }
        }
        if value < best_value {
            best_value = value;
            best = comb.clone();
        }
        // Next combination in lexicographic order.
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(GeoResult {
                    centers: best.iter().map(|&c| points.point(c).to_vec()).collect(),
                    objective,
                    value: best_value,
                });
            }
            i -= 1;
            if comb[i] != i + n - k {
                comb[i] += 1;
                for j in (i + 1)..k {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn single_site(coords: Vec<f64>, dim: usize) -> Vec<WeightedPointSet> {
        vec![WeightedPointSet::unweighted(dim, coords).unwrap()]
    }

    fn random_sites(
        n: usize,
        sites: usize,
        dim: usize,
        seed: u64,
    ) -> Vec<WeightedPointSet> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut per_site: Vec<Vec<f64>> = vec![Vec::new(); sites];
        for i in 0..n {
            let s = rng.gen_range(0..sites);
            for _ in 0..dim {
                per_site[s].push(rng.gen_range(-5.0..5.0));
            }
            let _ = i;
        }
        per_site
            .into_iter()
            .map(|c| WeightedPointSet::unweighted(dim, c).unwrap())
            .collect()
    }

    fn gather(sites: &[WeightedPointSet]) -> WeightedPointSet {
        let dim = sites.iter().find(|s| !s.is_empty()).unwrap().dim();
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for s in sites {
            for i in 0..s.len() {
                coords.extend_from_slice(s.point(i));
                weights.push(s.weight(i));
            }
        }
        WeightedPointSet::new(dim, coords, weights).unwrap()
    }

    #[test]
    fn kcenter_exact_cover_when_k_matches_distinct_points() {
        let sites = single_site(vec![0.0, 0.0, 1.0, 1.0, 2.0, 2.0], 2);
        let mut ledger = CommLedger::new(1);
        let res = kcenter_parallel_guess(&sites, 3, KCENTER_DELTA, &mut ledger).unwrap();
        assert_abs_diff_eq!(res.value, 0.0);
        assert_eq!(res.centers.len(), 3);
    }

    #[test]
    fn kcenter_two_points() {
        let sites = single_site(vec![0.0, 1.0], 1);
        let mut ledger = CommLedger::new(1);
        let res = kcenter_parallel_guess(&sites, 1, KCENTER_DELTA, &mut ledger).unwrap();
        // Discrete OPT is 1 (a center must sit on one of the points).
        assert!(res.value <= 2.01 * 1.0 + 1e-12);
        assert!(ledger.total_bits() > 0);
    }

    #[test]
    fn kcenter_within_guarantee_onrandom_instances() {
        for seed in 0..20 {
            let sites = random_sites(60, 3, 2, seed);
            let mut ledger = CommLedger::new(3);
            let k = 1 + (seed as usize % 3);
            let res = kcenter_parallel_guess(&sites, k, KCENTER_DELTA, &mut ledger).unwrap();
            let all = gather(&sites);
            let opt = geo_bruteforce_opt(&all, k, GeoObjective::Center).unwrap();
            assert!(
                res.value <= 2.01 * opt.value + 1e-9,
                "seed {seed}: {} > 2.01·{}",
                res.value,
                opt.value
            );
        }
    }

    #[test]
    fn successive_sampling_identical_points() {
        let sites = single_site(vec![3.0, -1.0].repeat(50), 2);
        let mut ledger = CommLedger::new(1);
        let (coreset, rounds) = successive_sampling(&sites, 2, COVER_FRACTION, 5, &mut ledger).unwrap();
        assert_eq!(rounds.len(), 1);
        assert_eq!(coreset.len(), 1);
        assert_abs_diff_eq!(coreset.weight(0), 50.0);
    }

    #[test]
    fn successive_sampling_round_and_size_bounds() {
        for seed in 0..8 {
            let n = 300;
            let sites = random_sites(n, 4, 2, 100 + seed);
            let k = 2 + (seed as usize % 3);
            let mut ledger = CommLedger::new(4);
            let (coreset, rounds) =
                successive_sampling(&sites, k, COVER_FRACTION, seed, &mut ledger).unwrap();
            let bound = (n as f64).log10().ceil() as usize + 1;
            assert!(rounds.len() <= bound, "{} rounds > {bound}", rounds.len());
            assert!(
                coreset.len() <= 4 * k.max(2) * rounds.len(),
                "coreset {} > 4k·rounds",
                coreset.len()
            );
            // Monotone shrinkage: each round covers at least the fraction.
            for r in &rounds {
                assert!(
                    r.covered as f64 >= (COVER_FRACTION * r.surviving_before as f64).floor(),
                    "round {} covered {}/{}",
                    r.index,
                    r.covered,
                    r.surviving_before
                );
            }
            // Total coreset weight accounts for every input point.
            assert_abs_diff_eq!(coreset.total_weight(), n as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn coreset_of_k_distinct_points_costs_zero() {
        let coreset = WeightedPointSet::new(
            1,
            vec![0.0, 5.0, 9.0],
            vec![2.0, 1.0, 4.0],
        )
        .unwrap();
        for obj in [GeoObjective::Median, GeoObjective::Means] {
            let res = cluster_coreset(&coreset, 3, obj, 1).unwrap();
            assert_abs_diff_eq!(res.value, 0.0, epsilon = 1e-18);
        }
    }

    #[test]
    fn weighted_one_means_center() {
        let coreset = WeightedPointSet::new(1, vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        let res = cluster_coreset(&coreset, 1, GeoObjective::Means, 3).unwrap();
        assert_abs_diff_eq!(res.centers[0][0], 0.75, epsilon = 1e-9);
    }

    #[test]
    fn weighted_one_median_is_weighted_median() {
        let coreset = WeightedPointSet::new(1, vec![0.0, 1.0], vec![1.0, 3.0]).unwrap();
        let res = cluster_coreset(&coreset, 1, GeoObjective::Median, 3).unwrap();
        assert_abs_diff_eq!(res.centers[0][0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bruteforce_examples() {
        // k = n: zero under every objective.
        let pts = WeightedPointSet::unweighted(2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0]).unwrap();
        for obj in [GeoObjective::Center, GeoObjective::Median, GeoObjective::Means] {
            let res = geo_bruteforce_opt(&pts, 3, obj).unwrap();
            assert_abs_diff_eq!(res.value, 0.0);
        }
        // Three collinear unit-spaced points, k = 1.
        let res = geo_bruteforce_opt(&pts, 1, GeoObjective::Median).unwrap();
        assert_abs_diff_eq!(res.value, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.centers[0][0], 1.0, epsilon = 1e-12);
        let res = geo_bruteforce_opt(&pts, 1, GeoObjective::Center).unwrap();
        assert_abs_diff_eq!(res.value, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.centers[0][0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bruteforce_refuses_large_instances() {
        let pts = WeightedPointSet::unweighted(1, (0..40).map(|i| i as f64).collect()).unwrap();
        assert!(geo_bruteforce_opt(&pts, 2, GeoObjective::Median).is_err());
        let big = WeightedPointSet::unweighted(1, (0..300).map(|i| i as f64).collect()).unwrap();
        assert!(geo_bruteforce_opt(&big, 2, GeoObjective::Center).is_err());
    }

    #[test]
    fn coreset_pipeline_near_bruteforce_on_tiny_instances() {
        for seed in 0..10 {
            let sites = random_sites(14, 2, 2, 500 + seed);
            let all = gather(&sites);
            let k = 2;
            let mut ledger = CommLedger::new(2);
            let (coreset, _) =
                successive_sampling(&sites, k, COVER_FRACTION, seed, &mut ledger).unwrap();
            for obj in [GeoObjective::Median, GeoObjective::Means] {
                let res = cluster_coreset(&coreset, k, obj, seed).unwrap();
                let cost_full = evaluate_objective(&[&all], &res.centers, obj);
                let opt = geo_bruteforce_opt(&all, k, obj).unwrap();
                assert!(
                    cost_full <= 10.0 * opt.value.max(1e-12) + 1e-9,
                    "seed {seed} {obj:?}: {cost_full} vs opt {}",
                    opt.value
                );
            }
        }
    }

    #[test]
    fn ledger_mostly_site_count_free() {
        // O((k+s)·rounds·log) scaling: with enough sampled points per round
        // the s-linear probe replies stay below the k-driven postings.
        let n = 400;
        let k = 25;
        let dim = 5;
        for (s_small, s_big) in [(3usize, 30usize)] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let coords: Vec<f64> = (0..n * dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let split = |sites: usize| -> Vec<WeightedPointSet> {
                let mut per: Vec<Vec<f64>> = vec![Vec::new(); sites];
                for i in 0..n {
                    let s = i % sites;
                    per[s].extend_from_slice(&coords[i * dim..(i + 1) * dim]);
                }
                per.into_iter()
                    .map(|c| WeightedPointSet::unweighted(dim, c).unwrap())
                    .collect()
            };
            let mut small = CommLedger::new(s_small);
            successive_sampling(&split(s_small), k, COVER_FRACTION, 3, &mut small).unwrap();
            let mut big = CommLedger::new(s_big);
            successive_sampling(&split(s_big), k, COVER_FRACTION, 3, &mut big).unwrap();
            assert!(
                big.total_bits() <= 2 * small.total_bits(),
                "s={s_big}: {} > 2× s={s_small}: {}",
                big.total_bits(),
                small.total_bits()
            );
        }
    }
}
