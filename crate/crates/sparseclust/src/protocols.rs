//! The three graph-clustering protocols over simulated sites.
//!
//! * `baseline` — every site forwards its raw edges to the coordinator.
//! * `msgpassing` — every site sends a spectral sparsifier of its local
//!   graph (exact local leverage scores, computed with zero communication);
//!   the coordinator clusters the union.
//! * `blackboard` — the chain of coarse sparsifiers is built jointly on a
//!   shared board: scores are computable by every site from the board state,
//!   sampling uses shared per-edge randomness, and an edge's data crosses
//!   the wire at most once.

use std::time::Instant;

use crate::cluster::{
    cluster_agreement, kmeans, labels_to_partition, spectral_embed, AgreementScore,
    KMEANS_MAX_ITERS, KMEANS_RESTARTS,
};
use crate::error::{Error, Result};
use crate::graph::{ncut, VertexSet, WeightedGraph};
use crate::hashing;
use crate::netsim::{CommLedger, CostModel, Direction, EdgeShard};
use crate::sparsify::{
    leverage_exact, oversample_alpha, ChainLevel, LeverageScores, DEFAULT_OVERSAMPLE_C,
};

/// Default ε for sparsifier-based protocols.
pub const DEFAULT_EPS: f64 = 0.1;

/// Default number of γ-levels in the blackboard chain.
pub const DEFAULT_CHAIN_ROUNDS: usize = 18;

/// How many edges a protocol samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingMode {
    /// p_e = min(1, α·τ̃_e) with α = c·ε^{−2}·ln n.
    Oversample { c: f64 },
    /// Budgeted: a site keeps ≈ c·n edges (message passing), or all sites
    /// jointly keep ≈ c·n edges per round (blackboard).
    Budget { c: f64 },
}

impl Default for SamplingMode {
    fn default() -> Self {
        SamplingMode::Oversample {
            c: DEFAULT_OVERSAMPLE_C,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub k: usize,
    pub eps: f64,
    pub mode: SamplingMode,
    pub chain_rounds: usize,
    pub seed: u64,
}

impl ProtocolConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            eps: DEFAULT_EPS,
            mode: SamplingMode::default(),
            chain_rounds: DEFAULT_CHAIN_ROUNDS,
            seed,
        }
    }

    pub fn with_mode(mut self, mode: SamplingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn with_chain_rounds(mut self, rounds: usize) -> Self {
        self.chain_rounds = rounds;
        self
    }
}

/// Outcome of a protocol run. `ncut` is NaN when clustering was impossible
/// (the run is then flagged diverged).
#[derive(Debug, Clone)]
pub struct ProtocolResult {
    pub labels: Vec<usize>,
    pub partition: Vec<VertexSet>,
    pub ledger: CommLedger,
    pub sparsifier_edges: usize,
    pub ncut: f64,
    pub diverged: bool,
    pub runtime_ms: u64,
}

impl ProtocolResult {
    /// Volume-weighted agreement against a reference partition, when one is
    /// known. NaN on diverged runs or cluster-count mismatch.
    pub fn agreement(&self, g: &WeightedGraph, truth: &[VertexSet]) -> f64 {
        if self.partition.len() != truth.len() {
            return f64::NAN;
        }
        cluster_agreement(g, &self.partition, truth)
            .map(|a: AgreementScore| a.max_ratio)
            .unwrap_or(f64::NAN)
    }
}

fn validate_shards(shards: &[EdgeShard]) -> Result<usize> {
    let n = match shards.first() {
        Some(s) => s.n,
        None => return Err(Error::Config("no shards".into())),
    };
    if shards.iter().any(|s| s.n != n) {
        return Err(Error::Config("shards disagree on vertex count".into()));
    }
    Ok(n)
}

fn merge_shards(shards: &[EdgeShard]) -> Result<WeightedGraph> {
    let n = validate_shards(shards)?;
    WeightedGraph::new(
        n,
        shards
            .iter()
            .flat_map(|s| s.edges.iter().map(|e| (e.u, e.v, e.w))),
    )
}

/// Centralized spectral clustering: embed with the bottom-k eigenvectors of
/// 𝓛 and run k-means on the embedded points. All protocols share this, so a
/// baseline run at s = 1 is bit-identical to the centralized algorithm.
pub fn spectral_cluster_graph(
    g: &WeightedGraph,
    k: usize,
    seed: u64,
) -> Result<(Vec<usize>, Vec<VertexSet>)> {
    let emb = spectral_embed(g, k, hashing::mix(seed, 0xE16))?;
    let km = kmeans(
        &emb.coords,
        None,
        k,
        KMEANS_RESTARTS,
        KMEANS_MAX_ITERS,
        hashing::mix(seed, 0x137),
    )?;
    let parts = labels_to_partition(g.n(), &km.labels, k);
    Ok((km.labels, parts))
}

/// Cluster a (possibly sparsified) graph and evaluate the partition's ncut
/// on the evaluation graph. Failures of the eigen or k-means stage are
/// reported as a diverged outcome rather than an error.
fn cluster_and_score(
    h: &WeightedGraph,
    eval: &WeightedGraph,
    k: usize,
    seed: u64,
    input_connected: bool,
) -> (Vec<usize>, Vec<VertexSet>, f64, bool) {
    let mut diverged = input_connected && !h.is_connected();
    match spectral_cluster_graph(h, k, seed) {
        Ok((labels, parts)) => {
            let val = ncut(eval, &parts).unwrap_or(f64::NAN);
            (labels, parts, val, diverged)
        }
        Err(_) => {
            diverged = true;
            (Vec::new(), Vec::new(), f64::NAN, diverged)
        }
    }
}

/// Every site sends all of its edges to the coordinator, which runs the
/// centralized algorithm. Ledger: exactly one edge message per input edge.
pub fn run_baseline(shards: &[EdgeShard], config: &ProtocolConfig) -> Result<ProtocolResult> {
    let start = Instant::now();
    let n = validate_shards(shards)?;
    let cost = CostModel::new(n);
    let mut ledger = CommLedger::new(shards.len());
    for shard in shards {
        ledger.charge_edges(&cost, shard.site, shard.edges.len() as u64, Direction::Uplink);
    }
    ledger.set_rounds(1);
    let g = merge_shards(shards)?;
    let (labels, partition) = spectral_cluster_graph(&g, config.k, config.seed)?;
    let val = ncut(&g, &partition).unwrap_or(f64::NAN);
    Ok(ProtocolResult {
        labels,
        partition,
        ledger,
        sparsifier_edges: g.m(),
        ncut: val,
        diverged: false,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Solve Σ_e min(1, α·τ_e) = target for α by bisection (monotone).
fn alpha_for_budget(scores: &LeverageScores, target: f64) -> f64 {
    let m: f64 = scores.scores.len() as f64;
    if target >= m {
        return 1e30;
    }
    let expected = |alpha: f64| -> f64 {
        scores
            .scores
            .iter()
            .map(|t| (alpha * t).min(1.0))
            .sum::<f64>()
    };
    let mut hi = 1.0;
    while expected(hi) < target && hi < 1e30 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Message-passing protocol: every site computes exact leverage scores of
/// its local graph (no communication), samples a local sparsifier, and
/// uplinks only the kept edges; the coordinator merges and clusters.
pub fn run_msgpassing(shards: &[EdgeShard], config: &ProtocolConfig) -> Result<ProtocolResult> {
    let start = Instant::now();
    let n = validate_shards(shards)?;
    if !(config.eps > 0.0 && config.eps <= 1.0 / 3.0) {
        return Err(Error::Config(format!(
            "eps must lie in (0, 1/3], got {}",
            config.eps
        )));
    }
    let cost = CostModel::new(n);
    let mut ledger = CommLedger::new(shards.len());

    // How n becomes common knowledge is charged explicitly: every site
    // uplinks its max local id, the coordinator answers with the global n.
    for shard in shards {
        ledger.charge_scalars(&cost, shard.site, 1, Direction::Uplink);
        ledger.charge_scalars(&cost, shard.site, 1, Direction::Downlink);
    }

    let mut parts: Vec<WeightedGraph> = Vec::with_capacity(shards.len());
    for shard in shards {
        let local = WeightedGraph::new(n, shard.edges.iter().map(|e| (e.u, e.v, e.w)))?;
        if local.m() == 0 {
            parts.push(local);
            continue;
        }
        let tau = leverage_exact(&local, 0.0)?;
        let alpha = match config.mode {
            SamplingMode::Oversample { c } => oversample_alpha(c, config.eps, n),
            SamplingMode::Budget { c } => alpha_for_budget(&tau, c * n as f64),
        };
        let site_seed = hashing::mix(config.seed, 0x4D50 + shard.site as u64);
        let h = crate::sparsify::sample_sparsifier(&local, &tau, alpha, site_seed)?;
        ledger.charge_edges(&cost, shard.site, h.m() as u64, Direction::Uplink);
        parts.push(h);
    }
    ledger.set_rounds(2);

    let input = merge_shards(shards)?;
    let merged = crate::sparsify::merge_sparsifiers(&parts)?;
    let (labels, partition, val, diverged) = cluster_and_score(
        &merged,
        &input,
        config.k,
        config.seed,
        input.is_connected(),
    );
    Ok(ProtocolResult {
        labels,
        partition,
        ledger,
        sparsifier_edges: merged.m(),
        ncut: val,
        diverged,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Blackboard protocol: the chain of coarse sparsifiers built on a shared
/// board.
///
/// Round 0 registers the vertex universe: every site posts its max local id
/// and max local weight (2 scalars), fixing n and the spectral upper bound
/// λ_u = 2·n·w_max. Then, for each level, every site scores its own edges
/// against the board state (free: the board is visible to all), keeps an
/// edge iff its shared per-(u,v) coin falls under p_e = min(1, α·τ̃_e), and
/// posts kept edges that have never been posted before. Re-kept edges cost
/// nothing: their data is already on the board and the keep decision is
/// recomputable by every site from the board state and the shared seed.
/// After `chain_rounds` γ-levels one final ridge-free sampling round yields
/// the sparsifier of L itself, which site 0 clusters and posts.
pub fn run_blackboard(shards: &[EdgeShard], config: &ProtocolConfig) -> Result<ProtocolResult> {
    let start = Instant::now();
    let n = validate_shards(shards)?;
    if config.chain_rounds == 0 {
        return Err(Error::Config("chain_rounds must be at least 1".into()));
    }
    if !(config.eps > 0.0 && config.eps <= 1.0 / 3.0) {
        return Err(Error::Config(format!(
            "eps must lie in (0, 1/3], got {}",
            config.eps
        )));
    }
    let s = shards.len();
    let cost = CostModel::new(n);
    let mut ledger = CommLedger::new(s);

    // Registration round.
    for shard in shards {
        ledger.charge_scalars(&cost, shard.site, 2, Direction::Uplink);
    }
    let wmax = shards
        .iter()
        .flat_map(|s| s.edges.iter().map(|e| e.w))
        .fold(0.0f64, f64::max);
    if wmax <= 0.0 {
        return Err(Error::Config("blackboard protocol needs at least one edge".into()));
    }
    let lambda_u = 2.0 * n as f64 * wmax;

    let fixed_alpha = match config.mode {
        SamplingMode::Oversample { c } => Some(oversample_alpha(c, config.eps, n)),
        SamplingMode::Budget { .. } => None,
    };
    let budget_target = match config.mode {
        SamplingMode::Budget { c } => c * n as f64,
        _ => 0.0,
    };

    let mut alpha = fixed_alpha.unwrap_or(1.0);
    let mut posted: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
    let mut board = WeightedGraph::empty(n);
    let scale = 2.0 * (1.0 + config.eps);

    let total_levels = config.chain_rounds + 1; // γ-levels plus the ridge-free final
    for level in 0..total_levels {
        let solver = if level == 0 {
            None
        } else {
            let prev = ChainLevel {
                index: level - 1,
                gamma: lambda_u / (2f64).powi((level - 1) as i32),
                graph: board.clone(),
            };
            Some(prev.solver(config.eps)?)
        };
        let gamma0 = lambda_u;

        let mut kept: Vec<(usize, usize, f64)> = Vec::new();
        let mut kept_count = 0u64;
        for shard in shards {
            let mut new_posts = 0u64;
            for e in &shard.edges {
                let tau = match &solver {
                    None => (2.0 * e.w / gamma0).min(1.0),
                    Some(sv) => sv.score(e.u, e.v, e.w)?,
                };
                let p = (alpha * tau).min(1.0);
                if p > 0.0 && hashing::coin_pair(config.seed, e.u as u64, e.v as u64) < p {
                    kept.push((e.u, e.v, e.w / p));
                    kept_count += 1;
                    if posted.insert((e.u, e.v)) {
                        new_posts += 1;
                    }
                }
            }
            // τ̃ is a function of public board state, the keep coin of the
            // shared seed; only first-time edge data is charged.
            ledger.charge_edges(&cost, shard.site, new_posts, Direction::Uplink);
        }
        board = WeightedGraph::new(n, kept)?;
        let _ = scale; // scale folded into LevelSolver

        if fixed_alpha.is_none() {
            // Keep-count feedback toward the joint per-round budget; the
            // factor-2 clamp matches the per-level drift bound of the exact
            // chain, so the controller cannot overshoot structurally.
            let ratio = budget_target / (kept_count.max(1) as f64);
            alpha *= ratio.clamp(0.5, 2.0);
        }
    }

    // Site 0 clusters the final board graph and posts the answer.
    let input = merge_shards(shards)?;
    let (labels, partition, val, diverged) = cluster_and_score(
        &board,
        &input,
        config.k,
        config.seed,
        input.is_connected(),
    );
    ledger.charge_bits(0, "answer", cost.partition_bits(config.k), Direction::Uplink);
    ledger.set_rounds(total_levels as u64 + 2);

    Ok(ProtocolResult {
        labels,
        partition,
        ledger,
        sparsifier_edges: board.m(),
        ncut: val,
        diverged,
        runtime_ms: start.elapsed().as_millis() as u64,
    })
}

/// Dispatch a protocol by its CSV/CLI name.
pub fn run_protocol(
    name: &str,
    shards: &[EdgeShard],
    config: &ProtocolConfig,
) -> Result<ProtocolResult> {
    match name {
        "baseline" => run_baseline(shards, config),
        "msgpassing" => run_msgpassing(shards, config),
        "blackboard" => run_blackboard(shards, config),
        other => Err(Error::Config(format!("unknown protocol `{other}`"))),
    }
}

/// Spectral-gap diagnostics: λ_k and λ_{k+1} of the normalized Laplacian,
/// the brute-force k-way expansion ρ(k) when n ≤ 14, and Υ = λ_{k+1}/ρ(k).
#[derive(Debug, Clone)]
pub struct GapReport {
    pub lambda_k: f64,
    pub lambda_k1: f64,
    pub rho_k: Option<f64>,
    pub upsilon: Option<f64>,
    /// Set when ρ(k) = 0: the graph splits into k exact clusters and Υ is
    /// undefined.
    pub exact_clusters: bool,
}

pub fn gap_report(g: &WeightedGraph, k: usize, seed: u64) -> Result<GapReport> {
    if k + 1 > g.n() {
        return Err(Error::InvalidInput(format!(
            "need k + 1 = {} eigenvalues of a graph on {} vertices",
            k + 1,
            g.n()
        )));
    }
    let l = crate::laplacian::normalized_laplacian(g)?;
    let eig = crate::linalg::smallest_eigpairs(&l, k + 1, 1e-8, seed)?;
    let lambda_k = eig.values[k - 1];
    let lambda_k1 = eig.values[k];
    let (rho_k, upsilon, exact) = if g.n() <= crate::graph::KWAY_BRUTEFORCE_LIMIT {
        let (rho, _) = crate::graph::kway_expansion_bruteforce(g, k)?;
        if rho > 0.0 {
            (Some(rho), Some(lambda_k1 / rho), false)
        } else {
            (Some(rho), None, true)
        }
    } else {
        (None, None, false)
    };
    Ok(GapReport {
        lambda_k,
        lambda_k1,
        rho_k,
        upsilon,
        exact_clusters: exact,
    })
}
