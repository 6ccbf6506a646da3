//! Spectral sparsification by leverage-score sampling, and the chain of
//! coarse sparsifiers that makes the construction communicable: regularized
//! matrices K(i) = L + γ(i)·I with γ halving per level, each level's scores
//! estimated from the previous level's sparsifier.

use ndarray::Array2;
use ndarray_linalg::InverseC;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::hashing;
use crate::laplacian::{laplacian, SparseLaplacian};
use crate::linalg::{psd_between, pseudo_solve, RidgedLaplacian};

/// Largest n for which the dense leverage/score solvers run.
pub const DENSE_SOLVE_LIMIT: usize = 2000;

/// Default oversampling constant C in α = C·ε^{−2}·ln n.
pub const DEFAULT_OVERSAMPLE_C: f64 = 8.0;

/// Exponent of the polynomial weight-ratio bound enforced at chain
/// construction: w_max/w_min ≤ n^10.
pub const WEIGHT_RATIO_EXPONENT: f64 = 10.0;

/// Per-edge sampling importances aligned with a graph's edge list.
#[derive(Debug, Clone)]
pub struct LeverageScores {
    pub scores: Vec<f64>,
}

impl LeverageScores {
    pub fn sum(&self) -> f64 {
        self.scores.iter().sum()
    }
}

/// α = C·ε^{−2}·ln n.
pub fn oversample_alpha(c: f64, eps: f64, n: usize) -> f64 {
    c * eps.powi(-2) * (n.max(2) as f64).ln()
}

/// Exact leverage scores τ_e = w_e · b_e^T (L + ridge·I)^+ b_e via a dense
/// factorization (oracle; refuses n > 2000).
///
/// With ridge = 0 the pseudo-inverse is realized by adding the orthogonal
/// projector onto the kernel (per-component constants): the projector is
/// invisible to incidence vectors, which are orthogonal to it.
pub fn leverage_exact(g: &WeightedGraph, ridge: f64) -> Result<LeverageScores> {
    let n = g.n();
    if n > DENSE_SOLVE_LIMIT {
        return Err(Error::SizeRefused {
            what: "leverage_exact",
            n,
            limit: DENSE_SOLVE_LIMIT,
        });
    }
    if ridge < 0.0 {
        return Err(Error::InvalidInput("negative ridge".into()));
    }
    let mut m = laplacian(g).to_dense();
    if ridge > 0.0 {
        for i in 0..n {
            m[[i, i]] += ridge;
        }
    } else {
        for comp in g.components() {
            let c = comp.len() as f64;
            for &u in &comp {
                for &v in &comp {
                    m[[u, v]] += 1.0 / c;
                }
            }
        }
    }
    let inv = m
        .invc()
        .map_err(|e| Error::InvalidInput(format!("dense solve failed: {e}")))?;
    let scores = g
        .edges()
        .iter()
        .map(|e| {
            let r = inv[[e.u, e.u]] + inv[[e.v, e.v]] - 2.0 * inv[[e.u, e.v]];
            (e.w * r).max(0.0)
        })
        .collect();
    Ok(LeverageScores { scores })
}

/// Base-case approximate scores against γ(0)·I alone:
/// τ̃_e = w_e · b_e^T (γ(0)·I)^+ b_e = 2·w_e/γ(0), clamped to 1.
pub fn leverage_approx_base(g: &WeightedGraph, gamma0: f64) -> Result<LeverageScores> {
    if !(gamma0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "gamma0 must be positive, got {gamma0}"
        )));
    }
    Ok(LeverageScores {
        scores: g
            .edges()
            .iter()
            .map(|e| (2.0 * e.w / gamma0).min(1.0))
            .collect(),
    })
}

/// One level of the (approximate) chain: the sampled graph H̃ plus the ridge
/// coefficient, representing K̃ = L_H̃ + γ·I. The ridge is carried
/// symbolically; its dense-diagonal rows are never materialized as edges.
#[derive(Debug, Clone)]
pub struct ChainLevel {
    pub index: usize,
    pub gamma: f64,
    pub graph: WeightedGraph,
}

impl ChainLevel {
    /// K̃ assembled densely (verification only).
    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = laplacian(&self.graph).to_dense();
        for i in 0..self.graph.n() {
            m[[i, i]] += self.gamma;
        }
        m
    }

    /// Prefactorized solver for scoring edges against this level.
    pub fn solver(&self, eps: f64) -> Result<LevelSolver> {
        LevelSolver::new(self, eps)
    }
}

/// Scores edges against (1/(2(1+ε)))·K̃(ℓ): τ̃_e = 2(1+ε)·w_e·b_e^T K̃(ℓ)^+ b_e,
/// clamped to 1. Factorized once; scoring an edge is O(1) on the dense path
/// and one conjugate-gradient solve on the iterative fallback.
pub struct LevelSolver {
    scale: f64,
    backend: SolverBackend,
}

enum SolverBackend {
    Dense(Array2<f64>),
    Iterative {
        lap: SparseLaplacian,
        gamma: f64,
    },
}

impl LevelSolver {
    fn new(level: &ChainLevel, eps: f64) -> Result<Self> {
        if eps < 0.0 {
            return Err(Error::InvalidInput("negative eps".into()));
        }
        let n = level.graph.n();
        let scale = 2.0 * (1.0 + eps);
        if n <= DENSE_SOLVE_LIMIT {
            let mut m = laplacian(&level.graph).to_dense();
            if level.gamma > 0.0 {
                for i in 0..n {
                    m[[i, i]] += level.gamma;
                }
            } else {
                for comp in level.graph.components() {
                    let c = comp.len() as f64;
                    for &u in &comp {
                        for &v in &comp {
                            m[[u, v]] += 1.0 / c;
                        }
                    }
                }
            }
            let inv = m
                .invc()
                .map_err(|e| Error::InvalidInput(format!("dense solve failed: {e}")))?;
            Ok(Self {
                scale,
                backend: SolverBackend::Dense(inv),
            })
        } else {
            Ok(Self {
                scale,
                backend: SolverBackend::Iterative {
                    lap: laplacian(&level.graph),
                    gamma: level.gamma,
                },
            })
        }
    }

    /// τ̃ for an edge (u, v, w), clamped to (0, 1].
    pub fn score(&self, u: usize, v: usize, w: f64) -> Result<f64> {
        let r = match &self.backend {
            SolverBackend::Dense(inv) => inv[[u, u]] + inv[[v, v]] - 2.0 * inv[[u, v]],
            SolverBackend::Iterative { lap, gamma } => {
                let op = RidgedLaplacian::new(lap, *gamma);
                let mut b = vec![0.0; lap.n()];
                b[u] = -1.0;
                b[v] = 1.0;
                let x = pseudo_solve(&op, &b, 1e-10)?;
                x[v] - x[u]
            }
        };
        Ok((self.scale * w * r.max(0.0)).min(1.0))
    }
}

/// Approximate scores for the next level, estimated from the previous
/// level's sparsifier (read off the blackboard in the distributed setting).
pub fn leverage_approx_from(
    g: &WeightedGraph,
    prev: &ChainLevel,
    eps: f64,
) -> Result<LeverageScores> {
    if g.n() != prev.graph.n() {
        return Err(Error::InvalidInput(
            "chain level over a different vertex count".into(),
        ));
    }
    let solver = prev.solver(eps)?;
    let scores = g
        .edges()
        .iter()
        .map(|e| solver.score(e.u, e.v, e.w))
        .collect::<Result<Vec<_>>>()?;
    Ok(LeverageScores { scores })
}

/// Independent Bernoulli sparsification: edge e is kept with probability
/// p_e = min(1, α·τ̃_e) and reweighted to w_e/p_e. The kept set depends only
/// on (seed, edge index), never on evaluation order.
pub fn sample_sparsifier(
    g: &WeightedGraph,
    scores: &LeverageScores,
    alpha: f64,
    seed: u64,
) -> Result<WeightedGraph> {
    if scores.scores.len() != g.m() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} edges",
            scores.scores.len(),
            g.m()
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let kept = g.edges().iter().enumerate().filter_map(|(idx, e)| {
        let p = (alpha * scores.scores[idx]).min(1.0);
        if p > 0.0 && hashing::coin(seed, idx as u64) < p {
            Some((e.u, e.v, e.w / p))
        } else {
            None
        }
    });
    WeightedGraph::new(g.n(), kept)
}

/// Expected number of kept edges under `sample_sparsifier`.
pub fn expected_sample_size(scores: &LeverageScores, alpha: f64) -> f64 {
    scores.scores.iter().map(|t| (alpha * t).min(1.0)).sum()
}

/// Union of sparsifiers of an edge decomposition: edge-wise union with
/// weight addition for coinciding pairs.
pub fn merge_sparsifiers(parts: &[WeightedGraph]) -> Result<WeightedGraph> {
    let n = match parts.first() {
        Some(p) => p.n(),
        None => return Err(Error::InvalidInput("no parts to merge".into())),
    };
    if let Some(bad) = parts.iter().find(|p| p.n() != n) {
        return Err(Error::InvalidInput(format!(
            "parts disagree on vertex count: {} vs {n}",
            bad.n()
        )));
    }
    WeightedGraph::new(
        n,
        parts
            .iter()
            .flat_map(|p| p.edges().iter().map(|e| (e.u, e.v, e.w))),
    )
}

/// The γ(i) = λ_u/2^i schedule of the coarse-sparsifier chain.
#[derive(Debug, Clone)]
pub struct ChainParams {
    /// Upper bound on λ_max.
    pub lambda_u: f64,
    /// Lower bound on the nonzero eigenvalues; γ(d) ≤ λ_ℓ.
    pub lambda_l: f64,
    /// Chain length: d = ⌈log₂(λ_u/λ_ℓ)⌉.
    pub d: usize,
}

/// Hard cap on the chain length.
pub const CHAIN_LENGTH_CAP: usize = 60;

impl ChainParams {
    pub fn with_bounds(lambda_u: f64, lambda_l: f64) -> Result<Self> {
        if !(lambda_l > 0.0) || !(lambda_u >= lambda_l) {
            return Err(Error::InvalidInput(format!(
                "need λ_u ≥ λ_ℓ > 0, got λ_u = {lambda_u}, λ_ℓ = {lambda_l}"
            )));
        }
        let d = (lambda_u / lambda_l).log2().ceil().max(0.0) as usize;
        Ok(Self {
            lambda_u,
            lambda_l,
            d,
        })
    }

    /// Schedule from a graph: λ_u = 2·(max weighted degree), d from the
    /// polynomial weight-ratio bound (enforced here: w_max/w_min ≤ n^10).
    pub fn from_graph(g: &WeightedGraph) -> Result<Self> {
        if g.m() == 0 {
            return Err(Error::InvalidInput("chain requires a nonempty graph".into()));
        }
        let n = g.n() as f64;
        let (wmax, wmin) = (g.max_weight(), g.min_weight());
        if wmax.ln() - wmin.ln() > WEIGHT_RATIO_EXPONENT * n.ln() {
            return Err(Error::InvalidInput(format!(
                "weight ratio {:.3e} exceeds the polynomial bound n^{WEIGHT_RATIO_EXPONENT}",
                wmax / wmin
            )));
        }
        let lambda_u = 2.0 * g.max_degree();
        let d = ((2.0 * n * n * wmax / wmin).log2().ceil() as usize).min(CHAIN_LENGTH_CAP);
        Ok(Self {
            lambda_u,
            lambda_l: lambda_u / (2f64).powi(d as i32),
            d,
        })
    }

    pub fn gamma(&self, i: usize) -> f64 {
        self.lambda_u / (2f64).powi(i as i32)
    }

    /// γ(0..=d).
    pub fn gammas(&self) -> Vec<f64> {
        (0..=self.d).map(|i| self.gamma(i)).collect()
    }
}

/// Build the chain [K̃(0), …, K̃(d)] plus one extra ridge-free level that
/// absorbs the residual factor 2 between K(d) and K, sampling against K̃(d)
/// once more with the ridge removed. The returned vector has d + 2 levels;
/// the last one is the sparsifier of L itself.
///
/// With `verify` set, every level's spectral sandwich is checked against the
/// exact K(i) with the dense oracle; the first violated level is reported.
pub fn build_chain(
    g: &WeightedGraph,
    eps: f64,
    seed: u64,
    verify: bool,
) -> Result<Vec<ChainLevel>> {
    if !(eps > 0.0 && eps <= 1.0 / 3.0) {
        return Err(Error::InvalidInput(format!(
            "eps must lie in (0, 1/3], got {eps}"
        )));
    }
    let params = ChainParams::from_graph(g)?;
    let alpha = oversample_alpha(DEFAULT_OVERSAMPLE_C, eps, g.n());
    let mut levels: Vec<ChainLevel> = Vec::with_capacity(params.d + 2);

    let base_scores = leverage_approx_base(g, params.gamma(0))?;
    levels.push(ChainLevel {
        index: 0,
        gamma: params.gamma(0),
        graph: sample_sparsifier(g, &base_scores, alpha, hashing::mix(seed, 0))?,
    });
    for i in 1..=params.d {
        let scores = leverage_approx_from(g, &levels[i - 1], eps)?;
        levels.push(ChainLevel {
            index: i,
            gamma: params.gamma(i),
            graph: sample_sparsifier(g, &scores, alpha, hashing::mix(seed, i as u64))?,
        });
    }
    let final_scores = leverage_approx_from(g, &levels[params.d], eps)?;
    levels.push(ChainLevel {
        index: params.d + 1,
        gamma: 0.0,
        graph: sample_sparsifier(
            g,
            &final_scores,
            alpha,
            hashing::mix(seed, params.d as u64 + 1),
        )?,
    });

    if verify {
        verify_chain(g, &params, &levels, eps)?;
    }
    Ok(levels)
}

/// Check every level's sandwich (1−ε)K(i) ⪯ K̃(i) ⪯ (1+ε)K(i), and the final
/// ridge-free level against K itself on the row span.
pub fn verify_chain(
    g: &WeightedGraph,
    params: &ChainParams,
    levels: &[ChainLevel],
    eps: f64,
) -> Result<()> {
    if g.n() > DENSE_SOLVE_LIMIT {
        return Err(Error::SizeRefused {
            what: "verify_chain",
            n: g.n(),
            limit: DENSE_SOLVE_LIMIT,
        });
    }
    let l_dense = laplacian(g).to_dense();
    for level in levels {
        let mut k_exact = l_dense.clone();
        let row_span = if level.gamma > 0.0 {
            for i in 0..g.n() {
                k_exact[[i, i]] += level.gamma;
            }
            false
        } else {
            true
        };
        debug_assert!(level.gamma == params.gamma(level.index) || level.gamma == 0.0);
        let ok = psd_between(&k_exact, &level.to_dense(), 1.0 - eps, 1.0 + eps, row_span)?;
        if !ok {
            return Err(Error::Chain {
                level: level.index,
                detail: format!(
                    "sampled level violates the (1±{eps}) sandwich (γ = {})",
                    level.gamma
                ),
            });
        }
    }
    Ok(())
}
