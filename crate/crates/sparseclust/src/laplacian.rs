//! Laplacian, normalized Laplacian, and signed incidence representations.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Sparse symmetric Laplacian L = D − A, or its normalized form
/// 𝓛 = I − D^{−1/2} A D^{−1/2}.
///
/// Stored as a diagonal plus the strict upper triangle. The weighted degrees
/// of the originating graph are kept so the exact kernel (per-component
/// constant vectors, scaled by D^{1/2} in the normalized case) can be
/// reconstructed without the graph.
#[derive(Debug, Clone)]
pub struct SparseLaplacian {
    n: usize,
    normalized: bool,
    diag: Vec<f64>,
    /// (u, v, value) with u < v; `value` is the matrix entry (negative).
    off: Vec<(usize, usize, f64)>,
    degrees: Vec<f64>,
    component: Vec<usize>,
    num_components: usize,
}

impl SparseLaplacian {
    fn build(g: &WeightedGraph, normalized: bool) -> Result<Self> {
        let n = g.n();
        if normalized {
            for v in 0..n {
                if g.degree(v) <= 0.0 {
                    return Err(Error::ZeroDegree(v));
                }
            }
        }
        let mut diag = vec![0.0; n];
        let mut off = Vec::with_capacity(g.m());
        if normalized {
            for v in 0..n {
                diag[v] = 1.0;
            }
            for e in g.edges() {
                let s = -(e.w / (g.degree(e.u) * g.degree(e.v)).sqrt());
                off.push((e.u, e.v, s));
            }
        } else {
            diag.copy_from_slice(g.degrees());
            for e in g.edges() {
                off.push((e.u, e.v, -e.w));
            }
        }
        Ok(Self {
            n,
            normalized,
            diag,
            off,
            degrees: g.degrees().to_vec(),
            component: g.component_ids().to_vec(),
            num_components: g.num_components(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn num_components(&self) -> usize {
        self.num_components
    }

    pub fn component_ids(&self) -> &[usize] {
        &self.component
    }

    /// y = L x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for v in 0..self.n {
            y[v] = self.diag[v] * x[v];
        }
        for &(u, v, s) in &self.off {
            y[u] += s * x[v];
            y[v] += s * x[u];
        }
    }

    /// x^T L x. For the unnormalized form this equals
    /// Σ_{(u,v)∈E} w(u,v) (x_u − x_v)².
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut total = 0.0;
        for v in 0..self.n {
            total += self.diag[v] * x[v] * x[v];
        }
        for &(u, v, s) in &self.off {
            total += 2.0 * s * x[u] * x[v];
        }
        total
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for v in 0..self.n {
            a[[v, v]] = self.diag[v];
        }
        for &(u, v, s) in &self.off {
            a[[u, v]] = s;
            a[[v, u]] = s;
        }
        a
    }

    /// An orthonormal basis of the kernel, one vector per connected
    /// component: χ_c/√|c| unnormalized, D^{1/2}χ_c (normalized to unit
    /// length) in the normalized form. Returned as (indices, values) pairs.
    pub fn kernel_basis(&self) -> Vec<(Vec<usize>, Vec<f64>)> {
        let mut groups = vec![Vec::new(); self.num_components];
        for v in 0..self.n {
            groups[self.component[v]].push(v);
        }
        groups
            .into_iter()
            .map(|idx| {
                let mut vals: Vec<f64> = if self.normalized {
                    idx.iter().map(|&v| self.degrees[v].sqrt()).collect()
                } else {
                    vec![1.0; idx.len()]
                };
                let norm = vals.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for v in &mut vals {
                        *v /= norm;
                    }
                }
                (idx, vals)
            })
            .collect()
    }

    /// Spectral upper bound: 2 for the normalized form, 2·max d_v otherwise.
    pub fn eigenvalue_upper_bound(&self) -> f64 {
        if self.normalized {
            2.0
        } else {
            2.0 * self.diag.iter().cloned().fold(0.0, f64::max)
        }
    }
}

/// L_G = D − A.
pub fn laplacian(g: &WeightedGraph) -> SparseLaplacian {
    SparseLaplacian::build(g, false).expect("unnormalized form has no preconditions")
}

/// 𝓛_G = I − D^{−1/2} A D^{−1/2}. Errors if some vertex is isolated.
pub fn normalized_laplacian(g: &WeightedGraph) -> Result<SparseLaplacian> {
    SparseLaplacian::build(g, true)
}

/// Signed edge-vertex incidence factor: L = B^T W B, rows aligned with the
/// graph's edge list, oriented u→v with u < v (−1 at the tail u, +1 at the
/// head v).
#[derive(Debug, Clone)]
pub struct IncidenceFactor {
    n: usize,
    /// (tail, head) per edge row, tail < head.
    pub rows: Vec<(usize, usize)>,
    /// W(e,e) = w_e per edge row.
    pub weights: Vec<f64>,
}

impl IncidenceFactor {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Assemble B^T W B densely (small graphs; used to cross-check the
    /// sparse assembly).
    pub fn to_dense_laplacian(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for (i, &(u, v)) in self.rows.iter().enumerate() {
            let w = self.weights[i];
            a[[u, u]] += w;
            a[[v, v]] += w;
            a[[u, v]] -= w;
            a[[v, u]] -= w;
        }
        a
    }
}

pub fn incidence(g: &WeightedGraph) -> IncidenceFactor {
    IncidenceFactor {
        n: g.n(),
        rows: g.edges().iter().map(|e| (e.u, e.v)).collect(),
        weights: g.edges().iter().map(|e| e.w).collect(),
    }
}
