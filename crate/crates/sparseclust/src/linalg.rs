//! Symmetric eigen-solvers, pseudo-inverse solves, and the PSD-ordering
//! verification oracle.
//!
//! Dense factorizations are delegated to LAPACK (via `ndarray-linalg`);
//! above the dense threshold a Lanczos iteration with full
//! reorthogonalization and exact kernel deflation takes over.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};
use crate::laplacian::SparseLaplacian;

/// Graphs up to this size use a full dense eigensolve; larger ones go
/// through Lanczos.
pub const DENSE_EIG_THRESHOLD: usize = 512;

/// Maximum relative asymmetry accepted by the dense symmetric routines.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default tolerance for iterative solves.
pub const SOLVE_TOL: f64 = 1e-8;

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

fn max_abs(a: &ArrayView2<f64>) -> f64 {
    a.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Verify relative asymmetry and return the symmetrized matrix.
pub fn check_symmetric(a: &Array2<f64>) -> Result<Array2<f64>> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::InvalidInput(format!("matrix is {r}x{c}, not square")));
    }
    let scale = max_abs(&a.view()).max(1e-300);
    let mut worst = 0.0f64;
    for i in 0..r {
        for j in (i + 1)..r {
            worst = worst.max((a[[i, j]] - a[[j, i]]).abs());
        }
    }
    if worst / scale > SYMMETRY_TOL {
        return Err(Error::InvalidInput(format!(
            "matrix asymmetry {:.3e} exceeds relative tolerance {SYMMETRY_TOL:.0e}",
            worst / scale
        )));
    }
    Ok((a + &a.t()) * 0.5)
}

/// Full dense symmetric eigendecomposition, ascending.
pub fn dense_eigh(a: &Array2<f64>) -> Result<EigenPairs> {
    let sym = check_symmetric(a)?;
    let (vals, vecs) = sym
        .eigh(UPLO::Lower)
        .map_err(|e| Error::InvalidInput(format!("dense eigensolve failed: {e}")))?;
    Ok(EigenPairs {
        values: vals.to_vec(),
        vectors: vecs,
    })
}

/// k smallest eigenpairs of a sparse Laplacian.
///
/// Dispatches to a dense solve for n ≤ [`DENSE_EIG_THRESHOLD`] and to
/// deflated Lanczos above; `seed` fixes the iterative start vector.
pub fn smallest_eigpairs(
    l: &SparseLaplacian,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenPairs> {
    let n = l.n();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} not in 1..={n}")));
    }
    if n <= DENSE_EIG_THRESHOLD {
        smallest_eigpairs_dense(l, k)
    } else {
        smallest_eigpairs_lanczos(l, k, tol, seed)
    }
}

/// Dense path: full eigensolve, keep the bottom k pairs.
pub fn smallest_eigpairs_dense(l: &SparseLaplacian, k: usize) -> Result<EigenPairs> {
    let full = dense_eigh(&l.to_dense())?;
    Ok(EigenPairs {
        values: full.values[..k].to_vec(),
        vectors: full.vectors.slice_axis(Axis(1), (0..k).into()).to_owned(),
    })
}

/// Iterative path: Lanczos with full reorthogonalization on the shifted
/// operator c·I − L, deflated against the exactly known kernel (one
/// constant-like vector per connected component).
pub fn smallest_eigpairs_lanczos(
    l: &SparseLaplacian,
    k: usize,
    tol: f64,
    seed: u64,
) -> Result<EigenPairs> {
    let n = l.n();
    let shift = l.eigenvalue_upper_bound().max(1e-300);

    // Exact kernel vectors come first, with eigenvalue 0.
    let kernel = l.kernel_basis();
    let c = kernel.len().min(k);
    let mut vectors = Array2::zeros((n, k));
    let mut values = vec![0.0; k];
    let mut kernel_dense: Vec<Vec<f64>> = Vec::new();
    for (ci, (idx, vals)) in kernel.iter().enumerate() {
        let mut q = vec![0.0; n];
        for (i, &v) in idx.iter().enumerate() {
            q[v] = vals[i];
        }
        if ci < c {
            for v in 0..n {
                vectors[[v, ci]] = q[v];
            }
            values[ci] = 0.0;
        }
        kernel_dense.push(q);
    }
    let want = k - c;
    if want == 0 {
        return Ok(EigenPairs { values, vectors });
    }

    let project_off_kernel = |x: &mut [f64]| {
        for q in &kernel_dense {
            let dot: f64 = q.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            for v in 0..x.len() {
                x[v] -= dot * q[v];
            }
        }
    };

    let apply = |x: &[f64], y: &mut [f64]| {
        l.matvec(x, y);
        for v in 0..x.len() {
            y[v] = shift * x[v] - y[v];
        }
    };

    let max_dim = n - kernel_dense.len();
    let mut m = (2 * want + 40).min(max_dim);
    let mut best_residual = f64::INFINITY;
    loop {
        let (ritz_vals, ritz_vecs, estimates) =
            lanczos_pass(n, m, apply, &project_off_kernel, seed, want)?;
        // The β-based estimate can be spuriously small on clustered spectra;
        // accept only on explicit residuals.
        let mut worst = estimates.iter().cloned().fold(0.0f64, f64::max);
        if worst <= tol * shift && ritz_vals.len() == want {
            let mut y = vec![0.0; n];
            for j in 0..want {
                let lambda = (shift - ritz_vals[j]).max(0.0);
                let col: Vec<f64> = (0..n).map(|v| ritz_vecs[[v, j]]).collect();
                l.matvec(&col, &mut y);
                let res = y
                    .iter()
                    .zip(col.iter())
                    .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                    .sum::<f64>()
                    .sqrt();
                worst = worst.max(res);
            }
        } else {
            worst = f64::INFINITY;
        }
        best_residual = best_residual.min(worst);
        if worst <= 10.0 * tol * shift {
            for j in 0..want {
                values[c + j] = (shift - ritz_vals[j]).max(0.0);
                for v in 0..n {
                    vectors[[v, c + j]] = ritz_vecs[[v, j]];
                }
            }
            // Ascending in the original spectrum.
            return Ok(EigenPairs { values, vectors });
        }
        if m >= max_dim {
            return Err(Error::Convergence {
                what: "lanczos eigensolve",
                iterations: m,
                residual: best_residual,
            });
        }
        m = (m * 2).min(max_dim);
    }
}

/// One Lanczos sweep of dimension m; returns the top `want` Ritz values of
/// the shifted operator (descending), their vectors, and residual bounds.
fn lanczos_pass<F, P>(
    n: usize,
    m: usize,
    apply: F,
    project: &P,
    seed: u64,
    want: usize,
) -> Result<(Vec<f64>, Array2<f64>, Vec<f64>)>
where
    F: Fn(&[f64], &mut [f64]),
    P: Fn(&mut [f64]),
{
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    project(&mut v0);
    let norm = v0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(Error::InvalidInput(
            "start vector vanished under kernel projection".into(),
        ));
    }
    for x in &mut v0 {
        *x /= norm;
    }

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut alpha = Vec::with_capacity(m);
    let mut beta: Vec<f64> = Vec::with_capacity(m);
    let mut w = vec![0.0; n];

    for j in 0..m {
        apply(&basis[j], &mut w);
        let a_j: f64 = basis[j].iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        alpha.push(a_j);
        // Full reorthogonalization, twice, re-projecting off the kernel each
        // pass: the kernel is the shifted operator's dominant direction, so
        // any reintroduced component would otherwise be amplified.
        for _ in 0..2 {
            project(&mut w);
            for q in &basis {
                let dot: f64 = q.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
                for v in 0..n {
                    w[v] -= dot * q[v];
                }
            }
        }
        let b_j = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if j + 1 == m || b_j < 1e-13 {
            beta.push(b_j);
            break;
        }
        beta.push(b_j);
        let next: Vec<f64> = w.iter().map(|x| x / b_j).collect();
        basis.push(next);
    }

    let steps = alpha.len();
    let mut t = Array2::zeros((steps, steps));
    for i in 0..steps {
        t[[i, i]] = alpha[i];
        if i + 1 < steps {
            t[[i, i + 1]] = beta[i];
            t[[i + 1, i]] = beta[i];
        }
    }
    let (tvals, tvecs) = t
        .eigh(UPLO::Lower)
        .map_err(|e| Error::InvalidInput(format!("tridiagonal eigensolve failed: {e}")))?;

    // Largest of the shifted operator = smallest of the original.
    let take = want.min(steps);
    let mut vals = Vec::with_capacity(take);
    let mut vecs = Array2::zeros((n, take));
    let mut residuals = Vec::with_capacity(take);
    let beta_last = *beta.last().unwrap_or(&0.0);
    for j in 0..take {
        let col = steps - 1 - j;
        vals.push(tvals[col]);
        residuals.push((beta_last * tvecs[[steps - 1, col]]).abs());
        for v in 0..n {
            let mut acc = 0.0;
            for (i, q) in basis.iter().enumerate() {
                acc += q[v] * tvecs[[i, col]];
            }
            vecs[[v, j]] = acc;
        }
    }
    if take < want {
        residuals.push(f64::INFINITY);
    }
    Ok((vals, vecs, residuals))
}

/// Symmetric PSD operator usable by the conjugate-gradient solver.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Project a vector onto the operator's row span (identity when the
    /// operator is nonsingular).
    fn project_span(&self, _x: &mut [f64]) {}
}

/// γ·I.
pub struct ScaledIdentity {
    pub n: usize,
    pub gamma: f64,
}

impl SymOp for ScaledIdentity {
    fn dim(&self) -> usize {
        self.n
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            y[i] = self.gamma * x[i];
        }
    }
}

/// L + γ·I for a sparse Laplacian; with γ = 0 the solver works in the row
/// span, projecting off the per-component constant vectors.
pub struct RidgedLaplacian<'a> {
    lap: &'a SparseLaplacian,
    ridge: f64,
    kernel: Vec<Vec<f64>>,
}

impl<'a> RidgedLaplacian<'a> {
    pub fn new(lap: &'a SparseLaplacian, ridge: f64) -> Self {
        let kernel = if ridge == 0.0 {
            lap.kernel_basis()
                .into_iter()
                .map(|(idx, vals)| {
                    let mut q = vec![0.0; lap.n()];
                    for (i, &v) in idx.iter().enumerate() {
                        q[v] = vals[i];
                    }
                    q
                })
                .collect()
        } else {
            Vec::new()
        };
        Self { lap, ridge, kernel }
    }
}

impl SymOp for RidgedLaplacian<'_> {
    fn dim(&self) -> usize {
        self.lap.n()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.lap.matvec(x, y);
        if self.ridge != 0.0 {
            for i in 0..x.len() {
                y[i] += self.ridge * x[i];
            }
        }
    }
    fn project_span(&self, x: &mut [f64]) {
        for q in &self.kernel {
            let dot: f64 = q.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            for i in 0..x.len() {
                x[i] -= dot * q[i];
            }
        }
    }
}

/// Solve K x = Π_span b via conjugate gradients, where Π_span projects the
/// right-hand side off the kernel. Iteration cap 10·n.
pub fn pseudo_solve<O: SymOp>(op: &O, b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::InvalidInput(format!(
            "rhs length {} does not match operator dimension {n}",
            b.len()
        )));
    }
    let b_norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut rhs = b.to_vec();
    op.project_span(&mut rhs);
    let rhs_norm = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if rhs_norm <= 1e-13 * b_norm {
        return Ok(x);
    }
    let target = tol * rhs_norm;

    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs: f64 = r.iter().map(|v| v * v).sum();
    let cap = 10 * n;
    for it in 0..cap {
        if rs.sqrt() <= target {
            return Ok(x);
        }
        op.apply(&p, &mut ap);
        let denom: f64 = p.iter().zip(ap.iter()).map(|(a, b)| a * b).sum();
        if denom <= 0.0 {
            return Err(Error::Convergence {
                what: "conjugate gradients (non-positive curvature)",
                iterations: it,
                residual: rs.sqrt() / rhs_norm,
            });
        }
        let step = rs / denom;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        if it % 50 == 49 {
            // Kernel drift accumulates in exact arithmetic terms; reproject.
            op.project_span(&mut r);
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let ratio = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
    }
    if rs.sqrt() <= target {
        Ok(x)
    } else {
        Err(Error::Convergence {
            what: "conjugate gradients",
            iterations: cap,
            residual: rs.sqrt() / rhs_norm,
        })
    }
}

/// Relative eigenvalue threshold below which directions count as kernel.
const RANK_TOL: f64 = 1e-10;

/// Dense verification oracle for the spectral sandwich lo·A ⪯ B ⪯ hi·A.
///
/// Returns true iff all generalized eigenvalues of (B, A) restricted to
/// range(A) lie in [lo, hi] up to an absolute tolerance of 1e−8. With
/// `row_span` false the full PSD order is checked, which additionally
/// requires ker(A) ⊆ ker(B).
pub fn psd_between(
    a: &Array2<f64>,
    b: &Array2<f64>,
    lo: f64,
    hi: f64,
    row_span: bool,
) -> Result<bool> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    let a = check_symmetric(a)?;
    let b = check_symmetric(b)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(true);
    }

    let eig = dense_eigh(&a)?;
    let scale = eig
        .values
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        // A = 0: the range is empty; the full order additionally needs B = 0.
        if row_span {
            return Ok(true);
        }
        let bnorm = max_abs(&b.view());
        return Ok(bnorm <= 1e-8);
    }
    let thresh = scale * RANK_TOL;
    if eig.values[0] < -10.0 * thresh {
        return Err(Error::InvalidInput(format!(
            "matrix A is not PSD (λ_min = {:.3e})",
            eig.values[0]
        )));
    }

    let range_cols: Vec<usize> = (0..n).filter(|&i| eig.values[i] > thresh).collect();
    let kernel_cols: Vec<usize> = (0..n).filter(|&i| eig.values[i] <= thresh).collect();

    if !row_span {
        // ker(A) ⊆ ker(B): B must annihilate every kernel vector of A.
        let bnorm = max_abs(&b.view()).max(1.0);
        for &c in &kernel_cols {
            let u = eig.vectors.column(c);
            let bu = b.dot(&u);
            let norm = bu.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-8 * bnorm {
                return Ok(false);
            }
        }
    }

    if range_cols.is_empty() {
        return Ok(true);
    }
    let r = range_cols.len();
    let mut w = Array2::zeros((n, r));
    for (j, &c) in range_cols.iter().enumerate() {
        let inv_sqrt = 1.0 / eig.values[c].sqrt();
        for i in 0..n {
            w[[i, j]] = eig.vectors[[i, c]] * inv_sqrt;
        }
    }
    let m = w.t().dot(&b).dot(&w);
    let m = (&m + &m.t()) * 0.5;
    let (mu, _) = m
        .eigh(UPLO::Lower)
        .map_err(|e| Error::InvalidInput(format!("generalized eigensolve failed: {e}")))?;
    let tol = 1e-8 * lo.abs().max(hi.abs()).max(1.0);
    Ok(mu[0] >= lo - tol && mu[mu.len() - 1] <= hi + tol)
}

/// Convenience: residual ‖A v − λ v‖ for eigenpair checks in tests.
pub fn eig_residual(l: &SparseLaplacian, lambda: f64, v: &Array1<f64>) -> f64 {
    let x = v.as_slice().expect("contiguous");
    let mut y = vec![0.0; x.len()];
    l.matvec(x, &mut y);
    y.iter()
        .zip(x.iter())
        .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
        .sum::<f64>()
        .sqrt()
}
