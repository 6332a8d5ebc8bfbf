//! Ordinary least squares via Householder QR with column pivoting.
//!
//! Columns are equilibrated to unit norm before factorization — the
//! calendar/temperature designs mix dummy columns with cubed-temperature
//! columns five orders of magnitude larger. Rank-deficient systems get the
//! minimal-norm solution (in the equilibrated basis) through a complete
//! orthogonal decomposition, with no regularization. The feature encodings
//! in this crate deliberately contain linearly dependent blocks, so the
//! rank-deficient path is the common case, not an edge case.

use crate::error::{Error, Result};

/// Dense row-major matrix of f64.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length must match dimensions");
        Matrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// X·v for a coefficient vector of length `cols`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Xᵀ·v for a vector of length `rows`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &w) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(r)) {
                *o += w * x;
            }
        }
        out
    }

    /// Prepends a column of ones.
    pub fn with_intercept(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            m.set(r, 0, 1.0);
            m.row_mut(r)[1..].copy_from_slice(self.row(r));
        }
        m
    }
}

/// A fitted least-squares solution with its quality diagnostics.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Minimal-norm coefficient vector, length `cols`.
    pub beta: Vec<f64>,
    /// Numerical rank of the design matrix.
    pub rank: usize,
    /// X·β on the training rows.
    pub fitted: Vec<f64>,
    /// Σ|y − Xβ| over the training rows.
    pub sum_abs_residual: f64,
    /// Mean |y − Xβ| over the training rows.
    pub training_mae: f64,
    /// ‖Xᵀ(y − Xβ)‖∞ / ‖Xᵀy‖∞ — residual orthogonality to the column
    /// space; should sit well below 1e-6 on every fit.
    pub normal_eq_residual: f64,
}

/// Rank cutoff relative to the largest diagonal of R.
const RANK_RTOL_FACTOR: f64 = 64.0;

/// Solves min ‖y − Xβ‖₂, returning the minimal-norm β when X is
/// rank-deficient.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<OlsFit> {
    let (m, n) = (x.rows(), x.cols());
    if m == 0 || n == 0 {
        return Err(Error::domain("least squares needs a nonempty design matrix"));
    }
    if y.len() != m {
        return Err(Error::domain(format!(
            "target length {} does not match {m} rows",
            y.len()
        )));
    }

    // Equilibrate: scale every column to unit 2-norm (zero columns keep
    // scale 1). Coefficients are mapped back at the end.
    let mut a = x.clone();
    let mut col_scale = vec![1.0f64; n];
    for j in 0..n {
        let norm: f64 = (0..m).map(|r| a.get(r, j) * a.get(r, j)).sum::<f64>().sqrt();
        if norm > 0.0 {
            col_scale[j] = norm;
            for r in 0..m {
                let v = a.get(r, j) / norm;
                a.set(r, j, v);
            }
        }
    }

    let mut qty = y.to_vec();
    let mut jpvt: Vec<usize> = (0..n).collect();
    let kmax = m.min(n);

    // Householder QR with column pivoting; reflectors applied to qty as
    // they are built. Partial column norms are downdated after each step
    // and recomputed exactly when cancellation eats their accuracy.
    let mut colnorm2: Vec<f64> = (0..n)
        .map(|j| (0..m).map(|r| a.get(r, j) * a.get(r, j)).sum())
        .collect();
    for k in 0..kmax {
        let mut best = k;
        let mut best_norm2 = 0.0;
        for j in k..n {
            if colnorm2[j] > best_norm2 {
                best_norm2 = colnorm2[j];
                best = j;
            }
        }
        // Downdated norms drift; refresh the winner and rescan once if the
        // exact value no longer dominates.
        let exact: f64 = (k..m).map(|r| a.get(r, best) * a.get(r, best)).sum();
        if exact < 0.5 * best_norm2 {
            for j in k..n {
                colnorm2[j] = (k..m).map(|r| a.get(r, j) * a.get(r, j)).sum();
            }
            best = k;
            best_norm2 = 0.0;
            for j in k..n {
                if colnorm2[j] > best_norm2 {
                    best_norm2 = colnorm2[j];
                    best = j;
                }
            }
        } else {
            colnorm2[best] = exact;
            best_norm2 = exact;
        }
        if best_norm2 == 0.0 {
            break; // remaining block is exactly zero
        }
        if best != k {
            for r in 0..m {
                let t = a.get(r, k);
                a.set(r, k, a.get(r, best));
                a.set(r, best, t);
            }
            jpvt.swap(k, best);
            colnorm2.swap(k, best);
        }

        let norm_x = best_norm2.sqrt();
        let sign = if a.get(k, k) >= 0.0 { 1.0 } else { -1.0 };
        let mut v: Vec<f64> = (k..m).map(|r| a.get(r, k)).collect();
        v[0] += sign * norm_x;
        let norm_v: f64 = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        if norm_v == 0.0 {
            continue;
        }
        for t in v.iter_mut() {
            *t /= norm_v;
        }

        // Apply H = I − 2vvᵀ in two row-contiguous passes: w = vᵀA, then
        // A −= 2vwᵀ. Per-column accumulation order matches a column-wise
        // sweep, so results are bit-identical to the naive form.
        let mut w = vec![0.0; n - k];
        for i in 0..m - k {
            let vi = v[i];
            let row = &a.row(k + i)[k..];
            for (wj, &x) in w.iter_mut().zip(row) {
                *wj += vi * x;
            }
        }
        for i in 0..m - k {
            let vi2 = 2.0 * v[i];
            let row = &mut a.row_mut(k + i)[k..];
            for (x, &wj) in row.iter_mut().zip(&w) {
                *x -= vi2 * wj;
            }
        }
        let dot: f64 = (0..m - k).map(|i| v[i] * qty[k + i]).sum();
        for i in 0..m - k {
            qty[k + i] -= 2.0 * v[i] * dot;
        }
        // Annihilated entries are exact zeros, reflected diagonal is exact.
        a.set(k, k, -sign * norm_x);
        for r in k + 1..m {
            a.set(r, k, 0.0);
        }

        // Downdate the remaining partial norms by the eliminated row, with
        // an exact recompute when the subtraction cancels badly.
        for j in k + 1..n {
            let rkj = a.get(k, j);
            let downdated = colnorm2[j] - rkj * rkj;
            colnorm2[j] = if downdated < 1e-6 * colnorm2[j] {
                (k + 1..m).map(|r| a.get(r, j) * a.get(r, j)).sum()
            } else {
                downdated
            };
        }
    }

    // Numerical rank from the R diagonal.
    let r00 = a.get(0, 0).abs();
    if r00 == 0.0 {
        return Err(Error::domain("design matrix is identically zero"));
    }
    let tol = r00 * f64::EPSILON * (m.max(n) as f64) * RANK_RTOL_FACTOR;
    let mut rank = 0;
    for k in 0..kmax {
        if a.get(k, k).abs() > tol {
            rank = k + 1;
        } else {
            break;
        }
    }

    let beta_permuted = if rank == n {
        back_substitute(&a, rank, &qty)
    } else {
        minimal_norm_solution(&mut a, rank, n, &qty)
    };

    let mut beta = vec![0.0; n];
    for (j, &col) in jpvt.iter().enumerate() {
        beta[col] = beta_permuted[j] / col_scale[col];
    }

    let fitted = x.mul_vec(&beta);
    let residual: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let sum_abs_residual: f64 = residual.iter().map(|r| r.abs()).sum();
    let xt_r = x.transpose_mul_vec(&residual);
    let xt_y = x.transpose_mul_vec(y);
    let num = xt_r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let den = xt_y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let normal_eq_residual = if den > 0.0 { num / den } else { num };

    Ok(OlsFit {
        training_mae: sum_abs_residual / m as f64,
        beta,
        rank,
        fitted,
        sum_abs_residual,
        normal_eq_residual,
    })
}

/// Solves R[0..r,0..r]·x = c for upper triangular R.
fn back_substitute(a: &Matrix, r: usize, qty: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; a.cols()];
    for i in (0..r).rev() {
        let mut s = qty[i];
        for j in i + 1..r {
            s -= a.get(i, j) * x[j];
        }
        x[i] = s / a.get(i, i);
    }
    x
}

/// Completes the orthogonal decomposition: annihilates the trailing block
/// of the first `rank` rows with reflectors from the right, solves the
/// triangular core, and maps the solution back. The free directions carry
/// zero weight, which is what makes the result minimal-norm.
fn minimal_norm_solution(a: &mut Matrix, rank: usize, n: usize, qty: &[f64]) -> Vec<f64> {
    // Reflector i acts on the coordinate subset {i} ∪ {rank..n}.
    let mut reflectors: Vec<Option<Vec<f64>>> = vec![None; rank];
    for i in (0..rank).rev() {
        let tail_norm2: f64 = (rank..n).map(|j| a.get(i, j) * a.get(i, j)).sum();
        if tail_norm2 == 0.0 {
            continue;
        }
        let head = a.get(i, i);
        let norm = (head * head + tail_norm2).sqrt();
        let sign = if head >= 0.0 { 1.0 } else { -1.0 };
        let mut v = Vec::with_capacity(1 + n - rank);
        v.push(head + sign * norm);
        for j in rank..n {
            v.push(a.get(i, j));
        }
        let norm_v: f64 = v.iter().map(|t| t * t).sum::<f64>().sqrt();
        for t in v.iter_mut() {
            *t /= norm_v;
        }

        // Apply from the right to rows 0..=i (lower rows are zero there).
        for t in 0..=i {
            let mut dot = v[0] * a.get(t, i);
            for (idx, j) in (rank..n).enumerate() {
                dot += v[idx + 1] * a.get(t, j);
            }
            let val = a.get(t, i) - 2.0 * v[0] * dot;
            a.set(t, i, val);
            for (idx, j) in (rank..n).enumerate() {
                let val = a.get(t, j) - 2.0 * v[idx + 1] * dot;
                a.set(t, j, val);
            }
        }
        reflectors[i] = Some(v);
    }

    let mut x = back_substitute(a, rank, qty);
    // x currently holds u = [T⁻¹c; 0]; apply the reflectors in ascending
    // order to land in the original (permuted) coordinates.
    for (i, refl) in reflectors.iter().enumerate() {
        if let Some(v) = refl {
            let mut dot = v[0] * x[i];
            for (idx, j) in (rank..n).enumerate() {
                dot += v[idx + 1] * x[j];
            }
            x[i] -= 2.0 * v[0] * dot;
            for (idx, j) in (rank..n).enumerate() {
                x[j] -= 2.0 * v[idx + 1] * dot;
            }
        }
    }
    x
}
