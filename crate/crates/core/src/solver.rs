//! Compressed-row sparse matrices, Dirichlet reduction of the assembled
//! system and a Jacobi-preconditioned conjugate gradient solver.

use crate::error::{Error, Result};
use crate::fem::LinearSystem;

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from `(row, col, value)` triplets; duplicates are
    /// summed in input order.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        // stable: equal (row, col) keep insertion order, so sums are reproducible
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1));
        let mut row_offsets = vec![0; n_rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for k in order {
            let (r, c, v) = triplets[k];
            assert!(r < n_rows && c < n_cols, "triplet ({r}, {c}) out of bounds");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(c);
                values.push(v);
                row_offsets[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        let trip: Vec<_> = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (i, j, *v)))
            .collect();
        Self::from_triplets(rows.len(), n_cols, &trip)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(col, value)` pairs of row `i`, ascending in `col`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols);
        assert_eq!(y.len(), self.n_rows);
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        if self.n_rows != self.n_cols {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    pub fn is_symmetric(&self, rtol: f64) -> bool {
        self.asymmetry() <= rtol
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_cols]; self.n_rows];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    /// `i j value` triplets, one per line, for debugging dumps.
    pub fn to_triplet_text(&self) -> String {
        let mut s = String::new();
        for i in 0..self.n_rows {
            for (j, v) in self.row(i) {
                s.push_str(&format!("{i} {j} {v}\n"));
            }
        }
        s
    }
}

/// Interior block `A11 u_I = f_I - A12 g_B` of an assembled system.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Global vertex id of each reduced unknown.
    pub interior_ids: Vec<usize>,
}

pub fn reduce_system(sys: &LinearSystem) -> ReducedSystem {
    let n = sys.matrix.n_rows();
    let mut local = vec![usize::MAX; n];
    for (k, &g) in sys.interior_ids.iter().enumerate() {
        local[g] = k;
    }
    let mut triplets = Vec::new();
    let mut rhs = Vec::with_capacity(sys.interior_ids.len());
    for (k, &i) in sys.interior_ids.iter().enumerate() {
        let mut b = sys.rhs[i];
        for (j, v) in sys.matrix.row(i) {
            if local[j] != usize::MAX {
                triplets.push((k, local[j], v));
            } else {
                // boundary rows are identity rows, so rhs[j] is g(a_j)
                b -= v * sys.rhs[j];
            }
        }
        rhs.push(b);
    }
    let m = sys.interior_ids.len();
    ReducedSystem {
        matrix: SparseMatrix::from_triplets(m, m, &triplets),
        rhs,
        interior_ids: sys.interior_ids.clone(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub rel_tol: f64,
    /// `None` means `20 n`.
    pub max_iter: Option<usize>,
    /// Systems up to this size are solved by dense elimination.
    pub dense_threshold: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_iter: None,
            dense_threshold: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `|A x - b| / |b|` (absolute when `b = 0`).
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn relative_residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let nb = norm(b);
    if nb == 0.0 {
        norm(&r)
    } else {
        norm(&r) / nb
    }
}

/// Gaussian elimination with partial pivoting; `None` if singular.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
        if m[piv][col] == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            if f != 0.0 {
                for c in col..=n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = ((r + 1)..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    Some(x)
}

/// Dense inverse by solving against unit vectors; `None` if singular.
pub fn dense_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        cols.push(dense_solve(a, &e)?);
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect())
}

/// Solves `A x = b` for symmetric positive-definite `A`.
///
/// Small systems use dense elimination; larger ones use conjugate
/// gradients with diagonal preconditioning. Convergence is judged on the
/// true residual `b - A x`: if the recurrence claims convergence but the
/// true residual is above tolerance, the iteration restarts from the
/// current iterate.
pub fn solve_spd(a: &SparseMatrix, b: &[f64], opts: SolveOptions) -> Result<SolveOutcome> {
    let n = b.len();
    assert_eq!(a.n_rows(), n);
    if n == 0 {
        return Ok(SolveOutcome {
            x: Vec::new(),
            iterations: 0,
            residual: 0.0,
        });
    }
    if n <= opts.dense_threshold {
        if let Some(x) = dense_solve(&a.to_dense(), b) {
            let residual = relative_residual(a, &x, b);
            return Ok(SolveOutcome {
                x,
                iterations: 1,
                residual,
            });
        }
    }
    let max_iter = opts.max_iter.unwrap_or(20 * n);
    let nb = norm(b);
    let target = if nb == 0.0 { opts.rel_tol } else { opts.rel_tol * nb };
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut best = (f64::INFINITY, x.clone());
    let mut iterations = 0;
    let mut ap = vec![0.0; n];
    loop {
        // (re)start from the true residual
        a.matvec_into(&x, &mut ap);
        let mut r: Vec<f64> = b.iter().zip(&ap).map(|(bi, ai)| bi - ai).collect();
        let true_res = norm(&r);
        if true_res < best.0 {
            best = (true_res, x.clone());
        }
        if true_res <= target {
            return Ok(SolveOutcome {
                x,
                iterations,
                residual: if nb == 0.0 { true_res } else { true_res / nb },
            });
        }
        if iterations >= max_iter {
            let (res, x) = best;
            return Err(Error::NoConvergence {
                iterations,
                residual: if nb == 0.0 { res } else { res / nb },
                best: x,
            });
        }
        let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let restart_at = iterations;
        while iterations < max_iter {
            a.matvec_into(&p, &mut ap);
            let pap = dot(&p, &ap);
            if !(pap > 0.0) {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            iterations += 1;
            if norm(&r) <= 0.5 * target {
                break;
            }
            for i in 0..n {
                z[i] = r[i] * inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        if iterations == restart_at {
            // breakdown without progress
            let (res, x) = best;
            return Err(Error::NoConvergence {
                iterations,
                residual: if nb == 0.0 { res } else { res / nb },
                best: x,
            });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemSolution {
    /// Nodal values for every vertex; boundary entries equal the rhs exactly.
    pub u: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Reduces, solves and scatters back to a full nodal vector.
pub fn solve_system(sys: &LinearSystem, opts: SolveOptions) -> Result<SystemSolution> {
    let red = reduce_system(sys);
    let out = solve_spd(&red.matrix, &red.rhs, opts)?;
    let mut u = sys.rhs.clone();
    for (k, &g) in red.interior_ids.iter().enumerate() {
        u[g] = out.x[k];
    }
    Ok(SystemSolution {
        u,
        iterations: out.iterations,
        residual: out.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn triplets_are_merged_and_sorted() {
        let m = SparseMatrix::from_triplets(2, 3, &[(1, 2, 1.0), (0, 1, 2.0), (1, 0, 3.0), (1, 2, 4.0)]);
        assert_eq!(m.row_offsets(), &[0, 1, 3]);
        assert_eq!(m.col_indices(), &[1, 0, 2]);
        assert_eq!(m.values(), &[2.0, 3.0, 5.0]);
        assert_eq!(m.get(1, 2), 5.0);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn identity_system() {
        let b = vec![1.0, -2.0, 3.5, 0.25];
        let opts = SolveOptions {
            dense_threshold: 0,
            ..Default::default()
        };
        let out = solve_spd(&SparseMatrix::identity(4), &b, opts).unwrap();
        assert_eq!(out.x, b);
        assert!(out.iterations <= 1);
    }

    #[test]
    fn scalar_system() {
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 4.0)]);
        let out = solve_spd(&a, &[2.0], SolveOptions::default()).unwrap();
        assert_eq!(out.x, vec![0.5]);
    }

    #[test]
    fn cg_matches_dense() {
        let n = 200;
        let a = laplacian_1d(n);
        let b: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 - 6.0).collect();
        let cg = solve_spd(&a, &b, SolveOptions::default()).unwrap();
        assert!(cg.residual <= 1e-12);
        let dense = dense_solve(&a.to_dense(), &b).unwrap();
        for (x, y) in cg.x.iter().zip(&dense) {
            assert!((x - y).abs() <= 1e-8 * y.abs().max(1.0));
        }
    }

    #[test]
    fn deterministic() {
        let a = laplacian_1d(150);
        let b: Vec<f64> = (0..150).map(|i| (i as f64).sin()).collect();
        let x1 = solve_spd(&a, &b, SolveOptions::default()).unwrap();
        let x2 = solve_spd(&a, &b, SolveOptions::default()).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn no_convergence_reports_best() {
        let a = laplacian_1d(300);
        let b = vec![1.0; 300];
        let opts = SolveOptions {
            max_iter: Some(5),
            ..Default::default()
        };
        match solve_spd(&a, &b, opts) {
            Err(Error::NoConvergence { iterations, residual, best }) => {
                assert_eq!(iterations, 5);
                assert!(residual > 0.0 && residual <= 1.0);
                assert_eq!(best.len(), 300);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn m_matrix_inverse_is_nonnegative() {
        let a = laplacian_1d(12);
        let inv = dense_inverse(&a.to_dense()).unwrap();
        assert!(inv.iter().flatten().all(|&v| v >= -1e-12));
        let x = solve_spd(&a, &[1.0; 12], SolveOptions::default()).unwrap().x;
        assert!(x.iter().all(|&v| v >= -1e-10));
    }
}
