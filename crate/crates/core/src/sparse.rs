//! Compressed sparse row storage, reverse Cuthill-McKee ordering and an
//! incomplete Cholesky factorization with threshold dropping.
//!
//! The factorization doubles as the sparse direct solver: with a drop
//! tolerance of zero every fill entry is kept, so `L L^T` reproduces the
//! (permuted) matrix to machine precision.

use std::io::Write;

use crate::error::{Error, Result};

/// CSR matrix with sorted, deduplicated column indices per row.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from coordinate triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &mut [(usize, usize, f64)]) -> CsrMatrix {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in triplets.iter() {
            debug_assert!(r < nrows && c < ncols);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] = indices.len();
                last = Some((r, c));
            }
        }
        for r in 0..nrows {
            if indptr[r + 1] < indptr[r] {
                indptr[r + 1] = indptr[r];
            }
        }
        CsrMatrix { nrows, ncols, indptr, indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.indptr[r], self.indptr[r + 1]);
        (&self.indices[a..b], &self.values[a..b])
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            y[r] = s;
        }
    }

    /// `y += a * A x`.
    pub fn matvec_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        for r in 0..self.nrows {
            let mut s = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                s += self.values[k] * x[self.indices[k]];
            }
            y[r] += a * s;
        }
    }

    /// `y += a * A^T x`.
    pub fn matvec_transpose_add(&self, a: f64, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        for r in 0..self.nrows {
            let xr = a * x[r];
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * xr;
            }
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c + 1] += 1;
        }
        for c in 0..self.ncols {
            counts[c + 1] += counts[c];
        }
        let mut indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = counts.clone();
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let c = self.indices[k];
                let dst = next[c];
                indices[dst] = r;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, &v| a.max(v.abs()))
    }

    /// Largest entry of `|A - A^T|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            let (ci, cv) = self.row(r);
            let (ti, tv) = t.row(r);
            let (mut a, mut b) = (0usize, 0usize);
            while a < ci.len() || b < ti.len() {
                if b >= ti.len() || (a < ci.len() && ci[a] < ti[b]) {
                    worst = worst.max(cv[a].abs());
                    a += 1;
                } else if a >= ci.len() || ti[b] < ci[a] {
                    worst = worst.max(tv[b].abs());
                    b += 1;
                } else {
                    worst = worst.max((cv[a] - tv[b]).abs());
                    a += 1;
                    b += 1;
                }
            }
        }
        worst
    }

    pub fn diag(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows.min(self.ncols)];
        for (r, dr) in d.iter_mut().enumerate() {
            let (ci, cv) = self.row(r);
            if let Ok(k) = ci.binary_search(&r) {
                *dr = cv[k];
            }
        }
        d
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[k])] += self.values[k];
            }
        }
        m
    }

    /// Matrix Market coordinate format (general, real).
    pub fn write_matrix_market<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                writeln!(out, "{} {} {:.17e}", r + 1, self.indices[k] + 1, self.values[k])?;
            }
        }
        Ok(())
    }
}

/// Reverse Cuthill-McKee ordering of a symmetric sparsity pattern.
/// Returns `perm` with `perm[new] = old`; disconnected components are kept
/// contiguous.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows;
    let degree = |v: usize| a.indptr[v + 1] - a.indptr[v];
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);

    let bfs_layers = |start: usize, visited_scratch: &mut Vec<i32>| -> (usize, Vec<usize>) {
        // Returns (eccentric node, last layer) for pseudo-peripheral search.
        visited_scratch.iter_mut().for_each(|x| *x = -1);
        visited_scratch[start] = 0;
        let mut frontier = vec![start];
        let mut last = vec![start];
        let mut depth = 0;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &v in &frontier {
                for k in a.indptr[v]..a.indptr[v + 1] {
                    let w = a.indices[k];
                    if w != v && visited_scratch[w] < 0 {
                        visited_scratch[w] = depth + 1;
                        next.push(w);
                    }
                }
            }
            if !next.is_empty() {
                last = next.clone();
                depth += 1;
            }
            frontier = next;
        }
        let best = *last.iter().min_by_key(|&&v| degree(v)).unwrap();
        (best, last)
    };

    let mut scratch = vec![-1i32; n];
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        // Pseudo-peripheral start: two BFS sweeps from the seed.
        let (far, _) = bfs_layers(seed, &mut scratch);
        let (start, _) = bfs_layers(far, &mut scratch);

        let component_begin = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = component_begin;
        while head < order.len() {
            let v = order[head];
            head += 1;
            let mut nbrs: Vec<usize> = (a.indptr[v]..a.indptr[v + 1])
                .map(|k| a.indices[k])
                .filter(|&w| w != v && !visited[w])
                .collect();
            nbrs.sort_unstable_by_key(|&w| (degree(w), w));
            for w in nbrs {
                if !visited[w] {
                    visited[w] = true;
                    order.push(w);
                }
            }
        }
        order[component_begin..].reverse();
    }
    order
}

/// Incomplete (or, with `droptol = 0`, complete) Cholesky factor of an SPD
/// matrix, stored column-wise with the diagonal entry first in each column.
#[derive(Debug, Clone)]
pub struct IctFactor {
    pub n: usize,
    /// `perm[new] = old`; identity when no reordering was requested.
    pub perm: Vec<usize>,
    colptr: Vec<usize>,
    rows: Vec<usize>,
    vals: Vec<f64>,
    /// Diagonal shift that was needed to complete the factorization.
    pub shift: f64,
    /// Number of entries dropped under the threshold rule.
    pub dropped: usize,
}

/// Incomplete Cholesky with threshold dropping: an entry of column `j` is
/// kept when `|w_i| >= droptol * ||A_lower(:, j)||_1`. Breakdown (nonpositive
/// pivot) restarts the factorization on `A + shift I`, with the shift
/// starting at `1e-3` times the mean diagonal and doubling.
pub fn incomplete_cholesky(a: &CsrMatrix, droptol: f64, reorder: bool) -> Result<IctFactor> {
    assert_eq!(a.nrows, a.ncols, "square matrix required");
    let n = a.nrows;
    let perm: Vec<usize> = if reorder { rcm_ordering(a) } else { (0..n).collect() };
    let mut iperm = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }

    // Lower triangle of the permuted matrix in CSC (= CSR of the upper
    // triangle of the permuted matrix, built row by row).
    let mut lower_cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for old_r in 0..n {
        let r = iperm[old_r];
        for k in a.indptr[old_r]..a.indptr[old_r + 1] {
            let c = iperm[a.indices[k]];
            if r >= c {
                lower_cols[c].push((r, a.values[k]));
            }
        }
    }
    for col in lower_cols.iter_mut() {
        col.sort_unstable_by_key(|&(r, _)| r);
    }

    let diag_mean = {
        let mut s = 0.0;
        for (j, col) in lower_cols.iter().enumerate() {
            if let Some(&(r, v)) = col.first() {
                if r == j {
                    s += v.abs();
                }
            }
        }
        (s / n as f64).max(f64::MIN_POSITIVE)
    };

    let mut shift = 0.0;
    for attempt in 0..=60 {
        match try_factor(n, &lower_cols, droptol, shift) {
            Ok((colptr, rows, vals, dropped)) => {
                return Ok(IctFactor { n, perm, colptr, rows, vals, shift, dropped });
            }
            Err(_) if attempt < 60 => {
                shift = if shift == 0.0 { 1e-3 * diag_mean } else { 2.0 * shift };
            }
            Err(_) => break,
        }
    }
    Err(Error::FactorizationBreakdown { shifts: 60 })
}

/// `(colptr, rows, vals, dropped)` of a completed factorization attempt.
type FactorArrays = (Vec<usize>, Vec<usize>, Vec<f64>, usize);

fn try_factor(
    n: usize,
    lower_cols: &[Vec<(usize, f64)>],
    droptol: f64,
    shift: f64,
) -> std::result::Result<FactorArrays, ()> {
    let mut l_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut l_vals: Vec<Vec<f64>> = vec![Vec::new(); n];
    // Jones-Plassmann linked lists: for each row j, the chain of columns k < j
    // whose next unconsumed entry sits in row j.
    let mut list_head: Vec<usize> = vec![usize::MAX; n];
    let mut list_next: Vec<usize> = vec![usize::MAX; n];
    let mut active_pos: Vec<usize> = vec![0; n];

    let mut w = vec![0.0f64; n];
    let mut marked = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    let mut dropped = 0usize;

    for j in 0..n {
        // Scatter A_lower(:, j) + shift on the diagonal.
        let mut colnorm = shift;
        for &(r, v) in &lower_cols[j] {
            if !marked[r] {
                marked[r] = true;
                pattern.push(r);
                w[r] = 0.0;
            }
            w[r] += v;
            colnorm += v.abs();
        }
        if !marked[j] {
            marked[j] = true;
            pattern.push(j);
            w[j] = 0.0;
        }
        w[j] += shift;
        let tau = droptol * colnorm;

        // Apply updates from all columns k with L[j,k] != 0.
        let mut k = list_head[j];
        list_head[j] = usize::MAX;
        while k != usize::MAX {
            let next_k = list_next[k];
            let pos = active_pos[k];
            let ljk = l_vals[k][pos];
            for t in pos..l_rows[k].len() {
                let i = l_rows[k][t];
                if !marked[i] {
                    marked[i] = true;
                    pattern.push(i);
                    w[i] = 0.0;
                }
                w[i] -= ljk * l_vals[k][t];
            }
            if pos + 1 < l_rows[k].len() {
                active_pos[k] = pos + 1;
                let next_row = l_rows[k][pos + 1];
                list_next[k] = list_head[next_row];
                list_head[next_row] = k;
            }
            k = next_k;
        }

        let pivot = w[j];
        if pivot <= 0.0 || !pivot.is_finite() {
            for &i in &pattern {
                marked[i] = false;
            }
            pattern.clear();
            return Err(());
        }
        let djj = pivot.sqrt();

        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(pattern.len());
        for &i in &pattern {
            marked[i] = false;
            if i == j {
                continue;
            }
            debug_assert!(i > j);
            if w[i].abs() >= tau || droptol == 0.0 {
                entries.push((i, w[i] / djj));
            } else if w[i] != 0.0 {
                dropped += 1;
            }
        }
        pattern.clear();
        entries.sort_unstable_by_key(|&(i, _)| i);

        let mut rows = Vec::with_capacity(entries.len() + 1);
        let mut vals = Vec::with_capacity(entries.len() + 1);
        rows.push(j);
        vals.push(djj);
        for (i, v) in entries {
            rows.push(i);
            vals.push(v);
        }
        if rows.len() > 1 {
            active_pos[j] = 1;
            let next_row = rows[1];
            list_next[j] = list_head[next_row];
            list_head[next_row] = j;
        }
        l_rows[j] = rows;
        l_vals[j] = vals;
    }

    let mut colptr = Vec::with_capacity(n + 1);
    colptr.push(0);
    let total: usize = l_rows.iter().map(|r| r.len()).sum();
    let mut rows = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    for j in 0..n {
        rows.extend_from_slice(&l_rows[j]);
        vals.extend_from_slice(&l_vals[j]);
        colptr.push(rows.len());
    }
    Ok((colptr, rows, vals, dropped))
}

impl IctFactor {
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Solves `A x ≈ b` via `P^T L L^T P`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        self.solve_into(b, &mut x);
        x
    }

    pub fn solve_into(&self, b: &[f64], x: &mut [f64]) {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            y[new] = b[old];
        }
        // Forward solve L y = b (column-oriented).
        for j in 0..n {
            let (a, e) = (self.colptr[j], self.colptr[j + 1]);
            let yj = y[j] / self.vals[a];
            y[j] = yj;
            for k in (a + 1)..e {
                y[self.rows[k]] -= self.vals[k] * yj;
            }
        }
        // Backward solve L^T z = y.
        for j in (0..n).rev() {
            let (a, e) = (self.colptr[j], self.colptr[j + 1]);
            let mut s = y[j];
            for k in (a + 1)..e {
                s -= self.vals[k] * y[self.rows[k]];
            }
            y[j] = s / self.vals[a];
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
    }

    /// Reconstructs `P^T L L^T P` densely (test oracle).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.n;
        let mut l = nalgebra::DMatrix::zeros(n, n);
        for j in 0..n {
            for k in self.colptr[j]..self.colptr[j + 1] {
                l[(self.rows[k], j)] = self.vals[k];
            }
        }
        let llt = &l * l.transpose();
        let mut out = nalgebra::DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(self.perm[i], self.perm[j])] = llt[(i, j)];
            }
        }
        out
    }
}
