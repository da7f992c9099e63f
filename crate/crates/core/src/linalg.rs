//! Sparse symmetric positive-definite systems: triplet assembly, CSR
//! storage and Jacobi-preconditioned conjugate gradients.
//!
//! Every reduction runs over fixed-size chunks summed in index order, so
//! results are bit-identical for any rayon thread count.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per parallel work item; also the chunk width of dot products.
const CHUNK: usize = 1024;

#[derive(Debug, Clone, Default)]
pub struct TripletBuffer {
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuffer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        TripletBuffer {
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        self.entries.push((row, col, value));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }
}

impl From<Vec<(usize, usize, f64)>> for TripletBuffer {
    fn from(entries: Vec<(usize, usize, f64)>) -> Self {
        TripletBuffer { entries }
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

/// Converts triplets to CSR, summing duplicates.
///
/// Entries are sorted by `(row, col, value bits)` before accumulation, so
/// the output does not depend on insertion order.
pub fn to_csr(buf: &TripletBuffer, n: usize) -> Result<SparseMatrix> {
    if let Some(&(row, col, _)) = buf.entries.iter().find(|(r, c, _)| *r >= n || *c >= n) {
        return Err(Error::IndexOutOfRange { row, col, n });
    }
    let mut sorted = buf.entries.clone();
    sorted.par_sort_unstable_by(|a, b| {
        (a.0, a.1)
            .cmp(&(b.0, b.1))
            .then(a.2.to_bits().cmp(&b.2.to_bits()))
    });

    let mut row_offsets = vec![0; n + 1];
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for &(r, c, v) in &sorted {
        if last == Some((r, c)) {
            *values.last_mut().expect("previous entry") += v;
        } else {
            col_indices.push(c);
            values.push(v);
            row_offsets[r + 1] += 1;
            last = Some((r, c));
        }
    }
    for i in 0..n {
        row_offsets[i + 1] += row_offsets[i];
    }
    Ok(SparseMatrix {
        n,
        row_offsets,
        col_indices,
        values,
    })
}

impl SparseMatrix {
    pub fn dim(&self) -> usize {
        self.n
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

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        self.col_indices[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        match self.col_indices[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`, parallel over row blocks.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(b, chunk)| {
            let base = b * CHUNK;
            for (k, yi) in chunk.iter_mut().enumerate() {
                let i = base + k;
                let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
                *yi = self.col_indices[lo..hi]
                    .iter()
                    .zip(&self.values[lo..hi])
                    .map(|(&j, &a)| a * x[j])
                    .sum();
            }
        });
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Largest `|a_ij - a_ji|` relative to the largest `|a_ij|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                worst = worst.max((a - self.get(j, i)).abs());
            }
        }
        worst / scale
    }
}

/// Chunked dot product with a fixed summation order.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum())
        .collect();
    partial.iter().sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub rel_tol: f64,
    /// `None` means `20 n`.
    pub max_iter: Option<usize>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions {
            rel_tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final true residual `‖b − A x‖ / ‖b‖`.
    pub rel_residual: f64,
}

/// Solves `A x = b` from a zero initial guess.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], opts: CgOptions) -> Result<CgSolution> {
    cg_solve_from(a, b, vec![0.0; b.len()], opts)
}

/// Jacobi-preconditioned CG from the initial guess `x0`.
///
/// Converges when the true residual satisfies `‖A x − b‖ ≤ rel_tol ‖b‖`.
pub fn cg_solve_from(
    a: &SparseMatrix,
    b: &[f64],
    x0: Vec<f64>,
    opts: CgOptions,
) -> Result<CgSolution> {
    let n = a.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::Parameter(format!(
            "cg: matrix is {n}x{n}, rhs has {} entries, guess has {}",
            b.len(),
            x0.len()
        )));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            rel_residual: 0.0,
        });
    }

    let diag = a.diagonal();
    if let Some((row, &value)) = diag.iter().enumerate().find(|(_, d)| !(**d > 0.0)) {
        return Err(Error::Preconditioner { row, value });
    }
    let inv_diag: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();

    let max_iter = opts.max_iter.unwrap_or(20 * n).max(1);
    let target = opts.rel_tol * b_norm;

    let mut x = x0;
    let mut ap = vec![0.0; n];
    let true_residual = |x: &[f64], work: &mut Vec<f64>| -> Vec<f64> {
        a.mul_vec_into(x, work);
        b.iter().zip(work.iter()).map(|(bi, wi)| bi - wi).collect()
    };
    let mut r = true_residual(&x, &mut ap);
    let mut r_norm = norm2(&r);
    if r_norm <= target {
        return Ok(CgSolution {
            x,
            iterations: 0,
            rel_residual: r_norm / b_norm,
        });
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);

    for it in 1..=max_iter {
        a.mul_vec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            // Breakdown: A is not positive definite along p (or p vanished).
            return Err(Error::Solver {
                iterations: it,
                residual: r_norm / b_norm,
            });
        }
        let alpha = rz / pap;
        x.par_iter_mut()
            .zip(p.par_iter())
            .for_each(|(xi, pi)| *xi += alpha * pi);
        r.par_iter_mut()
            .zip(ap.par_iter())
            .for_each(|(ri, api)| *ri -= alpha * api);
        r_norm = norm2(&r);

        if r_norm <= target {
            // Confirm against the true residual; restart from it if the
            // recurrence has drifted.
            r = true_residual(&x, &mut ap);
            r_norm = norm2(&r);
            if r_norm <= target {
                return Ok(CgSolution {
                    x,
                    iterations: it,
                    rel_residual: r_norm / b_norm,
                });
            }
            z = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
            p.clone_from(&z);
            rz = dot(&r, &z);
            continue;
        }

        z.par_iter_mut()
            .zip(r.par_iter().zip(inv_diag.par_iter()))
            .for_each(|(zi, (ri, di))| *zi = ri * di);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        p.par_iter_mut()
            .zip(z.par_iter())
            .for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }

    let r = true_residual(&x, &mut ap);
    Err(Error::Solver {
        iterations: max_iter,
        residual: norm2(&r) / b_norm,
    })
}
