//! Compressed sparse row storage for assembled bilinear forms.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds an `n x n` matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, c, _) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            let k = next[r];
            cols[k] = c;
            vals[k] = v;
            next[r] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for r in 0..n {
            scratch.clear();
            scratch.extend((counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_by_key(|&(c, _)| c);
            for &(c, v) in &scratch {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self {
            n: d.len(),
            row_ptr: (0..=d.len()).collect(),
            col_idx: (0..d.len()).collect(),
            values: d.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *out = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// Checked product.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.mul_vec(x))
    }

    /// `x^T A y`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.row(r).map(|(_, v)| v).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let trip: Vec<_> = (0..self.n)
            .flat_map(|r| self.row(r).map(move |(c, v)| (c, r, v)))
            .collect();
        Self::from_triplets(self.n, &trip)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|r| self.row(r).all(|(c, v)| (v - self.get(c, r)).abs() <= tol))
    }

    pub fn scaled(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    /// `sum_i coeff_i * A_i` over matrices of equal dimension.
    pub fn linear_combination(terms: &[(f64, &CsrMatrix)]) -> Self {
        let n = terms.first().map_or(0, |(_, m)| m.n);
        let trip: Vec<_> = terms
            .iter()
            .flat_map(|&(a, m)| {
                assert_eq!(m.n, n, "dimension mismatch in linear combination");
                (0..m.n).flat_map(move |r| m.row(r).map(move |(c, v)| (r, c, a * v)))
            })
            .collect();
        Self::from_triplets(n, &trip)
    }

    /// Replaces the rows and columns of `fixed` DOFs by the identity so that a
    /// homogeneous constraint `x_i = 0` is imposed while keeping symmetry.
    pub fn constrain_zero(&mut self, fixed: &[bool]) {
        assert_eq!(fixed.len(), self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                if fixed[r] || fixed[c] {
                    self.values[k] = if r == c { 1.0 } else { 0.0 };
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for (r, row) in d.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        d
    }
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: CsrMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    /// `None` if a pivot vanishes or the diagonal is not stored.
    pub fn new(a: &CsrMatrix) -> Option<Self> {
        let mut lu = a.clone();
        let n = lu.n;
        let mut diag_pos = vec![usize::MAX; n];
        for r in 0..n {
            for k in lu.row_ptr[r]..lu.row_ptr[r + 1] {
                if lu.col_idx[k] == r {
                    diag_pos[r] = k;
                }
            }
            if diag_pos[r] == usize::MAX {
                return None;
            }
        }
        let mut pos = vec![usize::MAX; n];
        for r in 0..n {
            let (start, end) = (lu.row_ptr[r], lu.row_ptr[r + 1]);
            for k in start..end {
                pos[lu.col_idx[k]] = k;
            }
            for k in start..end {
                let c = lu.col_idx[k];
                if c >= r {
                    break;
                }
                let pivot = lu.values[diag_pos[c]];
                if pivot == 0.0 || !pivot.is_finite() {
                    return None;
                }
                let f = lu.values[k] / pivot;
                lu.values[k] = f;
                for kk in diag_pos[c] + 1..lu.row_ptr[c + 1] {
                    let p = pos[lu.col_idx[kk]];
                    if p != usize::MAX {
                        lu.values[p] -= f * lu.values[kk];
                    }
                }
            }
            for k in start..end {
                pos[lu.col_idx[k]] = usize::MAX;
            }
            if !(lu.values[diag_pos[r]].abs() > 0.0) {
                return None;
            }
        }
        Some(Self { lu, diag_pos })
    }

    /// `z = (LU)⁻¹ r`
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let m = &self.lu;
        for i in 0..m.n {
            let mut acc = r[i];
            for k in m.row_ptr[i]..self.diag_pos[i] {
                acc -= m.values[k] * z[m.col_idx[k]];
            }
            z[i] = acc;
        }
        for i in (0..m.n).rev() {
            let mut acc = z[i];
            for k in self.diag_pos[i] + 1..m.row_ptr[i + 1] {
                acc -= m.values[k] * z[m.col_idx[k]];
            }
            z[i] = acc / m.values[self.diag_pos[i]];
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
