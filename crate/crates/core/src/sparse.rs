//! Coordinate-list sparse matrices and the few dense helpers the builders need.

use ndarray::{Array2, ShapeBuilder};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default refusal threshold for dense conversion: 2 GiB.
pub const DEFAULT_DENSE_BUDGET: usize = 2 << 30;

/// Sparse complex square matrix in coordinate-list form.
///
/// Entries are kept sorted by (row, col) with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct CooMatrix {
    pub dim: usize,
    pub entries: Vec<(u32, u32, C64)>,
}

impl CooMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn from_entries(dim: usize, mut entries: Vec<(u32, u32, C64)>) -> Self {
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(u32, u32, C64)> = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != C64::new(0.0, 0.0));
        Self { dim, entries: merged }
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Append α · (a ⊗ b) where a, b are dense square factors.
    ///
    /// The Kronecker index convention is (i·m + j, k·m + l) for a of dimension n
    /// and b of dimension m; entries are unsorted until `from_entries` runs.
    pub fn push_scaled_kron(
        out: &mut Vec<(u32, u32, C64)>,
        alpha: C64,
        a: &Array2<C64>,
        b: &Array2<C64>,
    ) {
        let m = b.nrows();
        for ((i, k), &av) in a.indexed_iter() {
            if av == C64::new(0.0, 0.0) {
                continue;
            }
            for ((j, l), &bv) in b.indexed_iter() {
                if bv == C64::new(0.0, 0.0) {
                    continue;
                }
                out.push((
                    (i * m + j) as u32,
                    (k * m + l) as u32,
                    alpha * av * bv,
                ));
            }
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.fill(C64::new(0.0, 0.0));
        for &(r, c, v) in &self.entries {
            y[r as usize] += v * x[c as usize];
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Dense column-major conversion, refused above the memory budget.
    pub fn to_dense(&self, budget: Option<usize>) -> Result<Array2<C64>> {
        let budget = budget.unwrap_or(DEFAULT_DENSE_BUDGET);
        let required = self.dim * self.dim * std::mem::size_of::<C64>();
        if required > budget {
            return Err(Error::MemoryBudget { required, budget });
        }
        let mut a = Array2::zeros((self.dim, self.dim).f());
        for &(r, c, v) in &self.entries {
            a[(r as usize, c as usize)] += v;
        }
        Ok(a)
    }
}

/// Dense Kronecker product a ⊗ b.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (an, am) = a.dim();
    let (bn, bm) = b.dim();
    let mut out = Array2::zeros((an * bn, am * bm));
    for ((i, k), &av) in a.indexed_iter() {
        if av == C64::new(0.0, 0.0) {
            continue;
        }
        for ((j, l), &bv) in b.indexed_iter() {
            out[(i * bn + j, k * bm + l)] = av * bv;
        }
    }
    out
}

/// Identity matrix of dimension n.
pub fn eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Largest absolute entry of a dense matrix.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}
