//! Compressed-column matrices that share one sparsity pattern, so linear
//! combinations are plain value-array arithmetic and one symbolic LU
//! factorisation serves every combination.

use std::sync::Arc;

use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::prelude::*;

use crate::error::{Error, Result};

/// Square compressed-column sparsity pattern with sorted row indices.
#[derive(Debug, PartialEq, Eq)]
pub struct Pattern {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
}

impl Pattern {
    /// Builds the pattern holding every `(row, col)` in `entries`.
    pub fn from_entries(n: usize, entries: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut cols: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, j) in entries {
            cols[j].push(i);
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        col_ptr.push(0);
        for mut c in cols {
            c.sort_unstable();
            c.dedup();
            row_idx.extend_from_slice(&c);
            col_ptr.push(row_idx.len());
        }
        Self { n, col_ptr, row_idx }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Position of `(row, col)` in the value array.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let (lo, hi) = (self.col_ptr[col], self.col_ptr[col + 1]);
        self.row_idx[lo..hi].binary_search(&row).ok().map(|k| lo + k)
    }

    fn symbolic(&self) -> SymbolicSparseColMat<usize> {
        SymbolicSparseColMat::new_checked(
            self.n,
            self.n,
            self.col_ptr.clone(),
            None,
            self.row_idx.clone(),
        )
    }
}

/// A matrix over a shared [`Pattern`].
#[derive(Debug, Clone)]
pub struct SparseMatrix {
    pattern: Arc<Pattern>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let values = vec![0.0; pattern.nnz()];
        Self { pattern, values }
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    pub fn dim(&self) -> usize {
        self.pattern.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Adds `v` to entry `(row, col)`, which must be in the pattern.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self
            .pattern
            .position(row, col)
            .expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pattern.position(row, col).map_or(0.0, |k| self.values[k])
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.pattern.n];
        for (j, &xj) in x.iter().enumerate() {
            let (lo, hi) = (self.pattern.col_ptr[j], self.pattern.col_ptr[j + 1]);
            for k in lo..hi {
                y[self.pattern.row_idx[k]] += self.values[k] * xj;
            }
        }
        y
    }

    /// Iterates over stored entries as `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.pattern.n).flat_map(move |j| {
            (self.pattern.col_ptr[j]..self.pattern.col_ptr[j + 1])
                .map(move |k| (self.pattern.row_idx[k], j, self.values[k]))
        })
    }

    /// `Σ cₖ Aₖ` over matrices sharing one pattern.
    pub fn combine(terms: &[(f64, &SparseMatrix)]) -> Self {
        let pattern = terms[0].1.pattern.clone();
        let mut values = vec![0.0; pattern.nnz()];
        for (c, m) in terms {
            assert!(Arc::ptr_eq(&pattern, &m.pattern), "patterns differ");
            if *c == 0.0 {
                continue;
            }
            for (v, &w) in values.iter_mut().zip(&m.values) {
                *v += c * w;
            }
        }
        Self { pattern, values }
    }

    /// Sum of all entries.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    fn to_faer(&self) -> SparseColMat<usize, f64> {
        SparseColMat::new(self.pattern.symbolic(), self.values.clone())
    }
}

/// Symbolic LU analysis of a pattern, reusable across numeric values.
#[derive(Clone)]
pub struct LuAnalysis {
    pattern: Arc<Pattern>,
    symbolic: SymbolicLu<usize>,
}

impl LuAnalysis {
    pub fn new(pattern: &Arc<Pattern>) -> Result<Self> {
        let sym = pattern.symbolic();
        let symbolic = SymbolicLu::try_new(sym.as_ref())
            .map_err(|e| Error::Singular(format!("symbolic analysis failed: {e:?}")))?;
        Ok(Self {
            pattern: pattern.clone(),
            symbolic,
        })
    }

    pub fn factor(&self, a: &SparseMatrix) -> Result<Factorization> {
        assert!(Arc::ptr_eq(&self.pattern, &a.pattern), "patterns differ");
        let mat = a.to_faer();
        let lu = Lu::try_new_with_symbolic(self.symbolic.clone(), mat.as_ref())
            .map_err(|e| Error::Singular(format!("numeric factorisation failed: {e:?}")))?;
        Ok(Factorization { lu, n: a.dim() })
    }
}

pub struct Factorization {
    lu: Lu<usize, f64>,
    n: usize,
}

impl Factorization {
    /// Solves `A x = b`. A singular factor shows up as non-finite output.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let mut rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().all(|v| v.is_finite()) {
            Ok(x)
        } else {
            Err(Error::Singular("solution is not finite".into()))
        }
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}
