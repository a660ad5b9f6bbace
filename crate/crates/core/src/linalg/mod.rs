//! Sparse matrices, Krylov solvers and a geometric multigrid preconditioner
//! for structured grids.

mod csr;
mod krylov;
mod multigrid;

pub use csr::{structured_pattern, CsrMatrix};
pub use krylov::{minres, pcg, SolveStats};
pub use multigrid::{Multigrid, MultigridOptions};

use crate::error::Result;

pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Symmetric positive definite approximation of an inverse.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

/// Diagonal scaling. Zero diagonal entries are left unscaled.
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(diag: &[f64]) -> Self {
        Jacobi { inv_diag: diag.iter().map(|d| if *d != 0.0 { 1.0 / d } else { 1.0 }).collect() }
    }

    pub fn from_matrix(a: &CsrMatrix) -> Self {
        Self::new(&a.diagonal())
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Replaces every Dirichlet row and column by the identity and returns the
/// right-hand side that enforces `x[i] = values[i]` on fixed entries.
/// `rhs` holds the load on free entries on input.
pub fn apply_dirichlet(a: &mut CsrMatrix, fixed: &[bool], values: &[f64], rhs: &mut [f64]) -> Result<()> {
    for i in 0..a.nrows {
        let (start, end) = (a.indptr[i], a.indptr[i + 1]);
        if fixed[i] {
            for k in start..end {
                a.data[k] = if a.indices[k] as usize == i { 1.0 } else { 0.0 };
            }
            rhs[i] = values[i];
        } else {
            for k in start..end {
                let j = a.indices[k] as usize;
                if fixed[j] {
                    rhs[i] -= a.data[k] * values[j];
                    a.data[k] = 0.0;
                }
            }
        }
    }
    Ok(())
}
