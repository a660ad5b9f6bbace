//! Geometric multigrid for nodal unknowns on a structured grid.
//!
//! Prolongation is the tensor product of 1-D linear interpolation between
//! retained nodes; coarse operators are Galerkin products `Pᵀ A P`. Axes are
//! coarsened only while their spacing is close to the smallest one, which
//! gives semi-coarsening on the flat voxel boxes used here. Fixed (Dirichlet)
//! unknowns are excluded from every coarse space and carried through the
//! smoother unchanged.

use super::{CsrMatrix, Preconditioner};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct MultigridOptions {
    /// Stop coarsening once a level has at most this many unknowns.
    pub coarse_size: usize,
    /// Gauss-Seidel sweeps before and after the coarse correction.
    pub sweeps: usize,
}

impl Default for MultigridOptions {
    fn default() -> Self {
        MultigridOptions { coarse_size: 1200, sweeps: 1 }
    }
}

struct Level {
    a: CsrMatrix,
    /// Interpolation to this level from the next coarser one, and its transpose.
    p: Option<(CsrMatrix, CsrMatrix)>,
}

pub struct Multigrid {
    levels: Vec<Level>,
    coarse: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    sweeps: usize,
}

/// 1-D interpolation from retained nodes to all nodes of one axis.
fn coarsen_axis(coords: &[f64]) -> (Vec<f64>, Vec<Vec<(usize, f64)>>) {
    let n = coords.len();
    let mut keep: Vec<usize> = (0..n).step_by(2).collect();
    if *keep.last().unwrap() != n - 1 {
        keep.push(n - 1);
    }
    let mut weights = vec![Vec::new(); n];
    for c in 0..keep.len() {
        weights[keep[c]].push((c, 1.0));
        if c + 1 < keep.len() {
            let (lo, hi) = (keep[c], keep[c + 1]);
            for (f, wf) in weights.iter_mut().enumerate().take(hi).skip(lo + 1) {
                let s = (coords[f] - coords[lo]) / (coords[hi] - coords[lo]);
                wf.push((c, 1.0 - s));
                wf.push((c + 1, s));
            }
        }
    }
    (keep.iter().map(|&i| coords[i]).collect(), weights)
}

impl Multigrid {
    /// `coords` lists the node coordinates along each axis; unknowns are
    /// numbered `block·(i + nx·(j + ny·k)) + component`.
    pub fn new(
        a: CsrMatrix,
        coords: [Vec<f64>; 3],
        block: usize,
        fixed: &[bool],
        opts: MultigridOptions,
    ) -> Result<Self> {
        let mut levels = Vec::new();
        let mut coords = coords;
        let mut fixed = fixed.to_vec();
        let mut a = a;
        loop {
            let dims = [coords[0].len(), coords[1].len(), coords[2].len()];
            let spacing: Vec<f64> =
                (0..3).map(|d| (coords[d][dims[d] - 1] - coords[d][0]) / (dims[d] - 1).max(1) as f64).collect();
            let hmin = (0..3).filter(|&d| dims[d] > 2).map(|d| spacing[d]).fold(f64::INFINITY, f64::min);
            let coarsen: Vec<bool> = (0..3).map(|d| dims[d] > 2 && spacing[d] <= 1.42 * hmin).collect();
            if a.nrows <= opts.coarse_size || !coarsen.iter().any(|c| *c) {
                break;
            }
            let mut maps = Vec::new();
            let mut new_coords: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
            for d in 0..3 {
                if coarsen[d] {
                    let (c, w) = coarsen_axis(&coords[d]);
                    new_coords[d] = c;
                    maps.push(w);
                } else {
                    new_coords[d] = coords[d].clone();
                    maps.push((0..dims[d]).map(|i| vec![(i, 1.0)]).collect());
                }
            }
            let cdims = [new_coords[0].len(), new_coords[1].len(), new_coords[2].len()];
            let ncoarse = cdims[0] * cdims[1] * cdims[2] * block;
            // a coarse unknown is fixed when the fine unknown it sits on is fixed
            let mut cfixed = vec![false; ncoarse];
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let fnode = i + dims[0] * (j + dims[1] * k);
                        let (wi, wj, wk) = (&maps[0][i], &maps[1][j], &maps[2][k]);
                        if wi.len() == 1 && wj.len() == 1 && wk.len() == 1 {
                            let cnode = wi[0].0 + cdims[0] * (wj[0].0 + cdims[1] * wk[0].0);
                            for c in 0..block {
                                cfixed[cnode * block + c] = fixed[fnode * block + c];
                            }
                        }
                    }
                }
            }
            let nfine = a.nrows;
            let mut indptr = Vec::with_capacity(nfine + 1);
            indptr.push(0);
            let mut indices = Vec::with_capacity(nfine * 8);
            let mut data = Vec::with_capacity(nfine * 8);
            let mut row: Vec<(u32, f64)> = Vec::with_capacity(8);
            for k in 0..dims[2] {
                for j in 0..dims[1] {
                    for i in 0..dims[0] {
                        let fnode = i + dims[0] * (j + dims[1] * k);
                        for c in 0..block {
                            row.clear();
                            if !fixed[fnode * block + c] {
                                for &(ck, wk) in &maps[2][k] {
                                    for &(cj, wj) in &maps[1][j] {
                                        for &(ci, wi) in &maps[0][i] {
                                            let cdof = (ci + cdims[0] * (cj + cdims[1] * ck)) * block + c;
                                            if !cfixed[cdof] {
                                                row.push((cdof as u32, wi * wj * wk));
                                            }
                                        }
                                    }
                                }
                            }
                            row.sort_by_key(|e| e.0);
                            for &(col, w) in &row {
                                indices.push(col);
                                data.push(w);
                            }
                            indptr.push(indices.len());
                        }
                    }
                }
            }
            let p = CsrMatrix { nrows: nfine, ncols: ncoarse, indptr, indices, data };
            let r = p.transpose();
            let ac = with_unit_diagonal(r.matmul(&a.matmul(&p)), &cfixed);
            levels.push(Level { a, p: Some((p, r)) });
            a = ac;
            coords = new_coords;
            fixed = cfixed;
        }
        let n = a.nrows;
        let dense = DMatrix::from_row_slice(n, n, &a.to_dense());
        let coarse = dense
            .cholesky()
            .ok_or_else(|| Error::Numerical(format!("coarse operator of size {n} is not positive definite")))?;
        levels.push(Level { a, p: None });
        Ok(Multigrid { levels, coarse, sweeps: opts.sweeps })
    }

    /// The fine-level operator the hierarchy was built from.
    pub fn finest(&self) -> &CsrMatrix {
        &self.levels[0].a
    }

    pub fn level_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.a.nrows).collect()
    }

    fn vcycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let level = &self.levels[l];
        match &level.p {
            None => {
                let sol = self.coarse.solve(&DVector::from_column_slice(b));
                x.copy_from_slice(sol.as_slice());
            }
            Some((p, r)) => {
                x.iter_mut().for_each(|v| *v = 0.0);
                for _ in 0..self.sweeps {
                    gauss_seidel(&level.a, b, x, true);
                }
                let mut res = vec![0.0; b.len()];
                level.a.spmv(x, &mut res);
                for i in 0..b.len() {
                    res[i] = b[i] - res[i];
                }
                let mut bc = vec![0.0; r.nrows];
                r.spmv(&res, &mut bc);
                let mut xc = vec![0.0; r.nrows];
                self.vcycle(l + 1, &bc, &mut xc);
                let mut corr = vec![0.0; b.len()];
                p.spmv(&xc, &mut corr);
                for i in 0..b.len() {
                    x[i] += corr[i];
                }
                for _ in 0..self.sweeps {
                    gauss_seidel(&level.a, b, x, false);
                }
            }
        }
    }
}

/// Fixed coarse unknowns have empty rows and columns after the Galerkin
/// product; give them a unit diagonal so the operator stays definite.
fn with_unit_diagonal(a: CsrMatrix, fixed: &[bool]) -> CsrMatrix {
    let mut indptr = Vec::with_capacity(a.nrows + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(a.nnz() + a.nrows);
    let mut data = Vec::with_capacity(a.nnz() + a.nrows);
    for i in 0..a.nrows {
        let (cols, vals) = a.row(i);
        if fixed[i] {
            indices.push(i as u32);
            data.push(1.0);
        } else {
            indices.extend_from_slice(cols);
            data.extend_from_slice(vals);
        }
        indptr.push(indices.len());
    }
    CsrMatrix { nrows: a.nrows, ncols: a.ncols, indptr, indices, data }
}

fn gauss_seidel(a: &CsrMatrix, b: &[f64], x: &mut [f64], forward: bool) {
    let n = a.nrows;
    let mut sweep = |i: usize| {
        let mut s = b[i];
        let mut d = 0.0;
        for k in a.indptr[i]..a.indptr[i + 1] {
            let j = a.indices[k] as usize;
            if j == i {
                d = a.data[k];
            } else {
                s -= a.data[k] * x[j];
            }
        }
        if d != 0.0 {
            x[i] = s / d;
        }
    };
    if forward {
        (0..n).for_each(&mut sweep);
    } else {
        (0..n).rev().for_each(&mut sweep);
    }
}

impl Preconditioner for Multigrid {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.vcycle(0, r, z);
    }
}

#[cfg(test)]
mod tests {
    use super::super::{apply_dirichlet, pcg, structured_pattern, Jacobi};
    use super::*;

    /// 7-point Laplacian assembled into the 27-point pattern.
    fn poisson(n: [usize; 3], h: [f64; 3]) -> CsrMatrix {
        let mut a = structured_pattern(n, 1);
        let id = |i: usize, j: usize, k: usize| i + n[0] * (j + n[1] * k);
        for k in 0..n[2] {
            for j in 0..n[1] {
                for i in 0..n[0] {
                    let me = id(i, j, k);
                    let mut link = |o: usize, c: f64| {
                        let kd = a.find(me, me).unwrap();
                        a.data[kd] += c;
                        let ko = a.find(me, o).unwrap();
                        a.data[ko] -= c;
                    };
                    if i + 1 < n[0] {
                        link(id(i + 1, j, k), 1.0 / (h[0] * h[0]));
                    }
                    if i > 0 {
                        link(id(i - 1, j, k), 1.0 / (h[0] * h[0]));
                    }
                    if j + 1 < n[1] {
                        link(id(i, j + 1, k), 1.0 / (h[1] * h[1]));
                    }
                    if j > 0 {
                        link(id(i, j - 1, k), 1.0 / (h[1] * h[1]));
                    }
                    if k + 1 < n[2] {
                        link(id(i, j, k + 1), 1.0 / (h[2] * h[2]));
                    }
                    if k > 0 {
                        link(id(i, j, k - 1), 1.0 / (h[2] * h[2]));
                    }
                }
            }
        }
        a
    }

    #[test]
    fn multigrid_beats_jacobi_on_anisotropic_poisson() {
        let n = [33, 12, 33];
        let h = [1.0 / 32.0, 1.0 / 96.0, 1.0 / 32.0];
        let mut a = poisson(n, h);
        let total = n[0] * n[1] * n[2];
        let fixed: Vec<bool> = (0..total).map(|d| d % n[0] == 0 || d % n[0] == n[0] - 1).collect();
        let values: Vec<f64> = (0..total).map(|d| if d % n[0] == 0 { 1.0 } else { 0.0 }).collect();
        let mut rhs = vec![0.0; total];
        apply_dirichlet(&mut a, &fixed, &values, &mut rhs).unwrap();
        let coords = [0, 1, 2].map(|d| (0..n[d]).map(|i| i as f64 * h[d]).collect::<Vec<_>>());
        let mg = Multigrid::new(a.clone(), coords, 1, &fixed, MultigridOptions::default()).unwrap();
        assert!(mg.level_sizes().len() > 2);
        let mut x = values.clone();
        let s_mg = pcg(&a, &mg, &rhs, &mut x, 1e-10, 500).unwrap();
        let mut xj = values.clone();
        let s_j = pcg(&a, &Jacobi::from_matrix(&a), &rhs, &mut xj, 1e-10, 5000).unwrap();
        assert!(s_mg.iterations * 4 < s_j.iterations, "mg {} jacobi {}", s_mg.iterations, s_j.iterations);
        // exact solution is linear in x
        for (d, v) in x.iter().enumerate() {
            let i = d % n[0];
            assert!((v - (1.0 - i as f64 / 32.0)).abs() < 1e-7);
        }
    }

    #[test]
    fn odd_axis_coarsening_keeps_end_nodes() {
        let (c, w) = coarsen_axis(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(c, vec![0.0, 2.0, 3.0]);
        assert_eq!(w[1], vec![(0, 0.5), (1, 0.5)]);
        assert_eq!(w[3], vec![(2, 1.0)]);
    }
}
