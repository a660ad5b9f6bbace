use super::LinearOperator;

/// Compressed sparse row matrix with sorted column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<u32>,
    pub data: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros_with_pattern(nrows: usize, ncols: usize, indptr: Vec<usize>, indices: Vec<u32>) -> Self {
        let nnz = indices.len();
        CsrMatrix { nrows, ncols, indptr, indices, data: vec![0.0; nnz] }
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut cols = vec![0u32; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[next[r]] = c as u32;
            vals[next[r]] = v;
            next[r] += 1;
        }
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data = Vec::with_capacity(triplets.len());
        for r in 0..nrows {
            let mut row: Vec<(u32, f64)> =
                (counts[r]..counts[r + 1]).map(|k| (cols[k], vals[k])).collect();
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if indices.len() > indptr[r] && *indices.last().unwrap() == c {
                    *data.last_mut().unwrap() += v;
                } else {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        CsrMatrix { nrows, ncols, indptr, indices, data }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.indptr[i]..self.indptr[i + 1];
        (&self.indices[r.clone()], &self.data[r])
    }

    /// Position of entry `(i, j)` in `data`, if it is part of the pattern.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let start = self.indptr[i];
        let cols = &self.indices[start..self.indptr[i + 1]];
        cols.binary_search(&(j as u32)).ok().map(|k| start + k)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows).map(|i| self.find(i, i).map_or(0.0, |k| self.data[k])).collect()
    }

    pub fn spmv(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.nrows) {
            let mut s = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                s += self.data[k] * x[self.indices[k] as usize];
            }
            *yi = s;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.indices {
            counts[c as usize + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut indices = vec![0u32; self.nnz()];
        let mut data = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                let c = self.indices[k] as usize;
                indices[next[c]] = i as u32;
                data[next[c]] = self.data[k];
                next[c] += 1;
            }
        }
        CsrMatrix { nrows: self.ncols, ncols: self.nrows, indptr: counts, indices, data }
    }

    /// Sparse product `self · other`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.ncols, other.nrows);
        let mut marker = vec![usize::MAX; other.ncols];
        let mut acc = vec![0.0; other.ncols];
        let mut indptr = Vec::with_capacity(self.nrows + 1);
        indptr.push(0);
        let mut indices: Vec<u32> = Vec::new();
        let mut data = Vec::new();
        let mut cols: Vec<u32> = Vec::new();
        for i in 0..self.nrows {
            cols.clear();
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = self.data[k];
                let r = self.indices[k] as usize;
                for m in other.indptr[r]..other.indptr[r + 1] {
                    let j = other.indices[m] as usize;
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        cols.push(j as u32);
                    }
                    acc[j] += a * other.data[m];
                }
            }
            cols.sort_unstable();
            for &j in &cols {
                indices.push(j);
                data.push(acc[j as usize]);
            }
            indptr.push(indices.len());
        }
        CsrMatrix { nrows: self.nrows, ncols: other.ncols, indptr, indices, data }
    }

    /// Row-major dense copy; intended for small matrices only.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.nrows * self.ncols];
        for i in 0..self.nrows {
            for k in self.indptr[i]..self.indptr[i + 1] {
                d[i * self.ncols + self.indices[k] as usize] += self.data[k];
            }
        }
        d
    }

    /// Largest absolute difference between the matrix and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            for (c, v) in ca.iter().zip(va) {
                let other = t.find(i, *c as usize).map_or(0.0, |k| t.data[k]);
                worst = worst.max((v - other).abs());
            }
        }
        worst
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.spmv(x, y);
    }
}

/// Sparsity pattern of a trilinear nodal discretization on a structured
/// grid: every node couples to its 27 neighbours, with `block` unknowns per
/// node numbered `node·block + component`.
pub fn structured_pattern(node_dims: [usize; 3], block: usize) -> CsrMatrix {
    let [nx, ny, nz] = node_dims;
    let nodes = nx * ny * nz;
    let n = nodes * block;
    let mut indptr = Vec::with_capacity(n + 1);
    indptr.push(0);
    let mut indices = Vec::with_capacity(n * 27 * block);
    let mut neigh = Vec::with_capacity(27);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                neigh.clear();
                for kk in k.saturating_sub(1)..=(k + 1).min(nz - 1) {
                    for jj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                        for ii in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                            neigh.push(ii + nx * (jj + ny * kk));
                        }
                    }
                }
                for _c in 0..block {
                    for &m in &neigh {
                        for d in 0..block {
                            indices.push((m * block + d) as u32);
                        }
                    }
                    indptr.push(indices.len());
                }
            }
        }
    }
    CsrMatrix::zeros_with_pattern(n, n, indptr, indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_transpose_and_product() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.0), (0, 2, 2.0), (1, 1, 3.0), (0, 0, 1.0)]);
        assert_eq!(a.to_dense(), vec![2.0, 0.0, 2.0, 0.0, 3.0, 0.0]);
        let at = a.transpose();
        assert_eq!(at.to_dense(), vec![2.0, 0.0, 0.0, 3.0, 2.0, 0.0]);
        let p = a.matmul(&at);
        assert_eq!(p.to_dense(), vec![8.0, 0.0, 0.0, 9.0]);
        let mut y = vec![0.0; 2];
        a.spmv(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, vec![4.0, 3.0]);
    }

    #[test]
    fn structured_pattern_sizes() {
        let p = structured_pattern([3, 3, 3], 1);
        assert_eq!(p.nrows, 27);
        // corner rows couple to 8 nodes, the center node to all 27
        assert_eq!(p.row(0).0.len(), 8);
        assert_eq!(p.row(13).0.len(), 27);
        let p3 = structured_pattern([2, 2, 2], 3);
        assert_eq!(p3.nnz(), 24 * 24);
        assert!(p3.row(5).0.windows(2).all(|w| w[0] < w[1]));
    }
}
