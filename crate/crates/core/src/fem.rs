//! Trilinear hexahedral elements on a uniform voxel grid.
//!
//! Every voxel has the same shape, so the element integrals are computed once
//! per spacing and combined with the per-cell material at assembly time.
//! Local node `a` sits at offset `(a & 1, (a >> 1) & 1, (a >> 2) & 1)`.

use crate::linalg::{structured_pattern, CsrMatrix};

const GAUSS: f64 = 0.577_350_269_189_625_8;

/// Strain and stress vectors use the Mandel convention
/// `[xx, yy, zz, √2·yz, √2·xz, √2·xy]`.
pub type Mandel = [f64; 6];

pub struct Hex8 {
    pub h: [f64; 3],
    pub volume: f64,
    /// `∫ ∂N_p/∂x_a ∂N_q/∂x_b`, indexed `[a][b][p][q]`.
    scalar_basis: [[[[f64; 8]; 8]; 3]; 3],
    /// `∫ B_I Bᵀ_J`, indexed `[I·6 + J][p·24 + q]`.
    elastic_basis: Vec<[f64; 576]>,
    /// `∫ ∇N_p`, indexed `[a][p]`.
    pub grad_integral: [[f64; 8]; 3],
    /// `∫ B`, indexed `[I][dof]`.
    pub strain_integral: [[f64; 24]; 6],
}

fn shape_gradients(xi: [f64; 3], h: [f64; 3]) -> [[f64; 8]; 3] {
    let mut g = [[0.0; 8]; 3];
    for a in 0..8 {
        let s = [
            if a & 1 == 1 { 1.0 } else { -1.0 },
            if (a >> 1) & 1 == 1 { 1.0 } else { -1.0 },
            if (a >> 2) & 1 == 1 { 1.0 } else { -1.0 },
        ];
        let n = [(1.0 + s[0] * xi[0]) / 2.0, (1.0 + s[1] * xi[1]) / 2.0, (1.0 + s[2] * xi[2]) / 2.0];
        g[0][a] = s[0] / 2.0 * n[1] * n[2] * 2.0 / h[0];
        g[1][a] = n[0] * s[1] / 2.0 * n[2] * 2.0 / h[1];
        g[2][a] = n[0] * n[1] * s[2] / 2.0 * 2.0 / h[2];
    }
    g
}

fn strain_matrix(g: &[[f64; 8]; 3]) -> [[f64; 24]; 6] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut b = [[0.0; 24]; 6];
    for a in 0..8 {
        let (ux, uy, uz) = (3 * a, 3 * a + 1, 3 * a + 2);
        b[0][ux] = g[0][a];
        b[1][uy] = g[1][a];
        b[2][uz] = g[2][a];
        b[3][uy] = r * g[2][a];
        b[3][uz] = r * g[1][a];
        b[4][ux] = r * g[2][a];
        b[4][uz] = r * g[0][a];
        b[5][ux] = r * g[1][a];
        b[5][uy] = r * g[0][a];
    }
    b
}

impl Hex8 {
    pub fn new(h: [f64; 3]) -> Self {
        let volume = h[0] * h[1] * h[2];
        let wgt = volume / 8.0;
        let mut scalar_basis = [[[[0.0; 8]; 8]; 3]; 3];
        let mut elastic_basis = vec![[0.0; 576]; 36];
        let mut grad_integral = [[0.0; 8]; 3];
        let mut strain_integral = [[0.0; 24]; 6];
        for gp in 0..8 {
            let xi = [
                if gp & 1 == 1 { GAUSS } else { -GAUSS },
                if (gp >> 1) & 1 == 1 { GAUSS } else { -GAUSS },
                if (gp >> 2) & 1 == 1 { GAUSS } else { -GAUSS },
            ];
            let g = shape_gradients(xi, h);
            let b = strain_matrix(&g);
            for a in 0..3 {
                for c in 0..3 {
                    for p in 0..8 {
                        for q in 0..8 {
                            scalar_basis[a][c][p][q] += wgt * g[a][p] * g[c][q];
                        }
                    }
                }
                for p in 0..8 {
                    grad_integral[a][p] += wgt * g[a][p];
                }
            }
            for i in 0..6 {
                for j in 0..6 {
                    let m = &mut elastic_basis[i * 6 + j];
                    for p in 0..24 {
                        if b[i][p] == 0.0 {
                            continue;
                        }
                        for q in 0..24 {
                            m[p * 24 + q] += wgt * b[i][p] * b[j][q];
                        }
                    }
                }
                for p in 0..24 {
                    strain_integral[i][p] += wgt * b[i][p];
                }
            }
        }
        Hex8 { h, volume, scalar_basis, elastic_basis, grad_integral, strain_integral }
    }

    /// Element matrix for a constant symmetric conductivity tensor.
    pub fn scalar_matrix(&self, k: &[[f64; 3]; 3]) -> [[f64; 8]; 8] {
        let mut ke = [[0.0; 8]; 8];
        for a in 0..3 {
            for c in 0..3 {
                let kac = k[a][c];
                if kac == 0.0 {
                    continue;
                }
                let m = &self.scalar_basis[a][c];
                for p in 0..8 {
                    for q in 0..8 {
                        ke[p][q] += kac * m[p][q];
                    }
                }
            }
        }
        ke
    }

    /// Element stiffness for a constant Mandel stiffness matrix.
    pub fn elastic_matrix(&self, c: &[[f64; 6]; 6], ke: &mut [f64; 576]) {
        ke.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..6 {
            for j in 0..6 {
                let cij = c[i][j];
                if cij == 0.0 {
                    continue;
                }
                let m = &self.elastic_basis[i * 6 + j];
                for (kv, mv) in ke.iter_mut().zip(m.iter()) {
                    *kv += cij * mv;
                }
            }
        }
    }
}

/// Node layout of a grid with `cells` voxels per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeGrid {
    pub cells: [usize; 3],
}

impl NodeGrid {
    pub fn dims(&self) -> [usize; 3] {
        [self.cells[0] + 1, self.cells[1] + 1, self.cells[2] + 1]
    }

    pub fn count(&self) -> usize {
        let d = self.dims();
        d[0] * d[1] * d[2]
    }

    pub fn id(&self, i: usize, j: usize, k: usize) -> usize {
        let d = self.dims();
        i + d[0] * (j + d[1] * k)
    }

    pub fn ijk(&self, n: usize) -> [usize; 3] {
        let d = self.dims();
        [n % d[0], (n / d[0]) % d[1], n / (d[0] * d[1])]
    }

    /// Global node ids of the eight corners of cell `(i, j, k)`.
    pub fn element_nodes(&self, i: usize, j: usize, k: usize) -> [usize; 8] {
        let mut out = [0; 8];
        for (a, o) in out.iter_mut().enumerate() {
            *o = self.id(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
        }
        out
    }

    pub fn on_boundary(&self, n: usize) -> bool {
        let [i, j, k] = self.ijk(n);
        let d = self.dims();
        i == 0 || j == 0 || k == 0 || i == d[0] - 1 || j == d[1] - 1 || k == d[2] - 1
    }

    pub fn coords(&self, h: [f64; 3], origin: [f64; 3]) -> [Vec<f64>; 3] {
        let d = self.dims();
        [0, 1, 2].map(|a| (0..d[a]).map(|i| origin[a] + i as f64 * h[a]).collect())
    }

    pub fn pattern(&self, block: usize) -> CsrMatrix {
        structured_pattern(self.dims(), block)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_matrix_annihilates_constants() {
        let e = Hex8::new([0.1, 0.03, 0.1]);
        let k = [[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 3.0]];
        let ke = e.scalar_matrix(&k);
        for row in ke.iter() {
            assert!(row.iter().sum::<f64>().abs() < 1e-9);
        }
        for p in 0..8 {
            for q in 0..8 {
                assert!((ke[p][q] - ke[q][p]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn linear_field_energy_is_exact() {
        // T = x gives energy k_xx·V for a unit-gradient field
        let h = [0.2, 0.05, 0.1];
        let e = Hex8::new(h);
        let k = [[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 3.0]];
        let ke = e.scalar_matrix(&k);
        let t: Vec<f64> = (0..8).map(|a| (a & 1) as f64 * h[0]).collect();
        let energy: f64 = (0..8).map(|p| (0..8).map(|q| t[p] * ke[p][q] * t[q]).sum::<f64>()).sum();
        assert!((energy - 2.0 * e.volume).abs() < 1e-14);
    }

    #[test]
    fn rigid_motions_have_zero_energy() {
        let e = Hex8::new([0.1, 0.04, 0.1]);
        let mut c = [[0.0; 6]; 6];
        for (i, row) in c.iter_mut().enumerate() {
            row[i] = 5.0 + i as f64;
        }
        c[0][1] = 1.0;
        c[1][0] = 1.0;
        let mut ke = [0.0; 576];
        e.elastic_matrix(&c, &mut ke);
        // rotation about z: u = (-y, x, 0)
        let mut u = [0.0; 24];
        for a in 0..8 {
            let x = (a & 1) as f64 * 0.1;
            let y = ((a >> 1) & 1) as f64 * 0.04;
            u[3 * a] = -y;
            u[3 * a + 1] = x;
        }
        let f: Vec<f64> = (0..24).map(|p| (0..24).map(|q| ke[p * 24 + q] * u[q]).sum()).collect();
        assert!(f.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn strain_integral_recovers_uniform_strain() {
        let h = [0.1, 0.04, 0.1];
        let e = Hex8::new(h);
        // u = (0, 0, γ x): ε_xz = γ/2, Mandel entry √2·γ/2
        let g = 0.01;
        let mut u = [0.0; 24];
        for a in 0..8 {
            u[3 * a + 2] = g * (a & 1) as f64 * h[0];
        }
        let mean: Vec<f64> =
            (0..6).map(|i| (0..24).map(|p| e.strain_integral[i][p] * u[p]).sum::<f64>() / e.volume).collect();
        assert!((mean[4] - g / 2.0 * std::f64::consts::SQRT_2).abs() < 1e-14);
        assert!(mean[0].abs() < 1e-15);
    }
}
