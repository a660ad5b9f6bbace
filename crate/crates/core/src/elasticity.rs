//! Linear elasticity on the voxel grid with trilinear hexahedra.
//!
//! Tensors use the Mandel convention `[xx, yy, zz, √2·yz, √2·xz, √2·xy]`,
//! under which stiffness matrices rotate as ordinary orthogonal similarity
//! transforms.

use crate::error::{domain, Error, Result};
use crate::fem::{Hex8, Mandel, NodeGrid};
use crate::linalg::{apply_dirichlet, pcg, CsrMatrix, Multigrid, MultigridOptions, SolveStats};
use crate::voxel::VoxelGrid;
use nalgebra::{Matrix3, Matrix6};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

pub const SOLVER_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 50_000;

pub type Stiffness = [[f64; 6]; 6];

/// Transversely isotropic elastic constants with the symmetry axis along
/// the fiber.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransverseIsotropic {
    pub e_a: f64,
    pub e_t: f64,
    pub g_a: f64,
    pub g_t: f64,
    pub nu_at: f64,
    pub nu_tt: f64,
}

/// Stiffness of a transversely isotropic solid whose axis is local `x`,
/// obtained by inverting the engineering compliance.
pub fn transverse_isotropic_stiffness(m: &TransverseIsotropic) -> Result<Stiffness> {
    let TransverseIsotropic { e_a, e_t, g_a, g_t, nu_at, nu_tt } = *m;
    if !(e_a > 0.0 && e_t > 0.0 && g_a > 0.0 && g_t > 0.0) {
        return domain(format!(
            "elastic constants must be positive (E_a={e_a}, E_t={e_t}, G_a={g_a}, G_t={g_t})"
        ));
    }
    let mut s = Matrix6::<f64>::zeros();
    s[(0, 0)] = 1.0 / e_a;
    s[(1, 1)] = 1.0 / e_t;
    s[(2, 2)] = 1.0 / e_t;
    s[(0, 1)] = -nu_at / e_a;
    s[(0, 2)] = -nu_at / e_a;
    s[(1, 2)] = -nu_tt / e_t;
    s[(1, 0)] = s[(0, 1)];
    s[(2, 0)] = s[(0, 2)];
    s[(2, 1)] = s[(1, 2)];
    s[(3, 3)] = 1.0 / (2.0 * g_t);
    s[(4, 4)] = 1.0 / (2.0 * g_a);
    s[(5, 5)] = 1.0 / (2.0 * g_a);
    let chol = s.cholesky().ok_or_else(|| {
        Error::Domain(format!(
            "compliance is not positive definite for E_a={e_a}, E_t={e_t}, nu_at={nu_at}, nu_tt={nu_tt}"
        ))
    })?;
    let c = chol.inverse();
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = 0.5 * (c[(i, j)] + c[(j, i)]);
        }
    }
    Ok(out)
}

/// Isotropic stiffness from Young's modulus and Poisson ratio.
pub fn isotropic_stiffness(e: f64, nu: f64) -> Result<Stiffness> {
    let g = e / (2.0 * (1.0 + nu));
    transverse_isotropic_stiffness(&TransverseIsotropic { e_a: e, e_t: e, g_a: g, g_t: g, nu_at: nu, nu_tt: nu })
}

/// Rotation taking local `x` onto the unit vector `t` by the smallest angle.
/// Directions opposite to `x` use a half turn about `z`.
pub fn minimal_rotation(t: [f64; 3]) -> Matrix3<f64> {
    let c = t[0];
    if c < -1.0 + 1e-12 {
        return Matrix3::new(-1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0);
    }
    // axis k = x × t = (0, -t_z, t_y), Rodrigues with |k| = sin θ
    let v = [0.0, -t[2], t[1]];
    let vx = Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0);
    Matrix3::identity() + vx + vx * vx * (1.0 / (1.0 + c))
}

fn to_mandel(m: &Matrix3<f64>) -> Mandel {
    [m[(0, 0)], m[(1, 1)], m[(2, 2)], SQRT_2 * m[(1, 2)], SQRT_2 * m[(0, 2)], SQRT_2 * m[(0, 1)]]
}

fn from_mandel(v: &Mandel) -> Matrix3<f64> {
    let r = 1.0 / SQRT_2;
    Matrix3::new(v[0], r * v[5], r * v[4], r * v[5], v[1], r * v[3], r * v[4], r * v[3], v[2])
}

/// 6×6 orthogonal matrix acting on Mandel vectors as `ε ↦ R ε Rᵀ`.
pub fn mandel_rotation(r: &Matrix3<f64>) -> Matrix6<f64> {
    let mut q = Matrix6::zeros();
    for j in 0..6 {
        let mut e = [0.0; 6];
        e[j] = 1.0;
        let rotated = to_mandel(&(r * from_mandel(&e) * r.transpose()));
        for i in 0..6 {
            q[(i, j)] = rotated[i];
        }
    }
    q
}

/// Stiffness rotated so its local `x` axis follows `t`.
pub fn rotate_stiffness(c: &Stiffness, t: [f64; 3]) -> Stiffness {
    let q = mandel_rotation(&minimal_rotation(t));
    let cm = Matrix6::from_fn(|i, j| c[i][j]);
    let g = q * cm * q.transpose();
    let mut out = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] = 0.5 * (g[(i, j)] + g[(j, i)]);
        }
    }
    out
}

/// Transversely isotropic CTE tensor in Mandel form.
pub fn rotated_cte(axial: f64, transverse: f64, t: [f64; 3]) -> Mandel {
    let m = Matrix3::from_fn(|a, b| (axial - transverse) * t[a] * t[b] + if a == b { transverse } else { 0.0 });
    to_mandel(&m)
}

/// Per-cell stiffness and thermal expansion.
#[derive(Debug, Clone)]
pub struct CellStiffness {
    pub stiffness: Vec<Stiffness>,
    pub cte: Vec<Mandel>,
}

/// Isotropic matrix cells, transversely isotropic tow cells aligned with the
/// local fiber direction.
pub fn build_cell_stiffness(
    grid: &VoxelGrid,
    matrix_young: f64,
    matrix_poisson: f64,
    matrix_cte: f64,
    yarn: &TransverseIsotropic,
    yarn_cte: (f64, f64),
) -> Result<CellStiffness> {
    let cm = isotropic_stiffness(matrix_young, matrix_poisson)?;
    let cy = transverse_isotropic_stiffness(yarn)?;
    let am = rotated_cte(matrix_cte, matrix_cte, [1.0, 0.0, 0.0]);
    let mut stiffness = Vec::with_capacity(grid.len());
    let mut cte = Vec::with_capacity(grid.len());
    for cell in 0..grid.len() {
        match grid.tangent(cell) {
            Some(t) => {
                stiffness.push(rotate_stiffness(&cy, t));
                cte.push(rotated_cte(yarn_cte.0, yarn_cte.1, t));
            }
            None => {
                stiffness.push(cm);
                cte.push(am);
            }
        }
    }
    Ok(CellStiffness { stiffness, cte })
}

/// Displacement solution with its volume averages.
#[derive(Debug, Clone)]
pub struct ElasticSolution {
    /// Nodal displacements, three per node.
    pub displacement: Vec<f64>,
    pub mean_stress: Mandel,
    pub mean_strain: Mandel,
    pub stats: SolveStats,
}

/// Per-case diagnostics for serialization.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ElasticDiagnostics {
    pub case: String,
    pub load: f64,
    pub mean_stress: Mandel,
    pub mean_strain: Mandel,
    pub iterations: usize,
    pub relative_residual: f64,
}

struct System<'a> {
    grid: &'a VoxelGrid,
    cells: &'a CellStiffness,
    nodes: NodeGrid,
    element: Hex8,
}

impl<'a> System<'a> {
    fn new(grid: &'a VoxelGrid, cells: &'a CellStiffness) -> Result<Self> {
        if cells.stiffness.len() != grid.len() || cells.cte.len() != grid.len() {
            return domain("cell stiffness does not match grid");
        }
        Ok(System { grid, cells, nodes: NodeGrid { cells: grid.dims() }, element: Hex8::new(grid.spacing) })
    }

    fn node_coord(&self, node: usize) -> [f64; 3] {
        let ijk = self.nodes.ijk(node);
        [0, 1, 2].map(|a| ijk[a] as f64 * self.grid.spacing[a])
    }

    /// Stiffness matrix and, when `delta_t` is non-zero, the thermal load.
    fn assemble(&self, delta_t: f64) -> (CsrMatrix, Vec<f64>) {
        let mut a = self.nodes.pattern(3);
        let mut f = vec![0.0; a.nrows];
        let mut ke = [0.0; 576];
        let g = self.grid;
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let cell = g.index(i, j, k);
                    let c = &self.cells.stiffness[cell];
                    self.element.elastic_matrix(c, &mut ke);
                    let en = self.nodes.element_nodes(i, j, k);
                    for p in 0..8 {
                        for q in 0..8 {
                            for ci in 0..3 {
                                let row = 3 * en[p] + ci;
                                let base = a.find(row, 3 * en[q]).expect("coupling inside pattern");
                                for di in 0..3 {
                                    a.data[base + di] += ke[(3 * p + ci) * 24 + 3 * q + di];
                                }
                            }
                        }
                    }
                    if delta_t != 0.0 {
                        let alpha = &self.cells.cte[cell];
                        let mut sigma = [0.0; 6];
                        for r in 0..6 {
                            sigma[r] = (0..6).map(|s| c[r][s] * alpha[s] * delta_t).sum();
                        }
                        for p in 0..8 {
                            for ci in 0..3 {
                                let d = 3 * p + ci;
                                f[3 * en[p] + ci] +=
                                    (0..6).map(|r| self.element.strain_integral[r][d] * sigma[r]).sum::<f64>();
                            }
                        }
                    }
                }
            }
        }
        (a, f)
    }

    fn solve(&self, fixed: &[bool], values: &[f64], delta_t: f64) -> Result<ElasticSolution> {
        let (mut a, mut rhs) = self.assemble(delta_t);
        apply_dirichlet(&mut a, fixed, values, &mut rhs)?;
        let coords = self.nodes.coords(self.grid.spacing, [0.0; 3]);
        let mg = Multigrid::new(a, coords, 3, fixed, MultigridOptions::default())?;
        let mut x = values.to_vec();
        let stats = pcg(mg.finest(), &mg, &rhs, &mut x, SOLVER_TOLERANCE, MAX_ITERATIONS)?;
        let (mean_stress, mean_strain) = self.averages(&x, delta_t);
        Ok(ElasticSolution { displacement: x, mean_stress, mean_strain, stats })
    }

    fn averages(&self, u: &[f64], delta_t: f64) -> (Mandel, Mandel) {
        let g = self.grid;
        let mut sig = [0.0; 6];
        let mut eps = [0.0; 6];
        let v = self.element.volume;
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let cell = g.index(i, j, k);
                    let en = self.nodes.element_nodes(i, j, k);
                    let mut e = [0.0; 6];
                    for (r, er) in e.iter_mut().enumerate() {
                        let mut s = 0.0;
                        for p in 0..8 {
                            for ci in 0..3 {
                                s += self.element.strain_integral[r][3 * p + ci] * u[3 * en[p] + ci];
                            }
                        }
                        *er = s / v;
                    }
                    let c = &self.cells.stiffness[cell];
                    let alpha = &self.cells.cte[cell];
                    for r in 0..6 {
                        eps[r] += e[r];
                        sig[r] += (0..6).map(|s| c[r][s] * (e[s] - alpha[s] * delta_t)).sum::<f64>();
                    }
                }
            }
        }
        let n = g.len() as f64;
        (sig.map(|s| s / n), eps.map(|e| e / n))
    }

    fn center_node(&self) -> [usize; 3] {
        self.grid.dims().map(|d| d / 2)
    }

    fn offset_node(&self, axis: usize) -> usize {
        let mut c = self.center_node();
        c[axis] = (c[axis] + self.grid.dims()[axis] / 4).max(c[axis] + 1);
        self.nodes.id(c[0], c[1], c[2])
    }
}

fn mandel_shear_index(a: usize, b: usize) -> usize {
    match (a.min(b), a.max(b)) {
        (1, 2) => 3,
        (0, 2) => 4,
        (0, 1) => 5,
        _ => unreachable!("shear plane needs two distinct axes"),
    }
}

/// Prescribes `u_axis = ε⁰·x_axis` on every boundary node and leaves the
/// other components free; rigid motions in the free components are removed
/// by point constraints at interior nodes.
pub fn solve_uniaxial(grid: &VoxelGrid, cells: &CellStiffness, axis: usize, strain: f64) -> Result<ElasticSolution> {
    if axis > 2 {
        return domain(format!("axis {axis} out of range"));
    }
    if strain == 0.0 {
        return domain("applied strain must be non-zero");
    }
    let sys = System::new(grid, cells)?;
    let n = sys.nodes.count();
    let mut fixed = vec![false; 3 * n];
    let mut values = vec![0.0; 3 * n];
    for node in 0..n {
        if sys.nodes.on_boundary(node) {
            fixed[3 * node + axis] = true;
            values[3 * node + axis] = strain * sys.node_coord(node)[axis];
        }
    }
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    let [ci, cj, ck] = sys.center_node();
    let center = sys.nodes.id(ci, cj, ck);
    fixed[3 * center + b] = true;
    fixed[3 * center + c] = true;
    // rotation about the loaded axis
    fixed[3 * sys.offset_node(b) + c] = true;
    sys.solve(&fixed, &values, 0.0)
}

/// Effective Young's modulus and the two Poisson ratios `ν_ab = −ε̄_bb/ε⁰`
/// for the transverse axes `b = axis+1`, `c = axis+2` (mod 3).
pub fn effective_youngs_poisson(sol: &ElasticSolution, axis: usize, strain: f64) -> Result<(f64, f64, f64)> {
    if strain == 0.0 {
        return domain("applied strain must be non-zero");
    }
    let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
    Ok((sol.mean_stress[axis] / strain, -sol.mean_strain[b] / strain, -sol.mean_strain[c] / strain))
}

/// Simple shear in the plane `(a, b)`: `u_a = ε⁰·x_b`, `u_b = ε⁰·x_a`, the
/// remaining component zero, on every boundary node. Returns `G*` and the
/// solution.
pub fn solve_shear(
    grid: &VoxelGrid,
    cells: &CellStiffness,
    plane: (usize, usize),
    strain: f64,
) -> Result<(f64, ElasticSolution)> {
    let (a, b) = plane;
    if a > 2 || b > 2 || a == b {
        return domain(format!("invalid shear plane {plane:?}"));
    }
    if strain == 0.0 {
        return domain("applied strain must be non-zero");
    }
    let sys = System::new(grid, cells)?;
    let n = sys.nodes.count();
    let mut fixed = vec![false; 3 * n];
    let mut values = vec![0.0; 3 * n];
    for node in 0..n {
        if sys.nodes.on_boundary(node) {
            let x = sys.node_coord(node);
            for d in 0..3 {
                fixed[3 * node + d] = true;
            }
            values[3 * node + a] = strain * x[b];
            values[3 * node + b] = strain * x[a];
        }
    }
    let sol = sys.solve(&fixed, &values, 0.0)?;
    let tau = sol.mean_stress[mandel_shear_index(a, b)] / SQRT_2;
    Ok((tau / (2.0 * strain), sol))
}

/// Free thermal expansion under a uniform temperature change. Six point
/// constraints remove the rigid motions without restraining deformation.
/// Returns `(ε̄_xx, ε̄_yy, ε̄_zz)/ΔT` and the solution.
pub fn solve_thermal_expansion(
    grid: &VoxelGrid,
    cells: &CellStiffness,
    delta_t: f64,
) -> Result<([f64; 3], ElasticSolution)> {
    if delta_t == 0.0 {
        return domain("temperature change must be non-zero");
    }
    let sys = System::new(grid, cells)?;
    let n = sys.nodes.count();
    let mut fixed = vec![false; 3 * n];
    let values = vec![0.0; 3 * n];
    let [ci, cj, ck] = sys.center_node();
    let center = sys.nodes.id(ci, cj, ck);
    for d in 0..3 {
        fixed[3 * center + d] = true;
    }
    let along_x = sys.offset_node(0);
    fixed[3 * along_x + 1] = true;
    fixed[3 * along_x + 2] = true;
    fixed[3 * sys.offset_node(2) + 1] = true;
    let sol = sys.solve(&fixed, &values, delta_t)?;
    let e = sol.mean_strain;
    Ok(([e[0] / delta_t, e[1] / delta_t, e[2] / delta_t], sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Phase;
    use proptest::prelude::*;

    fn iso_cells(grid: &VoxelGrid, e: f64, nu: f64, alpha: f64) -> CellStiffness {
        let c = isotropic_stiffness(e, nu).unwrap();
        CellStiffness { stiffness: vec![c; grid.len()], cte: vec![rotated_cte(alpha, alpha, [1.0, 0.0, 0.0]); grid.len()] }
    }

    #[test]
    fn isotropic_entries_match_lame_form() {
        let (e, nu) = (3.0, 0.3);
        let c = isotropic_stiffness(e, nu).unwrap();
        let lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        assert!((c[0][0] - (lam + 2.0 * mu)).abs() < 1e-12);
        assert!((c[0][1] - lam).abs() < 1e-12);
        assert!((c[3][3] - 2.0 * mu).abs() < 1e-12);
        assert!(c[0][3].abs() < 1e-12);
    }

    #[test]
    fn compliance_round_trip_recovers_constants() {
        let m = TransverseIsotropic { e_a: 200.0, e_t: 10.0, g_a: 5.0, g_t: 3.5, nu_at: 0.25, nu_tt: 0.4 };
        let c = transverse_isotropic_stiffness(&m).unwrap();
        let s = Matrix6::from_fn(|i, j| c[i][j]).try_inverse().unwrap();
        assert!((1.0 / s[(0, 0)] - 200.0).abs() < 1e-9);
        assert!((-s[(0, 1)] / s[(0, 0)] - 0.25).abs() < 1e-12);
        assert!((1.0 / (2.0 * s[(4, 4)]) - 5.0).abs() < 1e-9);
        let bad = TransverseIsotropic { nu_tt: 1.2, ..m };
        assert!(matches!(transverse_isotropic_stiffness(&bad), Err(Error::Domain(_))));
    }

    proptest! {
        #[test]
        fn admissible_stiffness_is_positive_definite(
            e_a in 50.0f64..400.0, e_t in 2.0f64..30.0, g_a in 1.0f64..10.0, nu_at in 0.1f64..0.35, nu_tt in 0.1f64..0.45
        ) {
            let g_t = e_t / (2.0 * (1.0 + nu_tt));
            let c = transverse_isotropic_stiffness(&TransverseIsotropic { e_a, e_t, g_a, g_t, nu_at, nu_tt }).unwrap();
            let m = Matrix6::from_fn(|i, j| c[i][j]);
            prop_assert!((m - m.transpose()).abs().max() < 1e-9 * m.abs().max());
            prop_assert!(m.symmetric_eigen().eigenvalues.iter().all(|v| *v > 0.0));
        }

        #[test]
        fn rotation_maps_x_to_tangent(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = (x * x + y * y + z * z).sqrt();
            prop_assume!(n > 0.1);
            let t = [x / n, y / n, z / n];
            let r = minimal_rotation(t);
            let img = r * nalgebra::Vector3::new(1.0, 0.0, 0.0);
            prop_assert!((img[0] - t[0]).abs() < 1e-12 && (img[1] - t[1]).abs() < 1e-12 && (img[2] - t[2]).abs() < 1e-12);
            prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn axial_probe_of_rotated_stiffness() {
        let m = TransverseIsotropic { e_a: 200.0, e_t: 10.0, g_a: 5.0, g_t: 3.5, nu_at: 0.25, nu_tt: 0.4 };
        let c = rotate_stiffness(&transverse_isotropic_stiffness(&m).unwrap(), [0.0, 0.0, 1.0]);
        let s = Matrix6::from_fn(|i, j| c[i][j]).try_inverse().unwrap();
        assert!((1.0 / s[(2, 2)] - 200.0).abs() < 1e-8);
        assert!((1.0 / s[(0, 0)] - 10.0).abs() < 1e-9);
        assert!((rotated_cte(1.0, 3.0, [-1.0, 0.0, 0.0])[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn homogeneous_cell_reproduces_constituents() {
        let g = VoxelGrid::uniform([12, 8, 12], [0.03, 0.01, 0.03], Phase::Matrix, [0.0; 3]).unwrap();
        let cells = iso_cells(&g, 3.0, 0.3, 40.0);
        for axis in 0..3 {
            let sol = solve_uniaxial(&g, &cells, axis, 1e-3).unwrap();
            let (e, nb, nc) = effective_youngs_poisson(&sol, axis, 1e-3).unwrap();
            assert!((e - 3.0).abs() < 1e-5, "axis {axis}: {e}");
            assert!((nb - 0.3).abs() < 1e-5 && (nc - 0.3).abs() < 1e-5);
            assert!((sol.mean_strain[axis] - 1e-3).abs() < 1e-9);
        }
        let mu = 3.0 / 2.6;
        for plane in [(0, 1), (0, 2)] {
            let (gs, _) = solve_shear(&g, &cells, plane, 1e-3).unwrap();
            assert!((gs - mu).abs() / mu < 1e-6);
        }
        let (a, sol) = solve_thermal_expansion(&g, &cells, 10.0).unwrap();
        assert!(a.iter().all(|v| (v - 40.0).abs() < 1e-6 * 40.0), "{a:?}");
        assert!(sol.mean_stress.iter().all(|s| s.abs() < 1e-6));
        let (b, _) = solve_thermal_expansion(&g, &cells, -10.0).unwrap();
        assert!((a[0] - b[0]).abs() < 1e-9);
    }

    #[test]
    fn laminate_moduli_respect_voigt_and_reuss() {
        let dims = [16, 8, 16];
        let mut phase = Vec::new();
        for _k in 0..dims[2] {
            for _j in 0..dims[1] {
                for i in 0..dims[0] {
                    phase.push(if i < 8 { Phase::Matrix } else { Phase::Warp });
                }
            }
        }
        let n = phase.len();
        let g = VoxelGrid::from_cells(dims, [0.02, 0.02, 0.02], phase, vec![[1.0, 0.0, 0.0]; n]).unwrap();
        let yarn = TransverseIsotropic { e_a: 30.0, e_t: 30.0, g_a: 30.0 / 2.6, g_t: 30.0 / 2.6, nu_at: 0.3, nu_tt: 0.3 };
        let cells = build_cell_stiffness(&g, 3.0, 0.3, 1.0, &yarn, (1.0, 1.0)).unwrap();
        let voigt = 16.5;
        let reuss = 2.0 / (1.0 / 3.0 + 1.0 / 30.0);
        let along = solve_uniaxial(&g, &cells, 2, 1e-3).unwrap();
        let (e_par, _, _) = effective_youngs_poisson(&along, 2, 1e-3).unwrap();
        assert!((e_par - voigt).abs() / voigt < 0.02, "{e_par}");
        let across = solve_uniaxial(&g, &cells, 0, 1e-3).unwrap();
        let (e_ser, _, _) = effective_youngs_poisson(&across, 0, 1e-3).unwrap();
        assert!(e_ser >= reuss * 0.999 && e_ser <= voigt, "{e_ser}");
    }

    #[test]
    fn shear_plane_follows_fiber_axis() {
        let m = TransverseIsotropic { e_a: 100.0, e_t: 8.0, g_a: 4.0, g_t: 3.0, nu_at: 0.25, nu_tt: 0.33 };
        let g = VoxelGrid::uniform([8, 8, 8], [0.02, 0.02, 0.02], Phase::Warp, [0.0, 0.0, 1.0]).unwrap();
        let cells = build_cell_stiffness(&g, 3.0, 0.3, 1.0, &m, (0.0, 1.0)).unwrap();
        let (g_xz, _) = solve_shear(&g, &cells, (0, 2), 1e-3).unwrap();
        let (g_xy, _) = solve_shear(&g, &cells, (0, 1), 1e-3).unwrap();
        assert!((g_xz - 4.0).abs() < 1e-6, "{g_xz}");
        assert!((g_xy - 3.0).abs() < 1e-6, "{g_xy}");
    }
}
