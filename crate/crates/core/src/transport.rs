//! Steady anisotropic diffusion on the voxel grid, used for both thermal
//! conductivity and effective diffusivity.
//!
//! Trilinear nodal elements, one per voxel. A potential difference is
//! imposed between the two faces normal to the chosen axis; the other faces
//! are insulated. The boundary flux is recovered from the reactions of the
//! unconstrained operator on the outlet nodes, which makes it exactly
//! consistent with the discrete solution.

use crate::error::{domain, Error, Result};
use crate::fem::{Hex8, NodeGrid};
use crate::linalg::{apply_dirichlet, pcg, CsrMatrix, Multigrid, MultigridOptions, SolveStats};
use crate::voxel::VoxelGrid;
use serde::{Deserialize, Serialize};

pub const SOLVER_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: usize = 50_000;

pub type Tensor3 = [[f64; 3]; 3];

/// Per-cell symmetric conductivity or diffusivity tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTensorField {
    pub tensors: Vec<Tensor3>,
}

/// Transversely isotropic tensor `p_t·I + (p_a − p_t)·t·tᵀ` for unit `t`.
pub fn rotated_tensor(axial: f64, transverse: f64, t: [f64; 3]) -> Tensor3 {
    let mut out = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] = (axial - transverse) * t[a] * t[b];
        }
        out[a][a] += transverse;
    }
    out
}

/// Matrix cells get `matrix_value·I`, tow cells the transversely isotropic
/// tensor aligned with their fiber direction.
pub fn build_tensor_field(grid: &VoxelGrid, axial: f64, transverse: f64, matrix_value: f64) -> Result<CellTensorField> {
    if !(axial >= 0.0 && transverse >= 0.0 && matrix_value >= 0.0) {
        return domain(format!("negative transport coefficient ({axial}, {transverse}, {matrix_value})"));
    }
    let iso = rotated_tensor(matrix_value, matrix_value, [1.0, 0.0, 0.0]);
    let tensors = (0..grid.len())
        .map(|c| match grid.tangent(c) {
            Some(t) => rotated_tensor(axial, transverse, t),
            None => iso,
        })
        .collect();
    Ok(CellTensorField { tensors })
}

/// Diagnostics of one potential solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarDiagnostics {
    pub direction: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    /// Mean flux density entering through the high-potential face.
    pub inlet_flux: f64,
    /// Mean flux density leaving through the low-potential face.
    pub outlet_flux: f64,
}

#[derive(Debug, Clone)]
pub struct ScalarSolution {
    /// Nodal potential, numbered `i + (nx+1)·(j + (ny+1)·k)`.
    pub potential: Vec<f64>,
    /// Volume-mean flux vector of every cell.
    pub cell_flux: Vec<[f64; 3]>,
    pub diagnostics: ScalarDiagnostics,
    /// Largest nodal flux imbalance at unconstrained nodes relative to the
    /// mean boundary reaction.
    pub max_imbalance: f64,
    pub boundary_delta: f64,
    pub length: f64,
}

impl ScalarSolution {
    /// Mean flux density `Q` through the low-potential boundary, positive
    /// when flowing from the high to the low face.
    pub fn mean_flux(&self) -> f64 {
        self.diagnostics.outlet_flux
    }

    /// Effective coefficient `Q·L/Δ` along the solved direction.
    pub fn effective_coefficient(&self) -> f64 {
        self.mean_flux() * self.length / self.boundary_delta
    }
}

fn assemble(grid: &VoxelGrid, field: &CellTensorField, nodes: &NodeGrid) -> CsrMatrix {
    let element = Hex8::new(grid.spacing);
    let mut a = nodes.pattern(1);
    for k in 0..grid.nz {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let ke = element.scalar_matrix(&field.tensors[grid.index(i, j, k)]);
                let en = nodes.element_nodes(i, j, k);
                for p in 0..8 {
                    let row = en[p];
                    for q in 0..8 {
                        let pos = a.find(row, en[q]).expect("element coupling inside pattern");
                        a.data[pos] += ke[p][q];
                    }
                }
            }
        }
    }
    a
}

/// Solves `∇·(k∇φ) = 0` with `φ = +Δ/2` on the face `x_dir = 0`, `φ = −Δ/2`
/// on the opposite face, and zero normal flux elsewhere.
pub fn solve_potential(
    grid: &VoxelGrid,
    field: &CellTensorField,
    direction: usize,
    boundary_delta: f64,
) -> Result<ScalarSolution> {
    if direction > 2 {
        return domain(format!("direction {direction} is not an axis"));
    }
    if field.tensors.len() != grid.len() {
        return domain("tensor field does not match grid");
    }
    if boundary_delta == 0.0 || !boundary_delta.is_finite() {
        return domain("boundary potential difference must be finite and non-zero");
    }
    let nodes = NodeGrid { cells: grid.dims() };
    let n = nodes.count();
    let last = grid.dims()[direction];
    let a_full = assemble(grid, field, &nodes);
    let mut fixed = vec![false; n];
    let mut values = vec![0.0; n];
    for (node, (f, v)) in fixed.iter_mut().zip(values.iter_mut()).enumerate() {
        let c = nodes.ijk(node)[direction];
        if c == 0 {
            *f = true;
            *v = 0.5 * boundary_delta;
        } else if c == last {
            *f = true;
            *v = -0.5 * boundary_delta;
        }
    }
    let mut a = a_full.clone();
    let mut rhs = vec![0.0; n];
    apply_dirichlet(&mut a, &fixed, &values, &mut rhs)?;
    // a row without coupling belongs to a node touching only zero-coefficient
    // cells; pin it so the system stays definite
    for i in 0..n {
        if !fixed[i] {
            let d = a.find(i, i).unwrap();
            if a.data[d] <= 0.0 {
                a.data[d] = 1.0;
                rhs[i] = 0.0;
            }
        }
    }
    let coords = nodes.coords(grid.spacing, grid.origin);
    let mg = Multigrid::new(a, coords, 1, &fixed, MultigridOptions::default())?;
    let mut x = values.clone();
    let stats: SolveStats = pcg(mg.finest(), &mg, &rhs, &mut x, SOLVER_TOLERANCE, MAX_ITERATIONS)?;

    let mut reaction = vec![0.0; n];
    a_full.spmv(&x, &mut reaction);
    let (mut inflow, mut outflow, mut scale) = (0.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for node in 0..n {
        let c = nodes.ijk(node)[direction];
        if c == 0 {
            inflow += reaction[node];
            scale += reaction[node].abs();
        } else if c == last {
            outflow -= reaction[node];
            scale += reaction[node].abs();
        } else {
            worst = worst.max(reaction[node].abs());
        }
    }
    let b = grid.cell_box;
    let area = b.volume() / b.length(direction);
    let boundary_nodes = fixed.iter().filter(|f| **f).count().max(1);
    let mean_reaction = scale / boundary_nodes as f64;
    let max_imbalance = if mean_reaction > 0.0 { worst / mean_reaction } else { worst };

    let element = Hex8::new(grid.spacing);
    let mut cell_flux = vec![[0.0; 3]; grid.len()];
    for k in 0..grid.nz {
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let cell = grid.index(i, j, k);
                let en = nodes.element_nodes(i, j, k);
                let mut grad = [0.0; 3];
                for (d, g) in grad.iter_mut().enumerate() {
                    *g = (0..8).map(|p| element.grad_integral[d][p] * x[en[p]]).sum::<f64>() / element.volume;
                }
                let kt = &field.tensors[cell];
                for d in 0..3 {
                    cell_flux[cell][d] = -(0..3).map(|e| kt[d][e] * grad[e]).sum::<f64>();
                }
            }
        }
    }
    Ok(ScalarSolution {
        potential: x,
        cell_flux,
        diagnostics: ScalarDiagnostics {
            direction,
            iterations: stats.iterations,
            relative_residual: stats.relative_residual,
            inlet_flux: inflow / area,
            outlet_flux: outflow / area,
        },
        max_imbalance,
        boundary_delta,
        length: b.length(direction),
    })
}

/// Effective coefficient along `direction` for a two-constituent field.
pub fn effective_coefficient(grid: &VoxelGrid, field: &CellTensorField, direction: usize) -> Result<(f64, ScalarDiagnostics)> {
    let sol = solve_potential(grid, field, direction, 1.0)?;
    Ok((sol.effective_coefficient(), sol.diagnostics))
}

/// Effective thermal conductivity along `direction`.
pub fn effective_conductivity(
    grid: &VoxelGrid,
    matrix_conductivity: f64,
    yarn_axial: f64,
    yarn_transverse: f64,
    direction: usize,
) -> Result<(f64, ScalarDiagnostics)> {
    let field = build_tensor_field(grid, yarn_axial, yarn_transverse, matrix_conductivity)?;
    effective_coefficient(grid, &field, direction)
}

/// Outcome of a tortuosity evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Tortuosity {
    Finite { tau: f64, diffusivity: f64 },
    /// No diffusive path connects the two faces.
    Blocked,
}

impl Tortuosity {
    pub fn value(&self) -> Option<f64> {
        match self {
            Tortuosity::Finite { tau, .. } => Some(*tau),
            Tortuosity::Blocked => None,
        }
    }
}

/// `τ = (1 − v_f)/D*` with unit matrix diffusivity and the given yarn
/// diffusivities.
pub fn effective_tortuosity(
    grid: &VoxelGrid,
    fiber_fraction: f64,
    yarn_axial: f64,
    yarn_transverse: f64,
    direction: usize,
) -> Result<(Tortuosity, ScalarDiagnostics)> {
    let field = build_tensor_field(grid, yarn_axial, yarn_transverse, 1.0)?;
    let (d, diag) = effective_coefficient(grid, &field, direction)?;
    if !(d > 1e-14) {
        return Ok((Tortuosity::Blocked, diag));
    }
    if !d.is_finite() {
        return Err(Error::Numerical(format!("effective diffusivity {d}")));
    }
    Ok((Tortuosity::Finite { tau: (1.0 - fiber_fraction) / d, diffusivity: d }, diag))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Phase;
    use nalgebra::Matrix3;
    use proptest::prelude::*;

    fn slab_grid(n: usize, normal: usize) -> VoxelGrid {
        let dims = [n, n / 2, n];
        let mut phase = Vec::new();
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let c = [i, j, k][normal];
                    phase.push(if c < dims[normal] / 2 { Phase::Matrix } else { Phase::Warp });
                }
            }
        }
        let len = phase.len();
        VoxelGrid::from_cells(dims, [1.0 / n as f64, 1.0 / n as f64, 1.0 / n as f64], phase, vec![[0.0, 0.0, 1.0]; len])
            .unwrap()
    }

    #[test]
    fn axis_aligned_and_isotropic_tensors() {
        let t = rotated_tensor(10.0, 2.0, [0.0, 0.0, 1.0]);
        assert_eq!(t, [[2.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 10.0]]);
        let iso = rotated_tensor(3.0, 3.0, [0.6, 0.0, 0.8]);
        for a in 0..3 {
            for b in 0..3 {
                assert!((iso[a][b] - if a == b { 3.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn rotated_tensor_eigenvalues(x in -1.0f64..1.0, y in -1.0f64..1.0, z in -1.0f64..1.0) {
            let n = (x * x + y * y + z * z).sqrt();
            prop_assume!(n > 0.1);
            let t = rotated_tensor(10.0, 2.0, [x / n, y / n, z / n]);
            let m = Matrix3::from_fn(|a, b| t[a][b]);
            let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
            ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
            prop_assert!((ev[0] - 2.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12 && (ev[2] - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_cell_gives_linear_profile() {
        let g = VoxelGrid::uniform([12, 6, 10], [0.1, 0.05, 0.12], Phase::Matrix, [0.0; 3]).unwrap();
        let field = build_tensor_field(&g, 0.0, 0.0, 0.4).unwrap();
        for dir in 0..3 {
            let sol = solve_potential(&g, &field, dir, 1.0).unwrap();
            assert!((sol.effective_coefficient() - 0.4).abs() < 1e-9);
            let l = g.cell_box.length(dir);
            assert!((sol.mean_flux() - 0.4 / l).abs() < 1e-10 * 0.4 / l);
            assert!((sol.diagnostics.inlet_flux - sol.diagnostics.outlet_flux).abs() < 1e-6 * sol.mean_flux());
        }
    }

    #[test]
    fn laminates_match_series_and_parallel_means() {
        let (k1, k2) = (1.0, 10.0);
        let g = slab_grid(32, 0);
        let field = build_tensor_field(&g, k2, k2, k1).unwrap();
        let series = solve_potential(&g, &field, 0, 1.0).unwrap().effective_coefficient();
        let harmonic = 2.0 / (1.0 / k1 + 1.0 / k2);
        assert!((series - harmonic).abs() / harmonic < 0.01, "{series}");
        let parallel = solve_potential(&g, &field, 2, 1.0).unwrap().effective_coefficient();
        assert!((parallel - 5.5).abs() / 5.5 < 0.01, "{parallel}");
    }

    #[test]
    fn linearity_and_face_swap() {
        let g = slab_grid(16, 1);
        let field = build_tensor_field(&g, 7.0, 2.0, 1.0).unwrap();
        let s1 = solve_potential(&g, &field, 1, 1.0).unwrap();
        let s2 = solve_potential(&g, &field, 1, -3.0).unwrap();
        assert!((s1.effective_coefficient() - s2.effective_coefficient()).abs() < 1e-8);
        assert!(s2.mean_flux() < 0.0);
        let scaled = CellTensorField { tensors: field.tensors.iter().map(|t| t.map(|r| r.map(|v| 2.5 * v))).collect() };
        let s3 = solve_potential(&g, &scaled, 1, 1.0).unwrap();
        assert!((s3.effective_coefficient() - 2.5 * s1.effective_coefficient()).abs() < 1e-8);
        assert!(s1.max_imbalance < 1e-7, "{}", s1.max_imbalance);
    }

    #[test]
    fn empty_cell_tortuosity_is_one() {
        let g = VoxelGrid::uniform([16, 8, 16], [0.02, 0.01, 0.02], Phase::Matrix, [0.0; 3]).unwrap();
        let (t, _) = effective_tortuosity(&g, 0.0, 0.0, 0.0, 0).unwrap();
        assert!((t.value().unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn impermeable_layer_blocks_diffusion() {
        let g = slab_grid(16, 1);
        let (t, _) = effective_tortuosity(&g, 0.5, 0.0, 0.0, 1).unwrap();
        assert_eq!(t, Tortuosity::Blocked);
    }
}
