//! Creeping flow through the space between the tows.
//!
//! Marker-and-cell layout: pressures at fluid cell centers, each velocity
//! component on the faces normal to its axis. A pressure difference drives
//! flow along one axis; the four other boundaries are free-slip walls and
//! tangential velocity vanishes on the inlet and outlet planes. Unknowns on
//! faces touching solid cells are fixed at zero, and no-slip on stair-step
//! tow walls enters through the viscous stencil. The coupled system is solved
//! with preconditioned MINRES after substituting `p' = −p`, which makes it
//! symmetric.

use crate::error::{domain, Error, Result};
use crate::geometry::{tow_at_wrapped, WeaveParams};
use crate::linalg::{minres, CsrMatrix, LinearOperator, Multigrid, MultigridOptions, Preconditioner, SolveStats};
use crate::voxel::{out_of_plane_cells, VoxelGrid, MIN_RESOLUTION};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

pub const SOLVER_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 20_000;

/// Sub-samples per axis used to decide whether a cell is open to flow.
pub const MASK_SUBSAMPLES: usize = 3;

/// Fluid and solid cells on a uniform grid, indexed `i + nx·(j + ny·k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidMask {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub fluid: Vec<bool>,
}

impl FluidMask {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], fluid: Vec<bool>) -> Result<Self> {
        if fluid.len() != dims[0] * dims[1] * dims[2] {
            return domain(format!("mask length does not match {dims:?}"));
        }
        if dims.iter().any(|&d| d == 0) || spacing.iter().any(|&h| !(h > 0.0)) {
            return domain("mask dimensions and spacing must be positive");
        }
        Ok(FluidMask { dims, spacing, fluid })
    }

    /// Every matrix cell of a voxel grid is fluid.
    pub fn from_grid(grid: &VoxelGrid) -> Self {
        FluidMask { dims: grid.dims(), spacing: grid.spacing, fluid: grid.phase.iter().map(|p| !p.is_tow()).collect() }
    }

    /// Conservative mask on the same grid as [`crate::voxel::discretize`]:
    /// a cell is fluid only when every sub-sample lies outside the tows, so
    /// tows that touch along a line cannot leave a spurious voxel channel.
    pub fn from_weave(p: &WeaveParams, n_inplane: usize) -> Result<Self> {
        if n_inplane < MIN_RESOLUTION {
            return domain(format!("in-plane resolution {n_inplane} below {MIN_RESOLUTION}"));
        }
        p.validate()?;
        let b = p.unit_cell();
        let ny = out_of_plane_cells(p, n_inplane);
        let dims = [n_inplane, ny, n_inplane];
        let h = [b.lx / n_inplane as f64, b.ly / ny as f64, b.lz / n_inplane as f64];
        let s = MASK_SUBSAMPLES;
        let mut fluid = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    let mut open = true;
                    'samples: for c in 0..s {
                        for bb in 0..s {
                            for a in 0..s {
                                let q = [
                                    (i as f64 + (a as f64 + 0.5) / s as f64) * h[0],
                                    -p.thickness + (j as f64 + (bb as f64 + 0.5) / s as f64) * h[1],
                                    (k as f64 + (c as f64 + 0.5) / s as f64) * h[2],
                                ];
                                if tow_at_wrapped(&q, p).is_some() {
                                    open = false;
                                    break 'samples;
                                }
                            }
                        }
                    }
                    fluid.push(open);
                }
            }
        }
        FluidMask::new(dims, h, fluid)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    pub fn fluid_fraction(&self) -> f64 {
        self.fluid.iter().filter(|f| **f).count() as f64 / self.fluid.len() as f64
    }

    /// Fluid cells connected to both faces normal to `direction`.
    pub fn percolating(&self, direction: usize) -> Vec<bool> {
        let n = self.fluid.len();
        let reach = |start: usize| {
            let mut seen = vec![false; n];
            let mut queue = VecDeque::new();
            for c in 0..n {
                if self.fluid[c] && self.coords(c)[direction] == start {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
            while let Some(c) = queue.pop_front() {
                let ijk = self.coords(c);
                for axis in 0..3 {
                    for step in [-1i64, 1] {
                        let v = ijk[axis] as i64 + step;
                        if v < 0 || v >= self.dims[axis] as i64 {
                            continue;
                        }
                        let mut nb = ijk;
                        nb[axis] = v as usize;
                        let id = self.index(nb[0], nb[1], nb[2]);
                        if self.fluid[id] && !seen[id] {
                            seen[id] = true;
                            queue.push_back(id);
                        }
                    }
                }
            }
            seen
        };
        let from_inlet = reach(0);
        let from_outlet = reach(self.dims[direction] - 1);
        from_inlet.iter().zip(&from_outlet).map(|(a, b)| *a && *b).collect()
    }

    fn coords(&self, c: usize) -> [usize; 3] {
        [c % self.dims[0], (c / self.dims[0]) % self.dims[1], c / (self.dims[0] * self.dims[1])]
    }
}

/// Converged flow field.
#[derive(Debug, Clone)]
pub struct StokesSolution {
    pub direction: usize,
    /// Face velocities per axis; faces normal to axis `e` are indexed like
    /// cells on a grid with one extra layer along `e`.
    pub velocity: [Vec<f64>; 3],
    /// Cell pressures; `NaN` in solid or dead-end cells.
    pub pressure: Vec<f64>,
    pub inlet_flux: f64,
    pub outlet_flux: f64,
    /// Outlet flux divided by the full outlet face area.
    pub superficial_velocity: f64,
    /// Largest cell volume imbalance relative to the mean face flux.
    pub max_divergence: f64,
    /// Viscous dissipation `uᵀKu` of the discrete field.
    pub dissipation: f64,
    pub pressure_drop: f64,
    pub viscosity: f64,
    pub length: f64,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
pub enum StokesOutcome {
    Flow(Box<StokesSolution>),
    /// No fluid path joins the inlet and outlet.
    Blocked,
}

/// Diagnostics of one Stokes solve for serialization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StokesDiagnostics {
    pub direction: usize,
    pub iterations: usize,
    pub relative_residual: f64,
    pub inlet_flux: f64,
    pub outlet_flux: f64,
    pub max_divergence: f64,
}

impl StokesSolution {
    pub fn diagnostics(&self) -> StokesDiagnostics {
        StokesDiagnostics {
            direction: self.direction,
            iterations: self.stats.iterations,
            relative_residual: self.stats.relative_residual,
            inlet_flux: self.inlet_flux,
            outlet_flux: self.outlet_flux,
            max_divergence: self.max_divergence,
        }
    }
}

/// Darcy permeability `κ = v̄·μ·L/Δp`.
pub fn permeability(sol: &StokesSolution) -> f64 {
    sol.superficial_velocity * sol.viscosity * sol.length / sol.pressure_drop
}

struct FaceGrid {
    dims: [usize; 3],
}

impl FaceGrid {
    fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }
    fn id(&self, ijk: [usize; 3]) -> usize {
        ijk[0] + self.dims[0] * (ijk[1] + self.dims[1] * ijk[2])
    }
}

struct Saddle {
    k: [CsrMatrix; 3],
    d: CsrMatrix,
    dt: CsrMatrix,
    offsets: [usize; 4],
}

impl LinearOperator for Saddle {
    fn dim(&self) -> usize {
        self.offsets[3] + self.d.nrows
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nu = self.offsets[3];
        let (xu, xp) = x.split_at(nu);
        let (yu, yp) = y.split_at_mut(nu);
        for e in 0..3 {
            let r = self.offsets[e]..self.offsets[e + 1];
            self.k[e].spmv(&xu[r.clone()], &mut yu[r]);
        }
        let mut gp = vec![0.0; nu];
        self.dt.spmv(xp, &mut gp);
        for (a, b) in yu.iter_mut().zip(&gp) {
            *a += b;
        }
        self.d.spmv(xu, yp);
    }
}

struct BlockPreconditioner {
    velocity: [Multigrid; 3],
    inv_schur: Vec<f64>,
    offsets: [usize; 4],
}

impl Preconditioner for BlockPreconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let nu = self.offsets[3];
        for e in 0..3 {
            let rg = self.offsets[e]..self.offsets[e + 1];
            self.velocity[e].apply(&r[rg.clone()], &mut z[rg]);
        }
        for ((zi, ri), s) in z[nu..].iter_mut().zip(&r[nu..]).zip(&self.inv_schur) {
            *zi = ri * s;
        }
    }
}

/// Solves for the flow driven by `pressure_drop` along `direction`.
pub fn solve_stokes(mask: &FluidMask, direction: usize, pressure_drop: f64, viscosity: f64) -> Result<StokesOutcome> {
    if direction > 2 {
        return domain(format!("direction {direction} is not an axis"));
    }
    if !(pressure_drop > 0.0 && viscosity > 0.0) {
        return domain("pressure drop and viscosity must be positive");
    }
    if mask.fluid.iter().all(|f| *f) {
        return domain("mask has no solid cells; flow is unbounded between free-slip walls");
    }
    let kept = mask.percolating(direction);
    if !kept.iter().any(|k| *k) {
        return Ok(StokesOutcome::Blocked);
    }
    let n = mask.dims;
    let h = mask.spacing;
    let mu = viscosity;
    let d = direction;
    let cell_open = |ijk: [i64; 3]| -> bool {
        if (0..3).any(|a| ijk[a] < 0 || ijk[a] >= n[a] as i64) {
            return false;
        }
        kept[mask.index(ijk[0] as usize, ijk[1] as usize, ijk[2] as usize)]
    };
    let faces: [FaceGrid; 3] = [0, 1, 2].map(|e| {
        let mut fd = n;
        fd[e] += 1;
        FaceGrid { dims: fd }
    });
    // a face is an unknown when its neighbouring cells are open; lateral
    // boundary faces carry zero normal velocity
    let active = |e: usize, f: [i64; 3]| -> bool {
        if (0..3).any(|a| f[a] < 0 || f[a] >= faces[e].dims[a] as i64) {
            return false;
        }
        let mut lo = f;
        lo[e] -= 1;
        let (a_lo, a_hi) = (cell_open(lo), cell_open(f));
        let at_end = f[e] == 0 || f[e] == n[e] as i64;
        if at_end {
            e == d && (a_lo || a_hi)
        } else {
            a_lo && a_hi
        }
    };
    let area = |e: usize| h[0] * h[1] * h[2] / h[e];

    let mut offsets = [0usize; 4];
    for e in 0..3 {
        offsets[e + 1] = offsets[e] + faces[e].len();
    }
    let ncell = mask.fluid.len();
    let mut k_trip: [Vec<(usize, usize, f64)>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut d_trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut rhs = vec![0.0; offsets[3] + ncell];
    let mut fixed: [Vec<bool>; 3] = [0, 1, 2].map(|e| vec![false; faces[e].len()]);

    for e in 0..3 {
        let fd = faces[e].dims;
        for fk in 0..fd[2] {
            for fj in 0..fd[1] {
                for fi in 0..fd[0] {
                    let f = [fi as i64, fj as i64, fk as i64];
                    let row = faces[e].id([fi, fj, fk]);
                    if !active(e, f) {
                        fixed[e][row] = true;
                        k_trip[e].push((row, row, 1.0));
                        continue;
                    }
                    let boundary = f[e] == 0 || f[e] == n[e] as i64;
                    let hv = if boundary { 0.5 } else { 1.0 };
                    let mut diag = 0.0;
                    for m in 0..3 {
                        for step in [-1i64, 1] {
                            let mut nb = f;
                            nb[m] += step;
                            if m == e {
                                if nb[e] < 0 || nb[e] > n[e] as i64 {
                                    continue;
                                }
                                let c = mu * area(e) / h[e];
                                diag += c;
                                if active(e, nb) {
                                    let col = faces[e].id([nb[0] as usize, nb[1] as usize, nb[2] as usize]);
                                    k_trip[e].push((row, col, -c));
                                }
                                continue;
                            }
                            let other = 3 - e - m;
                            let side = hv * h[e] * h[other];
                            let c = mu * side / h[m];
                            if nb[m] < 0 || nb[m] >= n[m] as i64 {
                                if m == d {
                                    diag += 2.0 * c;
                                }
                                continue;
                            }
                            if active(e, nb) {
                                diag += c;
                                let col = faces[e].id([nb[0] as usize, nb[1] as usize, nb[2] as usize]);
                                k_trip[e].push((row, col, -c));
                            } else {
                                let mut lo = nb;
                                lo[e] -= 1;
                                let wall_between = !cell_open(lo) && !cell_open(nb);
                                diag += if wall_between { 2.0 * c } else { c };
                            }
                        }
                    }
                    k_trip[e].push((row, row, diag));
                    let gdof = offsets[e] + row;
                    let mut lo = f;
                    lo[e] -= 1;
                    if cell_open(f) {
                        let c = mask.index(fi, fj, fk);
                        d_trip.push((c, gdof, -area(e)));
                    }
                    if cell_open(lo) {
                        let c = mask.index(lo[0] as usize, lo[1] as usize, lo[2] as usize);
                        d_trip.push((c, gdof, area(e)));
                    } else if e == d && f[e] == 0 {
                        rhs[gdof] += area(e) * pressure_drop;
                    }
                }
            }
        }
    }
    let k: [CsrMatrix; 3] = [0, 1, 2].map(|e| CsrMatrix::from_triplets(faces[e].len(), faces[e].len(), &k_trip[e]));
    let d_mat = CsrMatrix::from_triplets(ncell, offsets[3], &d_trip);
    let dt = d_mat.transpose();
    let kdiag: Vec<Vec<f64>> = k.iter().map(|m| m.diagonal()).collect();
    let mut inv_schur = vec![1.0; ncell];
    for (c, s) in inv_schur.iter_mut().enumerate() {
        if !kept[c] {
            continue;
        }
        let (cols, vals) = d_mat.row(c);
        let mut acc = 0.0;
        for (col, v) in cols.iter().zip(vals) {
            let g = *col as usize;
            let e = (0..3).find(|&e| g < offsets[e + 1]).unwrap();
            acc += v * v / kdiag[e][g - offsets[e]];
        }
        *s = if acc > 0.0 { 1.0 / acc } else { 1.0 };
    }
    let closed: Vec<usize> = (0..ncell).filter(|c| !kept[*c]).collect();

    let velocity_mg: Vec<Multigrid> = (0..3)
        .map(|e| {
            let fd = faces[e].dims;
            let coords = [0, 1, 2].map(|a| {
                (0..fd[a])
                    .map(|i| if a == e { i as f64 * h[a] } else { (i as f64 + 0.5) * h[a] })
                    .collect::<Vec<f64>>()
            });
            Multigrid::new(k[e].clone(), coords, 1, &fixed[e], MultigridOptions::default())
        })
        .collect::<Result<_>>()?;
    let velocity: [Multigrid; 3] = velocity_mg.try_into().map_err(|_| Error::Logic("three velocity blocks".into()))?;

    let op = ClosedCells { inner: Saddle { k, d: d_mat, dt, offsets }, closed: &closed };
    let pre = BlockPreconditioner { velocity, inv_schur, offsets };
    let mut x = vec![0.0; rhs.len()];
    let stats = minres(&op, &pre, &rhs, &mut x, SOLVER_TOLERANCE, MAX_ITERATIONS)?;

    let saddle = &op.inner;
    let vel: [Vec<f64>; 3] = [0, 1, 2].map(|e| x[offsets[e]..offsets[e + 1]].to_vec());
    let pressure: Vec<f64> = (0..ncell).map(|c| if kept[c] { -x[offsets[3] + c] } else { f64::NAN }).collect();

    let flux_through = |plane: usize| {
        let fd = faces[d].dims;
        let mut q = 0.0;
        for fk in 0..fd[2] {
            for fj in 0..fd[1] {
                for fi in 0..fd[0] {
                    let ijk = [fi, fj, fk];
                    if ijk[d] == plane {
                        q += vel[d][faces[d].id(ijk)] * area(d);
                    }
                }
            }
        }
        q
    };
    let inlet_flux = flux_through(0);
    let outlet_flux = flux_through(n[d]);
    let mut div = vec![0.0; ncell];
    saddle.d.spmv(&x[..offsets[3]], &mut div);
    let outlet_cells = (0..ncell).filter(|&c| kept[c] && mask.coords(c)[d] == n[d] - 1).count().max(1);
    let mean_face = outlet_flux.abs() / outlet_cells as f64;
    let worst = div.iter().zip(&kept).filter(|(_, k)| **k).map(|(v, _)| v.abs()).fold(0.0, f64::max);
    let max_divergence = if mean_face > 0.0 { worst / mean_face } else { worst };
    let mut dissipation = 0.0;
    for (e, ve) in vel.iter().enumerate() {
        let mut ku = vec![0.0; ve.len()];
        saddle.k[e].spmv(ve, &mut ku);
        dissipation += ku.iter().zip(ve).zip(&fixed[e]).filter(|(_, f)| !**f).map(|((a, b), _)| a * b).sum::<f64>();
    }
    let total_area = n.iter().zip(h.iter()).enumerate().filter(|(a, _)| *a != d).map(|(_, (c, hh))| *c as f64 * hh).product::<f64>();
    Ok(StokesOutcome::Flow(Box::new(StokesSolution {
        direction,
        velocity: vel,
        pressure,
        inlet_flux,
        outlet_flux,
        superficial_velocity: outlet_flux / total_area,
        max_divergence,
        dissipation,
        pressure_drop,
        viscosity,
        length: n[d] as f64 * h[d],
        stats,
    })))
}

/// Saddle operator with identity rows for pressures of closed cells.
struct ClosedCells<'a> {
    inner: Saddle,
    closed: &'a [usize],
}

impl LinearOperator for ClosedCells<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply(x, y);
        let nu = self.inner.offsets[3];
        for &c in self.closed {
            y[nu + c] = x[nu + c];
        }
    }
}
