//! Structured voxel discretization of the unit cell.

use crate::error::{domain, Error, Result};
use crate::geometry::{tow_at_wrapped, tow_tangent, Phase, UnitCellBox, WeaveParams};
use crate::stl;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Smallest accepted in-plane resolution for weave grids.
pub const MIN_RESOLUTION: usize = 16;

/// Relative change above which a contact-area estimate is flagged as
/// resolution sensitive.
pub const CONTACT_SENSITIVITY_LIMIT: f64 = 0.05;

/// Phase labels and fiber directions on a uniform grid of cells.
/// Cell `(i, j, k)` has linear index `i + nx·(j + ny·k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub spacing: [f64; 3],
    /// Coordinates of the grid corner with the smallest coordinates.
    pub origin: [f64; 3],
    pub phase: Vec<Phase>,
    tangent: Vec<[f64; 3]>,
    pub cell_box: UnitCellBox,
}

/// Header written next to a raw phase dump.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DumpHeader {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub encoding: String,
}

/// Contact area estimate with its resolution-sensitivity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactArea {
    /// Specific contact area [1/cm] at the requested resolution.
    pub value: f64,
    /// Same quantity with the voxel (and hence the contact tolerance) halved.
    pub refined: f64,
    pub relative_change: f64,
    pub flagged: bool,
}

/// Out-of-plane cell count giving `hy ≈ hx/3`.
pub fn out_of_plane_cells(p: &WeaveParams, n_inplane: usize) -> usize {
    let b = p.unit_cell();
    let hx = b.lx / n_inplane as f64;
    ((b.ly / (hx / 3.0)).round() as usize).max(2)
}

/// Samples the weave at cell centroids with `n_inplane` cells along `x` and `z`.
pub fn discretize(p: &WeaveParams, n_inplane: usize) -> Result<VoxelGrid> {
    if n_inplane < MIN_RESOLUTION {
        return domain(format!("in-plane resolution {n_inplane} below {MIN_RESOLUTION}"));
    }
    discretize_any(p, n_inplane)
}

fn discretize_any(p: &WeaveParams, n: usize) -> Result<VoxelGrid> {
    p.validate()?;
    let b = p.unit_cell();
    let ny = out_of_plane_cells(p, n);
    let spacing = [b.lx / n as f64, b.ly / ny as f64, b.lz / n as f64];
    let origin = [0.0, -p.thickness, 0.0];
    let slabs: Vec<(Vec<Phase>, Vec<[f64; 3]>)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut ph = Vec::with_capacity(n * ny);
            let mut tg = Vec::with_capacity(n * ny);
            let z = (k as f64 + 0.5) * spacing[2];
            for j in 0..ny {
                let y = origin[1] + (j as f64 + 0.5) * spacing[1];
                for i in 0..n {
                    let q = [(i as f64 + 0.5) * spacing[0], y, z];
                    match tow_at_wrapped(&q, p) {
                        Some(tow) => {
                            ph.push(tow.phase());
                            tg.push(tow_tangent(&tow, &q, p));
                        }
                        None => {
                            ph.push(Phase::Matrix);
                            tg.push([0.0; 3]);
                        }
                    }
                }
            }
            (ph, tg)
        })
        .collect();
    let mut phase = Vec::with_capacity(n * ny * n);
    let mut tangent = Vec::with_capacity(n * ny * n);
    for (ph, tg) in slabs {
        phase.extend(ph);
        tangent.extend(tg);
    }
    Ok(VoxelGrid { nx: n, ny, nz: n, spacing, origin, phase, tangent, cell_box: b })
}

impl VoxelGrid {
    /// Builds a grid from explicit cell data, used for synthetic fixtures.
    /// `tangent` entries of matrix cells are ignored.
    pub fn from_cells(
        dims: [usize; 3],
        spacing: [f64; 3],
        phase: Vec<Phase>,
        tangent: Vec<[f64; 3]>,
    ) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        if phase.len() != n || tangent.len() != n {
            return domain(format!("cell data length does not match {dims:?}"));
        }
        if dims.iter().any(|&d| d == 0) || spacing.iter().any(|&h| !(h > 0.0)) {
            return domain("grid dimensions and spacing must be positive");
        }
        let mut tangent = tangent;
        for (ph, t) in phase.iter().zip(tangent.iter_mut()) {
            if ph.is_tow() {
                let norm = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
                if !(norm > 0.0) {
                    return domain("tow cell without a fiber direction");
                }
                t.iter_mut().for_each(|v| *v /= norm);
            } else {
                *t = [0.0; 3];
            }
        }
        let cell_box = UnitCellBox {
            lx: dims[0] as f64 * spacing[0],
            ly: dims[1] as f64 * spacing[1],
            lz: dims[2] as f64 * spacing[2],
        };
        Ok(VoxelGrid { nx: dims[0], ny: dims[1], nz: dims[2], spacing, origin: [0.0; 3], phase, tangent, cell_box })
    }

    /// Uniform single-phase grid.
    pub fn uniform(dims: [usize; 3], spacing: [f64; 3], phase: Phase, tangent: [f64; 3]) -> Result<Self> {
        let n = dims[0] * dims[1] * dims[2];
        Self::from_cells(dims, spacing, vec![phase; n], vec![tangent; n])
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.nx, self.ny, self.nz]
    }

    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Fiber direction of a tow cell; `None` for matrix cells.
    pub fn tangent(&self, cell: usize) -> Option<[f64; 3]> {
        self.phase[cell].is_tow().then(|| self.tangent[cell])
    }

    /// Volume fractions `[matrix, warp, weft]`.
    pub fn fractions(&self) -> [f64; 3] {
        let mut counts = [0usize; 3];
        for ph in &self.phase {
            counts[*ph as usize] += 1;
        }
        counts.map(|c| c as f64 / self.len() as f64)
    }

    /// Fraction of cells occupied by tows.
    pub fn weave_fraction(&self) -> f64 {
        let f = self.fractions();
        f[1] + f[2]
    }

    /// Total area of faces shared by a warp cell and a weft cell.
    pub fn warp_weft_interface_area(&self) -> f64 {
        let [nx, ny, nz] = self.dims();
        let h = self.spacing;
        let face = [h[1] * h[2], h[0] * h[2], h[0] * h[1]];
        let mut total = 0.0;
        let touching = |a: Phase, b: Phase| {
            matches!((a, b), (Phase::Warp, Phase::Weft) | (Phase::Weft, Phase::Warp))
        };
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let c = self.phase[self.index(i, j, k)];
                    if !c.is_tow() {
                        continue;
                    }
                    if i + 1 < nx && touching(c, self.phase[self.index(i + 1, j, k)]) {
                        total += face[0];
                    }
                    if j + 1 < ny && touching(c, self.phase[self.index(i, j + 1, k)]) {
                        total += face[1];
                    }
                    if k + 1 < nz && touching(c, self.phase[self.index(i, j, k + 1)]) {
                        total += face[2];
                    }
                }
            }
        }
        total
    }

    /// Warp-weft interface area per unit cell volume [1/cm].
    pub fn specific_contact_area(&self) -> f64 {
        self.warp_weft_interface_area() / self.cell_box.volume()
    }

    /// Writes `<stem>.raw` (one byte per cell, x fastest) and `<stem>.json`.
    pub fn dump(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let bytes: Vec<u8> = self.phase.iter().map(|p| *p as u8).collect();
        std::fs::File::create(dir.join(format!("{stem}.raw")))?.write_all(&bytes)?;
        let header = DumpHeader {
            dims: self.dims(),
            spacing: self.spacing,
            origin: self.origin,
            encoding: "u8 phase label per cell, x fastest; 0 matrix 1 warp 2 weft".into(),
        };
        let json = serde_json::to_string_pretty(&header)?;
        std::fs::write(dir.join(format!("{stem}.json")), json)?;
        Ok(())
    }
}

/// Tow surface area per unit cell volume [1/cm], from the analytic
/// tessellation. Cut faces at the cell boundary are not counted because the
/// tows continue into the neighbouring cells.
pub fn specific_surface_area(p: &WeaveParams, resolution: usize) -> Result<f64> {
    let meshes = stl::tessellate(p, resolution)?;
    let mut area = 0.0;
    for (tow, mesh) in &meshes {
        if mesh.degenerate_count() > 0 {
            return Err(Error::Numerical(format!("degenerate tessellation of {}", tow.name())));
        }
        area += mesh.lateral_area();
    }
    Ok(area / p.unit_cell().volume())
}

/// Warp-weft contact area per unit volume at `resolution`, checked against
/// the estimate with the voxel (contact tolerance) halved.
pub fn specific_contact_area(p: &WeaveParams, resolution: usize) -> Result<ContactArea> {
    let coarse = discretize(p, resolution)?.specific_contact_area();
    let refined = discretize(p, 2 * resolution)?.specific_contact_area();
    Ok(contact_estimate(coarse, refined))
}

pub(crate) fn contact_estimate(value: f64, refined: f64) -> ContactArea {
    let scale = value.abs().max(refined.abs());
    let relative_change = if scale > 0.0 { (refined - value).abs() / scale } else { 0.0 };
    ContactArea { value, refined, relative_change, flagged: relative_change >= CONTACT_SENSITIVITY_LIMIT }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{phase_at_point, weave_volume_fraction};

    fn nominal() -> WeaveParams {
        WeaveParams::new(0.125, 0.03, 0.65, 0.35, 0.7).unwrap()
    }

    #[test]
    fn resolution_rule_and_exact_extent() {
        let p = nominal();
        let g = discretize(&p, 16).unwrap();
        let b = p.unit_cell();
        let expected = (b.ly / (b.lx / 16.0 / 3.0)).round() as usize;
        assert_eq!(g.ny, expected);
        assert_eq!((g.nx, g.nz), (16, 16));
        assert!((g.nx as f64 * g.spacing[0] - b.lx).abs() < 1e-15);
        assert!((g.ny as f64 * g.spacing[1] - b.ly).abs() < 1e-15);
        assert!(discretize(&p, 15).is_err());
    }

    #[test]
    fn labels_match_point_classification() {
        let p = nominal();
        let g = discretize(&p, 24).unwrap();
        for k in (0..g.nz).step_by(3) {
            for j in 0..g.ny {
                for i in (0..g.nx).step_by(2) {
                    let c = [
                        (i as f64 + 0.5) * g.spacing[0],
                        g.origin[1] + (j as f64 + 0.5) * g.spacing[1],
                        (k as f64 + 0.5) * g.spacing[2],
                    ];
                    let cell = g.index(i, j, k);
                    assert_eq!(g.phase[cell], phase_at_point(&c, &p).unwrap());
                    match g.tangent(cell) {
                        Some(t) => assert!(((t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt() - 1.0).abs() < 1e-12),
                        None => assert_eq!(g.phase[cell], Phase::Matrix),
                    }
                }
            }
        }
    }

    #[test]
    fn weave_fraction_converges() {
        let p = nominal();
        let exact = weave_volume_fraction(&p);
        let errs: Vec<f64> =
            [16, 32, 64].iter().map(|&n| (discretize(&p, n).unwrap().weave_fraction() - exact).abs()).collect();
        assert!(errs[2] < 0.01, "{errs:?}");
        // observed order from the last two levels must be at least one
        assert!(errs[2] <= errs[0] / 4.0 * 1.5 + 1e-4, "{errs:?}");
    }

    #[test]
    fn discretization_is_deterministic() {
        let p = nominal();
        assert_eq!(discretize(&p, 20).unwrap(), discretize(&p, 20).unwrap());
    }

    #[test]
    fn surface_area_scaling_and_convergence() {
        let p = nominal();
        let s1 = specific_surface_area(&p, 64).unwrap();
        let s2 = specific_surface_area(&p, 128).unwrap();
        assert!((s1 - s2).abs() / s2 < 0.005);
        let s_big = specific_surface_area(&p.scaled(2.0), 64).unwrap();
        assert!((s_big - s1 / 2.0).abs() / s1 < 1e-10);
        assert!(s1 > 5.6 && s1 < 560.0);
    }

    #[test]
    fn contact_area_never_grows_with_gap() {
        let mut last = f64::INFINITY;
        for g in [0.0, 0.2, 0.4, 0.7] {
            let p = WeaveParams::new(0.125, 0.03, 0.65, g, 0.7).unwrap();
            let c = discretize(&p, 48).unwrap().specific_contact_area();
            assert!(c >= 0.0);
            assert!(c <= last * 1.05 + 1e-9, "g={g}: {c} after {last}");
            last = c;
        }
    }

    #[test]
    fn contact_flag_threshold() {
        assert!(!contact_estimate(10.0, 10.4).flagged);
        assert!(contact_estimate(10.0, 11.0).flagged);
        assert_eq!(contact_estimate(0.0, 0.0).relative_change, 0.0);
    }

    #[test]
    fn dump_writes_header_and_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let g = discretize(&nominal(), 16).unwrap();
        g.dump(dir.path(), "cell").unwrap();
        let raw = std::fs::read(dir.path().join("cell.raw")).unwrap();
        assert_eq!(raw.len(), g.len());
        let h: DumpHeader = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cell.json")).unwrap()).unwrap();
        assert_eq!(h.dims, g.dims());
    }
}
