//! Closed triangle meshes of the tows and binary STL output.

use crate::error::{Error, Result};
use crate::geometry::{half_thickness_unchecked, Point3, Tow, TowFamily, WeaveParams};
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Triangle mesh of a single tow. Triangles from `cap_start` on close the two
/// ends of the tow at the cell boundary.
#[derive(Debug, Clone)]
pub struct TowMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
    pub cap_start: usize,
}

fn sub(a: &Point3, b: &Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &Point3, b: &Point3) -> Point3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &Point3, b: &Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: &Point3) -> f64 {
    dot(a, a).sqrt()
}

impl TowMesh {
    fn corners(&self, t: &[u32; 3]) -> [Point3; 3] {
        [self.vertices[t[0] as usize], self.vertices[t[1] as usize], self.vertices[t[2] as usize]]
    }

    /// Non-normalized normal; its length is twice the triangle area.
    pub fn facet_normal(&self, t: &[u32; 3]) -> Point3 {
        let [a, b, c] = self.corners(t);
        cross(&sub(&b, &a), &sub(&c, &a))
    }

    pub fn facet_area(&self, t: &[u32; 3]) -> f64 {
        0.5 * norm(&self.facet_normal(t))
    }

    /// Enclosed volume by the divergence theorem; positive for outward orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = self.corners(t);
                dot(&a, &cross(&b, &c)) / 6.0
            })
            .sum()
    }

    /// Area of the tow flanks, excluding the end caps.
    pub fn lateral_area(&self) -> f64 {
        self.triangles[..self.cap_start].iter().map(|t| self.facet_area(t)).sum()
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.facet_area(t)).sum()
    }

    /// Triangles whose area is negligible relative to the mesh extent.
    pub fn degenerate_count(&self) -> usize {
        let scale = self
            .vertices
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let tol = 1e-14 * scale * scale;
        self.triangles.iter().filter(|t| self.facet_area(t) <= tol).count()
    }

    /// `V − E + F`; 2 for a closed genus-0 surface.
    pub fn euler_characteristic(&self) -> i64 {
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                edges.insert((a.min(b), a.max(b)));
            }
        }
        self.vertices.len() as i64 - edges.len() as i64 + self.triangles.len() as i64
    }

    /// Every directed edge has exactly one oppositely directed partner.
    pub fn is_consistently_closed(&self) -> bool {
        let mut count: HashMap<(u32, u32), i32> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                *count.entry((t[e], t[(e + 1) % 3])).or_default() += 1;
            }
        }
        count.iter().all(|(&(a, b), &n)| n == 1 && count.get(&(b, a)) == Some(&1))
    }
}

/// Builds the closed surface of one tow. `resolution` is the number of
/// segments across the tow width; the path direction uses twice as many.
pub fn tessellate_tow(p: &WeaveParams, tow: Tow, resolution: usize) -> Result<TowMesh> {
    p.validate()?;
    if resolution < 8 {
        return Err(Error::Domain(format!("tessellation resolution {resolution} below 8")));
    }
    let nr = resolution;
    let ns = 2 * resolution;
    let w = p.tow_width;
    let length = 2.0 * p.half_cell();
    let x0 = tow.lateral_center(p) - 0.5 * w;
    let to_global = |xl: f64, y: f64, s: f64| -> Point3 {
        match tow.family {
            TowFamily::Warp => [x0 + xl, y, s],
            TowFamily::Weft => [s, y, x0 + xl],
        }
    };
    let xs: Vec<f64> = (0..=nr).map(|i| w * i as f64 / nr as f64).collect();
    let ss: Vec<f64> = (0..=ns).map(|k| length * k as f64 / ns as f64).collect();
    let hs: Vec<f64> = xs.iter().map(|&x| half_thickness_unchecked(x, p)).collect();

    let mut vertices = Vec::with_capacity((2 * nr) * (ns + 1) + 2);
    let upper = |i: usize, k: usize| (k * (nr + 1) + i) as u32;
    for &s in &ss {
        let yc = tow.center_y(s, p);
        for (i, &x) in xs.iter().enumerate() {
            let h = if i == 0 || i == nr { 0.0 } else { hs[i] };
            vertices.push(to_global(x, yc + h, s));
        }
    }
    let lower_base = vertices.len();
    for &s in &ss {
        let yc = tow.center_y(s, p);
        for i in 1..nr {
            vertices.push(to_global(xs[i], yc - hs[i], s));
        }
    }
    let lower = |i: usize, k: usize| -> u32 {
        if i == 0 || i == nr {
            upper(i, k)
        } else {
            (lower_base + k * (nr - 1) + (i - 1)) as u32
        }
    };

    let mut triangles = Vec::with_capacity(4 * nr * ns + 4 * nr);
    for k in 0..ns {
        for i in 0..nr {
            triangles.push([upper(i, k), upper(i, k + 1), upper(i + 1, k)]);
            triangles.push([upper(i + 1, k), upper(i, k + 1), upper(i + 1, k + 1)]);
            triangles.push([lower(i, k), lower(i + 1, k), lower(i, k + 1)]);
            triangles.push([lower(i + 1, k), lower(i + 1, k + 1), lower(i, k + 1)]);
        }
    }
    let cap_start = triangles.len();
    for (k, reversed) in [(0usize, false), (ns, true)] {
        let s = ss[k];
        let center = vertices.len() as u32;
        vertices.push(to_global(0.5 * w, tow.center_y(s, p), s));
        let mut ring: Vec<u32> = (0..=nr).map(|i| upper(i, k)).collect();
        ring.extend((1..nr).rev().map(|i| lower(i, k)));
        for m in 0..ring.len() {
            let (a, b) = (ring[m], ring[(m + 1) % ring.len()]);
            triangles.push(if reversed { [center, b, a] } else { [center, a, b] });
        }
    }
    if tow.family == TowFamily::Weft {
        // the weft frame is a reflection of the warp frame
        for t in &mut triangles {
            t.swap(1, 2);
        }
    }
    Ok(TowMesh { vertices, triangles, cap_start })
}

/// Meshes of all four tows.
pub fn tessellate(p: &WeaveParams, resolution: usize) -> Result<Vec<(Tow, TowMesh)>> {
    Tow::ALL.iter().map(|&t| Ok((t, tessellate_tow(p, t, resolution)?))).collect()
}

pub fn write_binary_stl<W: Write>(mesh: &TowMesh, name: &str, mut out: W) -> Result<()> {
    let mut header = [0u8; 80];
    let text = format!("binary STL {name}");
    let n = text.len().min(80);
    header[..n].copy_from_slice(&text.as_bytes()[..n]);
    out.write_all(&header)?;
    out.write_all(&(mesh.triangles.len() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(50 * mesh.triangles.len());
    for t in &mesh.triangles {
        let nrm = mesh.facet_normal(t);
        let len = norm(&nrm);
        for c in nrm {
            buf.extend_from_slice(&((c / len) as f32).to_le_bytes());
        }
        for v in t {
            for c in mesh.vertices[*v as usize] {
                buf.extend_from_slice(&(c as f32).to_le_bytes());
            }
        }
        buf.extend_from_slice(&0u16.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

/// Facets of a binary STL file as `(normal, [v0, v1, v2])`.
pub type StlFacet = ([f32; 3], [[f32; 3]; 3]);

pub fn read_binary_stl<R: Read>(mut input: R) -> Result<Vec<StlFacet>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() < 84 {
        return Err(Error::Domain("STL shorter than its header".into()));
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    if bytes.len() != 84 + 50 * count {
        return Err(Error::Domain(format!("STL size {} does not match {count} facets", bytes.len())));
    }
    let f = |o: usize| f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    Ok((0..count)
        .map(|i| {
            let o = 84 + 50 * i;
            let v = |j: usize| [f(o + 12 * j), f(o + 12 * j + 4), f(o + 12 * j + 8)];
            (v(0), [v(1), v(2), v(3)])
        })
        .collect())
}

/// Writes one binary STL per tow into `dir` and returns the file paths.
pub fn export_stl(p: &WeaveParams, resolution: usize, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (tow, mesh) in tessellate(p, resolution)? {
        let bad = mesh.degenerate_count();
        if bad > 0 {
            return Err(Error::Numerical(format!("{} has {bad} degenerate triangles", tow.name())));
        }
        let path = dir.join(format!("{}.stl", tow.name()));
        let file = std::io::BufWriter::new(std::fs::File::create(&path)?);
        write_binary_stl(&mesh, &tow.name(), file)?;
        paths.push(path);
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::tow_volume;

    fn nominal() -> WeaveParams {
        WeaveParams::new(0.125, 0.03, 0.65, 0.35, 0.7).unwrap()
    }

    #[test]
    fn meshes_are_closed_spheres() {
        for p in [nominal(), WeaveParams::new(0.1, 0.02, 1.0, 0.0, 0.7).unwrap()] {
            for (tow, m) in tessellate(&p, 16).unwrap() {
                assert_eq!(m.euler_characteristic(), 2, "{}", tow.name());
                assert!(m.is_consistently_closed(), "{}", tow.name());
                assert!(m.signed_volume() > 0.0, "{}", tow.name());
                assert_eq!(m.degenerate_count(), 0);
            }
        }
    }

    #[test]
    fn mesh_volume_matches_tow_volume() {
        let p = nominal();
        for (tow, m) in tessellate(&p, 128).unwrap() {
            let rel = m.signed_volume() / tow_volume(&p) - 1.0;
            assert!(rel.abs() < 0.01, "{}: {rel}", tow.name());
        }
    }

    #[test]
    fn binary_layout_round_trip() {
        let p = nominal();
        let m = tessellate_tow(&p, Tow::ALL[2], 8).unwrap();
        let mut bytes = Vec::new();
        write_binary_stl(&m, "t", &mut bytes).unwrap();
        assert_eq!(bytes.len(), 84 + 50 * m.triangles.len());
        let facets = read_binary_stl(&bytes[..]).unwrap();
        assert_eq!(facets.len(), m.triangles.len());
        for ((n, v), t) in facets.iter().zip(&m.triangles) {
            let exact = m.vertices[t[1] as usize];
            assert!((v[1][0] as f64 - exact[0]).abs() < 1e-6);
            let ln = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            assert!((ln - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn rejects_coarse_resolution() {
        assert!(tessellate_tow(&nominal(), Tow::ALL[0], 7).is_err());
    }
}
