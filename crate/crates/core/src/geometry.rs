//! Analytic plain-weave unit cell.
//!
//! The cell spans `x, z ∈ [0, 2a]` and `y ∈ [-t, t]`, with `a = w(1+g)`.
//! Two warp tows run along `z` (centered at `x = a/2` and `x = 3a/2`) and two
//! weft tows run along `x` (centered at `z = a/2` and `z = 3a/2`). Adjacent
//! parallel tows are shifted by half a path period, so every crossing puts one
//! tow in the upper half of the cell and the other in the lower half.

use crate::error::{domain, Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub type Point3 = [f64; 3];

/// Geometric parameters of one plain-weave unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeaveParams {
    /// Tow width `w` [cm].
    pub tow_width: f64,
    /// Tow thickness `t` [cm]; the cell is `2t` thick.
    pub thickness: f64,
    /// Undulation fraction `u`; the sinusoidal transition length is `u·w`.
    pub undulation: f64,
    /// Gap fraction `g` between adjacent parallel tows.
    pub gap: f64,
    /// Filament volume fraction inside a tow.
    pub fiber_packing: f64,
}

/// Outer dimensions of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitCellBox {
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

impl UnitCellBox {
    pub fn volume(&self) -> f64 {
        self.lx * self.ly * self.lz
    }

    pub fn length(&self, axis: usize) -> f64 {
        [self.lx, self.ly, self.lz][axis]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Phase {
    Matrix = 0,
    Warp = 1,
    Weft = 2,
}

impl Phase {
    pub fn is_tow(self) -> bool {
        self != Phase::Matrix
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TowFamily {
    /// Runs along `z`.
    Warp,
    /// Runs along `x`.
    Weft,
}

/// One of the four tows of the unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tow {
    pub family: TowFamily,
    pub index: usize,
}

impl Tow {
    pub const ALL: [Tow; 4] = [
        Tow { family: TowFamily::Warp, index: 0 },
        Tow { family: TowFamily::Warp, index: 1 },
        Tow { family: TowFamily::Weft, index: 0 },
        Tow { family: TowFamily::Weft, index: 1 },
    ];

    pub fn phase(&self) -> Phase {
        match self.family {
            TowFamily::Warp => Phase::Warp,
            TowFamily::Weft => Phase::Weft,
        }
    }

    pub fn name(&self) -> String {
        match self.family {
            TowFamily::Warp => format!("tow_warp_{}", self.index),
            TowFamily::Weft => format!("tow_weft_{}", self.index),
        }
    }

    /// Center of the tow footprint along its lateral axis.
    pub fn lateral_center(&self, p: &WeaveParams) -> f64 {
        let a = p.half_cell();
        a / 2.0 + self.index as f64 * a
    }

    /// Shift applied to the path coordinate before evaluating the centerline.
    fn path_shift(&self, p: &WeaveParams) -> f64 {
        let a = p.half_cell();
        match self.family {
            TowFamily::Warp => self.index as f64 * a,
            TowFamily::Weft => (1.0 - self.index as f64) * a,
        }
    }

    /// Index of the lateral coordinate (0 = x, 2 = z).
    pub fn lateral_axis(&self) -> usize {
        match self.family {
            TowFamily::Warp => 0,
            TowFamily::Weft => 2,
        }
    }

    /// Index of the coordinate the tow runs along.
    pub fn along_axis(&self) -> usize {
        2 - self.lateral_axis()
    }

    /// Centerline elevation at the given along-tow coordinate.
    pub fn center_y(&self, along: f64, p: &WeaveParams) -> f64 {
        centerline_path(along + self.path_shift(p), p)
    }

    pub fn center_slope(&self, along: f64, p: &WeaveParams) -> f64 {
        centerline_slope(along + self.path_shift(p), p)
    }

    /// Local cross-section coordinate `x' ∈ [0, w]`, or `None` outside the footprint.
    pub fn local_lateral(&self, lateral: f64, p: &WeaveParams) -> Option<f64> {
        let xl = lateral - (self.lateral_center(p) - p.tow_width / 2.0);
        (0.0..=p.tow_width).contains(&xl).then_some(xl)
    }

    /// Inclusive membership test on an already wrapped point.
    pub fn contains(&self, pt: &Point3, p: &WeaveParams) -> bool {
        match self.local_lateral(pt[self.lateral_axis()], p) {
            Some(xl) => {
                let h = half_thickness_unchecked(xl, p);
                (pt[1] - self.center_y(pt[self.along_axis()], p)).abs() <= h
            }
            None => false,
        }
    }
}

impl WeaveParams {
    pub fn new(tow_width: f64, thickness: f64, undulation: f64, gap: f64, fiber_packing: f64) -> Result<Self> {
        let p = WeaveParams { tow_width, thickness, undulation, gap, fiber_packing };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.tow_width > 0.0
            && self.thickness > 0.0
            && self.undulation > 0.0
            && self.undulation <= 1.0
            && self.gap >= 0.0
            && self.fiber_packing > 0.0
            && self.fiber_packing < 1.0
            && [self.tow_width, self.thickness, self.undulation, self.gap].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            domain(format!("invalid weave parameters {self:?}"))
        }
    }

    /// Half-cell length `a = w(1+g)`.
    pub fn half_cell(&self) -> f64 {
        self.tow_width * (1.0 + self.gap)
    }

    /// Undulation length `L_u = u·w`.
    pub fn undulation_length(&self) -> f64 {
        self.undulation * self.tow_width
    }

    pub fn unit_cell(&self) -> UnitCellBox {
        let a = self.half_cell();
        UnitCellBox { lx: 2.0 * a, ly: 2.0 * self.thickness, lz: 2.0 * a }
    }

    /// Returns a copy with every length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        WeaveParams { tow_width: self.tow_width * factor, thickness: self.thickness * factor, ..*self }
    }
}

/// Tow cross-section half-thickness `h(x)` for `x ∈ [0, w]`.
pub fn half_thickness_profile(x: f64, p: &WeaveParams) -> Result<f64> {
    if !(0.0..=p.tow_width).contains(&x) {
        return domain(format!("cross-section coordinate {x} outside [0, {}]", p.tow_width));
    }
    Ok(half_thickness_unchecked(x, p))
}

pub(crate) fn half_thickness_unchecked(x: f64, p: &WeaveParams) -> f64 {
    let w = p.tow_width;
    let lu = p.undulation_length();
    let half_t = 0.5 * p.thickness;
    if x <= 0.5 * lu {
        half_t * (PI * x / lu).sin().max(0.0)
    } else if x <= w - 0.5 * lu {
        half_t
    } else {
        half_t * (PI * (w - x) / lu).sin().max(0.0)
    }
}

fn wrap(z: f64, period: f64) -> f64 {
    let r = z.rem_euclid(period);
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Centerline elevation of the reference tow path, periodic with period `2a`.
pub fn centerline_path(z: f64, p: &WeaveParams) -> f64 {
    let a = p.half_cell();
    let lu = p.undulation_length();
    let half_t = 0.5 * p.thickness;
    let z = wrap(z, 2.0 * a);
    if z <= 0.5 * lu {
        half_t * (PI * z / lu).sin()
    } else if z <= a - 0.5 * lu {
        half_t
    } else if z <= a + 0.5 * lu {
        half_t * (PI * (a - z) / lu).sin()
    } else if z <= 2.0 * a - 0.5 * lu {
        -half_t
    } else {
        half_t * (PI * (z - 2.0 * a) / lu).sin()
    }
}

/// Analytic derivative of [`centerline_path`].
pub fn centerline_slope(z: f64, p: &WeaveParams) -> f64 {
    let a = p.half_cell();
    let lu = p.undulation_length();
    let c = 0.5 * p.thickness * PI / lu;
    let z = wrap(z, 2.0 * a);
    if z <= 0.5 * lu {
        c * (PI * z / lu).cos()
    } else if z <= a - 0.5 * lu {
        0.0
    } else if z <= a + 0.5 * lu {
        -c * (PI * (a - z) / lu).cos()
    } else if z <= 2.0 * a - 0.5 * lu {
        0.0
    } else {
        c * (PI * (z - 2.0 * a) / lu).cos()
    }
}

/// Upper and lower surface of the reference tow at cross-section coordinate `x`
/// and path coordinate `z`.
pub fn tow_surface(x: f64, z: f64, p: &WeaveParams) -> Result<(f64, f64)> {
    let h = half_thickness_profile(x, p)?;
    let f = centerline_path(z, p);
    Ok((f + h, f - h))
}

fn wrap_point(pt: &Point3, p: &WeaveParams) -> Result<Point3> {
    let period = 2.0 * p.half_cell();
    if !pt.iter().all(|v| v.is_finite()) {
        return domain("non-finite point");
    }
    let t = p.thickness;
    if pt[1] < -t || pt[1] > t {
        return domain(format!("y = {} outside [-{t}, {t}]", pt[1]));
    }
    Ok([wrap(pt[0], period), pt[1], wrap(pt[2], period)])
}

/// Classifies a point. Points on a tow surface count as tow; warp wins ties.
pub fn phase_at_point(pt: &Point3, p: &WeaveParams) -> Result<Phase> {
    let q = wrap_point(pt, p)?;
    Ok(tow_at_wrapped(&q, p).map_or(Phase::Matrix, |tow| tow.phase()))
}

pub(crate) fn tow_at_wrapped(q: &Point3, p: &WeaveParams) -> Option<Tow> {
    Tow::ALL.into_iter().find(|tow| tow.contains(q, p))
}

/// Unit fiber direction at a tow point, following the tow centerline.
pub fn fiber_tangent_at_point(pt: &Point3, p: &WeaveParams) -> Result<[f64; 3]> {
    let q = wrap_point(pt, p)?;
    let tow = tow_at_wrapped(&q, p)
        .ok_or_else(|| Error::Logic(format!("fiber tangent requested at matrix point {pt:?}")))?;
    Ok(tow_tangent(&tow, &q, p))
}

pub(crate) fn tow_tangent(tow: &Tow, q: &Point3, p: &WeaveParams) -> [f64; 3] {
    let s = tow.center_slope(q[tow.along_axis()], p);
    let n = (1.0 + s * s).sqrt();
    match tow.family {
        TowFamily::Warp => [0.0, s / n, 1.0 / n],
        TowFamily::Weft => [1.0 / n, s / n, 0.0],
    }
}

/// Average slope of the undulating segment, `ω = 2t/(w·u)`.
pub fn waviness(p: &WeaveParams) -> f64 {
    2.0 * p.thickness / (p.tow_width * p.undulation)
}

/// Area density of the tow cross-section inside its bounding rectangle.
pub fn v_max_area_density(p: &WeaveParams) -> f64 {
    1.0 - p.undulation * (1.0 - 2.0 / PI)
}

/// Tow cross-section area `A_w`.
pub fn cross_section_area(p: &WeaveParams) -> f64 {
    p.tow_width * p.thickness * v_max_area_density(p)
}

/// Volume fraction of the cell occupied by tows.
pub fn weave_volume_fraction(p: &WeaveParams) -> f64 {
    v_max_area_density(p) / (1.0 + p.gap)
}

/// Fiber volume fraction of the whole cell.
pub fn analytic_fiber_volume_fraction(p: &WeaveParams) -> f64 {
    p.fiber_packing * weave_volume_fraction(p)
}

/// Volume of one tow inside the unit cell. A tow is a translation of its
/// cross-section along the path, so its volume is the area times the
/// cell length.
pub fn tow_volume(p: &WeaveParams) -> f64 {
    cross_section_area(p) * 2.0 * p.half_cell()
}
