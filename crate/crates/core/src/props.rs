//! Effective composite properties of one sample.

use crate::elasticity::{
    build_cell_stiffness, effective_youngs_poisson, solve_shear, solve_thermal_expansion, solve_uniaxial,
    TransverseIsotropic,
};
use crate::error::{domain, Error, Result};
use crate::geometry::{analytic_fiber_volume_fraction, weave_volume_fraction};
use crate::micromech::{
    chamis_yarn_conductivity, chamis_yarn_cte, chamis_yarn_elastic, matrix_props, yarn_diffusivity,
    yarn_transverse_poisson, ConstituentSet, MatrixProps,
};
use crate::stokes::{permeability, solve_stokes, FluidMask, StokesOutcome};
use crate::transport::{effective_conductivity, effective_tortuosity, Tortuosity};
use crate::voxel::{contact_estimate, discretize, specific_surface_area, ContactArea};
use serde::{Deserialize, Serialize};

/// Names of the quantities of interest, in reporting order.
pub const QOI_NAMES: [&str; 19] = [
    "v_f", "S_w", "CA_w", "rho", "tau_ip", "tau_oop", "kappa_ip", "kappa_oop", "C", "k_ip", "k_oop", "E_ip",
    "E_oop", "mu_xy", "mu_xz", "nu_yx", "nu_zy", "alpha_ip", "alpha_oop",
];

/// Index of a quantity of interest in [`QOI_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qoi {
    FiberFraction = 0,
    SurfaceArea,
    ContactArea,
    Density,
    TortuosityIp,
    TortuosityOop,
    PermeabilityIp,
    PermeabilityOop,
    SpecificHeat,
    ConductivityIp,
    ConductivityOop,
    YoungIp,
    YoungOop,
    ShearXy,
    ShearXz,
    PoissonYx,
    PoissonZy,
    CteIp,
    CteOop,
}

impl Qoi {
    pub const ALL: [Qoi; 19] = [
        Qoi::FiberFraction,
        Qoi::SurfaceArea,
        Qoi::ContactArea,
        Qoi::Density,
        Qoi::TortuosityIp,
        Qoi::TortuosityOop,
        Qoi::PermeabilityIp,
        Qoi::PermeabilityOop,
        Qoi::SpecificHeat,
        Qoi::ConductivityIp,
        Qoi::ConductivityOop,
        Qoi::YoungIp,
        Qoi::YoungOop,
        Qoi::ShearXy,
        Qoi::ShearXz,
        Qoi::PoissonYx,
        Qoi::PoissonZy,
        Qoi::CteIp,
        Qoi::CteOop,
    ];

    pub fn name(self) -> &'static str {
        QOI_NAMES[self as usize]
    }

    pub fn from_name(name: &str) -> Option<Qoi> {
        QOI_NAMES.iter().position(|n| *n == name).map(|i| Qoi::ALL[i])
    }
}

/// Groups of quantities that share a solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Fiber fraction, density and specific heat.
    ClosedForm,
    /// Surface and contact area.
    Geometry,
    Conductivity,
    Tortuosity,
    Elastic,
    ThermalExpansion,
    Permeability,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::ClosedForm,
        Family::Geometry,
        Family::Conductivity,
        Family::Tortuosity,
        Family::Elastic,
        Family::ThermalExpansion,
        Family::Permeability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::ClosedForm => "closed-form",
            Family::Geometry => "geometry",
            Family::Conductivity => "conductivity",
            Family::Tortuosity => "tortuosity",
            Family::Elastic => "elastic",
            Family::ThermalExpansion => "thermal-expansion",
            Family::Permeability => "permeability",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown quantity family '{s}'")))
    }

    pub fn members(self) -> &'static [Qoi] {
        use Qoi::*;
        match self {
            Family::ClosedForm => &[FiberFraction, Density, SpecificHeat],
            Family::Geometry => &[SurfaceArea, ContactArea],
            Family::Conductivity => &[ConductivityIp, ConductivityOop],
            Family::Tortuosity => &[TortuosityIp, TortuosityOop],
            Family::Elastic => &[YoungIp, YoungOop, ShearXy, ShearXz, PoissonYx, PoissonZy],
            Family::ThermalExpansion => &[CteIp, CteOop],
            Family::Permeability => &[PermeabilityIp, PermeabilityOop],
        }
    }
}

/// Which solver families run. Closed-form quantities are always computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Toggles {
    pub geometry: bool,
    pub conductivity: bool,
    pub tortuosity: bool,
    pub elastic: bool,
    pub thermal_expansion: bool,
    pub permeability: bool,
}

impl Default for Toggles {
    fn default() -> Self {
        Self::all()
    }
}

impl Toggles {
    pub fn all() -> Self {
        Toggles {
            geometry: true,
            conductivity: true,
            tortuosity: true,
            elastic: true,
            thermal_expansion: true,
            permeability: true,
        }
    }

    pub fn closed_form_only() -> Self {
        Toggles {
            geometry: false,
            conductivity: false,
            tortuosity: false,
            elastic: false,
            thermal_expansion: false,
            permeability: false,
        }
    }

    /// Only the listed families (closed form is implied).
    pub fn only(families: &[Family]) -> Self {
        let mut t = Self::closed_form_only();
        for f in families {
            t.set(*f, true);
        }
        t
    }

    pub fn set(&mut self, f: Family, on: bool) {
        match f {
            Family::ClosedForm => {}
            Family::Geometry => self.geometry = on,
            Family::Conductivity => self.conductivity = on,
            Family::Tortuosity => self.tortuosity = on,
            Family::Elastic => self.elastic = on,
            Family::ThermalExpansion => self.thermal_expansion = on,
            Family::Permeability => self.permeability = on,
        }
    }

    pub fn enabled(&self, f: Family) -> bool {
        match f {
            Family::ClosedForm => true,
            Family::Geometry => self.geometry,
            Family::Conductivity => self.conductivity,
            Family::Tortuosity => self.tortuosity,
            Family::Elastic => self.elastic,
            Family::ThermalExpansion => self.thermal_expansion,
            Family::Permeability => self.permeability,
        }
    }

    fn needs_grid(&self) -> bool {
        self.geometry || self.conductivity || self.tortuosity || self.elastic || self.thermal_expansion
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "lowercase")]
pub enum Status {
    Computed,
    Skipped,
    /// No transport path joins the two faces.
    Blocked,
    Failed(String),
}

/// The nineteen quantities of one sample with per-quantity status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QoIRecord {
    pub values: [Option<f64>; 19],
    pub status: Vec<Status>,
    /// Tow volume fraction measured on the voxel grid, when a grid was built.
    pub grid_weave_fraction: Option<f64>,
    /// Contact area resolution check.
    pub contact: Option<ContactArea>,
}

impl QoIRecord {
    fn empty() -> Self {
        QoIRecord { values: [None; 19], status: vec![Status::Skipped; 19], grid_weave_fraction: None, contact: None }
    }

    /// Record of a sample that could not be evaluated at all.
    pub fn all_failed(e: &Error) -> Self {
        let mut r = Self::empty();
        for q in Qoi::ALL {
            r.fail(q, e);
        }
        r
    }

    pub fn get(&self, q: Qoi) -> Option<f64> {
        self.values[q as usize]
    }

    pub fn status(&self, q: Qoi) -> &Status {
        &self.status[q as usize]
    }

    pub fn blocked(&self, q: Qoi) -> bool {
        self.status[q as usize] == Status::Blocked
    }

    fn put(&mut self, q: Qoi, v: f64) {
        if v.is_finite() {
            self.values[q as usize] = Some(v);
            self.status[q as usize] = Status::Computed;
        } else {
            self.fail(q, &Error::Numerical(format!("non-finite value {v}")));
        }
    }

    fn fail(&mut self, q: Qoi, e: &Error) {
        self.values[q as usize] = None;
        self.status[q as usize] = Status::Failed(e.to_string());
    }

    fn fail_family(&mut self, f: Family, e: &Error) {
        for q in f.members() {
            self.fail(*q, e);
        }
    }

    /// Names of quantities whose solver failed.
    pub fn failed(&self) -> Vec<&'static str> {
        Qoi::ALL
            .iter()
            .filter(|q| matches!(self.status[**q as usize], Status::Failed(_)))
            .map(|q| q.name())
            .collect()
    }
}

/// Volume fractions of the four constituents in the whole unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellFractions {
    pub fiber: f64,
    pub resin: f64,
    pub filler: f64,
    pub pore: f64,
}

/// Splits the cell into constituents given the tow volume fraction. Matrix
/// inside the tows has the same composition as the matrix between them.
pub fn cell_fractions(c: &ConstituentSet, weave_fraction: f64) -> Result<CellFractions> {
    let m = crate::micromech::matrix_volume_fractions(c);
    let fiber = c.v_f_w * weave_fraction;
    let rest = 1.0 - fiber;
    let f = CellFractions { fiber, resin: rest * m.resin, filler: rest * m.filler, pore: rest * m.pore };
    let total = f.fiber + f.resin + f.filler + f.pore;
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Logic(format!("cell fractions sum to {total}")));
    }
    Ok(f)
}

/// `ρ* = Σ ρ_i v_i`, pores massless.
pub fn composite_density(c: &ConstituentSet, f: &CellFractions) -> Result<f64> {
    let total = f.fiber + f.resin + f.filler + f.pore;
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Logic(format!("cell fractions sum to {total}")));
    }
    Ok(c.rho_f * f.fiber + c.rho_res * f.resin + c.rho_fill * f.filler)
}

/// Mass-weighted specific heat.
pub fn composite_specific_heat(c: &ConstituentSet, f: &CellFractions, density: f64) -> Result<f64> {
    if density == 0.0 {
        return domain("density is zero");
    }
    Ok((c.c_f * c.rho_f * f.fiber + c.c_res * c.rho_res * f.resin + c.c_fill * c.rho_fill * f.filler) / density)
}

/// Solver settings for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub resolution: usize,
    /// Width and path segments of the tow tessellation behind `S_w`.
    pub surface_resolution: usize,
    pub toggles: Toggles,
}

impl EvalSettings {
    pub fn new(resolution: usize, toggles: Toggles) -> Self {
        EvalSettings { resolution, surface_resolution: 64, toggles }
    }
}

/// Applied strain for the mechanical load cases.
pub const APPLIED_STRAIN: f64 = 1e-3;
/// Temperature change for the expansion case [K].
pub const APPLIED_DELTA_T: f64 = 1.0;

fn yarn_elastic(m: &MatrixProps, c: &ConstituentSet) -> Result<TransverseIsotropic> {
    let (e_a, e_t, g_a, g_t, nu_at) = chamis_yarn_elastic(m, c)?;
    let nu_tt = yarn_transverse_poisson(e_t, g_t)?;
    Ok(TransverseIsotropic { e_a, e_t, g_a, g_t, nu_at, nu_tt })
}

/// Evaluates every enabled quantity. Solver failures are recorded per
/// quantity and never abort the sample.
pub fn evaluate_sample(c: &ConstituentSet, settings: &EvalSettings) -> Result<QoIRecord> {
    c.validate()?;
    let p = c.weave()?;
    let t = settings.toggles;
    let mut rec = QoIRecord::empty();

    let v_f = analytic_fiber_volume_fraction(&p);
    rec.put(Qoi::FiberFraction, v_f);
    match cell_fractions(c, weave_volume_fraction(&p)).and_then(|f| {
        let rho = composite_density(c, &f)?;
        Ok((rho, composite_specific_heat(c, &f, rho)?))
    }) {
        Ok((rho, cp)) => {
            rec.put(Qoi::Density, rho);
            rec.put(Qoi::SpecificHeat, cp);
        }
        Err(e) => {
            rec.fail(Qoi::Density, &e);
            rec.fail(Qoi::SpecificHeat, &e);
        }
    }
    if !t.needs_grid() && !t.permeability {
        return Ok(rec);
    }
    let n = settings.resolution;
    let matrix = matrix_props(c).map_err(|e| e.to_string());
    let matrix_ok = || matrix.clone().map_err(Error::Domain);

    if t.needs_grid() {
        let grid = discretize(&p, n)?;
        let v_grid = grid.weave_fraction();
        rec.grid_weave_fraction = Some(v_grid);
        if t.geometry {
            match specific_surface_area(&p, settings.surface_resolution) {
                Ok(s) => rec.put(Qoi::SurfaceArea, s),
                Err(e) => rec.fail(Qoi::SurfaceArea, &e),
            }
            let coarse = grid.specific_contact_area();
            match discretize(&p, 2 * n) {
                Ok(fine) => {
                    let ca = contact_estimate(coarse, fine.specific_contact_area());
                    rec.put(Qoi::ContactArea, ca.value);
                    rec.contact = Some(ca);
                }
                Err(e) => rec.fail(Qoi::ContactArea, &e),
            }
        }
        if t.conductivity {
            let res = matrix_ok().and_then(|m| {
                let m = &m;
                let (ka, kt) = chamis_yarn_conductivity(m.conductivity, c.k_f_a, c.k_f_t(), c.v_f_w)?;
                let (kip, _) = effective_conductivity(&grid, m.conductivity, ka, kt, 0)?;
                let (koop, _) = effective_conductivity(&grid, m.conductivity, ka, kt, 1)?;
                Ok((kip, koop))
            });
            match res {
                Ok((a, b)) => {
                    rec.put(Qoi::ConductivityIp, a);
                    rec.put(Qoi::ConductivityOop, b);
                }
                Err(e) => rec.fail_family(Family::Conductivity, &e),
            }
        }
        if t.tortuosity {
            let (da, dt) = yarn_diffusivity(c.v_f_w);
            let fiber = c.v_f_w * v_grid;
            for (q, dir) in [(Qoi::TortuosityIp, 0), (Qoi::TortuosityOop, 1)] {
                match effective_tortuosity(&grid, fiber, da, dt, dir) {
                    Ok((Tortuosity::Finite { tau, .. }, _)) => rec.put(q, tau),
                    Ok((Tortuosity::Blocked, _)) => {
                        rec.values[q as usize] = None;
                        rec.status[q as usize] = Status::Blocked;
                    }
                    Err(e) => rec.fail(q, &e),
                }
            }
        }
        if t.elastic || t.thermal_expansion {
            let cells = matrix_ok().and_then(|m| {
                let m = &m;
                let yarn = yarn_elastic(m, c)?;
                let (aa, at) = chamis_yarn_cte(m, c, yarn.e_a)?;
                build_cell_stiffness(&grid, m.young, m.poisson, m.cte, &yarn, (aa, at))
            });
            match cells {
                Err(e) => {
                    if t.elastic {
                        rec.fail_family(Family::Elastic, &e);
                    }
                    if t.thermal_expansion {
                        rec.fail_family(Family::ThermalExpansion, &e);
                    }
                }
                Ok(cells) => {
                    if t.elastic {
                        let eps = APPLIED_STRAIN;
                        let moduli = (|| -> Result<_> {
                            let sx = solve_uniaxial(&grid, &cells, 0, eps)?;
                            let (ex, _, _) = effective_youngs_poisson(&sx, 0, eps)?;
                            let sy = solve_uniaxial(&grid, &cells, 1, eps)?;
                            // load along y: second transverse axis is x
                            let (ey, _, nu_yx) = effective_youngs_poisson(&sy, 1, eps)?;
                            let sz = solve_uniaxial(&grid, &cells, 2, eps)?;
                            // load along z: second transverse axis is y
                            let (ez, _, nu_zy) = effective_youngs_poisson(&sz, 2, eps)?;
                            let (gxy, _) = solve_shear(&grid, &cells, (0, 1), eps)?;
                            let (gxz, _) = solve_shear(&grid, &cells, (0, 2), eps)?;
                            Ok([0.5 * (ex + ez), ey, gxy, gxz, nu_yx, nu_zy])
                        })();
                        match moduli {
                            Ok(v) => {
                                for (q, x) in Family::Elastic.members().iter().zip(v) {
                                    rec.put(*q, x);
                                }
                            }
                            Err(e) => rec.fail_family(Family::Elastic, &e),
                        }
                    }
                    if t.thermal_expansion {
                        match solve_thermal_expansion(&grid, &cells, APPLIED_DELTA_T) {
                            Ok((a, _)) => {
                                rec.put(Qoi::CteIp, a[0]);
                                rec.put(Qoi::CteOop, a[1]);
                            }
                            Err(e) => rec.fail_family(Family::ThermalExpansion, &e),
                        }
                    }
                }
            }
        }
    }
    if t.permeability {
        match FluidMask::from_weave(&p, n) {
            Err(e) => rec.fail_family(Family::Permeability, &e),
            Ok(mask) => {
                for (q, dir) in [(Qoi::PermeabilityIp, 0), (Qoi::PermeabilityOop, 1)] {
                    match solve_stokes(&mask, dir, 1.0, 1.0) {
                        Ok(StokesOutcome::Flow(s)) => rec.put(q, permeability(&s)),
                        Ok(StokesOutcome::Blocked) => {
                            rec.values[q as usize] = Some(0.0);
                            rec.status[q as usize] = Status::Blocked;
                        }
                        Err(e) => rec.fail(q, &e),
                    }
                }
            }
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_phase_density_and_heat() {
        let mut c = ConstituentSet::nominal();
        c.v_pore_m = 0.0;
        c.m_fill_m = 0.0;
        let f = cell_fractions(&c, 0.0).unwrap();
        assert!((composite_density(&c, &f).unwrap() - 1.45).abs() < 1e-14);
        assert!((composite_specific_heat(&c, &f, 1.45).unwrap() - 1500.0).abs() < 1e-10);
    }

    #[test]
    fn equal_mass_phases_average_heat() {
        let mut c = ConstituentSet::nominal();
        c.v_pore_m = 0.0;
        c.m_fill_m = 0.0;
        c.c_res = 600.0;
        c.c_f = 1400.0;
        c.rho_f = c.rho_res;
        let f = CellFractions { fiber: 0.5, resin: 0.5, filler: 0.0, pore: 0.0 };
        let rho = composite_density(&c, &f).unwrap();
        assert!((composite_specific_heat(&c, &f, rho).unwrap() - 1000.0).abs() < 1e-10);
        assert!(composite_specific_heat(&c, &f, 0.0).is_err());
        let broken = CellFractions { fiber: 0.5, resin: 0.6, filler: 0.0, pore: 0.0 };
        assert!(matches!(composite_density(&c, &broken), Err(Error::Logic(_))));
    }

    #[test]
    fn closed_form_toggle_leaves_solver_quantities_empty() {
        let c = ConstituentSet::nominal();
        let rec = evaluate_sample(&c, &EvalSettings::new(16, Toggles::closed_form_only())).unwrap();
        for q in Qoi::ALL {
            let closed = Family::ClosedForm.members().contains(&q);
            assert_eq!(rec.get(q).is_some(), closed, "{}", q.name());
        }
        assert!((rec.get(Qoi::Density).unwrap() - 1.5185).abs() < 0.01);
        assert!((rec.get(Qoi::FiberFraction).unwrap() - 0.39605).abs() < 1e-5);
    }

    #[test]
    fn voxel_density_matches_closed_form() {
        let c = ConstituentSet::nominal();
        let p = c.weave().unwrap();
        let closed = composite_density(&c, &cell_fractions(&c, weave_volume_fraction(&p)).unwrap()).unwrap();
        let grid = discretize(&p, 48).unwrap();
        let voxel = composite_density(&c, &cell_fractions(&c, grid.weave_fraction()).unwrap()).unwrap();
        assert!((closed - voxel).abs() / closed < 0.005);
    }

    #[test]
    fn families_partition_the_quantities() {
        let mut seen = [0; 19];
        for f in Family::ALL {
            for q in f.members() {
                seen[*q as usize] += 1;
            }
            assert_eq!(Family::parse(f.name()).unwrap(), f);
        }
        assert!(seen.iter().all(|c| *c == 1));
        assert_eq!(Qoi::from_name("kappa_oop"), Some(Qoi::PermeabilityOop));
    }

    #[test]
    fn repeated_evaluation_is_identical() {
        let c = ConstituentSet::nominal();
        let s = EvalSettings::new(16, Toggles::only(&[Family::Conductivity, Family::Geometry]));
        assert_eq!(evaluate_sample(&c, &s).unwrap(), evaluate_sample(&c, &s).unwrap());
    }
}
