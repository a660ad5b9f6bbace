//! Effective-medium upscaling from constituents to the matrix and yarn phases.
//!
//! The matrix is a three-phase isotropic mixture of resin, filler particles and
//! air-filled voids. Yarns are transversely isotropic with the symmetry axis
//! along the fibers.

use crate::error::{domain, Error, Result};
use crate::geometry::WeaveParams;
use serde::{Deserialize, Serialize};

/// Thermal conductivity of the air in voids [W/(m·K)].
pub const VOID_CONDUCTIVITY: f64 = 0.026;

/// Names of the sampled inputs, in canonical order.
pub const PARAMETER_NAMES: [&str; 30] = [
    "w", "t", "u", "g", "v_f_w", "v_pore_m", "m_fill_m", "rho_res", "rho_f", "rho_fill", "C_res", "C_f",
    "C_fill", "k_res", "k_f_a", "gamma_f", "k_fill", "E_res", "E_f_a", "E_f_t", "E_fill", "mu_f_at", "nu_res",
    "nu_f_tt", "nu_f_at", "nu_fill", "alpha_res", "alpha_f_a", "alpha_f_t", "alpha_fill",
];

/// Every sampled input of one study sample. Units: lengths in cm, densities in
/// g/cm³, specific heats in J/(kg·K), conductivities in W/(m·K), moduli in GPa
/// and expansion coefficients in 1e-6/K.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstituentSet {
    pub w: f64,
    pub t: f64,
    pub u: f64,
    pub g: f64,
    pub v_f_w: f64,
    pub v_pore_m: f64,
    pub m_fill_m: f64,
    pub rho_res: f64,
    pub rho_f: f64,
    pub rho_fill: f64,
    pub c_res: f64,
    pub c_f: f64,
    pub c_fill: f64,
    pub k_res: f64,
    pub k_f_a: f64,
    pub gamma_f: f64,
    pub k_fill: f64,
    pub e_res: f64,
    pub e_f_a: f64,
    pub e_f_t: f64,
    pub e_fill: f64,
    pub mu_f_at: f64,
    pub nu_res: f64,
    pub nu_f_tt: f64,
    pub nu_f_at: f64,
    pub nu_fill: f64,
    pub alpha_res: f64,
    pub alpha_f_a: f64,
    pub alpha_f_t: f64,
    pub alpha_fill: f64,
}

impl ConstituentSet {
    /// Midpoint of every sampling range.
    pub fn nominal() -> Self {
        ConstituentSet {
            w: 0.125,
            t: 0.03,
            u: 0.65,
            g: 0.35,
            v_f_w: 0.7,
            v_pore_m: 0.1,
            m_fill_m: 0.1,
            rho_res: 1.45,
            rho_f: 1.8,
            rho_fill: 1.85,
            c_res: 1500.0,
            c_f: 700.0,
            c_fill: 1550.0,
            k_res: 0.4,
            k_f_a: 52.5,
            gamma_f: 0.55,
            k_fill: 50.1,
            e_res: 3.5,
            e_f_a: 400.0,
            e_f_t: 27.5,
            e_fill: 27.5,
            mu_f_at: 16.5,
            nu_res: 0.3,
            nu_f_tt: 0.375,
            nu_f_at: 0.3,
            nu_fill: 0.3,
            alpha_res: 75.0,
            alpha_f_a: 0.0,
            alpha_f_t: 7.5,
            alpha_fill: 5.5,
        }
    }

    pub fn from_array(v: &[f64; 30]) -> Self {
        ConstituentSet {
            w: v[0],
            t: v[1],
            u: v[2],
            g: v[3],
            v_f_w: v[4],
            v_pore_m: v[5],
            m_fill_m: v[6],
            rho_res: v[7],
            rho_f: v[8],
            rho_fill: v[9],
            c_res: v[10],
            c_f: v[11],
            c_fill: v[12],
            k_res: v[13],
            k_f_a: v[14],
            gamma_f: v[15],
            k_fill: v[16],
            e_res: v[17],
            e_f_a: v[18],
            e_f_t: v[19],
            e_fill: v[20],
            mu_f_at: v[21],
            nu_res: v[22],
            nu_f_tt: v[23],
            nu_f_at: v[24],
            nu_fill: v[25],
            alpha_res: v[26],
            alpha_f_a: v[27],
            alpha_f_t: v[28],
            alpha_fill: v[29],
        }
    }

    pub fn to_array(&self) -> [f64; 30] {
        [
            self.w,
            self.t,
            self.u,
            self.g,
            self.v_f_w,
            self.v_pore_m,
            self.m_fill_m,
            self.rho_res,
            self.rho_f,
            self.rho_fill,
            self.c_res,
            self.c_f,
            self.c_fill,
            self.k_res,
            self.k_f_a,
            self.gamma_f,
            self.k_fill,
            self.e_res,
            self.e_f_a,
            self.e_f_t,
            self.e_fill,
            self.mu_f_at,
            self.nu_res,
            self.nu_f_tt,
            self.nu_f_at,
            self.nu_fill,
            self.alpha_res,
            self.alpha_f_a,
            self.alpha_f_t,
            self.alpha_fill,
        ]
    }

    pub fn weave(&self) -> Result<WeaveParams> {
        WeaveParams::new(self.w, self.t, self.u, self.g, self.v_f_w)
    }

    pub fn k_f_t(&self) -> f64 {
        self.gamma_f * self.k_f_a
    }

    pub fn validate(&self) -> Result<()> {
        self.weave()?;
        let positive = [
            self.rho_res,
            self.rho_f,
            self.rho_fill,
            self.c_res,
            self.c_f,
            self.c_fill,
            self.k_res,
            self.k_f_a,
            self.k_fill,
            self.e_res,
            self.e_f_a,
            self.e_f_t,
            self.e_fill,
            self.mu_f_at,
        ];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) {
            return domain("densities, specific heats, conductivities and moduli must be positive");
        }
        if !(self.gamma_f > 0.0 && self.gamma_f <= 1.0) {
            return domain(format!("fiber anisotropy {} outside (0, 1]", self.gamma_f));
        }
        let fractions_ok = (0.0..1.0).contains(&self.v_pore_m) && (0.0..1.0).contains(&self.m_fill_m);
        if !fractions_ok {
            return domain("porosity and filler loading must lie in [0, 1)");
        }
        for nu in [self.nu_res, self.nu_f_tt, self.nu_f_at, self.nu_fill] {
            if !(nu > -1.0 && nu < 0.5) {
                return domain(format!("Poisson ratio {nu} outside (-1, 0.5)"));
            }
        }
        if ![self.alpha_res, self.alpha_f_a, self.alpha_f_t, self.alpha_fill].iter().all(|v| v.is_finite()) {
            return domain("non-finite expansion coefficient");
        }
        Ok(())
    }
}

/// Volume fractions of the three matrix phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixFractions {
    pub resin: f64,
    pub filler: f64,
    pub pore: f64,
}

impl MatrixFractions {
    pub fn as_array(&self) -> [f64; 3] {
        [self.resin, self.filler, self.pore]
    }
}

/// Isotropic elastic constants as bulk and shear modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsoElastic {
    pub bulk: f64,
    pub shear: f64,
}

impl IsoElastic {
    pub fn from_young_poisson(e: f64, nu: f64) -> Result<Self> {
        if !(e > 0.0 && nu > -1.0 && nu < 0.5) {
            return domain(format!("non-physical isotropic constants E = {e}, nu = {nu}"));
        }
        Ok(IsoElastic { bulk: e / (3.0 * (1.0 - 2.0 * nu)), shear: e / (2.0 * (1.0 + nu)) })
    }

    pub fn young_poisson(&self) -> Result<(f64, f64)> {
        let (k, mu) = (self.bulk, self.shear);
        if !(k > 0.0 && mu > 0.0) {
            return domain(format!("non-physical moduli K = {k}, mu = {mu}"));
        }
        Ok((9.0 * k * mu / (3.0 * k + mu), (3.0 * k - 2.0 * mu) / (2.0 * (3.0 * k + mu))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixProps {
    pub conductivity: f64,
    pub bulk: f64,
    pub shear: f64,
    pub young: f64,
    pub poisson: f64,
    pub cte: f64,
    pub density: f64,
    pub specific_heat: f64,
    pub fractions: MatrixFractions,
    /// Sum of the expansion weights; differs from 1 in general.
    pub cte_weight_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YarnProps {
    pub k_a: f64,
    pub k_t: f64,
    pub e_a: f64,
    pub e_t: f64,
    pub g_a: f64,
    pub g_t: f64,
    pub nu_at: f64,
    pub nu_tt: f64,
    pub alpha_a: f64,
    pub alpha_t: f64,
    pub d_a: f64,
    pub d_t: f64,
    pub density: f64,
}

/// Phase properties consumed by the mesoscale solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MesoProps {
    pub matrix: MatrixProps,
    pub yarn: YarnProps,
}

/// Splits the matrix into resin, filler and pore volume fractions. The filler
/// loading is the filler mass over the resin-plus-filler mass.
pub fn matrix_volume_fractions(c: &ConstituentSet) -> MatrixFractions {
    let m = c.m_fill_m;
    let fill = m / c.rho_fill;
    let res = (1.0 - m) / c.rho_res;
    let solid_fill = if fill + res > 0.0 { fill / (fill + res) } else { 0.0 };
    let filler = (1.0 - c.v_pore_m) * solid_fill;
    MatrixFractions { resin: 1.0 - c.v_pore_m - filler, filler, pore: c.v_pore_m }
}

fn check_fractions(v: &[f64]) -> Result<()> {
    if v.iter().any(|x| !(*x >= 0.0)) || (v.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return domain(format!("volume fractions {v:?} must be non-negative and sum to 1"));
    }
    Ok(())
}

/// Self-consistent conductivity of a mixture of spherical phases.
pub fn bruggeman_conductivity(fractions: &[f64], conductivities: &[f64]) -> Result<f64> {
    check_fractions(fractions)?;
    if fractions.len() != conductivities.len() || conductivities.iter().any(|k| !(*k >= 0.0)) {
        return domain("conductivities must be non-negative, one per phase");
    }
    let present: Vec<(f64, f64)> =
        fractions.iter().zip(conductivities).filter(|(v, _)| **v > 0.0).map(|(v, k)| (*v, *k)).collect();
    let lo = present.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = present.iter().map(|p| p.1).fold(0.0, f64::max);
    if hi <= 0.0 {
        return Err(Error::Numerical("no positive conductivity root".into()));
    }
    if hi - lo <= 1e-15 * hi {
        return Ok(hi);
    }
    let residual = |k: f64| present.iter().map(|(v, ki)| v * (ki - k) / (ki + 2.0 * k)).sum::<f64>();
    let derivative = |k: f64| present.iter().map(|(v, ki)| -3.0 * v * ki / (ki + 2.0 * k).powi(2)).sum::<f64>();
    let (mut a, mut b) = (lo.max(1e-300), hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if residual(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a <= 1e-9 * b {
            break;
        }
    }
    let mut k = 0.5 * (a + b);
    for _ in 0..50 {
        let d = derivative(k);
        if d == 0.0 {
            break;
        }
        let step = residual(k) / d;
        let next = (k - step).clamp(a, b);
        let done = (next - k).abs() <= 1e-15 * k;
        k = next;
        if done {
            break;
        }
    }
    Ok(k)
}

/// Iteration counters reported by [`berryman_moduli_with_stats`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointStats {
    pub iterations: usize,
    pub relative_change: f64,
}

/// Self-consistent bulk and shear moduli of a mixture of spherical phases.
pub fn berryman_moduli(fractions: &[f64], bulk: &[f64], shear: &[f64]) -> Result<(f64, f64)> {
    berryman_moduli_with_stats(fractions, bulk, shear, 1e-10).map(|(k, mu, _)| (k, mu))
}

pub fn berryman_moduli_with_stats(
    fractions: &[f64],
    bulk: &[f64],
    shear: &[f64],
    tol: f64,
) -> Result<(f64, f64, FixedPointStats)> {
    check_fractions(fractions)?;
    if bulk.len() != fractions.len() || shear.len() != fractions.len() {
        return domain("one bulk and one shear modulus per phase");
    }
    if bulk.iter().chain(shear).any(|m| !(*m >= 0.0)) {
        return domain("moduli must be non-negative");
    }
    let mut k: f64 = fractions.iter().zip(bulk).map(|(v, b)| v * b).sum();
    let mut mu: f64 = fractions.iter().zip(shear).map(|(v, s)| v * s).sum();
    if !(k > 0.0 && mu > 0.0) {
        return Err(Error::Numerical("mixture has no load-bearing phase".into()));
    }
    const CAP: usize = 10_000;
    let mut change = f64::INFINITY;
    for it in 1..=CAP {
        let f = mu / 6.0 * (9.0 * k + 8.0 * mu) / (k + 2.0 * mu);
        let (mut kn, mut kd, mut mn, mut md) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..fractions.len() {
            let p = (k + 4.0 / 3.0 * mu) / (bulk[i] + 4.0 / 3.0 * mu);
            let q = (mu + f) / (shear[i] + f);
            kn += fractions[i] * bulk[i] * p;
            kd += fractions[i] * p;
            mn += fractions[i] * shear[i] * q;
            md += fractions[i] * q;
        }
        let k_new = 0.5 * k + 0.5 * kn / kd;
        let mu_new = 0.5 * mu + 0.5 * mn / md;
        change = ((k_new - k) / k_new).abs().max(((mu_new - mu) / mu_new).abs());
        k = k_new;
        mu = mu_new;
        if !(k > 0.0 && mu > 0.0) {
            return Err(Error::Numerical(format!("self-consistent moduli collapsed (K = {k}, mu = {mu})")));
        }
        if change <= tol {
            return Ok((k, mu, FixedPointStats { iterations: it, relative_change: change }));
        }
    }
    Err(Error::NoConvergence { iterations: CAP, residual: change })
}

/// Matrix thermal expansion from phase bulk moduli. Also returns the sum of
/// the phase weights, which is not renormalized.
pub fn budiansky_cte(fractions: &[f64], bulk: &[f64], alpha: &[f64], k_m: f64, nu_m: f64) -> Result<(f64, f64)> {
    if k_m == 0.0 {
        return Err(Error::Numerical("matrix bulk modulus is zero".into()));
    }
    let a = (1.0 + nu_m) / (3.0 * (1.0 - nu_m));
    let mut value = 0.0;
    let mut weights = 0.0;
    for i in 0..fractions.len() {
        let r = bulk[i] / k_m;
        let wgt = fractions[i] * r / (1.0 - a + a * r);
        weights += wgt;
        if wgt != 0.0 {
            value += wgt * alpha[i];
        }
    }
    Ok((value, weights))
}

/// Effective properties of the resin/filler/void matrix.
pub fn matrix_props(c: &ConstituentSet) -> Result<MatrixProps> {
    let fr = matrix_volume_fractions(c);
    let v = fr.as_array();
    let conductivity = bruggeman_conductivity(&v, &[c.k_res, c.k_fill, VOID_CONDUCTIVITY])?;
    let res = IsoElastic::from_young_poisson(c.e_res, c.nu_res)?;
    let fill = IsoElastic::from_young_poisson(c.e_fill, c.nu_fill)?;
    let bulk = [res.bulk, fill.bulk, 0.0];
    let (k, mu) = berryman_moduli(&v, &bulk, &[res.shear, fill.shear, 0.0])?;
    let (young, poisson) = IsoElastic { bulk: k, shear: mu }.young_poisson()?;
    let (cte, cte_weight_sum) = budiansky_cte(&v, &bulk, &[c.alpha_res, c.alpha_fill, 0.0], k, poisson)?;
    let density = fr.resin * c.rho_res + fr.filler * c.rho_fill;
    let specific_heat = if density > 0.0 {
        (fr.resin * c.rho_res * c.c_res + fr.filler * c.rho_fill * c.c_fill) / density
    } else {
        0.0
    };
    Ok(MatrixProps {
        conductivity,
        bulk: k,
        shear: mu,
        young,
        poisson,
        cte,
        density,
        specific_heat,
        fractions: fr,
        cte_weight_sum,
    })
}

fn chamis_transverse(m: f64, f: f64, v: f64) -> Result<f64> {
    let denom = 1.0 - v.sqrt() * (1.0 - m / f);
    if !(denom > 0.0) {
        return domain(format!("transverse mixing denominator {denom} is not positive (m = {m}, f = {f}, v = {v})"));
    }
    Ok(m / denom)
}

/// Axial and transverse yarn conductivity.
pub fn chamis_yarn_conductivity(k_m: f64, k_f_a: f64, k_f_t: f64, v: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("fiber packing {v} outside [0, 1]"));
    }
    let axial = k_f_a * v + k_m * (1.0 - v);
    let s = v.sqrt();
    let transverse = (1.0 - s) * k_m + s * chamis_transverse(k_m, k_f_t, v)?;
    Ok((axial, transverse))
}

/// Yarn elastic constants `(E_a, E_t, G_a, G_t, nu_at)`.
pub fn chamis_yarn_elastic(m: &MatrixProps, c: &ConstituentSet) -> Result<(f64, f64, f64, f64, f64)> {
    let v = c.v_f_w;
    let g_m = m.young / (2.0 * (1.0 + m.poisson));
    let g_f_tt = c.e_f_t / (2.0 * (1.0 + c.nu_f_tt));
    let e_a = c.e_f_a * v + m.young * (1.0 - v);
    let e_t = chamis_transverse(m.young, c.e_f_t, v)?;
    let g_a = chamis_transverse(g_m, c.mu_f_at, v)?;
    let g_t = chamis_transverse(g_m, g_f_tt, v)?;
    let nu_at = c.nu_f_at * v + m.poisson * (1.0 - v);
    Ok((e_a, e_t, g_a, g_t, nu_at))
}

/// Axial and transverse yarn expansion coefficients.
pub fn chamis_yarn_cte(m: &MatrixProps, c: &ConstituentSet, e_a: f64) -> Result<(f64, f64)> {
    if e_a == 0.0 {
        return Err(Error::Numerical("axial yarn modulus is zero".into()));
    }
    let v = c.v_f_w;
    let s = v.sqrt();
    let axial = (v * c.alpha_f_a * c.e_f_a + (1.0 - v) * m.cte * m.young) / e_a;
    let transverse = c.alpha_f_t * s + (1.0 - s) * (1.0 + v * m.poisson * c.e_f_a / e_a) * m.cte;
    Ok((axial, transverse))
}

/// Axial and transverse yarn diffusivity for unit matrix and zero fiber diffusivity.
pub fn yarn_diffusivity(v: f64) -> (f64, f64) {
    (1.0 - v, 1.0 - v.sqrt())
}

pub fn yarn_transverse_poisson(e_t: f64, g_t: f64) -> Result<f64> {
    if !(e_t > 0.0 && g_t > 0.0) {
        return domain(format!("non-positive transverse moduli E_t = {e_t}, G_t = {g_t}"));
    }
    let nu = e_t / (2.0 * g_t) - 1.0;
    if !(nu > -1.0 && nu < 0.5) {
        return domain(format!("transverse Poisson ratio {nu} from E_t = {e_t}, G_t = {g_t} is not physical"));
    }
    Ok(nu)
}

pub fn yarn_props(c: &ConstituentSet, m: &MatrixProps) -> Result<YarnProps> {
    let v = c.v_f_w;
    let (k_a, k_t) = chamis_yarn_conductivity(m.conductivity, c.k_f_a, c.k_f_t(), v)?;
    let (e_a, e_t, g_a, g_t, nu_at) = chamis_yarn_elastic(m, c)?;
    let nu_tt = yarn_transverse_poisson(e_t, g_t)?;
    let (alpha_a, alpha_t) = chamis_yarn_cte(m, c, e_a)?;
    let (d_a, d_t) = yarn_diffusivity(v);
    Ok(YarnProps {
        k_a,
        k_t,
        e_a,
        e_t,
        g_a,
        g_t,
        nu_at,
        nu_tt,
        alpha_a,
        alpha_t,
        d_a,
        d_t,
        density: v * c.rho_f + (1.0 - v) * m.density,
    })
}

/// Runs the full constituent-to-phase upscaling.
pub fn upscale(c: &ConstituentSet) -> Result<MesoProps> {
    c.validate()?;
    let matrix = matrix_props(c)?;
    let yarn = yarn_props(c, &matrix)?;
    Ok(MesoProps { matrix, yarn })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn midpoint() -> ConstituentSet {
        ConstituentSet::nominal()
    }

    #[test]
    fn volume_fractions_examples() {
        let mut c = midpoint();
        c.m_fill_m = 0.0;
        c.v_pore_m = 0.0;
        let f = matrix_volume_fractions(&c);
        assert_eq!((f.resin, f.filler, f.pore), (1.0, 0.0, 0.0));
        c.m_fill_m = 0.2;
        c.rho_fill = c.rho_res;
        assert!((matrix_volume_fractions(&c).filler - 0.2).abs() < 1e-15);
        c.rho_res = 1.2;
        c.rho_fill = 2.3;
        c.v_pore_m = 0.1;
        let f = matrix_volume_fractions(&c);
        let solid = (0.2 / 2.3) / ((0.2 / 2.3) + (0.8 / 1.2));
        assert!((f.filler - 0.9 * solid).abs() < 1e-15);
        assert!((f.filler - 0.10384).abs() < 1e-5);
        assert!((f.resin + f.filler + f.pore - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bruggeman_two_phase_quadratic() {
        let k = bruggeman_conductivity(&[0.5, 0.5, 0.0], &[1.0, 10.0, 3.0]).unwrap();
        assert!((k - 4.0).abs() < 1e-10, "{k}");
        let k = bruggeman_conductivity(&[1.0, 0.0, 0.0], &[0.4, 10.0, 0.026]).unwrap();
        assert!((k - 0.4).abs() < 1e-10);
        assert!(bruggeman_conductivity(&[0.5, 0.4], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn berryman_identities() {
        let (k, mu) = berryman_moduli(&[1.0, 0.0, 0.0], &[3.0, 20.0, 0.0], &[1.2, 9.0, 0.0]).unwrap();
        assert!((k - 3.0).abs() < 1e-10 && (mu - 1.2).abs() < 1e-10);
        let (k, mu) = berryman_moduli(&[0.5, 0.5], &[10.0, 10.0], &[5.0, 5.0]).unwrap();
        assert!((k - 10.0).abs() < 1e-10 && (mu - 5.0).abs() < 1e-10);
    }

    /// Solves the two-phase self-consistent equations by nested bisection.
    fn nested_bisection(v: [f64; 2], kb: [f64; 2], sh: [f64; 2]) -> (f64, f64) {
        let k_of_mu = |mu: f64| {
            let (mut a, mut b) = (kb[0].min(kb[1]), kb[0].max(kb[1]));
            for _ in 0..200 {
                let k = 0.5 * (a + b);
                let r: f64 = (0..2).map(|i| v[i] * (kb[i] - k) * (k + 4.0 / 3.0 * mu) / (kb[i] + 4.0 / 3.0 * mu)).sum();
                if r > 0.0 {
                    a = k
                } else {
                    b = k
                }
            }
            0.5 * (a + b)
        };
        let (mut a, mut b) = (sh[0].min(sh[1]), sh[0].max(sh[1]));
        for _ in 0..200 {
            let mu = 0.5 * (a + b);
            let k = k_of_mu(mu);
            let f = mu / 6.0 * (9.0 * k + 8.0 * mu) / (k + 2.0 * mu);
            let r: f64 = (0..2).map(|i| v[i] * (sh[i] - mu) * (mu + f) / (sh[i] + f)).sum();
            if r > 0.0 {
                a = mu
            } else {
                b = mu
            }
        }
        let mu = 0.5 * (a + b);
        (k_of_mu(mu), mu)
    }

    #[test]
    fn berryman_matches_independent_root_finder() {
        let (k, mu, stats) = berryman_moduli_with_stats(&[0.5, 0.5], &[10.0, 1.0], &[5.0, 0.5], 1e-12).unwrap();
        let (ko, muo) = nested_bisection([0.5, 0.5], [10.0, 1.0], [5.0, 0.5]);
        assert!((k / ko - 1.0).abs() < 1e-9, "{k} vs {ko}");
        assert!((mu / muo - 1.0).abs() < 1e-9, "{mu} vs {muo}");
        assert!(k > 1.0 && k < 10.0 && mu > 0.5 && mu < 5.0);
        assert!(stats.iterations > 1);
    }

    #[test]
    fn budiansky_examples() {
        let (a, wsum) = budiansky_cte(&[1.0, 0.0, 0.0], &[3.0, 10.0, 0.0], &[70.0, 5.0, 0.0], 3.0, 0.3).unwrap();
        assert!((a - 70.0).abs() < 1e-12 && (wsum - 1.0).abs() < 1e-12);
        let (_, wsum) = budiansky_cte(&[0.8, 0.1, 0.1], &[3.0, 20.0, 0.0], &[1.0; 3], 2.5, 0.3).unwrap();
        let a = (1.3) / (3.0 * 0.7);
        let expected: f64 = [(0.8, 3.0), (0.1, 20.0), (0.1, 0.0)]
            .iter()
            .map(|(v, k)| v * (k / 2.5) / (1.0 - a + a * k / 2.5))
            .sum();
        assert!((wsum - expected).abs() < 1e-14);
        assert!(budiansky_cte(&[1.0], &[1.0], &[1.0], 0.0, 0.3).is_err());
    }

    #[test]
    fn isotropic_conversions() {
        let (e, nu) = IsoElastic { bulk: 2.0, shear: 2.0 }.young_poisson().unwrap();
        assert!((nu - 0.125).abs() < 1e-15);
        let back = IsoElastic::from_young_poisson(e, nu).unwrap();
        assert!((back.bulk - 2.0).abs() < 1e-12 && (back.shear - 2.0).abs() < 1e-12);
        let (_, nu) = IsoElastic { bulk: 1.0, shear: 1e-9 }.young_poisson().unwrap();
        assert!((nu - 0.5).abs() < 1e-8);
        assert!(IsoElastic::from_young_poisson(1.0, 0.5).is_err());
    }

    #[test]
    fn chamis_conductivity_examples() {
        let (_, kt) = chamis_yarn_conductivity(1.0, 50.0, 10.0, 0.25).unwrap();
        assert!((kt - (0.5 + 0.5 / 0.55)).abs() < 1e-12);
        let (ka, _) = chamis_yarn_conductivity(0.4, 50.0, 10.0, 0.5).unwrap();
        assert!((ka - 25.2).abs() < 1e-12);
        let (ka, kt) = chamis_yarn_conductivity(0.4, 50.0, 10.0, 1e-14).unwrap();
        assert!((ka - 0.4).abs() < 1e-10 && (kt - 0.4).abs() < 1e-5);
    }

    #[test]
    fn chamis_elastic_examples() {
        let mut m = matrix_props(&midpoint()).unwrap();
        m.young = 3.0;
        let mut c = midpoint();
        c.v_f_w = 0.49;
        c.e_f_t = 30.0;
        let (_, e_t, ..) = chamis_yarn_elastic(&m, &c).unwrap();
        assert!((e_t - 3.0 / 0.37).abs() < 1e-12);
        c.v_f_w = 1e-16;
        let (e_a, e_t, g_a, g_t, nu_at) = chamis_yarn_elastic(&m, &c).unwrap();
        let g_m = m.young / (2.0 * (1.0 + m.poisson));
        assert!((e_a - m.young).abs() < 1e-10 && (e_t - m.young).abs() < 1e-6);
        assert!((g_a - g_m).abs() < 1e-6 && (g_t - g_m).abs() < 1e-6 && (nu_at - m.poisson).abs() < 1e-10);
        let nu_tt = yarn_transverse_poisson(e_t, g_t).unwrap();
        assert!((nu_tt - m.poisson).abs() < 1e-6);
    }

    #[test]
    fn chamis_cte_limits_and_midpoint() {
        let c = midpoint();
        let m = matrix_props(&c).unwrap();
        let (e_a, ..) = chamis_yarn_elastic(&m, &c).unwrap();
        let (aa, at) = chamis_yarn_cte(&m, &c, e_a).unwrap();
        // re-evaluated with the expressions written out independently
        let v = 0.7f64;
        let ea = 400.0 * v + m.young * (1.0 - v);
        let aa_ref = (v * 0.0 * 400.0 + (1.0 - v) * m.cte * m.young) / ea;
        let at_ref = 7.5 * v.sqrt() + (1.0 - v.sqrt()) * (1.0 + v * m.poisson * 400.0 / ea) * m.cte;
        assert!((aa - aa_ref).abs() < 1e-12 && (at - at_ref).abs() < 1e-12);
        let mut c0 = c;
        c0.v_f_w = 0.0;
        let (a0, t0) = chamis_yarn_cte(&m, &c0, m.young).unwrap();
        assert!((a0 - m.cte).abs() < 1e-12 && (t0 - m.cte).abs() < 1e-12);
        let mut c1 = c;
        c1.v_f_w = 1.0;
        c1.alpha_f_a = -0.05;
        let (a1, _) = chamis_yarn_cte(&m, &c1, c1.e_f_a).unwrap();
        assert!((a1 + 0.05).abs() < 1e-12);
    }

    #[test]
    fn diffusivity_examples() {
        assert_eq!(yarn_diffusivity(0.0), (1.0, 1.0));
        let (a, t) = yarn_diffusivity(0.81);
        assert!((a - 0.19).abs() < 1e-15 && (t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn transverse_poisson_examples() {
        assert!((yarn_transverse_poisson(2.6, 1.0).unwrap() - 0.3).abs() < 1e-15);
        assert!(yarn_transverse_poisson(3.0, 1.0).is_err());
    }

    #[test]
    fn midpoint_upscaling_is_physical() {
        let p = upscale(&midpoint()).unwrap();
        let m = p.matrix;
        assert!(m.conductivity > VOID_CONDUCTIVITY && m.conductivity < 50.1);
        assert!(m.poisson > -1.0 && m.poisson < 0.5);
        assert!(p.yarn.k_a >= p.yarn.k_t);
        assert!(p.yarn.e_a > p.yarn.e_t && p.yarn.g_a > 0.0 && p.yarn.g_t > 0.0);
        assert_eq!(upscale(&midpoint()).unwrap(), p);
    }

    proptest! {
        #[test]
        fn bruggeman_bounded_and_monotone(v1 in 0.0f64..1.0, s in 0.0f64..1.0, k1 in 0.01f64..100.0, k2 in 0.01f64..100.0, k3 in 0.01f64..100.0) {
            let v2 = (1.0 - v1) * s;
            let v = [v1, v2, 1.0 - v1 - v2];
            let k = bruggeman_conductivity(&v, &[k1, k2, k3]).unwrap();
            let present: Vec<f64> = v.iter().zip([k1, k2, k3]).filter(|(f, _)| **f > 0.0).map(|(_, k)| k).collect();
            let lo = present.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = present.iter().cloned().fold(0.0, f64::max);
            prop_assert!(k >= lo * (1.0 - 1e-12) && k <= hi * (1.0 + 1e-12));
            let kp = bruggeman_conductivity(&v, &[k1 * 1.01, k2, k3]).unwrap();
            prop_assert!(kp >= k * (1.0 - 1e-12));
        }

        #[test]
        fn berryman_bounded(v1 in 0.05f64..0.95, k1 in 0.5f64..50.0, k2 in 0.5f64..50.0, m1 in 0.2f64..20.0, m2 in 0.2f64..20.0) {
            let (k, mu) = berryman_moduli(&[v1, 1.0 - v1], &[k1, k2], &[m1, m2]).unwrap();
            prop_assert!(k >= k1.min(k2) * (1.0 - 1e-8) && k <= k1.max(k2) * (1.0 + 1e-8));
            prop_assert!(mu >= m1.min(m2) * (1.0 - 1e-8) && mu <= m1.max(m2) * (1.0 + 1e-8));
        }

        #[test]
        fn axial_conductivity_linear(v in 0.05f64..0.95) {
            let (ka, _) = chamis_yarn_conductivity(0.4, 50.0, 10.0, v).unwrap();
            prop_assert!((ka - (0.4 + v * 49.6)).abs() < 1e-12);
            let (_, kt1) = chamis_yarn_conductivity(0.4, 50.0, 10.0, v).unwrap();
            let (_, kt2) = chamis_yarn_conductivity(0.4, 50.0, 11.0, v).unwrap();
            prop_assert!(kt2 > kt1);
        }

        #[test]
        fn conversions_round_trip(k in 0.1f64..100.0, mu in 0.1f64..100.0) {
            let (e, nu) = IsoElastic { bulk: k, shear: mu }.young_poisson().unwrap();
            let back = IsoElastic::from_young_poisson(e, nu).unwrap();
            prop_assert!((back.bulk / k - 1.0).abs() < 1e-12 && (back.shear / mu - 1.0).abs() < 1e-12);
        }
    }
}
