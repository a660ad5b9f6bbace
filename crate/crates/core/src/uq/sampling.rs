//! Uniform parameter ranges and Latin hypercube designs over them.

use crate::error::{domain, Error, Result};
use crate::micromech::{ConstituentSet, PARAMETER_NAMES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub min: f64,
    pub max: f64,
}

impl Parameter {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    pub fn from_unit(&self, u: f64) -> f64 {
        self.min + (self.max - self.min) * u
    }

    pub fn to_unit(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }
}

/// Ordered list of the 30 sampled inputs with uniform ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub parameters: Vec<Parameter>,
}

/// Default ranges, aligned with [`PARAMETER_NAMES`].
pub const DEFAULT_RANGES: [(f64, f64); 30] = [
    (0.05, 0.2),
    (0.01, 0.05),
    (0.3, 1.0),
    (0.0, 0.7),
    (0.5, 0.9),
    (0.0, 0.2),
    (0.0, 0.2),
    (1.2, 1.7),
    (1.7, 1.9),
    (1.4, 2.3),
    (1300.0, 1700.0),
    (600.0, 800.0),
    (1300.0, 1800.0),
    (0.2, 0.6),
    (5.0, 100.0),
    (0.1, 1.0),
    (0.2, 100.0),
    (2.0, 5.0),
    (200.0, 600.0),
    (5.0, 50.0),
    (5.0, 50.0),
    (3.0, 30.0),
    (0.25, 0.35),
    (0.25, 0.5),
    (0.25, 0.35),
    (0.25, 0.35),
    (50.0, 100.0),
    (-0.1, 0.1),
    (5.0, 10.0),
    (1.0, 10.0),
];

impl Default for ParameterSpace {
    fn default() -> Self {
        ParameterSpace {
            parameters: PARAMETER_NAMES
                .iter()
                .zip(DEFAULT_RANGES)
                .map(|(n, (min, max))| Parameter { name: n.to_string(), min, max })
                .collect(),
        }
    }
}

impl ParameterSpace {
    pub fn len(&self) -> usize {
        self.parameters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parameters.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.parameters.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.parameters.iter().position(|p| p.name == name)
    }

    /// Replaces the range of one parameter.
    pub fn set_range(&mut self, name: &str, min: f64, max: f64) -> Result<()> {
        let i = self.index_of(name).ok_or_else(|| Error::Config(format!("unknown parameter '{name}'")))?;
        self.parameters[i].min = min;
        self.parameters[i].max = max;
        self.validate()
    }

    /// Enforces 30 uniquely named parameters in canonical order with
    /// `min < max`.
    pub fn validate(&self) -> Result<()> {
        if self.parameters.len() != PARAMETER_NAMES.len() {
            return Err(Error::Config(format!("expected 30 parameters, found {}", self.parameters.len())));
        }
        for (p, expected) in self.parameters.iter().zip(PARAMETER_NAMES) {
            if p.name != expected {
                return Err(Error::Config(format!("parameter '{}' where '{expected}' was expected", p.name)));
            }
            if !(p.min.is_finite() && p.max.is_finite() && p.min < p.max) {
                return Err(Error::Config(format!("parameter '{}' has empty range [{}, {}]", p.name, p.min, p.max)));
            }
        }
        Ok(())
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.parameters.iter().map(Parameter::midpoint).collect()
    }

    /// Inputs of the nominal sample.
    pub fn nominal(&self) -> ConstituentSet {
        constituents(&self.midpoint())
    }
}

/// Maps a row of 30 physical values to named inputs.
pub fn constituents(row: &[f64]) -> ConstituentSet {
    let mut a = [0.0; 30];
    a.copy_from_slice(&row[..30]);
    ConstituentSet::from_array(&a)
}

/// `N` rows of physical inputs with their unit-hypercube coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    pub seed: u64,
    pub unit: Vec<Vec<f64>>,
    pub values: Vec<Vec<f64>>,
}

impl SampleMatrix {
    pub fn rows(&self) -> usize {
        self.values.len()
    }

    /// Inputs mapped to `[-1, 1]`.
    pub fn standardized(&self) -> Vec<Vec<f64>> {
        self.unit.iter().map(|r| r.iter().map(|u| 2.0 * u - 1.0).collect()).collect()
    }

    /// Rebuilds the matrix from physical values (unit coordinates recomputed).
    pub fn from_values(space: &ParameterSpace, seed: u64, values: Vec<Vec<f64>>) -> Result<Self> {
        let mut unit = Vec::with_capacity(values.len());
        for row in &values {
            if row.len() != space.len() {
                return domain(format!("row has {} values, expected {}", row.len(), space.len()));
            }
            unit.push(space.parameters.iter().zip(row).map(|(p, x)| p.to_unit(*x)).collect());
        }
        Ok(SampleMatrix { seed, unit, values })
    }
}

/// Latin hypercube design: every column has exactly one point in each of the
/// `n` equal bins, with independent seeded permutations per column.
pub fn lhs_sample(space: &ParameterSpace, n: usize, seed: u64) -> Result<SampleMatrix> {
    if n < 2 {
        return domain(format!("a Latin hypercube needs at least 2 samples, got {n}"));
    }
    space.validate()?;
    let d = space.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = vec![vec![0.0; d]; n];
    let mut bins: Vec<usize> = (0..n).collect();
    for j in 0..d {
        bins.shuffle(&mut rng);
        for (row, bin) in unit.iter_mut().zip(&bins) {
            row[j] = (*bin as f64 + rng.gen::<f64>()) / n as f64;
        }
    }
    let values =
        unit.iter().map(|r| r.iter().zip(&space.parameters).map(|(u, p)| p.from_unit(*u)).collect()).collect();
    Ok(SampleMatrix { seed, unit, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stratified(m: &SampleMatrix) -> bool {
        let n = m.rows();
        (0..m.unit[0].len()).all(|j| {
            let mut seen = vec![false; n];
            for row in &m.unit {
                let b = ((row[j] * n as f64).floor() as usize).min(n - 1);
                if seen[b] {
                    return false;
                }
                seen[b] = true;
            }
            true
        })
    }

    #[test]
    fn default_space_matches_nominal_inputs() {
        let s = ParameterSpace::default();
        s.validate().unwrap();
        let (a, b) = (s.nominal().to_array(), ConstituentSet::nominal().to_array());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn quartiles_are_distinct() {
        for seed in 0..20 {
            let m = lhs_sample(&ParameterSpace::default(), 4, seed).unwrap();
            assert!(stratified(&m));
        }
    }

    #[test]
    fn stratification_and_column_means() {
        let space = ParameterSpace::default();
        for n in [250, 500, 1000] {
            let m = lhs_sample(&space, n, 7).unwrap();
            assert!(stratified(&m));
            if n == 1000 {
                for (j, p) in space.parameters.iter().enumerate() {
                    let mean = m.values.iter().map(|r| r[j]).sum::<f64>() / n as f64;
                    assert!((mean - p.midpoint()).abs() < 0.02 * (p.max - p.min));
                }
            }
        }
    }

    #[test]
    fn seeded_and_reconstructible() {
        let space = ParameterSpace::default();
        let a = lhs_sample(&space, 16, 3).unwrap();
        assert_eq!(a, lhs_sample(&space, 16, 3).unwrap());
        assert_ne!(a, lhs_sample(&space, 16, 4).unwrap());
        let b = SampleMatrix::from_values(&space, 3, a.values.clone()).unwrap();
        for (x, y) in a.unit.iter().flatten().zip(b.unit.iter().flatten()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(lhs_sample(&space, 1, 0).is_err());
    }

    #[test]
    fn invalid_ranges_are_rejected() {
        let mut s = ParameterSpace::default();
        assert!(s.set_range("g", 0.5, 0.2).is_err());
        let mut s2 = ParameterSpace::default();
        assert!(s2.set_range("nope", 0.0, 1.0).is_err());
        s.parameters.pop();
        assert!(s.validate().is_err());
    }
}
