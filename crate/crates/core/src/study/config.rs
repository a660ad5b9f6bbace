//! Study configuration, parsed strictly from TOML.

use crate::error::{Error, Result};
use crate::props::{EvalSettings, Toggles};
use crate::uq::ParameterSpace;
use crate::voxel::MIN_RESOLUTION;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default = "default_surface_resolution")]
    pub surface_resolution: usize,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub toggles: Toggles,
    /// Range overrides keyed by parameter name; missing names keep their
    /// default range.
    #[serde(default)]
    pub ranges: BTreeMap<String, Range>,
}

fn default_resolution() -> usize {
    32
}

fn default_surface_resolution() -> usize {
    64
}

fn default_workers() -> usize {
    1
}

impl StudyConfig {
    pub fn new(samples: usize, seed: u64, resolution: usize, toggles: Toggles) -> Self {
        StudyConfig {
            samples,
            seed,
            resolution,
            surface_resolution: default_surface_resolution(),
            workers: default_workers(),
            output: None,
            toggles,
            ranges: BTreeMap::new(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: StudyConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn space(&self) -> Result<ParameterSpace> {
        let mut s = ParameterSpace::default();
        for (name, r) in &self.ranges {
            s.set_range(name, r.min, r.max)?;
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config(format!("samples = {} but at least 2 are required", self.samples)));
        }
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::Config(format!("resolution {} below the minimum {MIN_RESOLUTION}", self.resolution)));
        }
        if self.surface_resolution < 4 {
            return Err(Error::Config("surface_resolution must be at least 4".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.space().map(|_| ())
    }

    pub fn settings(&self) -> EvalSettings {
        EvalSettings { resolution: self.resolution, surface_resolution: self.surface_resolution, toggles: self.toggles }
    }

    /// Fully resolved copy: every range is listed and the output path and
    /// worker count (which do not affect results) are dropped.
    pub fn echo(&self) -> Result<String> {
        let space = self.space()?;
        let mut c = self.clone();
        c.output = None;
        c.workers = default_workers();
        c.ranges = space.parameters.iter().map(|p| (p.name.clone(), Range { min: p.min, max: p.max })).collect();
        toml::to_string(&c).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "samples = 8\nseed = 3\n";

    #[test]
    fn defaults_fill_in() {
        let c = StudyConfig::from_toml(MINIMAL).unwrap();
        assert_eq!((c.resolution, c.workers, c.toggles), (32, 1, Toggles::all()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\nsampels = 9\n").is_err());
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\n[toggles]\nelastc = false\n").is_err());
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\n[ranges.gap]\nmin = 0\nmax = 1\n").is_err());
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\n[ranges.g]\nmin = 0.0\nmax = 0.5\nmid = 1\n").is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(StudyConfig::from_toml("samples = 1\nseed = 3\n").is_err());
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\nresolution = 8\n").is_err());
        assert!(StudyConfig::from_toml("samples = 8\nseed = 3\n[ranges.g]\nmin = 0.5\nmax = 0.1\n").is_err());
    }

    #[test]
    fn echo_reproduces_the_study() {
        let text = "samples = 8\nseed = 3\nworkers = 4\n[toggles]\nelastic = false\n[ranges.g]\nmin = 0.1\nmax = 0.4\n";
        let c = StudyConfig::from_toml(text).unwrap();
        let echo = c.echo().unwrap();
        let back = StudyConfig::from_toml(&echo).unwrap();
        assert_eq!(back.space().unwrap(), c.space().unwrap());
        assert_eq!((back.samples, back.seed, back.toggles), (c.samples, c.seed, c.toggles));
        assert_eq!(back.echo().unwrap(), echo);
    }
}
