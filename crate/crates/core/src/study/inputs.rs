//! Single-sample parameter files and named views of a record.

use crate::error::{Error, Result};
use crate::micromech::{ConstituentSet, PARAMETER_NAMES};
use crate::props::{QoIRecord, Qoi, Status};
use serde::Serialize;

/// Reads `name = value` pairs in TOML. Names follow the sampled-input
/// naming; omitted inputs take their nominal value and unknown names are
/// rejected.
pub fn parse_inputs(text: &str) -> Result<ConstituentSet> {
    let table: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut values = ConstituentSet::nominal().to_array();
    for (key, v) in &table {
        let i = PARAMETER_NAMES
            .iter()
            .position(|n| n == key)
            .ok_or_else(|| Error::Config(format!("unknown parameter '{key}'")))?;
        values[i] = match v {
            toml::Value::Float(f) => *f,
            toml::Value::Integer(n) => *n as f64,
            other => return Err(Error::Config(format!("parameter '{key}' must be a number, got {other}"))),
        };
    }
    let c = ConstituentSet::from_array(&values);
    c.validate()?;
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: &'static str,
    pub value: Option<f64>,
    pub status: Status,
}

pub fn named(rec: &QoIRecord) -> Vec<NamedValue> {
    Qoi::ALL.iter().map(|q| NamedValue { name: q.name(), value: rec.get(*q), status: rec.status(*q).clone() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_and_rejects() {
        let c = parse_inputs("g = 0.1\nk_f_a = 80\n").unwrap();
        assert_eq!((c.g, c.k_f_a, c.w), (0.1, 80.0, 0.125));
        assert!(parse_inputs("gap = 0.1\n").is_err());
        assert!(parse_inputs("g = \"wide\"\n").is_err());
        assert!(parse_inputs("u = 1.5\n").is_err());
    }
}
