//! Correlation coefficients and per-quantity summary statistics.

use crate::error::{domain, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMode {
    Pearson,
    Spearman,
}

/// One coefficient with a flag set when either column was constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub value: f64,
    pub degenerate: bool,
    /// Pairs used after dropping missing values.
    pub pairs: usize,
}

/// Ranks starting at 1; tied values share the average of their ranks.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = 0.5 * (i + j) as f64 + 1.0;
        for k in &order[i..=j] {
            ranks[*k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson_complete(x: &[f64], y: &[f64]) -> (f64, bool) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    let tiny = |s: f64, m: f64| s <= (1e-14 * m.abs().max(1e-300)).powi(2) * n;
    if tiny(sxx, mx) || tiny(syy, my) {
        return (0.0, true);
    }
    ((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0), false)
}

/// Correlation of two columns with pairwise deletion of missing values.
pub fn correlation(x: &[Option<f64>], y: &[Option<f64>], mode: CorrelationMode) -> Result<Correlation> {
    if x.len() != y.len() {
        return domain(format!("column lengths differ: {} and {}", x.len(), y.len()));
    }
    let (a, b): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter_map(|(p, q)| match (p, q) {
            (Some(p), Some(q)) if p.is_finite() && q.is_finite() => Some((*p, *q)),
            _ => None,
        })
        .unzip();
    if a.len() < 3 {
        return domain(format!("{} complete pairs, at least 3 required", a.len()));
    }
    let (value, degenerate) = match mode {
        CorrelationMode::Pearson => pearson_complete(&a, &b),
        CorrelationMode::Spearman => pearson_complete(&average_ranks(&a), &average_ranks(&b)),
    };
    Ok(Correlation { value, degenerate, pairs: a.len() })
}

/// All coefficients between the columns of `rows` and those of `cols`.
pub fn correlation_matrix(
    rows: &[Vec<Option<f64>>],
    cols: &[Vec<Option<f64>>],
    mode: CorrelationMode,
) -> Vec<Vec<Option<Correlation>>> {
    rows.iter().map(|r| cols.iter().map(|c| correlation(r, c, mode).ok()).collect()).collect()
}

/// Mean, coefficient of variation and degree of nonlinearity of one QoI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub cv: Option<f64>,
    pub don: Option<f64>,
    pub nominal: Option<f64>,
    /// The mean is zero, so `cv` and `don` are undefined.
    pub zero_mean: bool,
}

pub fn summary_stats(values: &[Option<f64>], nominal: Option<f64>) -> Result<Summary> {
    let v: Vec<f64> = values.iter().flatten().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return domain("no finite values");
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let std_dev = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    let zero_mean = mean == 0.0;
    let cv = (!zero_mean).then(|| std_dev / mean.abs());
    let don = match (zero_mean, nominal) {
        (false, Some(y0)) => Some((mean - y0).abs() / mean.abs()),
        _ => None,
    };
    Ok(Summary { count: v.len(), mean, std_dev, cv, don, nominal, zero_mean })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn col(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().map(|x| Some(*x)).collect()
    }

    #[test]
    fn tied_ranks_are_averaged() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn monotone_and_reflected() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v.exp().powi(3)).collect();
        let s = correlation(&col(&x), &col(&y), CorrelationMode::Spearman).unwrap();
        assert_eq!(s.value, 1.0);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        for mode in [CorrelationMode::Pearson, CorrelationMode::Spearman] {
            assert!((correlation(&col(&x), &col(&z), mode).unwrap().value + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn independent_columns_are_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
        let y: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
        for mode in [CorrelationMode::Pearson, CorrelationMode::Spearman] {
            assert!(correlation(&col(&x), &col(&y), mode).unwrap().value.abs() < 0.1);
        }
    }

    #[test]
    fn constant_column_is_flagged() {
        let x = col(&[1.0, 2.0, 3.0, 4.0]);
        let c = correlation(&x, &col(&[5.0; 4]), CorrelationMode::Pearson).unwrap();
        assert!(c.degenerate && c.value == 0.0);
        let mut y = col(&[2.0, 4.0, 6.0, 8.0]);
        y[1] = None;
        let c = correlation(&x, &y, CorrelationMode::Spearman).unwrap();
        assert_eq!((c.pairs, c.value), (3, 1.0));
        assert!(correlation(&x[..2], &y[..2], CorrelationMode::Pearson).is_err());
    }

    #[test]
    fn summary_examples() {
        let s = summary_stats(&col(&[2.0; 10]), Some(2.0)).unwrap();
        assert_eq!((s.cv, s.don), (Some(0.0), Some(0.0)));
        let s = summary_stats(&col(&[-1.0, 1.0]), Some(0.5)).unwrap();
        assert!(s.zero_mean && s.cv.is_none() && s.don.is_none());
        let s = summary_stats(&col(&[1.0, 2.0, 3.0]), Some(1.0)).unwrap();
        assert!((s.don.unwrap() - 0.5).abs() < 1e-15 && (s.cv.unwrap() - 0.5).abs() < 1e-15);
    }
}
