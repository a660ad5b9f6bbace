//! Total-degree-2 Legendre polynomial chaos with greedy sparse regression.

use crate::error::{domain, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

const SQRT3: f64 = 1.732_050_807_568_877_2;
const SQRT5: f64 = 2.236_067_977_499_79;

/// Minimum number of usable rows for a fit.
pub const MIN_SAMPLES: usize = 60;
/// Surrogates whose cross-validated `Q²` falls below this are flagged.
pub const LOW_QUALITY_Q2: f64 = 0.5;
/// Forward selection stops after this many steps without a better
/// cross-validation error.
const PATIENCE: usize = 25;

/// One orthonormal basis polynomial in standardized inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Constant,
    Linear(usize),
    Quadratic(usize),
    Interaction(usize, usize),
}

impl Term {
    pub fn eval(&self, xi: &[f64]) -> f64 {
        match *self {
            Term::Constant => 1.0,
            Term::Linear(i) => SQRT3 * xi[i],
            Term::Quadratic(i) => SQRT5 * 0.5 * (3.0 * xi[i] * xi[i] - 1.0),
            Term::Interaction(i, j) => 3.0 * xi[i] * xi[j],
        }
    }

    /// Input the term depends on alone, if any.
    pub fn single_input(&self) -> Option<usize> {
        match *self {
            Term::Linear(i) | Term::Quadratic(i) => Some(i),
            _ => None,
        }
    }
}

/// Constant, linear, pure quadratic, then pairwise products in `(i, j)` order.
pub fn total_degree_two_basis(dim: usize) -> Vec<Term> {
    let mut b = vec![Term::Constant];
    b.extend((0..dim).map(Term::Linear));
    b.extend((0..dim).map(Term::Quadratic));
    for i in 0..dim {
        for j in i + 1..dim {
            b.push(Term::Interaction(i, j));
        }
    }
    b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PceSurrogate {
    pub dimension: usize,
    pub basis: Vec<Term>,
    /// One coefficient per basis term; zero where not retained.
    pub coefficients: Vec<f64>,
    pub retained: Vec<bool>,
    pub r_squared: f64,
    /// Mean squared cross-validation residual at the chosen path length.
    pub cv_error: f64,
    /// `1 - cv_error / variance`.
    pub q_squared: f64,
    pub samples_used: usize,
    pub samples_excluded: usize,
    /// Response was constant; the surrogate is that constant.
    pub degenerate: bool,
    pub low_quality: bool,
}

impl PceSurrogate {
    pub fn mean(&self) -> f64 {
        self.coefficients[0]
    }

    /// Variance implied by the coefficients.
    pub fn variance(&self) -> f64 {
        self.coefficients[1..].iter().map(|c| c * c).sum()
    }

    pub fn predict(&self, xi: &[f64]) -> f64 {
        self.basis.iter().zip(&self.coefficients).filter(|(_, c)| **c != 0.0).map(|(t, c)| c * t.eval(xi)).sum()
    }

    pub fn coefficient(&self, term: Term) -> f64 {
        self.basis.iter().position(|t| *t == term).map_or(0.0, |i| self.coefficients[i])
    }

    pub fn retained_terms(&self) -> Vec<Term> {
        self.basis.iter().zip(&self.retained).filter(|(_, r)| **r).map(|(t, _)| *t).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Greedy selection state over a set of training rows, with the same
/// orthogonalization carried along on held-out rows.
struct SelectionPath {
    train: Vec<Vec<f64>>,
    test: Vec<Vec<f64>>,
    residual: Vec<f64>,
    test_residual: Vec<f64>,
    original_norm: Vec<f64>,
    in_set: Vec<bool>,
    active: Vec<usize>,
    scale: f64,
}

impl SelectionPath {
    fn new(columns: &[Vec<f64>], y: &[f64], train_rows: &[usize], test_rows: &[usize], scale: f64) -> Self {
        let pick = |rows: &[usize]| -> Vec<Vec<f64>> {
            columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect()
        };
        let mut train = pick(train_rows);
        let mut test = pick(test_rows);
        let nt = train_rows.len() as f64;
        let mean = train_rows.iter().map(|&i| y[i]).sum::<f64>() / nt;
        for k in 1..train.len() {
            let a = train[k].iter().sum::<f64>() / nt;
            train[k].iter_mut().for_each(|x| *x -= a);
            test[k].iter_mut().for_each(|x| *x -= a);
        }
        let original_norm = columns.iter().map(|c| dot(c, c) * nt / y.len() as f64).collect();
        let mut in_set = vec![false; columns.len()];
        in_set[0] = true;
        SelectionPath {
            residual: train_rows.iter().map(|&i| y[i] - mean).collect(),
            test_residual: test_rows.iter().map(|&i| y[i] - mean).collect(),
            train,
            test,
            original_norm,
            in_set,
            active: vec![0],
            scale,
        }
    }

    fn saturated(&self) -> bool {
        let n = self.residual.len() as f64;
        dot(&self.residual, &self.residual) <= (1e-13 * self.scale).powi(2) * n
    }

    /// Adds the term that most reduces the training residual. Returns false
    /// when no admissible candidate remains.
    fn step(&mut self) -> bool {
        let mut pick = None;
        let mut best_gain = 0.0;
        for j in 1..self.train.len() {
            if self.in_set[j] {
                continue;
            }
            let nn = dot(&self.train[j], &self.train[j]);
            if nn <= 1e-10 * self.original_norm[j] {
                continue;
            }
            let gain = dot(&self.train[j], &self.residual).powi(2) / nn;
            if gain > best_gain {
                best_gain = gain;
                pick = Some(j);
            }
        }
        let Some(j) = pick else { return false };
        let norm = dot(&self.train[j], &self.train[j]).sqrt();
        let q: Vec<f64> = self.train[j].iter().map(|v| v / norm).collect();
        let qt: Vec<f64> = self.test[j].iter().map(|v| v / norm).collect();
        let a = dot(&q, &self.residual);
        self.residual.iter_mut().zip(&q).for_each(|(r, qi)| *r -= a * qi);
        self.test_residual.iter_mut().zip(&qt).for_each(|(r, qi)| *r -= a * qi);
        self.in_set[j] = true;
        self.active.push(j);
        for k in 0..self.train.len() {
            if !self.in_set[k] {
                let b = dot(&q, &self.train[k]);
                self.train[k].iter_mut().zip(&q).for_each(|(x, qi)| *x -= b * qi);
                self.test[k].iter_mut().zip(&qt).for_each(|(x, qi)| *x -= b * qi);
            }
        }
        true
    }

    fn test_sse(&self) -> f64 {
        dot(&self.test_residual, &self.test_residual)
    }
}

/// Folds used to choose the number of retained terms.
pub const CV_FOLDS: usize = 5;

/// Fits a sparse surrogate. `xi` holds standardized inputs in `[-1, 1]`.
/// Rows whose response is missing or non-finite are dropped.
///
/// Terms enter one at a time, always the candidate that most reduces the
/// residual once orthogonalized against the active set. The path length is
/// chosen by k-fold cross-validation with selection repeated inside every
/// fold; the terms chosen on the full data at that length are then refitted
/// by least squares.
pub fn pce_fit(xi: &[Vec<f64>], y: &[Option<f64>]) -> Result<PceSurrogate> {
    if xi.len() != y.len() {
        return domain(format!("{} input rows but {} responses", xi.len(), y.len()));
    }
    let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i].is_some_and(f64::is_finite)).collect();
    let n = rows.len();
    if n < MIN_SAMPLES {
        return domain(format!("{n} usable samples, at least {MIN_SAMPLES} required"));
    }
    let dim = xi[rows[0]].len();
    let basis = total_degree_two_basis(dim);
    let p = basis.len();
    let yv: Vec<f64> = rows.iter().map(|&i| y[i].unwrap()).collect();
    let mean = yv.iter().sum::<f64>() / n as f64;
    let tss: f64 = yv.iter().map(|v| (v - mean).powi(2)).sum();
    let mut coefficients = vec![0.0; p];
    let mut retained = vec![false; p];
    retained[0] = true;
    let scale = yv.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    if tss <= (1e-12 * scale).powi(2) * n as f64 {
        coefficients[0] = mean;
        return Ok(PceSurrogate {
            dimension: dim,
            basis,
            coefficients,
            retained,
            r_squared: 1.0,
            cv_error: 0.0,
            q_squared: 1.0,
            samples_used: n,
            samples_excluded: y.len() - n,
            degenerate: true,
            low_quality: true,
        });
    }

    let columns: Vec<Vec<f64>> = basis.iter().map(|t| rows.iter().map(|&i| t.eval(&xi[i])).collect()).collect();
    let mut folds: Vec<SelectionPath> = (0..CV_FOLDS)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % CV_FOLDS == f);
            SelectionPath::new(&columns, &yv, &train, &test, scale)
        })
        .collect();
    let smallest_train = n - n.div_ceil(CV_FOLDS);
    let max_terms = p.min(smallest_train - 2);
    let cv = |folds: &[SelectionPath]| folds.iter().map(SelectionPath::test_sse).sum::<f64>() / n as f64;
    let mut best_cv = cv(&folds);
    let mut best_len = 1;
    let mut len = 1;
    while len < max_terms {
        if folds.iter().all(SelectionPath::saturated) {
            break;
        }
        let mut moved = true;
        for f in folds.iter_mut() {
            moved &= f.saturated() || f.step();
        }
        if !moved {
            break;
        }
        len += 1;
        let e = cv(&folds);
        if e < best_cv * (1.0 - 1e-9) {
            best_cv = e;
            best_len = len;
        } else if len - best_len >= PATIENCE {
            break;
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let mut full = SelectionPath::new(&columns, &yv, &all, &[], scale);
    while full.active.len() < best_len && !full.saturated() && full.step() {}
    let active = full.active;

    let m = active.len();
    let design = DMatrix::from_fn(n, m, |i, k| columns[active[k]][i]);
    let rhs = DVector::from_vec(yv.clone());
    let sol = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::Numerical(format!("least-squares polish failed: {e}")))?;
    let fitted = &design * &sol;
    let rss: f64 = fitted.iter().zip(&yv).map(|(f, v)| (v - f).powi(2)).sum();
    let cmax = sol.iter().fold(0.0f64, |a, c| a.max(c.abs()));
    for (k, &j) in active.iter().enumerate() {
        if j == 0 || sol[k].abs() > 1e-10 * cmax {
            coefficients[j] = sol[k];
            retained[j] = true;
        }
    }
    let variance = tss / n as f64;
    let q_squared = 1.0 - best_cv / variance;
    Ok(PceSurrogate {
        dimension: dim,
        basis,
        coefficients,
        retained,
        r_squared: 1.0 - rss / tss,
        cv_error: best_cv,
        q_squared,
        samples_used: n,
        samples_excluded: y.len() - n,
        degenerate: false,
        low_quality: !(q_squared >= LOW_QUALITY_Q2),
    })
}

/// Main-effect index of every input: the share of surrogate variance carried
/// by terms that depend on that input alone.
pub fn sobol_main_indices(s: &PceSurrogate) -> Result<Vec<f64>> {
    let total = s.variance();
    if s.degenerate || total <= 0.0 {
        return Err(Error::Numerical("surrogate has zero variance; Sobol indices are undefined".into()));
    }
    let mut idx = vec![0.0; s.dimension];
    for (t, c) in s.basis.iter().zip(&s.coefficients) {
        if let Some(i) = t.single_input() {
            idx[i] += c * c;
        }
    }
    idx.iter_mut().for_each(|v| *v /= total);
    Ok(idx)
}
