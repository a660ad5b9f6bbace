use super::{dot, norm2, LinearOperator, Preconditioner};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Outcome of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// `‖b − A x‖ / ‖b‖` at exit.
    pub relative_residual: f64,
}

fn true_residual(a: &dyn LinearOperator, b: &[f64], x: &[f64]) -> f64 {
    let mut r = vec![0.0; b.len()];
    a.apply(x, &mut r);
    let nb = norm2(b);
    let res: f64 = r.iter().zip(b).map(|(ri, bi)| (bi - ri) * (bi - ri)).sum::<f64>().sqrt();
    if nb > 0.0 {
        res / nb
    } else {
        res
    }
}

/// Preconditioned conjugate gradients for SPD systems, starting from `x`.
pub fn pcg(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let nb = norm2(b);
    if nb == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    a.apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut rel = norm2(&r) / nb;
    let mut it = 0;
    while rel > tol {
        if it >= max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: rel });
        }
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Numerical(format!("operator is not positive definite (pAp = {pq:e})")));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        rel = norm2(&r) / nb;
        if rel <= tol {
            // guard against drift between the recursive and true residual
            rel = true_residual(a, b, x);
            if rel <= tol {
                break;
            }
            a.apply(x, &mut r);
            for i in 0..n {
                r[i] = b[i] - r[i];
            }
        }
        m.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(SolveStats { iterations: it, relative_residual: rel })
}

/// Preconditioned MINRES for symmetric indefinite systems, starting from `x`.
/// Restarts from the current iterate when the recursive residual estimate and
/// the true residual disagree.
pub fn minres(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<SolveStats> {
    let nb = norm2(b);
    if nb == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0 });
    }
    let mut total = 0;
    let mut inner_tol = tol;
    for _restart in 0..8 {
        let done = minres_cycle(a, m, b, x, inner_tol, max_iter - total.min(max_iter))?;
        total += done;
        let rel = true_residual(a, b, x);
        if rel <= tol {
            return Ok(SolveStats { iterations: total, relative_residual: rel });
        }
        if total >= max_iter {
            return Err(Error::NoConvergence { iterations: total, residual: rel });
        }
        inner_tol = (inner_tol * 0.1).max(1e-16);
    }
    let rel = true_residual(a, b, x);
    Err(Error::NoConvergence { iterations: total, residual: rel })
}

fn minres_cycle(
    a: &dyn LinearOperator,
    m: &dyn Preconditioner,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let nb = norm2(b);
    let mut r1 = vec![0.0; n];
    a.apply(x, &mut r1);
    for i in 0..n {
        r1[i] = b[i] - r1[i];
    }
    let mut y = vec![0.0; n];
    m.apply(&r1, &mut y);
    let beta1 = dot(&r1, &y);
    if beta1 < 0.0 {
        return Err(Error::Numerical("preconditioner is not positive definite".into()));
    }
    let beta1 = beta1.sqrt();
    if beta1 == 0.0 {
        return Ok(0);
    }
    // the stopping test is on the preconditioned residual, scaled so that it
    // tracks ‖r‖/‖b‖ for the initial residual
    let scale = norm2(&r1) / nb / beta1;
    let mut r2 = r1.clone();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    for itn in 1..=max_iter {
        let s = 1.0 / beta;
        for i in 0..n {
            v[i] = s * y[i];
        }
        a.apply(&v, &mut y);
        if itn >= 2 {
            let f = beta / oldb;
            for i in 0..n {
                y[i] -= f * r1[i];
            }
        }
        let alfa = dot(&v, &y);
        let f = alfa / beta;
        for i in 0..n {
            y[i] -= f * r2[i];
        }
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        m.apply(&r2, &mut y);
        oldb = beta;
        let bb = dot(&r2, &y);
        if bb < 0.0 {
            return Err(Error::Numerical("preconditioner is not positive definite".into()));
        }
        beta = bb.sqrt();
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        let denom = 1.0 / gamma;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        if phibar * scale <= tol || beta == 0.0 {
            return Ok(itn);
        }
    }
    Ok(max_iter)
}
