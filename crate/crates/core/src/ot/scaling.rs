use ndarray::{Array2, Axis};

use super::prox::MarginalProx;
use super::types::{CostMatrix, SolverConfig, TransportPlan};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Generalized scaling loop.
///
/// Starting from `v = 1`, alternates
///
/// ```text
/// x = G v,   u = prox_row(x) / x,
/// y = Gᵀ u,  v = prox_col(y) / y,
/// ```
///
/// with `G = exp(-C/ε)`, and returns `diag(u) G diag(v)`. The loop stops once
/// `max_j |ln v_j - ln v_j'|` between consecutive sweeps drops below
/// `cfg.tol`; if that never happens within `cfg.max_iters` sweeps the plan is
/// still returned, with `converged = false`.
///
/// With `cfg.log_domain` the scaling vectors are carried as logarithms and
/// every matrix product becomes a log-sum-exp, so `exp(-C/ε)` never has to
/// be materialized.
pub fn generalized_scaling<T, R, C>(
    cost: &CostMatrix<T>,
    row: &R,
    col: &C,
    cfg: &SolverConfig<T>,
) -> Result<TransportPlan<T>>
where
    T: Scalar,
    R: MarginalProx<T> + ?Sized,
    C: MarginalProx<T> + ?Sized,
{
    cfg.validate()?;
    let (n, k) = (cost.nrows(), cost.ncols());
    if row.dim() != n {
        return Err(Error::dims("row marginal", n, row.dim()));
    }
    if col.dim() != k {
        return Err(Error::dims("column marginal", k, col.dim()));
    }
    let (values, converged, iterations) = if cfg.log_domain {
        scale_log(cost, row, col, cfg)?
    } else {
        scale_direct(cost, row, col, cfg)?
    };
    let rows = values.sum_axis(Axis(1)).to_vec();
    let cols = values.sum_axis(Axis(0)).to_vec();
    let residual = row.violation(&rows).max(col.violation(&cols));
    Ok(TransportPlan {
        values,
        converged,
        iterations,
        residual,
    })
}

/// Change between two scaling entries measured in log coordinates.
#[inline]
fn log_change<T: Scalar>(new: T, old: T) -> T {
    if new == old {
        T::zero()
    } else if new == T::zero() || old == T::zero() {
        T::infinity()
    } else {
        (new.ln() - old.ln()).abs()
    }
}

#[inline]
fn log_vec_change<T: Scalar>(new: T, old: T) -> T {
    if new == old {
        T::zero()
    } else {
        (new - old).abs()
    }
}

fn failure(iteration: usize, reason: impl Into<String>) -> Error {
    Error::NumericalFailure {
        iteration,
        reason: reason.into(),
    }
}

fn scale_direct<T, R, C>(
    cost: &CostMatrix<T>,
    row: &R,
    col: &C,
    cfg: &SolverConfig<T>,
) -> Result<(Array2<T>, bool, usize)>
where
    T: Scalar,
    R: MarginalProx<T> + ?Sized,
    C: MarginalProx<T> + ?Sized,
{
    let eps = cfg.epsilon;
    let (n, k) = (cost.nrows(), cost.ncols());
    let g = cost.values().mapv(|c| (-c / eps).exp());
    let mut u = vec![T::zero(); n];
    let mut v = vec![T::one(); k];
    let mut x = vec![T::zero(); n];
    let mut y = vec![T::zero(); k];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = g.row(i).iter().zip(&v).fold(T::zero(), |s, (&gij, &vj)| s + gij * vj);
            if !(*xi > T::zero()) || !xi.is_finite() {
                return Err(failure(it, format!("row {i} of G·v is {} (epsilon too small for direct scaling?)", *xi)));
            }
        }
        let ut = row.prox(&x, eps);
        for i in 0..n {
            u[i] = if ut[i] == T::zero() { T::zero() } else { ut[i] / x[i] };
            if !u[i].is_finite() {
                return Err(failure(it, format!("row scaling {i} is not finite")));
            }
        }
        y.iter_mut().for_each(|yj| *yj = T::zero());
        for (i, &ui) in u.iter().enumerate() {
            for (yj, &gij) in y.iter_mut().zip(g.row(i)) {
                *yj += gij * ui;
            }
        }
        let vt = col.prox(&y, eps);
        let mut delta = T::zero();
        for j in 0..k {
            let vj = if vt[j] == T::zero() { T::zero() } else { vt[j] / y[j] };
            if !vj.is_finite() {
                return Err(failure(it, format!("column scaling {j} is not finite (Gᵀu = {})", y[j])));
            }
            delta = delta.max(log_change(vj, v[j]));
            v[j] = vj;
        }
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let mut q = g;
    for ((i, j), qij) in q.indexed_iter_mut() {
        *qij = u[i] * *qij * v[j];
    }
    Ok((q, converged, iterations))
}

fn scale_log<T, R, C>(
    cost: &CostMatrix<T>,
    row: &R,
    col: &C,
    cfg: &SolverConfig<T>,
) -> Result<(Array2<T>, bool, usize)>
where
    T: Scalar,
    R: MarginalProx<T> + ?Sized,
    C: MarginalProx<T> + ?Sized,
{
    let eps = cfg.epsilon;
    let (n, k) = (cost.nrows(), cost.ncols());
    let log_g = cost.values().mapv(|c| -c / eps);
    let mut log_u = vec![T::zero(); n];
    let mut log_v = vec![T::zero(); k];
    let mut log_x = vec![T::zero(); n];
    let mut log_y = vec![T::zero(); k];
    let mut scratch = vec![T::zero(); n.max(k)];
    let mut converged = false;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters {
        iterations = it;
        for (i, lx) in log_x.iter_mut().enumerate() {
            let terms = &mut scratch[..k];
            for (t, (&lg, &lv)) in terms.iter_mut().zip(log_g.row(i).iter().zip(&log_v)) {
                *t = lg + lv;
            }
            *lx = lse_slice(terms);
            if !lx.is_finite() {
                return Err(failure(it, format!("row {i} of log(G·v) is {}", *lx)));
            }
        }
        let lut = row.log_prox(&log_x, eps);
        for i in 0..n {
            log_u[i] = if lut[i] == T::neg_infinity() { lut[i] } else { lut[i] - log_x[i] };
            if log_u[i].is_nan() || log_u[i] == T::infinity() {
                return Err(failure(it, format!("log row scaling {i} is {}", log_u[i])));
            }
        }
        for (j, ly) in log_y.iter_mut().enumerate() {
            let terms = &mut scratch[..n];
            for (i, t) in terms.iter_mut().enumerate() {
                *t = log_g[(i, j)] + log_u[i];
            }
            *ly = lse_slice(terms);
        }
        let lvt = col.log_prox(&log_y, eps);
        let mut delta = T::zero();
        for j in 0..k {
            let lv = if lvt[j] == T::neg_infinity() { lvt[j] } else { lvt[j] - log_y[j] };
            if lv.is_nan() || lv == T::infinity() {
                return Err(failure(it, format!("log column scaling {j} is {lv} (log Gᵀu = {})", log_y[j])));
            }
            delta = delta.max(log_vec_change(lv, log_v[j]));
            log_v[j] = lv;
        }
        if delta < cfg.tol {
            converged = true;
            break;
        }
    }

    let mut q = log_g;
    for ((i, j), qij) in q.indexed_iter_mut() {
        *qij = (log_u[i] + *qij + log_v[j]).exp();
    }
    Ok((q, converged, iterations))
}

fn lse_slice<T: Scalar>(xs: &[T]) -> T {
    let max = xs.iter().fold(T::neg_infinity(), |m, &x| m.max(x));
    if max == T::neg_infinity() || !max.is_finite() {
        return max;
    }
    let s = xs.iter().fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + s.ln()
}
