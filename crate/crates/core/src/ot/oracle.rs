//! Brute-force reference for the curriculum-mass problem
//!
//! ```text
//! min ⟨Q, C⟩ + γ·KL(Qᵀ1 ‖ ρ/K·1)   s.t.  Q >= 0,  Q·1 <= 1/N,  1ᵀQ1 = ρ
//! ```
//!
//! without any entropic term: seeded random feasible plans, then pairwise
//! mass-transfer descent from the best sample. It shares no code with the
//! scaling solvers and is meant for desk-scale verification only.

use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use super::types::CostMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const MAX_CELLS: usize = 64;
const MAX_MOVES: usize = 200_000;
const GAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<T> {
    pub plan: Array2<T>,
    pub objective: T,
}

/// Unregularized curriculum objective `⟨Q, C⟩ + γ·KL(Qᵀ1 ‖ ρ/K·1)`, with the
/// generalized KL `Σ s log(s/b) - s + b` and `0·log 0 = 0`.
pub fn curriculum_objective<T: Scalar>(plan: ArrayView2<'_, T>, cost: ArrayView2<'_, T>, rho: T, gamma: T) -> T {
    let k = cost.ncols();
    let b = rho / T::from_usize_lossy(k);
    let transport = plan.iter().zip(cost.iter()).fold(T::zero(), |acc, (&q, &c)| acc + q * c);
    let kl = plan.columns().into_iter().fold(T::zero(), |acc, col| {
        let s = col.sum();
        acc + gen_kl_term(s, b)
    });
    transport + gamma * kl
}

fn gen_kl_term<T: Scalar>(s: T, b: T) -> T {
    if s <= T::zero() {
        b
    } else if b == T::zero() {
        T::infinity()
    } else {
        s * (s / b).ln() - s + b
    }
}

/// Search the curriculum-mass feasible set for the best plan.
///
/// Draws `samples` random feasible plans (Dirichlet row masses water-filled
/// under the `1/N` cap, Dirichlet rows within each), keeps the best, then
/// descends by moving mass between pairs of cells until no improving pair
/// remains. Deterministic in `seed`.
pub fn oracle_uot_curriculum<T: Scalar>(
    cost: &CostMatrix<T>,
    rho: T,
    gamma: T,
    samples: usize,
    seed: u64,
) -> Result<OracleResult<T>> {
    let (n, k) = (cost.nrows(), cost.ncols());
    if n * k > MAX_CELLS {
        return Err(Error::invalid("cost", format!("oracle limited to N·K <= {MAX_CELLS}, got {}", n * k)));
    }
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::invalid("rho", format!("infeasible mass {rho}; must lie in [0, 1]")));
    }
    if !(gamma > T::zero()) {
        return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
    }
    if samples == 0 {
        return Err(Error::invalid("samples", "need at least one sample"));
    }
    if rho == T::zero() {
        return Ok(OracleResult {
            plan: Array2::zeros((n, k)),
            objective: T::zero(),
        });
    }

    let c = cost.values().mapv(|x| x.as_f64());
    let rho64 = rho.as_f64();
    let gamma64 = gamma.as_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut best = Array2::<f64>::zeros((n, k));
    let mut best_obj = f64::INFINITY;
    let mut q = Array2::<f64>::zeros((n, k));
    for _ in 0..samples {
        sample_feasible(&mut rng, &mut q, rho64);
        let obj = curriculum_objective(q.view(), c.view(), rho64, gamma64);
        if obj < best_obj {
            best_obj = obj;
            best.assign(&q);
        }
    }

    refine(&mut best, &c, rho64, gamma64);
    let objective = curriculum_objective(best.view(), c.view(), rho64, gamma64);
    Ok(OracleResult {
        plan: best.mapv(T::lit),
        objective: T::lit(objective),
    })
}

fn dirichlet_into<R: Rng>(rng: &mut R, out: &mut [f64]) {
    let mut total = 0.0;
    for x in out.iter_mut() {
        let e: f64 = rng.sample(Exp1);
        *x = e;
        total += e;
    }
    for x in out.iter_mut() {
        *x /= total;
    }
}

fn sample_feasible<R: Rng>(rng: &mut R, q: &mut Array2<f64>, rho: f64) {
    let (n, k) = q.dim();
    let cap = 1.0 / n as f64;
    let mut rows = vec![0.0; n];
    dirichlet_into(rng, &mut rows);
    rows.iter_mut().for_each(|r| *r *= rho);

    // Clip at the cap and hand the excess to the rows with slack, in
    // proportion to their slack. Total slack >= excess because rho <= 1.
    let excess: f64 = rows.iter().map(|&r| (r - cap).max(0.0)).sum();
    if excess > 0.0 {
        rows.iter_mut().for_each(|r| *r = r.min(cap));
        let slack: f64 = rows.iter().map(|&r| cap - r).sum();
        if slack > 0.0 {
            let share = (excess / slack).min(1.0);
            rows.iter_mut().for_each(|r| *r += (cap - *r) * share);
        }
    }

    let mut w = vec![0.0; k];
    for (i, &mass) in rows.iter().enumerate() {
        dirichlet_into(rng, &mut w);
        for (j, &wj) in w.iter().enumerate() {
            q[(i, j)] = mass * wj;
        }
    }
}

/// Pairwise transfer descent. Each move takes mass from the cell with the
/// largest partial derivative and gives it to the admissible cell with the
/// smallest one (same row, or a row below its cap), with an exact line
/// search along that direction.
fn refine(q: &mut Array2<f64>, c: &Array2<f64>, rho: f64, gamma: f64) {
    let (n, k) = q.dim();
    let cap = 1.0 / n as f64;
    let b = rho / k as f64;
    let mut grad = Array2::<f64>::zeros((n, k));

    for _ in 0..MAX_MOVES {
        let rows: Vec<f64> = q.rows().into_iter().map(|r| r.sum()).collect();
        let cols: Vec<f64> = q.columns().into_iter().map(|c| c.sum()).collect();
        for ((i, j), g) in grad.indexed_iter_mut() {
            *g = c[(i, j)] + gamma * if cols[j] > 0.0 { (cols[j] / b).ln() } else { f64::NEG_INFINITY };
        }

        let mut best: Option<(usize, usize, usize, usize, f64)> = None;
        for ((i, j), &gd) in grad.indexed_iter() {
            if q[(i, j)] <= 0.0 {
                continue;
            }
            for ((i2, j2), &gr) in grad.indexed_iter() {
                if (i2, j2) == (i, j) || (i2 != i && cap - rows[i2] <= 1e-15) {
                    continue;
                }
                let gap = gd - gr;
                if gap > best.map_or(GAP_TOL, |b| b.4) {
                    best = Some((i, j, i2, j2, gap));
                }
            }
        }
        let Some((i, j, i2, j2, _)) = best else {
            return;
        };

        let mut max_step = q[(i, j)];
        if i2 != i {
            max_step = max_step.min(cap - rows[i2]);
        }
        let step = if j == j2 {
            max_step
        } else {
            // φ'(δ) = 0  ⇔  (s_k + δ) / (s_j - δ) = exp((C_ij - C_i'k) / γ)
            let ratio = ((c[(i, j)] - c[(i2, j2)]) / gamma).exp();
            let delta = if ratio.is_infinite() {
                cols[j]
            } else {
                (ratio * cols[j] - cols[j2]) / (1.0 + ratio)
            };
            delta.clamp(0.0, max_step)
        };
        if step <= 0.0 {
            return;
        }
        q[(i, j)] -= step;
        q[(i2, j2)] += step;
        if q[(i, j)] < 0.0 {
            q[(i, j)] = 0.0;
        }
    }
}
