//! Independent reference implementations and seeded fixtures shared by the
//! integration and acceptance tests. Nothing here calls into the solver or
//! loss code under test.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// `-log softmax` of uniform logits in `[-spread, spread]`.
pub fn softmax_cost(rng: &mut ChaCha8Rng, n: usize, k: usize, spread: f64) -> Array2<f64> {
    let mut c = Array2::zeros((n, k));
    for i in 0..n {
        let logits: Vec<f64> = (0..k).map(|_| rng.random_range(-spread..=spread)).collect();
        let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
        for j in 0..k {
            c[(i, j)] = lse - logits[j];
        }
    }
    c
}

pub fn uniform_cost(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, k), |_| rng.random_range(0.0..1.0))
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        z
    })
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize) -> Array1<f64> {
    Array1::from_shape_fn(d, |_| {
        let z: f64 = rng.sample(rand_distr::StandardNormal);
        z
    })
}

/// Random orthogonal matrix by Gram-Schmidt on a Gaussian matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, d: usize) -> Array2<f64> {
    let a = gaussian_matrix(rng, d, d);
    let mut q = Array2::<f64>::zeros((d, d));
    for j in 0..d {
        let mut v = a.column(j).to_owned();
        for p in 0..j {
            let u = q.column(p).to_owned();
            let proj = u.dot(&v);
            v = v - u * proj;
        }
        let n = v.dot(&v).sqrt();
        q.column_mut(j).assign(&(v / n));
    }
    q
}

/// Minimizer of `γ·KL(z‖b) + ε·KL(z‖y)` over `z > 0`, by bisection on the
/// monotone first-order condition `γ log(z/b) + ε log(z/y) = 0`.
pub fn prox_kl_numeric(y: f64, b: f64, gamma: f64, eps: f64) -> f64 {
    let g = |z: f64| gamma * (z / b).ln() + eps * (z / y).ln();
    let (mut lo, mut hi) = (y.min(b), y.max(b));
    if lo == hi {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Entropic balanced OT on a 2×2 instance: the plan has one free entry, found
/// by bisection on the derivative of `⟨Q,C⟩ + ε Σ Q(log Q - 1)`.
pub fn balanced_2x2(c: &Array2<f64>, a: [f64; 2], b: [f64; 2], eps: f64) -> Array2<f64> {
    let plan = |x: f64| [x, a[0] - x, b[0] - x, a[1] - b[0] + x];
    let d = |x: f64| {
        let q = plan(x);
        c[(0, 0)] - c[(0, 1)] - c[(1, 0)] + c[(1, 1)] + eps * (q[0].ln() - q[1].ln() - q[2].ln() + q[3].ln())
    };
    let (mut lo, mut hi) = ((b[0] - a[1]).max(0.0), a[0].min(b[0]));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if d(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let q = plan(0.5 * (lo + hi));
    Array2::from_shape_vec((2, 2), q.to_vec()).unwrap()
}

/// Harrell C-index by enumerating every ordered pair.
pub fn cindex_brute(time: &[f64], event: &[bool], risk: &[f64]) -> Option<(f64, u64)> {
    let n = time.len();
    let (mut pairs, mut score) = (0u64, 0.0);
    for i in 0..n {
        if !event[i] {
            continue;
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let comparable = time[j] > time[i] || (time[j] == time[i] && !event[j]);
            if !comparable {
                continue;
            }
            pairs += 1;
            if risk[i] > risk[j] {
                score += 1.0;
            } else if risk[i] == risk[j] {
                score += 0.5;
            }
        }
    }
    (pairs > 0).then(|| (score / pairs as f64, pairs))
}

/// Cox negative mean partial log-likelihood by direct double loop.
pub fn cox_naive(time: &[f64], event: &[bool], risk: &[f64]) -> f64 {
    let n = time.len();
    let mut total = 0.0;
    let mut events = 0.0;
    for i in 0..n {
        if !event[i] {
            continue;
        }
        let mut denom = 0.0;
        for j in 0..n {
            if time[j] >= time[i] {
                denom += risk[j].exp();
            }
        }
        total += risk[i] - denom.ln();
        events += 1.0;
    }
    -total / events
}

/// Central differences of `f` at `x` with step `h`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let up = f(&xp);
            xp[i] = x[i] - h;
            let down = f(&xp);
            xp[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a - b‖ / max(‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(floor)
}

/// Log-rank statistic from an explicit 2×2 table at every distinct event time.
pub fn logrank_tables(a: (&[f64], &[bool]), b: (&[f64], &[bool])) -> f64 {
    let mut times: Vec<f64> = a.0.iter().zip(a.1).chain(b.0.iter().zip(b.1)).filter(|(_, &e)| e).map(|(&t, _)| t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let (mut o_minus_e, mut var) = (0.0, 0.0);
    for t in times {
        let at_risk = |g: (&[f64], &[bool])| g.0.iter().filter(|&&x| x >= t).count() as f64;
        let deaths = |g: (&[f64], &[bool])| g.0.iter().zip(g.1).filter(|(&x, &e)| e && x == t).count() as f64;
        let (n1, n2, d1, d2) = (at_risk(a), at_risk(b), deaths(a), deaths(b));
        let (n, d) = (n1 + n2, d1 + d2);
        o_minus_e += d1 - d * n1 / n;
        if n > 1.0 {
            var += d * n1 * n2 * (n - d) / (n * n * (n - 1.0));
        }
    }
    o_minus_e * o_minus_e / var
}

/// `(time, survival, at_risk, events)`
pub type KmRow = (f64, f64, usize, usize);

/// The six-sample table used for Kaplan-Meier checks, with its
/// product-limit table worked out by hand.
pub fn km_fixture() -> (Vec<f64>, Vec<bool>, Vec<KmRow>) {
    let times = vec![2.0, 1.0, 3.0, 2.0, 5.0, 4.0];
    let events = vec![true, true, true, false, true, false];
    let table = vec![
        (1.0, 5.0 / 6.0, 6, 1),
        (2.0, 5.0 / 6.0 * 4.0 / 5.0, 5, 1),
        (3.0, 5.0 / 6.0 * 4.0 / 5.0 * 2.0 / 3.0, 3, 1),
        (4.0, 5.0 / 6.0 * 4.0 / 5.0 * 2.0 / 3.0, 2, 0),
        (5.0, 0.0, 1, 1),
    ];
    (times, events, table)
}

/// Random survival table with integer times in `1..=max_time` (so ties are
/// common), about 35% censoring and risks drawn from a coarse grid.
pub fn survival_fixture(rng: &mut ChaCha8Rng, n: usize, max_time: u32) -> (Vec<f64>, Vec<bool>, Vec<f64>) {
    let time = (0..n).map(|_| rng.random_range(1..=max_time) as f64).collect();
    let event = (0..n).map(|_| rng.random_bool(0.65)).collect();
    let risk = (0..n).map(|_| rng.random_range(-4i32..=4) as f64 * 0.25).collect();
    (time, event, risk)
}
