//! KL proximal maps of the marginal penalties.
//!
//! For a penalty `F(x; z)` the map is `argmin_{x >= 0} F(x; z) + ε·KL(x ‖ y)`.
//! An equality constraint projects onto `z` regardless of `y`; a weighted KL
//! penalty `Σ γ_i KL(x_i ‖ b_i)` has the closed form `b_i^{f_i} y_i^{1-f_i}`
//! with `f_i = γ_i / (γ_i + ε)`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A marginal penalty that the scaling loop can apply through its KL prox.
pub trait MarginalProx<T: Scalar> {
    fn dim(&self) -> usize;

    /// Proximal map evaluated at `y > 0`.
    fn prox(&self, y: &[T], epsilon: T) -> Vec<T>;

    /// Same map in log coordinates: takes `ln y`, returns `ln prox(y)`.
    fn log_prox(&self, log_y: &[T], epsilon: T) -> Vec<T>;

    /// Largest deviation of `marginal` from the hard-constrained entries.
    /// Soft entries contribute nothing.
    fn violation(&self, marginal: &[T]) -> T;
}

/// Equality constraint `x = a`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityProx<T> {
    target: Vec<T>,
}

impl<T: Scalar> EqualityProx<T> {
    pub fn new(target: Vec<T>) -> Result<Self> {
        if let Some(i) = target.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("target", format!("entry {i} is negative or not finite")));
        }
        Ok(Self { target })
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }
}

impl<T: Scalar> MarginalProx<T> for EqualityProx<T> {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn prox(&self, _y: &[T], _epsilon: T) -> Vec<T> {
        self.target.clone()
    }

    fn log_prox(&self, _log_y: &[T], _epsilon: T) -> Vec<T> {
        self.target.iter().map(|&a| a.ln()).collect()
    }

    fn violation(&self, marginal: &[T]) -> T {
        max_abs_diff(marginal, &self.target)
    }
}

/// Weighted KL penalty `Σ γ_i KL(x_i ‖ b_i)`. An infinite weight turns
/// entry `i` into a hard equality.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedKlProx<T> {
    target: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> WeightedKlProx<T> {
    pub fn new(target: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if target.len() != weights.len() {
            return Err(Error::dims("weighted KL weights", target.len(), weights.len()));
        }
        if let Some(i) = target.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("target", format!("entry {i} is negative or not finite")));
        }
        if let Some(i) = weights.iter().position(|&g| !(g >= T::zero())) {
            return Err(Error::invalid("gamma", format!("weight {i} is negative or NaN")));
        }
        Ok(Self { target, weights })
    }

    /// Same weight `gamma` on every entry.
    pub fn uniform_weight(target: Vec<T>, gamma: T) -> Result<Self> {
        let weights = vec![gamma; target.len()];
        Self::new(target, weights)
    }

    pub fn target(&self) -> &[T] {
        &self.target
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }
}

/// Exponent `f = γ / (γ + ε)`, exactly 1 for an infinite weight.
#[inline]
fn exponent<T: Scalar>(gamma: T, epsilon: T) -> T {
    if gamma.is_infinite() {
        T::one()
    } else {
        gamma / (gamma + epsilon)
    }
}

#[inline]
fn weighted_kl_entry<T: Scalar>(y: T, b: T, f: T) -> T {
    if f == T::one() {
        b
    } else if f == T::zero() {
        y
    } else if b == T::zero() {
        T::zero()
    } else {
        b.powf(f) * y.powf(T::one() - f)
    }
}

#[inline]
fn weighted_kl_log_entry<T: Scalar>(log_y: T, b: T, f: T) -> T {
    if f == T::one() {
        b.ln()
    } else if f == T::zero() {
        log_y
    } else if b == T::zero() {
        T::neg_infinity()
    } else {
        f * b.ln() + (T::one() - f) * log_y
    }
}

impl<T: Scalar> MarginalProx<T> for WeightedKlProx<T> {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn prox(&self, y: &[T], epsilon: T) -> Vec<T> {
        y.iter()
            .zip(&self.target)
            .zip(&self.weights)
            .map(|((&y, &b), &g)| weighted_kl_entry(y, b, exponent(g, epsilon)))
            .collect()
    }

    fn log_prox(&self, log_y: &[T], epsilon: T) -> Vec<T> {
        log_y
            .iter()
            .zip(&self.target)
            .zip(&self.weights)
            .map(|((&ly, &b), &g)| weighted_kl_log_entry(ly, b, exponent(g, epsilon)))
            .collect()
    }

    fn violation(&self, marginal: &[T]) -> T {
        marginal
            .iter()
            .zip(&self.target)
            .zip(&self.weights)
            .filter(|(_, &g)| g.is_infinite())
            .fold(T::zero(), |m, ((&x, &b), _)| m.max((x - b).abs()))
    }
}

pub(crate) fn max_abs_diff<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |m, (&p, &q)| m.max((p - q).abs()))
}

fn check_positive<T: Scalar>(y: &[T]) -> Result<()> {
    match y.iter().position(|&v| !(v > T::zero())) {
        Some(i) => Err(Error::invalid("y", format!("entry {i} is not strictly positive"))),
        None => Ok(()),
    }
}

/// Prox of the equality indicator: returns `a`.
pub fn prox_equality<T: Scalar>(y: &[T], a: &[T]) -> Result<Vec<T>> {
    if y.len() != a.len() {
        return Err(Error::dims("prox_equality", a.len(), y.len()));
    }
    check_positive(y)?;
    Ok(a.to_vec())
}

/// Prox of the weighted KL penalty: `b^f ∘ y^(1-f)`, `f = γ/(γ+ε)`.
///
/// Weights may be `+inf`, giving `f = 1` and an exact projection onto `b`.
pub fn prox_weighted_kl<T: Scalar>(y: &[T], b: &[T], gamma: &[T], epsilon: T) -> Result<Vec<T>> {
    if !(epsilon > T::zero()) {
        return Err(Error::invalid("epsilon", format!("must be > 0, got {epsilon}")));
    }
    if y.len() != b.len() {
        return Err(Error::dims("prox_weighted_kl target", y.len(), b.len()));
    }
    check_positive(y)?;
    let p = WeightedKlProx::new(b.to_vec(), gamma.to_vec())?;
    Ok(p.prox(y, epsilon))
}
