use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mass_tol, Scalar};

/// Dense nonnegative transport cost, rows are sources and columns targets.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    values: Array2<T>,
    sink_augmented: bool,
}

impl<T: Scalar> CostMatrix<T> {
    pub fn new(values: Array2<T>) -> Result<Self> {
        if values.nrows() == 0 || values.ncols() == 0 {
            return Err(Error::invalid("cost", "cost matrix must be non-empty"));
        }
        for ((i, j), &c) in values.indexed_iter() {
            if !c.is_finite() {
                return Err(Error::invalid("cost", format!("entry ({i}, {j}) is not finite")));
            }
            if c < T::zero() {
                return Err(Error::invalid("cost", format!("entry ({i}, {j}) is negative: {c}")));
            }
        }
        Ok(Self {
            values,
            sink_augmented: false,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * k);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != k {
                return Err(Error::invalid("cost", format!("row {i} has {} columns, expected {k}", r.len())));
            }
            flat.extend_from_slice(r);
        }
        let values = Array2::from_shape_vec((rows.len(), k), flat)
            .map_err(|e| Error::invalid("cost", e.to_string()))?;
        Self::new(values)
    }

    /// Append the zero-cost sink column.
    pub fn with_sink(&self) -> Result<Self> {
        if self.sink_augmented {
            return Err(Error::invalid("cost", "cost matrix is already sink-augmented"));
        }
        let (n, k) = self.values.dim();
        let mut values = Array2::zeros((n, k + 1));
        values.slice_mut(ndarray::s![.., ..k]).assign(&self.values);
        Ok(Self {
            values,
            sink_augmented: true,
        })
    }

    pub fn values(&self) -> ArrayView2<'_, T> {
        self.values.view()
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    pub fn is_sink_augmented(&self) -> bool {
        self.sink_augmented
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Source and target marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginals<T> {
    pub source: Vec<T>,
    pub target: Vec<T>,
}

impl<T: Scalar> Marginals<T> {
    /// `a` must be strictly positive and sum to one; `b` must be nonnegative.
    pub fn new(source: Vec<T>, target: Vec<T>) -> Result<Self> {
        if source.is_empty() || target.is_empty() {
            return Err(Error::invalid("marginals", "marginals must be non-empty"));
        }
        if let Some(i) = source.iter().position(|&x| !(x > T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("source", format!("entry {i} is not strictly positive")));
        }
        let sum = source.iter().fold(T::zero(), |s, &x| s + x);
        if (sum - T::one()).abs() > mass_tol::<T>(source.len()) {
            return Err(Error::invalid("source", format!("sums to {sum}, expected 1")));
        }
        if let Some(i) = target.iter().position(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::invalid("target", format!("entry {i} is negative or not finite")));
        }
        Ok(Self { source, target })
    }

    /// `a = 1/n`, `b = 1/k`.
    pub fn uniform(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::invalid("marginals", "marginals must be non-empty"));
        }
        Self::new(uniform_vec(n), uniform_vec(k))
    }

    pub fn target_mass(&self) -> T {
        self.target.iter().fold(T::zero(), |s, &x| s + x)
    }
}

pub(crate) fn uniform_vec<T: Scalar>(n: usize) -> Vec<T> {
    vec![T::one() / T::from_usize_lossy(n); n]
}

/// A transport plan with its convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T> {
    pub values: Array2<T>,
    pub converged: bool,
    pub iterations: usize,
    /// Largest violation of a hard marginal constraint at return.
    pub residual: T,
}

impl<T: Scalar> TransportPlan<T> {
    pub fn row_sums(&self) -> Vec<T> {
        self.values.sum_axis(Axis(1)).to_vec()
    }

    pub fn col_sums(&self) -> Vec<T> {
        self.values.sum_axis(Axis(0)).to_vec()
    }

    pub fn total_mass(&self) -> T {
        self.values.sum()
    }

    pub fn min_entry(&self) -> T {
        self.values.iter().fold(T::infinity(), |m, &x| m.min(x))
    }
}

/// Scaling-loop parameters.
///
/// `exact_sink = true` gives the sink column an infinite KL weight (the
/// proximal step projects exactly onto its prior); `false` uses the finite
/// weight `iota`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig<T> {
    pub epsilon: T,
    pub gamma: T,
    pub iota: T,
    pub max_iters: usize,
    pub tol: T,
    pub log_domain: bool,
    #[serde(default = "default_true")]
    pub exact_sink: bool,
}

fn default_true() -> bool {
    true
}

impl<T: Scalar> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(0.05),
            gamma: T::lit(0.1),
            iota: T::lit(1e9),
            max_iters: 1000,
            tol: T::lit(1e-9),
            log_domain: true,
            exact_sink: true,
        }
    }
}

impl<T: Scalar> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) || !self.epsilon.is_finite() {
            return Err(Error::invalid("epsilon", format!("must be > 0, got {}", self.epsilon)));
        }
        if !(self.gamma > T::zero()) {
            return Err(Error::invalid("gamma", format!("must be > 0, got {}", self.gamma)));
        }
        if !(self.iota >= T::lit(1e6) * self.gamma) {
            return Err(Error::invalid(
                "iota",
                format!("must be >= 1e6 * gamma, got {} with gamma {}", self.iota, self.gamma),
            ));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::invalid("tol", format!("must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters", "must be at least 1"));
        }
        Ok(())
    }

    pub fn with_epsilon(mut self, epsilon: T) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_gamma(mut self, gamma: T) -> Self {
        self.gamma = gamma;
        if self.iota < T::lit(1e6) * gamma {
            self.iota = T::lit(1e6) * gamma;
        }
        self
    }

    pub fn with_log_domain(mut self, on: bool) -> Self {
        self.log_domain = on;
        self
    }

    pub fn with_max_iters(mut self, n: usize) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }
}
