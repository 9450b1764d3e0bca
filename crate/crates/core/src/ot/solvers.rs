use ndarray::s;

use super::prox::{EqualityProx, WeightedKlProx};
use super::scaling::generalized_scaling;
use super::types::{uniform_vec, CostMatrix, Marginals, SolverConfig, TransportPlan};
use crate::error::{Error, Result};
use crate::scalar::{mass_tol, Scalar};

/// Balanced entropic OT: equality constraints on both marginals.
pub fn solve_balanced<T: Scalar>(
    cost: &CostMatrix<T>,
    marginals: &Marginals<T>,
    cfg: &SolverConfig<T>,
) -> Result<TransportPlan<T>> {
    let mass = marginals.target_mass();
    if (mass - T::one()).abs() > mass_tol::<T>(marginals.target.len()) {
        return Err(Error::invalid("target", format!("balanced OT needs a unit-mass target, got {mass}")));
    }
    let row = EqualityProx::new(marginals.source.clone())?;
    let col = EqualityProx::new(marginals.target.clone())?;
    generalized_scaling(cost, &row, &col, cfg)
}

/// Entropic OT with the row marginal fixed and a `gamma`-weighted KL pull of
/// the column marginal toward `marginals.target`.
pub fn solve_uot_kl<T: Scalar>(
    cost: &CostMatrix<T>,
    marginals: &Marginals<T>,
    cfg: &SolverConfig<T>,
) -> Result<TransportPlan<T>> {
    let row = EqualityProx::new(marginals.source.clone())?;
    let col = WeightedKlProx::uniform_weight(marginals.target.clone(), cfg.gamma)?;
    generalized_scaling(cost, &row, &col, cfg)
}

/// Result of the curriculum-mass solver: the plan over the real columns and
/// the per-row mass routed to the sink.
#[derive(Debug, Clone, PartialEq)]
pub struct CurriculumPlan<T> {
    pub plan: TransportPlan<T>,
    pub sink_mass: Vec<T>,
    pub rho: T,
}

impl<T: Scalar> CurriculumPlan<T> {
    pub fn total_sink(&self) -> T {
        self.sink_mass.iter().fold(T::zero(), |s, &x| s + x)
    }
}

/// Curriculum-mass UOT.
///
/// Appends a zero-cost sink column, sets the column prior to
/// `[ρ/K, …, ρ/K, 1-ρ]` with weights `[γ, …, γ, ι]` and the row marginal to
/// `1/N`, then splits the augmented plan back into the `N×K` plan and the
/// sink column. With `cfg.exact_sink` the sink weight is infinite, so the
/// sink receives exactly `1-ρ` after every column update.
pub fn solve_uot_curriculum<T: Scalar>(
    cost: &CostMatrix<T>,
    rho: T,
    cfg: &SolverConfig<T>,
) -> Result<CurriculumPlan<T>> {
    if cost.is_sink_augmented() {
        return Err(Error::invalid("cost", "cost matrix must not already carry a sink column"));
    }
    if !(rho >= T::zero() && rho <= T::one()) {
        return Err(Error::invalid("rho", format!("must lie in [0, 1], got {rho}")));
    }
    let (n, k) = (cost.nrows(), cost.ncols());
    let augmented = cost.with_sink()?;

    let mut prior = vec![rho / T::from_usize_lossy(k); k];
    prior.push(T::one() - rho);
    let mut weights = vec![cfg.gamma; k];
    weights.push(if cfg.exact_sink { T::infinity() } else { cfg.iota });

    let row = EqualityProx::new(uniform_vec(n))?;
    let col = WeightedKlProx::new(prior, weights)?;
    let full = generalized_scaling(&augmented, &row, &col, cfg)?;

    let sink_mass = full.values.column(k).to_vec();
    let plan = TransportPlan {
        values: full.values.slice(s![.., ..k]).to_owned(),
        converged: full.converged,
        iterations: full.iterations,
        residual: full.residual,
    };
    Ok(CurriculumPlan { plan, sink_mass, rho })
}
