//! Entropic scaling solvers for optimal transport.
//!
//! All solvers are instances of one generalized scaling loop
//! ([`generalized_scaling`]) parameterized by a KL proximal map on each
//! side. The row side is always the equality constraint `Q·1 = a`; the
//! column side is either another equality (balanced OT) or a weighted KL
//! penalty (unbalanced OT, curriculum mass).

mod oracle;
mod prox;
mod scaling;
mod schedule;
mod solvers;
mod types;

pub use oracle::{curriculum_objective, oracle_uot_curriculum, OracleResult};
pub use prox::{prox_equality, prox_weighted_kl, EqualityProx, MarginalProx, WeightedKlProx};
pub use scaling::generalized_scaling;
pub use schedule::{rho_schedule, CurriculumSchedule};
pub use solvers::{solve_balanced, solve_uot_curriculum, solve_uot_kl, CurriculumPlan};
pub use types::{CostMatrix, Marginals, SolverConfig, TransportPlan};
