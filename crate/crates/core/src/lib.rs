//! Entropic optimal transport with KL-relaxed and curriculum-mass marginals,
//! together with the prototype-alignment losses that consume the transport
//! plans and the survival statistics used to evaluate risk predictions.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`). The
//! `*64` / `*32` aliases below fix the precision for callers that do not
//! care about genericity; the command-line front end works in `f64`.
//!
//! Modules:
//!
//! - [`ot`]: generalized scaling, balanced / KL-relaxed / curriculum-mass
//!   solvers, the ρ schedule and a brute-force reference search.
//! - [`together`]: prototype logits, transport costs, plan fusion,
//!   aggregation and the instance soft cross-entropy.
//! - [`apart`]: anchor scores, the two-modality InfoNCE loss and its
//!   closed-form gradient.
//! - [`survival`]: Cox and discrete-time losses, C-index, Kaplan–Meier and
//!   the log-rank test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apart;
pub mod error;
pub mod linalg;
pub mod ot;
pub mod scalar;
pub mod survival;
pub mod together;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type CostMatrix64 = ot::CostMatrix<f64>;
pub type CostMatrix32 = ot::CostMatrix<f32>;
pub type TransportPlan64 = ot::TransportPlan<f64>;
pub type TransportPlan32 = ot::TransportPlan<f32>;
pub type CurriculumPlan64 = ot::CurriculumPlan<f64>;
pub type SolverConfig64 = ot::SolverConfig<f64>;
pub type SolverConfig32 = ot::SolverConfig<f32>;
pub type Marginals64 = ot::Marginals<f64>;
pub type CurriculumSchedule64 = ot::CurriculumSchedule<f64>;
pub type TokenMatrix64 = together::TokenMatrix<f64>;
pub type PrototypeBank64 = together::PrototypeBank<f64>;
pub type FusionWeights64 = together::FusionWeights<f64>;
pub type AnchorPair64 = apart::AnchorPair<f64>;
pub type SurvivalTable64 = survival::SurvivalTable<f64>;
pub type KmCurve64 = survival::KmCurve<f64>;
