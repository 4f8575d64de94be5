//! Noncommutative algebra of differential operators in `(t, r, theta)` with
//! exact coefficients and formal cutoff symbols `phi^(j)`.

pub mod diffop;
pub mod model;

pub use diffop::{ad_power, binomial_ad_expand, commutator, DiffOp, Monomial};
pub use model::{build_model, ModelError, ModelFields};
