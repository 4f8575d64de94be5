//! Exact rational arithmetic, truncated power series, and the scalar
//! coefficient families behind the localizing operators.
//!
//! Nothing in here touches floating point except the explicitly lossy
//! reporting helpers in [`rational`].

pub mod coeffs;
pub mod rational;
pub mod series;

pub use coeffs::{
    a_entry_generating, a_table_generating, a_table_recurrence, bernoulli_generator,
    delta_closed_form, matrix_inverse_coeffs, stirling_b, CoeffError, CoeffTable, Provenance,
    SignConvention, DEFAULT_JMAX,
};
pub use rational::{int, parse_fraction, rat, to_fraction_string, Rational};
pub use series::{Series, SeriesError};
