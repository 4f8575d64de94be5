//! Phase-space strata of the model operators, Poisson-bracket rank tests,
//! and the Hamilton flow of the spiral model.

pub mod flow;
pub mod poly;
pub mod strata;

pub use flow::{
    closed_form_xi, hamilton_rhs, initial_state, integrate, integrate_with_tol, spiral_fit, FlowState,
    Monitors, SpiralFit, Trajectory,
};
pub use poly::{poisson_bracket, Poly6, Var};
pub use strata::{
    classify, classify_exact, symplectic_rank, symplectic_rank_exact, Covector, ExactCovector,
    GeometryError, ModelParams, StratumLabel, SymplecticReport, DEFAULT_TOL,
};
