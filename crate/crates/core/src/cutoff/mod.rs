//! Nested bands, box-convolution cutoffs with exact derivative bounds, and
//! the product bound that ties the bands together.

pub mod bands;
pub mod bounds;
pub mod kernel;
pub mod product;

pub use bands::{build_bands, Band, BandFamily, BandSummary, CutoffError};
pub use bounds::{
    default_interval, derivative_bound_check, finite_difference_check, grid_stability, sample_rows, BoundCheck,
    FdCheck, GridPoint, GridReport, ProfileEntry,
};
pub use kernel::{build_cutoff, build_pair, CutoffSummary, EhrenpreisCutoff};
pub use product::{rate_convergence, recursion_product, Convergence, ProductBound, RatePoint};
