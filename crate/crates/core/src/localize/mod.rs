//! Localizing operators `N_j`, localized powers `R^p_phi`, and exact checks
//! of the commutator identities they are built to satisfy.

pub mod ops;
pub mod verify;

pub use ops::{build_n, build_rp_phi, LocalizeError, LocalizedPower, Localizer, LocalizerN};
pub use verify::{
    bound_scan_a, extract_delta, verify_gamma_expansion, verify_x2_localizer, verify_stirling_identity,
    verify_x2_bracket, BoundScan, DeltaReport, GammaReport, IdentityReport, StirlingReport,
};
