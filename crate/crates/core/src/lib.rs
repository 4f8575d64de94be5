pub mod exactalg;
pub mod opalg;
pub mod localize;
pub mod geometry;
pub mod cutoff;
pub mod cli;
