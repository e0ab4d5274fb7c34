//! Non-parametric dependence and discrepancy statistics.

mod mmd;
mod rdc;

pub(crate) use mmd::gaussian;
pub use mmd::{median_heuristic_sigma, mmd, mmd_squared, permutation_null, MmdConfig, SigmaPolicy};
pub use rdc::{
    copula_transform, largest_canonical_correlation, random_projection, rdc, rdc_from_copulas, side_configs,
    Projection, RdcConfig,
};
