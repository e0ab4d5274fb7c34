//! Dimensionality reduction: greedy dependence-maximizing selection and a
//! PCA baseline.

mod greedy;
mod pca;

pub use greedy::{
    apply_selection, candidate_seed, greedy_select, mmd_label_score, rdc_label_score, Scorer, SelectionMethod,
    SelectionResult,
};
pub use pca::{pca_fit, PcaModel};
