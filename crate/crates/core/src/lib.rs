//! Review classification with word-vector features and dependence-driven
//! feature selection.
//!
//! The pipeline: [`corpus`] ingests and rebalances labelled reviews,
//! [`featurize`] turns them into bag-of-words, TF-IDF or averaged word-vector
//! matrices, [`featsel`] reduces dimensionality by greedy RDC/MMD selection
//! or PCA, [`classify`] trains the classifiers and [`evaluate`] runs the
//! stratified cross-validation and builds the reports.

pub mod classify;
pub mod corpus;
pub mod depmeasure;
pub mod embeddings;
pub mod error;
pub mod evaluate;
pub mod featsel;
pub mod featurize;
pub mod linalg;
pub mod seed;
pub mod synth;

pub use error::{Error, Result};
