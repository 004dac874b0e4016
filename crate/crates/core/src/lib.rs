//! Graph-aware logistic regression (GLR) and non-neural node classification
//! baselines over sparse attributed graphs, with homophily analytics and a
//! stratified k-fold benchmark harness.
pub mod cli;
pub mod dataset_io;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod homophily;
pub mod models;
pub mod optimizer;
pub use error::{GlrError, Result};
