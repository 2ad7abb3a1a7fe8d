//! Counterfactual evaluation of feature-attribution explainers.
//!
//! Given a black-box classifier and a set of explanation methods, this crate
//! measures how faithful each method's explanations are by editing the
//! explained features and watching the prediction:
//!
//! - **Counterfactual search** finds an edit restricted to the explained
//!   features that flips the predicted label - exhaustively over categorical
//!   vocabularies ([`counterfactual::discrete_search`]) or by gradient
//!   descent in embedding space ([`counterfactual::continuous_search`]).
//! - **Metrics** score the outcome: Validity (flip rate), Proximity (edit
//!   distance), their ratio CES, softened probability-drop variants, and the
//!   erasure baselines Comprehensiveness, Sufficiency, and DFR
//!   ([`metrics`]).
//! - **Ground truth** comes from a whitebox logistic regression whose
//!   per-instance feature effects are known ([`blackbox`]); explainer
//!   rankings are compared against it with Kendall's tau and Spearman's rho
//!   ([`rankstats`]).
//!
//! The [`pipeline`] module wires these into reproducible end-to-end runs
//! (train, explain, evaluate) driven by a TOML config; every randomized
//! stage draws from a stream derived from the global seed, so a config
//! reproduces its report byte for byte.
//!
//! See the crate examples for runnable walkthroughs of each capability.

pub mod acceptance;
pub mod blackbox;
pub mod counterfactual;
pub mod dataset;
mod error;
pub mod explainers;
pub mod metrics;
pub mod pipeline;
pub mod rankstats;
pub mod report;
pub mod seed;

pub use error::{Error, Result};
