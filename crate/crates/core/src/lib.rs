//! Simulation and inference toolkit for mixed-mechanism social contagion.
//!
//! The crate simulates adoption cascades in which every node follows its own
//! contagion mechanism — simple (per-stimulus probability `beta`), complex
//! (adoption threshold `phi`) or spontaneous (background rate `r`) — and then
//! classifies each individual adoption event from the ego-local view only,
//! using either exact/estimated likelihoods or a from-scratch random forest.
//!
//! Modules map onto the pipeline stages:
//!
//! * [`netgen`] — network substrates (ER/BA/WS/SBM/star ensembles, edge lists)
//! * [`contagion`] — synchronous cascade engine with ground-truth firing logs
//! * [`tempnet`] — asynchronous activity-driven engine with aware/detected states
//! * [`features`] — ego observations and the 8 classification features
//! * [`likelihood`] — Bayesian classification and the closed-form accuracy
//! * [`forest`] — decision-tree ensemble, feature importance, subset search
//! * [`ingest`] — timeline corpora, event time, empirical parameter fitting
//! * [`experiments`] — end-to-end drivers for the five experiments
//!
//! Numeric kernels are generic over the scalar type through [`scalar::Real`]
//! (implemented for `f32` and `f64`); the experiment drivers and the CLI run
//! everything at [`Scalar`].

pub mod contagion;
pub mod error;
pub mod experiments;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod likelihood;
pub mod netgen;
pub mod scalar;
pub mod seeds;
pub mod tempnet;

pub use error::{Error, Result};
pub use scalar::Real;

/// Scalar type used by the experiment drivers and the CLI.
pub type Scalar = f64;

/// Feature vector over the default scalar.
pub type FeatureVec = features::FeatureVector<Scalar>;

/// Forest model over the default scalar.
pub type Forest = forest::ForestModel<Scalar>;

/// Cascade record over the default scalar.
pub type Cascade = contagion::CascadeRecord<Scalar>;

/// Bounds the global worker pool used for parallel grid cells and tree
/// training. Calling this more than once keeps the first configuration.
pub fn configure_jobs(n_threads: usize) {
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n_threads)
        .build_global();
}
