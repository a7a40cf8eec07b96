//! Simulation toolkit for two-stage adaptive optimal designs under nonlinear
//! regression with independent normal errors.
//!
//! A first cohort is dosed at a fixed x₁; the second-stage dose is chosen
//! from stage-1 data to maximize the information gained about the unknown
//! parameter, which ties the two stages together. This crate computes the
//! maximum likelihood estimator of θ from both stages, normalizes it with
//! five information measures (expected/Fisher, observed, subject-wise and
//! stage-wise incremental observed, incremental expected), and studies the
//! normalized statistics by Monte Carlo: tail probabilities against nominal
//! normal levels, and integrated absolute CDF distances from the standard
//! normal.
//!
//! Module map:
//!
//! * [`models`]: the four mean-function families behind one interface.
//! * [`likelihood`]: two-stage log-likelihood, score, full-data MLE.
//! * [`information`]: the random information measures and the limit scale.
//! * [`design`]: adaptive dose rule, design Fisher information, optimal n₁.
//! * [`montecarlo`]: deterministic parallel replication engine.
//! * [`analysis`]: tail tables, CDF distances, KS checks.
//!
//! ```
//! use twostage::design::{DesignConfig, N1Policy};
//! use twostage::models::{DoseInterval, MeanModel, ModelFamily};
//! use twostage::montecarlo::{run_experiment, RunOptions};
//!
//! let interval = DoseInterval::new(0.25, 4.0).unwrap();
//! let model = MeanModel::for_interval(ModelFamily::ExponentialScale, interval).unwrap();
//! let config = DesignConfig {
//!     x1: 2.0,
//!     interval,
//!     n1: N1Policy::Fixed(10),
//!     n: 60,
//!     sigma: 0.5,
//!     theta_true: 1.0,
//! };
//! let out = run_experiment(&model, &config, 100, 42, &RunOptions::default()).unwrap();
//! assert_eq!(out.results.len(), 100);
//! ```

pub mod analysis;
pub mod design;
pub mod error;
pub mod information;
pub mod likelihood;
pub mod models;
pub mod montecarlo;
pub mod numeric;
pub mod rng;

pub use error::{Error, Result};

// The chapters of the guide in book/ compile and run as doc-tests, keeping
// the narrative snippets in sync with the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(ModelAndLikelihood, "../../../book/src/model-and-likelihood.md");
    chapter!(InformationMeasures, "../../../book/src/information-measures.md");
    chapter!(AdaptiveDesign, "../../../book/src/adaptive-design.md");
    chapter!(SimulatingExperiments, "../../../book/src/simulating-experiments.md");
    chapter!(AnalyzingResults, "../../../book/src/analyzing-results.md");
    chapter!(CommandLine, "../../../book/src/command-line.md");
}
