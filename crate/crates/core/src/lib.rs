//! Compressive classification of Gaussian mixture sources.
//!
//! Sources are mixtures of (possibly low-rank) Gaussians observed through a
//! linear kernel in white noise. The crate provides the MAP classifier, an upper
//! bound on its error with low-noise and high-noise asymptotics, kernel designs
//! that maximize the diversity-order, and a Monte Carlo harness.

pub mod bounds;
pub mod classifier;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod measurement;
pub mod montecarlo;
pub mod rng;
pub mod source;

pub use bounds::{
    asymptotic_pair, asymptotic_pair_source, averaged_high_noise, bhattacharyya_exponent, fit_asymptote,
    high_noise_pair, log_pair_upper_bound, mean_aligned_kernel, multiclass_asymptotics, pair_upper_bound,
    union_upper_bound, AsymptoteFit, AsymptoticProfile, BoundEvaluator, Diversity, HighNoiseExpansion,
    PredictedProfile,
};
pub use classifier::{classify, log_posteriors, MapClassifier, NoisyObservation};
pub use error::{Error, Result};
pub use linalg::{Mat, Vector};
pub use measurement::{
    design_for_source, design_multi_nonzero_mean, design_multi_zero_mean, design_two_nonzero_mean,
    design_two_zero_mean, projected_pair_geometry, random_gaussian_kernel, DesignRecipe, MeasurementKernel,
    ProjectedPairGeometry, Provenance,
};
pub use montecarlo::{
    estimate_perr, oracle_perr_two_class, sigma2_from_snr_db, snr_sweep, ErrorEstimate, SnrGrid, SweepRecord,
    SweepResult,
};
pub use source::{ClassModel, GmmSource, PairGeometry};
