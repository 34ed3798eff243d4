//! Significance tests for deterministic predictions.

pub mod binomial;
pub mod permutation;
pub mod poibin;
pub mod rscore;

pub use binomial::{alarm_measure_pi, binomial_tail_pvalue};
pub use permutation::{
    exact_permutation_pvalue, permutation_test, permutation_test_fixed, AlarmHandling,
    PredictionParams, TestConfig, TestReport,
};
pub use poibin::{poisson_binomial_pmf, poisson_binomial_pvalue, PoiBinMethod};
pub use rscore::{
    r_score, r_score_baseline, r_score_ratio, BaselineInputs, BaselineReport, BaselineScheme,
    GridOutcome,
};
