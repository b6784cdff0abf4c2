//! Occurrence counts per cohort, Kruskal-Wallis and Dunn's post-hoc test.

mod cohort;
mod kruskal;
pub mod special;

use thiserror::Error;

pub use cohort::{
    cohort_of, compare_cohorts, count_c, count_l, ActivityComparison, Axis, CohortKey,
    CohortReport, COHORT_ACTIVITIES, DEFAULT_ALPHA,
};
pub use kruskal::{dunn_bonferroni, kruskal_wallis, DunnMatrix, KruskalResult};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("at least two groups are required, got {0}")]
    TooFewGroups(usize),
    #[error("group {0} is empty")]
    EmptyGroup(usize),
    #[error("at least three observations are required, got {0}")]
    TooFewObservations(usize),
    #[error("observations must be finite")]
    NonFinite,
    #[error("unknown comorbidity axis '{0}' (expected diabetes or ckd)")]
    UnknownAxis(String),
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
}
