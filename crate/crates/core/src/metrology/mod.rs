//! Statistical treatment of repeated pressure measurements and the
//! theory-experiment comparison.

mod budget;
mod outliers;
mod pooled;
mod tables;
mod verdict;

pub use budget::{
    budget_to_csv_string, comparison_band, compose_uniform, regime, systematic_error,
    theoretical_error, theoretical_relative_error, total_experimental_error,
    total_experimental_error_pooled, widening_99, ConfidenceBand, ErrorBudget, Regime,
    TheoryError, K_BETA_95, K_BETA_MIXED,
};
pub use outliers::{detect_outlier_sets, BinTest, OutlierReport, SetScore};
pub use pooled::{pooled_random_error, Bin, BinnedData, Neighbors, RandomError};
pub use tables::{grubbs_p_value, CriticalTables};
pub use verdict::{verdict, VerdictReport, VerdictRow};
