//! Inference on session panels: linear probability models with clustered
//! errors, exact 2×2 tests, multiplicity adjustments and sample sizes.

pub mod analyze;
pub mod design;
pub mod fisher;
pub mod mht;
pub mod ols;
pub mod power;
pub mod report;

pub use analyze::{
    analyze, balance_fisher, fisher_comparisons, AnalysisSpec, BalanceRow, BalanceSplit, CoefficientRow,
    FisherComparison, InferenceReport,
};
pub use design::{build_design, ClusterLevel, Control, Hypothesis, ModelDesign, Outcome, RegressionSpec};
pub use fisher::{fisher_exact, ContingencyTable2x2, Sidedness};
pub use mht::{fdr_sharpened, fwer_adjust, FamilyMember, FwerResult, ResamplingSpec};
pub use ols::{ols_cluster, Design, OlsFit, OlsOptions};
pub use power::power_two_proportions;

use crate::dataset::DataError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("need at least 2 clusters, found {0}")]
    TooFewClusters(usize),
    #[error("design is rank deficient; collinear columns: {}", .0.join(", "))]
    RankDeficient(Vec<String>),
    #[error("empty cell: {0}")]
    EmptyCell(String),
    #[error("2x2 table has no observations")]
    EmptyTable,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Data(#[from] DataError),
}
