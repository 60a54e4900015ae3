//! Metrics on vector sequences, cluster-quality indices, and the
//! robustness falsifier.

mod cluster;
mod falsify;
mod metric;

use thiserror::Error;

use crate::machine::MachineError;

pub use cluster::{
    centroid, extract_clusters, good_clustering, Between, Clustering, Extraction, GoodClustering,
    RunFailure, SilhouetteVariant, Within,
};
pub use falsify::{
    falsify_robustness, verify, FalsifyReport, FalsifyResult, OutputDistance, RobustnessWitness,
    Sampler,
};
pub use metric::{d_align, d_lcs, d_perturb, lcs_len, MetricConfig, MetricKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("sequences differ in shape")]
    ShapeMismatch,
    #[error("every cluster has zero spread, so the index is undefined")]
    DegenerateClustering,
    #[error("cluster {0} has a single point; silhouette needs at least two per cluster")]
    SilhouetteUndefined(usize),
    #[error("need at least two clusters, found {0}")]
    TooFewClusters(usize),
    #[error("cluster {0} is empty")]
    EmptyCluster(usize),
    #[error("centroid needs points of one common shape")]
    CentroidUndefined,
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("unknown metric `{0}` (expected perturb, lcs or align)")]
    UnknownMetric(String),
    #[error("unknown mode `{0}`")]
    UnknownMode(String),
    #[error("witness for sample {0} did not survive re-verification")]
    VerificationFailed(usize),
    #[error(transparent)]
    Machine(#[from] MachineError),
}
