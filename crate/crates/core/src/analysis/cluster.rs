//! Clusterings of vector sequences and their quality indices.

use std::fmt;
use std::str::FromStr;

use super::metric::MetricConfig;
use super::AnalysisError;
use crate::machine::{run_rnn, Program, RnnOutcome};
use crate::numeric::{RVector, Rational, VecSeq};

/// Between-cluster distance for the Dunn index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Between {
    /// Closest pair of points across the two clusters.
    #[default]
    MinLink,
    /// Distance between cluster centroids.
    Centroid,
}

/// Within-cluster distance for the Dunn index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Within {
    /// Largest distance between two points of the cluster.
    #[default]
    Diameter,
    /// Mean distance over unordered pairs of distinct points.
    Average,
}

/// How `b(x)` is computed for the silhouette index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SilhouetteVariant {
    /// Minimum distance from `x` to any point of another cluster.
    #[default]
    MinDistance,
    /// Smallest mean distance from `x` to the points of one other cluster.
    NearestMean,
}

macro_rules! parse_modes {
    ($ty:ty, $($text:literal => $val:expr),+) => {
        impl FromStr for $ty {
            type Err = AnalysisError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($text => Ok($val),)+
                    _ => Err(AnalysisError::UnknownMode(s.to_string())),
                }
            }
        }
    };
}

parse_modes!(Between, "min-link" => Between::MinLink, "centroid" => Between::Centroid);
parse_modes!(Within, "diameter" => Within::Diameter, "average" => Within::Average);
parse_modes!(
    SilhouetteVariant,
    "min" => SilhouetteVariant::MinDistance,
    "nearest-mean" => SilhouetteVariant::NearestMean
);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    clusters: Vec<Vec<VecSeq>>,
    metric: MetricConfig,
}

impl Clustering {
    pub fn new(clusters: Vec<Vec<VecSeq>>, metric: MetricConfig) -> Result<Self, AnalysisError> {
        if let Some(i) = clusters.iter().position(|c| c.is_empty()) {
            return Err(AnalysisError::EmptyCluster(i));
        }
        Ok(Clustering { clusters, metric })
    }

    pub fn clusters(&self) -> &[Vec<VecSeq>] {
        &self.clusters
    }

    pub fn metric(&self) -> &MetricConfig {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    fn require_k2(&self) -> Result<(), AnalysisError> {
        if self.clusters.len() < 2 {
            return Err(AnalysisError::TooFewClusters(self.clusters.len()));
        }
        Ok(())
    }

    fn dist(&self, x: &VecSeq, y: &VecSeq) -> Result<Rational, AnalysisError> {
        self.metric.distance(x, y)
    }

    pub fn dunn(&self, between: Between, within: Within) -> Result<Rational, AnalysisError> {
        self.require_k2()?;
        let mut widest = Rational::zero();
        for c in &self.clusters {
            let w = self.within(c, within)?;
            if w > widest {
                widest = w;
            }
        }
        if widest.is_zero() {
            return Err(AnalysisError::DegenerateClustering);
        }
        let centroids = match between {
            Between::Centroid => Some(
                self.clusters
                    .iter()
                    .map(|c| centroid(c))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Between::MinLink => None,
        };
        let mut closest: Option<Rational> = None;
        for i in 0..self.clusters.len() {
            for j in i + 1..self.clusters.len() {
                let b = match &centroids {
                    Some(cs) => self.dist(&cs[i], &cs[j])?,
                    None => self.min_link(&self.clusters[i], &self.clusters[j])?,
                };
                if closest.as_ref().is_none_or(|c| b < *c) {
                    closest = Some(b);
                }
            }
        }
        let closest = closest.expect("k >= 2");
        Ok(closest.checked_div(&widest).expect("nonzero"))
    }

    fn within(&self, c: &[VecSeq], mode: Within) -> Result<Rational, AnalysisError> {
        let mut max = Rational::zero();
        let mut sum = Rational::zero();
        let mut pairs = 0usize;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = self.dist(&c[i], &c[j])?;
                sum = &sum + &d;
                pairs += 1;
                if d > max {
                    max = d;
                }
            }
        }
        Ok(match mode {
            Within::Diameter => max,
            Within::Average if pairs == 0 => Rational::zero(),
            Within::Average => sum.div_count(pairs),
        })
    }

    fn min_link(&self, a: &[VecSeq], b: &[VecSeq]) -> Result<Rational, AnalysisError> {
        let mut best: Option<Rational> = None;
        for x in a {
            for y in b {
                let d = self.dist(x, y)?;
                if best.as_ref().is_none_or(|m| d < *m) {
                    best = Some(d);
                }
            }
        }
        Ok(best.expect("clusters are nonempty"))
    }

    /// Silhouette value of every point, cluster by cluster.
    pub fn silhouette_values(
        &self,
        variant: SilhouetteVariant,
    ) -> Result<Vec<Vec<Rational>>, AnalysisError> {
        self.require_k2()?;
        if let Some(i) = self.clusters.iter().position(|c| c.len() < 2) {
            return Err(AnalysisError::SilhouetteUndefined(i));
        }
        let mut out = Vec::with_capacity(self.clusters.len());
        for (ci, c) in self.clusters.iter().enumerate() {
            let mut values = Vec::with_capacity(c.len());
            for (pi, x) in c.iter().enumerate() {
                let mut own = Rational::zero();
                for (qi, y) in c.iter().enumerate() {
                    if qi != pi {
                        own = &own + &self.dist(x, y)?;
                    }
                }
                let w = own.div_count(c.len() - 1);
                let mut b: Option<Rational> = None;
                for (oi, other) in self.clusters.iter().enumerate() {
                    if oi == ci {
                        continue;
                    }
                    let candidate = match variant {
                        SilhouetteVariant::MinDistance => self.min_link(std::slice::from_ref(x), other)?,
                        SilhouetteVariant::NearestMean => {
                            let mut sum = Rational::zero();
                            for y in other {
                                sum = &sum + &self.dist(x, y)?;
                            }
                            sum.div_count(other.len())
                        }
                    };
                    if b.as_ref().is_none_or(|m| candidate < *m) {
                        b = Some(candidate);
                    }
                }
                let b = b.expect("k >= 2");
                let top = if w > b { w.clone() } else { b.clone() };
                values.push(if top.is_zero() {
                    Rational::zero()
                } else {
                    (&b - &w).checked_div(&top).expect("nonzero")
                });
            }
            out.push(values);
        }
        Ok(out)
    }

    pub fn silhouette(&self) -> Result<Rational, AnalysisError> {
        self.silhouette_with(SilhouetteVariant::MinDistance)
    }

    pub fn silhouette_with(&self, variant: SilhouetteVariant) -> Result<Rational, AnalysisError> {
        let values = self.silhouette_values(variant)?;
        let count: usize = values.iter().map(Vec::len).sum();
        let total = values
            .iter()
            .flatten()
            .fold(Rational::zero(), |acc, v| &acc + v);
        Ok(total.div_count(count))
    }
}

/// Coordinate-wise mean of sequences that share one shape.
pub fn centroid(points: &[VecSeq]) -> Result<VecSeq, AnalysisError> {
    let first = points.first().ok_or(AnalysisError::CentroidUndefined)?;
    let shape = first.shape();
    if points.iter().any(|p| p.shape() != shape) {
        return Err(AnalysisError::CentroidUndefined);
    }
    let vecs = shape
        .iter()
        .enumerate()
        .map(|(m, &n)| {
            let elems = (0..n)
                .map(|k| {
                    points
                        .iter()
                        .fold(Rational::zero(), |acc, p| &acc + &p.vecs()[m].elems()[k])
                        .div_count(points.len())
                })
                .collect();
            RVector::new(elems).expect("arity from shape")
        })
        .collect();
    Ok(VecSeq::new(vecs))
}

/// Why an input was left out of every cluster.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunFailure {
    HaltedMalformed { steps: u64 },
    BudgetExceeded { steps: u64 },
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunFailure::HaltedMalformed { steps } => {
                write!(f, "halted without a sequence after {steps} steps")
            }
            RunFailure::BudgetExceeded { steps } => write!(f, "budget exceeded after {steps} steps"),
        }
    }
}

/// Inputs grouped by the machine's output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extraction {
    pub clustering: Clustering,
    /// Output shared by each cluster, in cluster order.
    pub outputs: Vec<VecSeq>,
    /// Input index and reason for every input without an output.
    pub failures: Vec<(usize, RunFailure)>,
}

/// Runs `p` on every input and groups inputs by output, clusters ordered
/// by first appearance.
pub fn extract_clusters(
    p: &Program,
    inputs: &[VecSeq],
    budget: u64,
    metric: &MetricConfig,
) -> Result<Extraction, AnalysisError> {
    use rayon::prelude::*;
    let outcomes = inputs
        .par_iter()
        .map(|x| run_rnn(p, x, budget))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outputs: Vec<VecSeq> = Vec::new();
    let mut clusters: Vec<Vec<VecSeq>> = Vec::new();
    let mut failures = Vec::new();
    for (i, (x, outcome)) in inputs.iter().zip(outcomes).enumerate() {
        match outcome {
            RnnOutcome::Output { y, .. } => match outputs.iter().position(|o| *o == y) {
                Some(c) => clusters[c].push(x.clone()),
                None => {
                    outputs.push(y);
                    clusters.push(vec![x.clone()]);
                }
            },
            RnnOutcome::HaltedMalformed { steps } => {
                failures.push((i, RunFailure::HaltedMalformed { steps }))
            }
            RnnOutcome::BudgetExceeded { steps } => {
                failures.push((i, RunFailure::BudgetExceeded { steps }))
            }
        }
    }
    Ok(Extraction {
        clustering: Clustering::new(clusters, metric.clone())?,
        outputs,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoodClustering {
    pub score: Rational,
    pub pass: bool,
}

/// Silhouette of the output clustering against threshold `t`.
pub fn good_clustering(
    p: &Program,
    inputs: &[VecSeq],
    t: &Rational,
    budget: u64,
    metric: &MetricConfig,
) -> Result<GoodClustering, AnalysisError> {
    let score = extract_clusters(p, inputs, budget, metric)?
        .clustering
        .silhouette()?;
    let pass = score >= *t;
    Ok(GoodClustering { score, pass })
}
