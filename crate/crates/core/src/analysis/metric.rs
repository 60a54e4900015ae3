//! Distances between vector sequences.

use std::fmt;
use std::str::FromStr;

use super::AnalysisError;
use crate::numeric::{Norm, Rational, VecSeq};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    /// Position-wise maximum of vector distances; shapes must match.
    #[default]
    Perturb,
    /// One minus the longest common subsequence over the longer length.
    Lcs,
    /// Global alignment with fixed indel cost and norm replacement cost.
    Align,
}

impl FromStr for MetricKind {
    type Err = AnalysisError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perturb" => Ok(MetricKind::Perturb),
            "lcs" => Ok(MetricKind::Lcs),
            "align" => Ok(MetricKind::Align),
            _ => Err(AnalysisError::UnknownMetric(s.to_string())),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::Perturb => "perturb",
            MetricKind::Lcs => "lcs",
            MetricKind::Align => "align",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricConfig {
    kind: MetricKind,
    norm: Norm,
    indel: Rational,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            kind: MetricKind::Perturb,
            norm: Norm::Linf,
            indel: Rational::one(),
        }
    }
}

impl MetricConfig {
    pub fn new(kind: MetricKind, norm: Norm, indel: Rational) -> Result<Self, AnalysisError> {
        if indel.is_negative() || indel.is_zero() {
            return Err(AnalysisError::NonPositive("indel cost"));
        }
        Ok(MetricConfig { kind, norm, indel })
    }

    pub fn of_kind(kind: MetricKind) -> Self {
        MetricConfig {
            kind,
            ..Self::default()
        }
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn indel(&self) -> &Rational {
        &self.indel
    }

    /// Same norm and indel cost, different kind.
    pub fn with_kind(&self, kind: MetricKind) -> Self {
        MetricConfig {
            kind,
            ..self.clone()
        }
    }

    pub fn distance(&self, x: &VecSeq, y: &VecSeq) -> Result<Rational, AnalysisError> {
        match self.kind {
            MetricKind::Perturb => d_perturb(x, y, self.norm),
            MetricKind::Lcs => Ok(d_lcs(x, y)),
            MetricKind::Align => Ok(d_align(x, y, &self.indel, self.norm)),
        }
    }
}

pub fn d_perturb(x: &VecSeq, y: &VecSeq, norm: Norm) -> Result<Rational, AnalysisError> {
    if x.shape() != y.shape() {
        return Err(AnalysisError::ShapeMismatch);
    }
    Ok(x.iter()
        .zip(y.iter())
        .map(|(u, v)| u.dist(v, norm).expect("shapes checked"))
        .max()
        .unwrap_or_else(Rational::zero))
}

/// Length of a longest common subsequence under exact vector equality.
pub fn lcs_len(x: &VecSeq, y: &VecSeq) -> usize {
    let (x, y) = (x.vecs(), y.vecs());
    let mut prev = vec![0usize; y.len() + 1];
    let mut row = vec![0usize; y.len() + 1];
    for u in x {
        for (j, v) in y.iter().enumerate() {
            row[j + 1] = if u == v {
                prev[j] + 1
            } else {
                row[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut row);
    }
    prev[y.len()]
}

/// Two empty sequences are at distance 0.
pub fn d_lcs(x: &VecSeq, y: &VecSeq) -> Rational {
    let longest = x.len().max(y.len());
    if longest == 0 {
        return Rational::zero();
    }
    let common = lcs_len(x, y);
    Rational::from_nat(((longest - common) as u64).into()).div_count(longest)
}

/// Replacing a vector by one of a different arity is not an edit.
pub fn d_align(x: &VecSeq, y: &VecSeq, indel: &Rational, norm: Norm) -> Rational {
    let (x, y) = (x.vecs(), y.vecs());
    let mut prev: Vec<Rational> = (0..=y.len())
        .map(|j| indel * &Rational::from(j as i64))
        .collect();
    for (i, u) in x.iter().enumerate() {
        let mut row = Vec::with_capacity(y.len() + 1);
        row.push(indel * &Rational::from(i as i64 + 1));
        for (j, v) in y.iter().enumerate() {
            let mut best = &prev[j + 1] + indel;
            let ins = &row[j] + indel;
            if ins < best {
                best = ins;
            }
            if let Ok(rep) = u.dist(v, norm) {
                let rep = &prev[j] + &rep;
                if rep < best {
                    best = rep;
                }
            }
            row.push(best);
        }
        prev = row;
    }
    prev.pop().expect("nonempty row")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asm::parse_seq_literal;

    fn s(text: &str) -> VecSeq {
        parse_seq_literal(text).unwrap()
    }

    fn q(n: i64, d: u64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn perturb_examples() {
        assert_eq!(d_perturb(&s("[(0),(4)]"), &s("[(1),(4)]"), Norm::Linf).unwrap(), q(1, 1));
        assert_eq!(d_perturb(&s("[(1/2,-3)]"), &s("[(0,-1)]"), Norm::Linf).unwrap(), q(2, 1));
        assert_eq!(d_perturb(&s("[(1/2,-3)]"), &s("[(0,-1)]"), Norm::L1).unwrap(), q(5, 2));
        assert_eq!(d_perturb(&s("[]"), &s("[]"), Norm::Linf).unwrap(), q(0, 1));
        assert_eq!(
            d_perturb(&s("[(1)]"), &s("[(1,2)]"), Norm::Linf),
            Err(AnalysisError::ShapeMismatch)
        );
    }

    #[test]
    fn lcs_examples() {
        assert_eq!(d_lcs(&s("[(1),(2),(3)]"), &s("[(1),(3)]")), q(1, 3));
        assert_eq!(d_lcs(&s("[(1),(2)]"), &s("[(3),(4)]")), q(1, 1));
        assert_eq!(d_lcs(&s("[(1),(2)]"), &s("[(1),(2)]")), q(0, 1));
        assert_eq!(d_lcs(&s("[]"), &s("[]")), q(0, 1));
        assert_eq!(d_lcs(&s("[]"), &s("[(1)]")), q(1, 1));
    }

    #[test]
    fn align_examples() {
        let one = Rational::one();
        assert_eq!(d_align(&s("[(0)]"), &s("[(2)]"), &one, Norm::Linf), q(2, 1));
        assert_eq!(d_align(&s("[(0)]"), &s("[(1/2)]"), &one, Norm::Linf), q(1, 2));
        assert_eq!(d_align(&s("[(1),(5)]"), &s("[(1)]"), &one, Norm::Linf), q(1, 1));
        assert_eq!(d_align(&s("[]"), &s("[]"), &one, Norm::Linf), q(0, 1));
        assert_eq!(d_align(&s("[(0)]"), &s("[(0,0)]"), &q(1, 2), Norm::Linf), q(1, 1));
    }

    #[test]
    fn config_rejects_bad_indel() {
        assert!(MetricConfig::new(MetricKind::Align, Norm::Linf, q(0, 1)).is_err());
        assert!(MetricConfig::new(MetricKind::Align, Norm::Linf, q(-1, 2)).is_err());
        assert_eq!("lcs".parse::<MetricKind>().unwrap(), MetricKind::Lcs);
    }
}
