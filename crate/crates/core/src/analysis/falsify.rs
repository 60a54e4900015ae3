//! Seeded search for discontinuities of a machine's input/output function.
//!
//! Finding nothing proves nothing: robustness is undecidable in general,
//! and the search only ever sees finitely many pairs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metric::{d_align, d_perturb, MetricConfig, MetricKind};
use super::AnalysisError;
use crate::machine::{run_rnn, Program, RnnOutcome};
use crate::numeric::{RVector, Rational, VecSeq};

/// How sample pairs are drawn.
///
/// Each sample is a random center (length `1..=max_len`, one common arity
/// `1..=max_arity`, numerators in `-magnitude..=magnitude`, denominators
/// in `1..=magnitude`) and a copy with one coordinate moved by
/// `delta / 2^j` for a random `j` in `0..=log_range`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub max_len: usize,
    pub max_arity: usize,
    pub magnitude: u64,
    pub log_range: u32,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            seed: 0,
            count: 1000,
            max_len: 2,
            max_arity: 2,
            magnitude: 4,
            log_range: 8,
        }
    }
}

/// Output distance; outputs of different shapes are infinitely far apart
/// under the position-wise metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutputDistance {
    Finite(Rational),
    ShapeMismatch,
}

impl OutputDistance {
    pub fn at_least(&self, eps: &Rational) -> bool {
        match self {
            OutputDistance::Finite(d) => d >= eps,
            OutputDistance::ShapeMismatch => true,
        }
    }
}

impl fmt::Display for OutputDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputDistance::Finite(d) => write!(f, "{d}"),
            OutputDistance::ShapeMismatch => f.write_str("shape mismatch"),
        }
    }
}

/// Two close inputs with far-apart outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobustnessWitness {
    /// Position of the pair in the sampler's sequence.
    pub sample: usize,
    pub x: VecSeq,
    pub x_prime: VecSeq,
    pub y: VecSeq,
    pub y_prime: VecSeq,
    pub din: Rational,
    pub dout: OutputDistance,
    pub steps: (u64, u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FalsifyReport {
    pub samples: usize,
    /// Pairs with input distance below delta.
    pub candidates: usize,
    /// Candidates where both runs produced an output.
    pub compared: usize,
    /// Candidates where at least one run did not produce an output.
    pub no_output: usize,
    /// Largest finite output distance seen among compared pairs.
    pub max_dout: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FalsifyResult {
    Witness(RobustnessWitness),
    Exhausted(FalsifyReport),
}

struct Candidate {
    sample: usize,
    x: VecSeq,
    x_prime: VecSeq,
    din: Rational,
}

enum Eval {
    NoOutput,
    Compared {
        y: VecSeq,
        y_prime: VecSeq,
        dout: OutputDistance,
        steps: (u64, u64),
    },
}

fn output_distance(metric: &MetricConfig, y: &VecSeq, y2: &VecSeq) -> OutputDistance {
    match metric.kind() {
        MetricKind::Perturb | MetricKind::Lcs => match d_perturb(y, y2, metric.norm()) {
            Ok(d) => OutputDistance::Finite(d),
            Err(_) => OutputDistance::ShapeMismatch,
        },
        MetricKind::Align => OutputDistance::Finite(d_align(y, y2, metric.indel(), metric.norm())),
    }
}

fn random_rational(rng: &mut ChaCha8Rng, magnitude: u64) -> Rational {
    let m = magnitude.min(i64::MAX as u64) as i64;
    let num = rng.gen_range(-m..=m);
    let den = rng.gen_range(1..=magnitude.max(1));
    Rational::new(num, den).expect("positive denominator")
}

fn draw(rng: &mut ChaCha8Rng, s: &Sampler, delta: &Rational) -> (VecSeq, VecSeq) {
    let len = rng.gen_range(1..=s.max_len.max(1));
    let arity = rng.gen_range(1..=s.max_arity.max(1));
    let vecs = (0..len)
        .map(|_| {
            let elems = (0..arity).map(|_| random_rational(rng, s.magnitude)).collect();
            RVector::new(elems).expect("arity >= 1")
        })
        .collect();
    let x = VecSeq::new(vecs);
    let pos = rng.gen_range(0..len);
    let k = rng.gen_range(0..arity);
    let j = rng.gen_range(0..=s.log_range);
    let step = delta.halve_times(j);
    let old = &x.vecs()[pos].elems()[k];
    let moved = if rng.gen_bool(0.5) { old + &step } else { old - &step };
    let x_prime = x.with_elem(pos, k, moved);
    (x, x_prime)
}

fn evaluate(p: &Program, c: &Candidate, metric: &MetricConfig, budget: u64) -> Result<Eval, AnalysisError> {
    let a = run_rnn(p, &c.x, budget)?;
    let b = run_rnn(p, &c.x_prime, budget)?;
    Ok(match (a, b) {
        (RnnOutcome::Output { y, steps: s1 }, RnnOutcome::Output { y: y2, steps: s2 }) => {
            let dout = output_distance(metric, &y, &y2);
            Eval::Compared {
                y,
                y_prime: y2,
                dout,
                steps: (s1, s2),
            }
        }
        _ => Eval::NoOutput,
    })
}

const CHUNK: usize = 256;

/// Searches `sampler.count` seeded pairs for inputs closer than `delta`
/// whose outputs are at least `eps` apart. The first witness in sampler
/// order is returned after being re-run and re-checked.
pub fn falsify_robustness(
    p: &Program,
    metric: &MetricConfig,
    eps: &Rational,
    delta: &Rational,
    sampler: &Sampler,
    budget: u64,
) -> Result<FalsifyResult, AnalysisError> {
    if eps.is_negative() || eps.is_zero() {
        return Err(AnalysisError::NonPositive("epsilon"));
    }
    if delta.is_negative() || delta.is_zero() {
        return Err(AnalysisError::NonPositive("delta"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut report = FalsifyReport {
        samples: sampler.count,
        ..FalsifyReport::default()
    };
    let mut candidates = Vec::new();
    for sample in 0..sampler.count {
        let (x, x_prime) = draw(&mut rng, sampler, delta);
        let din = metric.distance(&x, &x_prime)?;
        if din < *delta {
            candidates.push(Candidate {
                sample,
                x,
                x_prime,
                din,
            });
        }
    }
    report.candidates = candidates.len();

    for chunk in candidates.chunks(CHUNK) {
        let evals = chunk
            .par_iter()
            .map(|c| evaluate(p, c, metric, budget))
            .collect::<Result<Vec<_>, _>>()?;
        for (c, eval) in chunk.iter().zip(evals) {
            match eval {
                Eval::NoOutput => report.no_output += 1,
                Eval::Compared {
                    y,
                    y_prime,
                    dout,
                    steps,
                } => {
                    report.compared += 1;
                    if dout.at_least(eps) {
                        let w = RobustnessWitness {
                            sample: c.sample,
                            x: c.x.clone(),
                            x_prime: c.x_prime.clone(),
                            y,
                            y_prime,
                            din: c.din.clone(),
                            dout,
                            steps,
                        };
                        verify(p, metric, eps, delta, budget, &w)?;
                        return Ok(FalsifyResult::Witness(w));
                    }
                    if let OutputDistance::Finite(d) = dout {
                        if report.max_dout.as_ref().is_none_or(|m| d > *m) {
                            report.max_dout = Some(d);
                        }
                    }
                }
            }
        }
    }
    Ok(FalsifyResult::Exhausted(report))
}

/// Re-runs both inputs and re-checks every claim of the witness.
pub fn verify(
    p: &Program,
    metric: &MetricConfig,
    eps: &Rational,
    delta: &Rational,
    budget: u64,
    w: &RobustnessWitness,
) -> Result<(), AnalysisError> {
    let din = metric.distance(&w.x, &w.x_prime)?;
    let fresh = |x: &VecSeq| run_rnn(p, x, budget).map(|o| o.output().cloned());
    let (y, y2) = (fresh(&w.x)?, fresh(&w.x_prime)?);
    let ok = din == w.din
        && din < *delta
        && y.as_ref() == Some(&w.y)
        && y2.as_ref() == Some(&w.y_prime)
        && output_distance(metric, &w.y, &w.y_prime) == w.dout
        && w.dout.at_least(eps);
    if ok {
        Ok(())
    } else {
        Err(AnalysisError::VerificationFailed(w.sample))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(n: i64, d: u64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn step_has_a_witness() {
        let sampler = Sampler {
            seed: 7,
            count: 2000,
            max_len: 1,
            max_arity: 1,
            ..Sampler::default()
        };
        let metric = MetricConfig::default();
        let r = falsify_robustness(&fixtures::step_machine(), &metric, &q(1, 1), &q(1, 100), &sampler, 10_000).unwrap();
        let FalsifyResult::Witness(w) = r else {
            panic!("expected a witness, got {r:?}")
        };
        assert!(w.din < q(1, 100));
        assert_eq!(w.dout, OutputDistance::Finite(q(1, 1)));
        let again = falsify_robustness(&fixtures::step_machine(), &metric, &q(1, 1), &q(1, 100), &sampler, 10_000).unwrap();
        assert_eq!(again, FalsifyResult::Witness(w));
    }

    #[test]
    fn double_is_exhausted() {
        let sampler = Sampler {
            count: 500,
            ..Sampler::default()
        };
        let r = falsify_robustness(&fixtures::double(), &MetricConfig::default(), &q(1, 1), &q(1, 4), &sampler, 10_000).unwrap();
        let FalsifyResult::Exhausted(report) = r else {
            panic!("unexpected witness {r:?}")
        };
        assert_eq!(report.samples, 500);
        assert!(report.compared > 0);
        assert!(report.max_dout.unwrap() < q(1, 1));
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        let s = Sampler::default();
        let m = MetricConfig::default();
        let p = fixtures::double();
        assert!(falsify_robustness(&p, &m, &q(0, 1), &q(1, 2), &s, 10).is_err());
        assert!(falsify_robustness(&p, &m, &q(1, 1), &q(-1, 2), &s, 10).is_err());
    }
}
