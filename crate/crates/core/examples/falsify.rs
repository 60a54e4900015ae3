//! Searches for a discontinuity of STEP and fails to find one for DOUBLE.

use abacus_rnn::analysis::{falsify_robustness, FalsifyResult, MetricConfig, Sampler};
use abacus_rnn::fixtures;
use abacus_rnn::numeric::Rational;

fn main() {
    let eps = Rational::one();
    let delta = Rational::new(1, 100).unwrap();
    let sampler = Sampler { count: 10_000, ..Sampler::default() };
    for (name, p) in [("step", fixtures::step_machine()), ("double", fixtures::double())] {
        match falsify_robustness(&p, &MetricConfig::default(), &eps, &delta, &sampler, 10_000).unwrap() {
            FalsifyResult::Witness(w) => {
                println!("{name}: {} and {} map to {} and {} (din {}, dout {})", w.x, w.x_prime, w.y, w.y_prime, w.din, w.dout)
            }
            FalsifyResult::Exhausted(r) => println!("{name}: no witness among {} candidates", r.candidates),
        }
    }
}
