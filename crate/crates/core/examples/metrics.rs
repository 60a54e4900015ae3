//! Compares the three sequence distances on a few pairs.

use abacus_rnn::analysis::{MetricConfig, MetricKind};
use abacus_rnn::asm::parse_seq_literal;
use abacus_rnn::numeric::{Norm, Rational};

fn main() {
    let pairs = [("[(1),(2),(3)]", "[(1),(3)]"), ("[(1/2,-3)]", "[(0,-1)]"), ("[(0)]", "[(0,0)]")];
    let half = Rational::new(1, 2).unwrap();
    for (a, b) in pairs {
        let (x, y) = (parse_seq_literal(a).unwrap(), parse_seq_literal(b).unwrap());
        println!("{x} vs {y}");
        for kind in [MetricKind::Perturb, MetricKind::Lcs, MetricKind::Align] {
            let m = MetricConfig::new(kind, Norm::Linf, half.clone()).unwrap();
            match m.distance(&x, &y) {
                Ok(d) => println!("  {kind}: {d}"),
                Err(e) => println!("  {kind}: {e}"),
            }
        }
    }
}
