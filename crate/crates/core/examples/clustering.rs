//! Groups inputs of the sign machine by output and scores the grouping.

use abacus_rnn::analysis::{extract_clusters, good_clustering, Between, MetricConfig, Within};
use abacus_rnn::asm::parse_seq_literal;
use abacus_rnn::fixtures;
use abacus_rnn::numeric::Rational;

fn main() {
    let inputs: Vec<_> = ["[(-6)]", "[(-5)]", "[(-9/2)]", "[(4)]", "[(5)]", "[(6)]"]
        .iter()
        .map(|s| parse_seq_literal(s).unwrap())
        .collect();
    let metric = MetricConfig::default();
    let p = fixtures::sign_machine();
    let ex = extract_clusters(&p, &inputs, 10_000, &metric).unwrap();
    for (y, members) in ex.outputs.iter().zip(ex.clustering.clusters()) {
        let names: Vec<String> = members.iter().map(|m| m.to_string()).collect();
        println!("{y}: {}", names.join(" "));
    }
    println!("dunn = {}", ex.clustering.dunn(Between::MinLink, Within::Diameter).unwrap());
    let t = Rational::new(1, 2).unwrap();
    println!("{:?}", good_clustering(&p, &inputs, &t, 10_000, &metric).unwrap());
}
