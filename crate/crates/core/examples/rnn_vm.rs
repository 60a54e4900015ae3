//! Runs the DOUBLE and RELU1 machines on vector-sequence inputs.

use abacus_rnn::asm::parse_seq_literal;
use abacus_rnn::fixtures;
use abacus_rnn::machine::run_rnn;

fn main() {
    for (name, p, input) in [
        ("double", fixtures::double(), "[(1/2)]"),
        ("relu1", fixtures::relu1(), "[(-3, 2)]"),
        ("garbage", fixtures::garbage(), "[]"),
    ] {
        let x = parse_seq_literal(input).unwrap();
        println!("{name} on {x}: {:?}", run_rnn(&p, &x, 1000).unwrap());
    }
}
