//! Compiles SUCC to an RNN program acting on decoded sequences.

use abacus_rnn::fixtures;
use abacus_rnn::godel::seq_decode;
use abacus_rnn::machine::run_rnn;
use abacus_rnn::translate::{abacus_to_rnn, ShapeBound};
use num_bigint::BigUint;

fn main() {
    let bound = ShapeBound::new(2, 2).unwrap();
    let n = abacus_to_rnn(&fixtures::succ(), bound).unwrap();
    println!("lifted to {} rnn instructions at bound {bound}", n.len());
    for code in 0u64..8 {
        let x = seq_decode(&BigUint::from(code)).unwrap();
        match run_rnn(&n, &x, 10_000_000).unwrap().output() {
            Some(y) => println!("{x} -> {y}"),
            None => println!("{x} -> no output"),
        }
    }
}
