//! Compiles DOUBLE to an abacus program acting on sequence codes.

use abacus_rnn::fixtures;
use abacus_rnn::godel::seq_decode;
use abacus_rnn::machine::{abacus_output, run_abacus_on};
use abacus_rnn::translate::{rnn_to_abacus, ShapeBound};
use num_bigint::BigUint;

fn main() {
    let bound = ShapeBound::new(1, 1).unwrap();
    let a = rnn_to_abacus(&fixtures::double(), bound).unwrap();
    println!("lowered to {} abacus instructions at bound {bound}", a.len());
    for n in [0u64, 1, 4, 46, 3] {
        let x = seq_decode(&BigUint::from(n)).unwrap();
        let out = abacus_output(&run_abacus_on(&a, BigUint::from(n), 10_000_000).unwrap());
        match out {
            Some(y) => println!("{n} ({x}) -> {y} ({})", seq_decode(&y).unwrap()),
            None => println!("{n} ({x}) -> no output"),
        }
    }
}
