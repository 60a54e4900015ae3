//! Encodes sequences and programs as naturals and decodes them back.

use abacus_rnn::asm::{parse_seq_literal, print_program};
use abacus_rnn::fixtures;
use abacus_rnn::godel::{program_decode, program_encode, psi_prime, seq_decode, seq_encode};
use num_bigint::BigUint;

fn main() {
    for n in 0u64..8 {
        println!("b^-1({n}) = {}", seq_decode(&BigUint::from(n)).unwrap());
    }
    let x = parse_seq_literal("[(1/2)]").unwrap();
    let code = seq_encode(&x);
    println!("b({x}) = {code}");

    let e = program_encode(&fixtures::double());
    println!("double has description {e}");
    print!("{}", print_program(&program_decode(&e).unwrap()));
    println!("psi'(46) = {:?}", psi_prime(&fixtures::double(), &code, 1000).unwrap());
}
