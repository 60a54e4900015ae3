//! Builds an arithmetic macro snippet and runs it as a standalone program.

use abacus_rnn::machine::{run, Outcome, RegisterFile};
use abacus_rnn::translate::macros;

fn main() {
    // R2 := R0 * R1 with scratch from 10 up.
    let s = macros::mul_nat(2, 0, 1, 10).unwrap();
    println!("mul uses {} instructions and scratch {:?}", s.len(), s.scratch());
    let regs = RegisterFile::from_pairs([(0usize, 6u64), (1, 7)]);
    if let Outcome::Halted { regs, steps } = run(&s.to_program(), regs, 100_000) {
        println!("6 * 7 = {:?} in {steps} steps", regs.get_u64(2));
    }
}
