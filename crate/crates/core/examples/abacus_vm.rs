//! Runs the ADD2 abacus program and a budget-limited busy loop.

use abacus_rnn::fixtures;
use abacus_rnn::machine::{run_abacus, Outcome, RegisterFile};

fn main() {
    let init = RegisterFile::from_pairs([(0usize, 2u64), (1, 3)]);
    match run_abacus(&fixtures::add2(), init, 1000).unwrap() {
        Outcome::Halted { regs, steps } => println!("add2: {regs:?} after {steps} steps"),
        other => println!("add2: {other:?}"),
    }
    let out = run_abacus(&fixtures::busy_loop(), RegisterFile::new(), 1_000_000).unwrap();
    println!("busy loop: {out:?}");
}
