//! Steps through SUCC one instruction at a time.

use abacus_rnn::asm::InstrDisplay;
use abacus_rnn::fixtures;
use abacus_rnn::machine::{trace_abacus, RegisterFile};

fn main() {
    let (entries, outcome) = trace_abacus(&fixtures::succ(), RegisterFile::from_pairs([(0usize, 7u64)]), 10).unwrap();
    for e in &entries {
        println!("{:>3}  {}  {:?}", e.pc, InstrDisplay(&e.instr), e.writes);
    }
    println!("{outcome:?}");
}
