//! Register machines: instruction set, register file, storage codec and
//! the interpreter.

mod codec;
mod program;
mod registers;
mod vm;

pub use codec::{
    load_rational, load_sequence, load_vector, sequence_offsets, store_rational, store_sequence,
    store_vector, vector_span, Malformed,
};
pub use program::{Instruction, MachineKind, Program, ProgramError, Reg};
pub use registers::RegisterFile;
pub use vm::{
    abacus_output, rnn_initial_registers, rnn_outcome, run, run_abacus, run_abacus_on, run_rnn, step, trace_abacus,
    trace_rnn, Execution, MachineError, Outcome, RnnOutcome, Step, TraceEntry,
};
