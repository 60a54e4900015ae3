//! Small reference machines used by the tests, the examples and the CLI
//! self-test.

use crate::machine::{Instruction, Program};
use Instruction::*;

/// `R_0 += R_1`, leaving `R_1 = 0`.
pub fn add2() -> Program {
    Program::abacus(vec![
        Decrease { reg: 1, target: 3 },
        Increase { reg: 0, target: 0 },
        Decrease { reg: 2, target: 0 },
        Halt,
    ])
    .expect("valid fixture")
}

fn succ_instrs() -> Vec<Instruction> {
    vec![Increase { reg: 0, target: 2 }, Halt, Halt]
}

/// `R_0 += 1`.
pub fn succ() -> Program {
    Program::abacus(succ_instrs()).expect("valid fixture")
}

pub fn succ_rnn() -> Program {
    Program::rnn(succ_instrs()).expect("valid fixture")
}

/// Never halts: a one-instruction busy loop.
pub fn busy_loop() -> Program {
    Program::abacus(vec![Zero { reg: 1 }, Decrease { reg: 1, target: 1 }]).expect("valid fixture")
}

/// Doubles the first vector of the input sequence.
pub fn double() -> Program {
    Program::rnn(vec![
        Add {
            lhs: 1,
            rhs: 1,
            dst: 1,
            target: 2,
        },
        Halt,
        Halt,
    ])
    .expect("valid fixture")
}

/// ReLU on the first vector of the input sequence.
pub fn relu1() -> Program {
    Program::rnn(vec![
        NonLinear {
            src: 1,
            dst: 1,
            target: 2,
        },
        Halt,
        Halt,
    ])
    .expect("valid fixture")
}

pub fn identity() -> Program {
    Program::rnn(vec![Halt]).expect("valid fixture")
}

/// Writes the one-element, one-vector sequence `((value))` for a natural
/// `value` starting at instruction index `at`, then halts.
fn emit_unit_output(at: usize, value: u32) -> Vec<Instruction> {
    let mut code = vec![Zero { reg: 0 }];
    code.push(Increase { reg: 0, target: at + code.len() + 1 });
    code.push(Zero { reg: 1 });
    code.push(Increase { reg: 1, target: at + code.len() + 1 });
    code.push(Zero { reg: 2 });
    code.push(Zero { reg: 3 });
    for _ in 0..value {
        code.push(Increase { reg: 3, target: at + code.len() + 1 });
    }
    code.push(Zero { reg: 4 });
    code.push(Increase { reg: 4, target: at + code.len() + 1 });
    code.push(Halt);
    code
}

/// Outputs `((1))` when the first coordinate of the first input vector has
/// a nonzero numerator and `((0))` otherwise.
pub fn step_machine() -> Program {
    branch_machine(3)
}

/// Outputs `((1))` when the first coordinate of the first input vector is
/// negative and `((0))` otherwise.
pub fn sign_machine() -> Program {
    branch_machine(2)
}

fn branch_machine(test_reg: usize) -> Program {
    let one = emit_unit_output(1, 1);
    let zero_at = 1 + one.len();
    let mut code = vec![Decrease { reg: test_reg, target: zero_at }];
    code.extend(one);
    code.extend(emit_unit_output(zero_at, 0));
    Program::rnn(code).expect("valid fixture")
}

/// Halts with `R_0 = 1` and `R_1` untouched, which never decodes as a
/// sequence when run on the empty input.
pub fn garbage() -> Program {
    Program::rnn(vec![Zero { reg: 0 }, Increase { reg: 0, target: 2 }, Halt])
        .expect("valid fixture")
}
