use num_bigint::BigUint;
use thiserror::Error;

use super::codec::{load_sequence, load_vector, store_sequence, store_vector, vector_span};
use super::program::{Instruction, MachineKind, Program, Reg};
use super::registers::RegisterFile;
use crate::numeric::{RVector, VecSeq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MachineError {
    #[error("expected a {expected} program, got {found}")]
    WrongMachineKind {
        expected: MachineKind,
        found: MachineKind,
    },
}

fn expect_kind(program: &Program, expected: MachineKind) -> Result<(), MachineError> {
    if program.kind() != expected {
        return Err(MachineError::WrongMachineKind {
            expected,
            found: program.kind(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Halted { regs: RegisterFile, steps: u64 },
    BudgetExceeded { steps: u64 },
}

impl Outcome {
    pub fn steps(&self) -> u64 {
        match self {
            Outcome::Halted { steps, .. } | Outcome::BudgetExceeded { steps } => *steps,
        }
    }

    pub fn registers(&self) -> Option<&RegisterFile> {
        match self {
            Outcome::Halted { regs, .. } => Some(regs),
            Outcome::BudgetExceeded { .. } => None,
        }
    }
}

/// Result of running an RNN machine under the sequence I/O convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RnnOutcome {
    Output { y: VecSeq, steps: u64 },
    /// Halted, but `R_0` does not begin a stored sequence.
    HaltedMalformed { steps: u64 },
    BudgetExceeded { steps: u64 },
}

impl RnnOutcome {
    pub fn output(&self) -> Option<&VecSeq> {
        match self {
            RnnOutcome::Output { y, .. } => Some(y),
            _ => None,
        }
    }

    pub fn steps(&self) -> u64 {
        match self {
            RnnOutcome::Output { steps, .. }
            | RnnOutcome::HaltedMalformed { steps }
            | RnnOutcome::BudgetExceeded { steps } => *steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Next(usize),
    Halted,
}

/// Executes the instruction at `pc`, mutating `regs` in place.
pub fn step(program: &Program, pc: usize, regs: &mut RegisterFile) -> Step {
    step_recording(program, pc, regs, &mut |_| {})
}

fn step_recording(
    program: &Program,
    pc: usize,
    regs: &mut RegisterFile,
    touched: &mut dyn FnMut(Reg),
) -> Step {
    let Some(instr) = program.instrs().get(pc) else {
        return Step::Halted;
    };
    let next = pc + 1;
    match instr {
        Instruction::Halt => Step::Halted,
        Instruction::Zero { reg } => {
            regs.zero(*reg);
            touched(*reg);
            Step::Next(next)
        }
        Instruction::Increase { reg, target } => {
            if regs.increment(*reg) {
                touched(*reg);
                Step::Next(next)
            } else {
                Step::Next(*target)
            }
        }
        Instruction::Decrease { reg, target } => {
            if regs.decrement(*reg) {
                touched(*reg);
                Step::Next(next)
            } else {
                Step::Next(*target)
            }
        }
        Instruction::Add {
            lhs,
            rhs,
            dst,
            target,
        } => {
            let sum = load_vector(regs, *lhs)
                .ok()
                .zip(load_vector(regs, *rhs).ok())
                .and_then(|(a, b)| a.checked_add(&b).ok());
            write_or_jump(regs, *dst, sum, next, *target, touched)
        }
        Instruction::Multiply {
            rows,
            vec,
            dst,
            target,
        } => {
            let product = multiply(regs, rows, *vec);
            write_or_jump(regs, *dst, product, next, *target, touched)
        }
        Instruction::NonLinear { src, dst, target } => {
            let out = load_vector(regs, *src).ok().map(|v| v.relu());
            write_or_jump(regs, *dst, out, next, *target, touched)
        }
    }
}

fn multiply(regs: &RegisterFile, rows: &[Reg], vec: Reg) -> Option<RVector> {
    let v = load_vector(regs, vec).ok()?;
    let elems = rows
        .iter()
        .map(|&r| {
            let row = load_vector(regs, r).ok()?;
            row.dot(&v).ok()
        })
        .collect::<Option<Vec<_>>>()?;
    RVector::new(elems).ok()
}

fn write_or_jump(
    regs: &mut RegisterFile,
    dst: Reg,
    value: Option<RVector>,
    next: usize,
    target: usize,
    touched: &mut dyn FnMut(Reg),
) -> Step {
    match value {
        Some(v) => {
            store_vector(regs, dst, &v);
            (dst..dst + vector_span(v.arity())).for_each(touched);
            Step::Next(next)
        }
        None => Step::Next(target),
    }
}

/// Whether executing `pc` would jump back to `pc` without changing any
/// register, i.e. the machine is stuck in a one-instruction loop.
fn is_fixed_point(program: &Program, pc: usize, regs: &RegisterFile) -> bool {
    match program.instrs()[pc] {
        Instruction::Decrease { reg, target } => target == pc && regs.is_empty_or_zero(reg),
        Instruction::Increase { reg, target } => target == pc && regs.is_empty(reg),
        _ => false,
    }
}

/// Runs from `pc = 0` for at most `budget` non-halting steps, regardless of
/// program kind.
pub fn run(program: &Program, mut regs: RegisterFile, budget: u64) -> Outcome {
    let instrs = program.instrs();
    let mut pc = 0;
    let mut steps = 0u64;
    loop {
        let Some(instr) = instrs.get(pc) else {
            return Outcome::Halted { regs, steps };
        };
        if let Instruction::Halt = instr {
            return Outcome::Halted { regs, steps };
        }
        if steps == budget {
            return Outcome::BudgetExceeded { steps };
        }
        steps += 1;
        pc = match *instr {
            Instruction::Increase { reg, target } => {
                if regs.increment(reg) {
                    pc + 1
                } else {
                    target
                }
            }
            Instruction::Decrease { reg, target } => {
                if regs.decrement(reg) {
                    pc + 1
                } else {
                    target
                }
            }
            _ => match step(program, pc, &mut regs) {
                Step::Next(next) => next,
                Step::Halted => unreachable!("halt handled above"),
            },
        };
        if pc < instrs.len() && is_fixed_point(program, pc, &regs) {
            return Outcome::BudgetExceeded { steps: budget };
        }
    }
}

pub fn run_abacus(program: &Program, init: RegisterFile, budget: u64) -> Result<Outcome, MachineError> {
    expect_kind(program, MachineKind::Abacus)?;
    Ok(run(program, init, budget))
}

/// Convenience: the abacus I/O convention, `R_0 = x` and all else empty.
pub fn run_abacus_on(program: &Program, x: BigUint, budget: u64) -> Result<Outcome, MachineError> {
    run_abacus(program, RegisterFile::from_pairs([(0, x)]), budget)
}

/// Reads `R_0` of a halted abacus run.
pub fn abacus_output(outcome: &Outcome) -> Option<BigUint> {
    outcome.registers().and_then(|r| r.get(0))
}

pub fn rnn_initial_registers(x: &VecSeq) -> RegisterFile {
    let mut regs = RegisterFile::new();
    store_sequence(&mut regs, 0, x);
    regs
}

pub fn run_rnn(program: &Program, x: &VecSeq, budget: u64) -> Result<RnnOutcome, MachineError> {
    expect_kind(program, MachineKind::Rnn)?;
    Ok(rnn_outcome(run(program, rnn_initial_registers(x), budget)))
}

/// Reads the result of a finished run as an RNN outcome.
pub fn rnn_outcome(outcome: Outcome) -> RnnOutcome {
    match outcome {
        Outcome::Halted { regs, steps } => match load_sequence(&regs, 0) {
            Ok(y) => RnnOutcome::Output { y, steps },
            Err(_) => RnnOutcome::HaltedMalformed { steps },
        },
        Outcome::BudgetExceeded { steps } => RnnOutcome::BudgetExceeded { steps },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub pc: usize,
    pub instr: Instruction,
    /// Registers written by this step, with their new values.
    pub writes: Vec<(Reg, BigUint)>,
}

/// A step-at-a-time execution. Iterating yields one [`TraceEntry`] per
/// executed instruction, including the final `Halt`.
pub struct Execution<'p> {
    program: &'p Program,
    regs: RegisterFile,
    pc: usize,
    steps: u64,
    budget: u64,
    halted: bool,
}

impl<'p> Execution<'p> {
    pub fn new(program: &'p Program, regs: RegisterFile, budget: u64) -> Self {
        Execution {
            program,
            regs,
            pc: 0,
            steps: 0,
            budget,
            halted: false,
        }
    }

    pub fn registers(&self) -> &RegisterFile {
        &self.regs
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    /// The outcome once the iterator is exhausted; `None` while running.
    pub fn outcome(&self) -> Option<Outcome> {
        if self.halted {
            Some(Outcome::Halted {
                regs: self.regs.clone(),
                steps: self.steps,
            })
        } else if self.steps == self.budget && !self.at_halt() {
            Some(Outcome::BudgetExceeded { steps: self.steps })
        } else {
            None
        }
    }

    /// Drives the execution to completion, discarding the trace.
    pub fn finish(mut self) -> Outcome {
        while self.next().is_some() {}
        self.outcome().expect("exhausted execution has an outcome")
    }

    fn at_halt(&self) -> bool {
        matches!(self.program.instrs().get(self.pc), None | Some(Instruction::Halt))
    }
}

impl Iterator for Execution<'_> {
    type Item = TraceEntry;

    fn next(&mut self) -> Option<TraceEntry> {
        if self.halted {
            return None;
        }
        let Some(instr) = self.program.instrs().get(self.pc) else {
            self.halted = true;
            return None;
        };
        if let Instruction::Halt = instr {
            self.halted = true;
            return Some(TraceEntry {
                pc: self.pc,
                instr: Instruction::Halt,
                writes: vec![],
            });
        }
        if self.steps == self.budget {
            return None;
        }
        let pc = self.pc;
        let mut touched = Vec::new();
        match step_recording(self.program, pc, &mut self.regs, &mut |r| touched.push(r)) {
            Step::Next(next) => self.pc = next,
            Step::Halted => unreachable!("halt handled above"),
        }
        self.steps += 1;
        let writes = touched
            .into_iter()
            .map(|r| (r, self.regs.get(r).expect("written register is nonempty")))
            .collect();
        Some(TraceEntry {
            pc,
            instr: instr.clone(),
            writes,
        })
    }
}

/// Full trace of an abacus run from explicit initial registers.
pub fn trace_abacus(
    program: &Program,
    init: RegisterFile,
    budget: u64,
) -> Result<(Vec<TraceEntry>, Outcome), MachineError> {
    expect_kind(program, MachineKind::Abacus)?;
    Ok(collect_trace(Execution::new(program, init, budget)))
}

pub fn trace_rnn(
    program: &Program,
    x: &VecSeq,
    budget: u64,
) -> Result<(Vec<TraceEntry>, RnnOutcome), MachineError> {
    expect_kind(program, MachineKind::Rnn)?;
    let (entries, outcome) = collect_trace(Execution::new(program, rnn_initial_registers(x), budget));
    Ok((entries, rnn_outcome(outcome)))
}

fn collect_trace(mut exec: Execution<'_>) -> (Vec<TraceEntry>, Outcome) {
    let entries: Vec<_> = exec.by_ref().collect();
    let outcome = exec.outcome().expect("exhausted execution has an outcome");
    (entries, outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::numeric::Rational;
    use num_traits::ToPrimitive;

    fn regs(pairs: &[(usize, u64)]) -> RegisterFile {
        RegisterFile::from_pairs(pairs.iter().map(|&(i, v)| (i, v)))
    }

    fn halted_regs(o: &Outcome) -> &RegisterFile {
        o.registers().expect("halted")
    }

    #[test]
    fn decrease_on_empty_and_zero_jumps() {
        let p = Program::abacus(vec![
            Instruction::Decrease { reg: 1, target: 3 },
            Instruction::Halt,
            Instruction::Halt,
            Instruction::Halt,
        ])
        .unwrap();
        let mut r = RegisterFile::new();
        assert_eq!(step(&p, 0, &mut r), Step::Next(3));
        assert_eq!(r, RegisterFile::new());
        let mut r = regs(&[(1, 0)]);
        assert_eq!(step(&p, 0, &mut r), Step::Next(3));
        assert_eq!(r, regs(&[(1, 0)]));
    }

    #[test]
    fn zero_fills_empty_register() {
        let p = Program::abacus(vec![Instruction::Zero { reg: 4 }]).unwrap();
        let mut r = RegisterFile::new();
        assert_eq!(step(&p, 0, &mut r), Step::Next(1));
        assert_eq!(r, regs(&[(4, 0)]));
        assert_eq!(step(&p, 1, &mut r), Step::Halted);
    }

    #[test]
    fn add2_and_succ() {
        let out = run_abacus(&fixtures::add2(), regs(&[(0, 2), (1, 3)]), 1000).unwrap();
        assert_eq!(halted_regs(&out).get_u64(0), Some(5));
        assert_eq!(halted_regs(&out).get_u64(1), Some(0));

        let out = run_abacus(&fixtures::succ(), regs(&[(0, 7)]), 1000).unwrap();
        assert_eq!(out, Outcome::Halted { regs: regs(&[(0, 8)]), steps: 1 });
    }

    #[test]
    fn zero_budget() {
        let out = run_abacus(&fixtures::succ(), regs(&[(0, 7)]), 0).unwrap();
        assert_eq!(out, Outcome::BudgetExceeded { steps: 0 });
        let halt = Program::abacus(vec![Instruction::Halt]).unwrap();
        assert!(matches!(
            run_abacus(&halt, RegisterFile::new(), 0).unwrap(),
            Outcome::Halted { steps: 0, .. }
        ));
        let empty = Program::abacus(vec![]).unwrap();
        assert!(matches!(
            run_abacus(&empty, RegisterFile::new(), 0).unwrap(),
            Outcome::Halted { steps: 0, .. }
        ));
    }

    #[test]
    fn wrong_kind() {
        assert!(matches!(
            run_abacus(&fixtures::double(), RegisterFile::new(), 10),
            Err(MachineError::WrongMachineKind { .. })
        ));
        assert!(run_rnn(&fixtures::add2(), &VecSeq::empty(), 10).is_err());
    }

    #[test]
    fn busy_loop_consumes_budget() {
        let p = Program::abacus(vec![
            Instruction::Zero { reg: 9 },
            Instruction::Decrease { reg: 9, target: 1 },
        ])
        .unwrap();
        assert_eq!(
            run_abacus(&p, RegisterFile::new(), 1_000_000_000_000).unwrap(),
            Outcome::BudgetExceeded { steps: 1_000_000_000_000 }
        );
        // The slow path reaches the same verdict.
        let exec = Execution::new(&p, RegisterFile::new(), 50);
        assert_eq!(exec.finish(), Outcome::BudgetExceeded { steps: 50 });
    }

    #[test]
    fn double_relu_multiply() {
        let half = VecSeq::new(vec![RVector::from_ratios(&[(1, 2)]).unwrap()]);
        let out = run_rnn(&fixtures::double(), &half, 100).unwrap();
        assert_eq!(out.output(), Some(&VecSeq::new(vec![RVector::from_ints(&[1]).unwrap()])));

        let x = VecSeq::new(vec![RVector::from_ints(&[-3, 2]).unwrap()]);
        let out = run_rnn(&fixtures::relu1(), &x, 100).unwrap();
        assert_eq!(out.output(), Some(&VecSeq::new(vec![RVector::from_ints(&[0, 2]).unwrap()])));

        let p = Program::rnn(vec![Instruction::Multiply {
            rows: vec![10],
            vec: 20,
            dst: 30,
            target: 1,
        }])
        .unwrap();
        let mut r = RegisterFile::new();
        store_vector(&mut r, 10, &RVector::from_ints(&[1, 2]).unwrap());
        store_vector(&mut r, 20, &RVector::from_ints(&[3, 4]).unwrap());
        let before = r.clone();
        assert_eq!(step(&p, 0, &mut r), Step::Next(1));
        let got: Vec<u64> = (30..34).map(|i| r.get_u64(i).unwrap()).collect();
        assert_eq!(got, vec![1, 0, 11, 1]);
        // only the destination span changed
        for (i, v) in before.iter() {
            assert_eq!(r.get(i), Some(v));
        }
        assert_eq!(r.nonempty_count(), before.nonempty_count() + 4);
    }

    #[test]
    fn vector_op_failure_jumps_without_writing() {
        let p = Program::rnn(vec![
            Instruction::Add { lhs: 1, rhs: 5, dst: 9, target: 1 },
            Instruction::Halt,
        ])
        .unwrap();
        let mut r = regs(&[(1, 1), (2, 0), (3, 1), (4, 1)]);
        let before = r.clone();
        assert_eq!(step(&p, 0, &mut r), Step::Next(1));
        assert_eq!(r, before);
        // mismatched arity
        store_vector(&mut r, 5, &RVector::from_ints(&[1, 1]).unwrap());
        let before = r.clone();
        assert_eq!(step(&p, 0, &mut r), Step::Next(1));
        assert_eq!(r, before);
    }

    #[test]
    fn halted_malformed() {
        let out = run_rnn(&fixtures::garbage(), &VecSeq::empty(), 100).unwrap();
        assert_eq!(out, RnnOutcome::HaltedMalformed { steps: 2 });
    }

    #[test]
    fn multiply_with_repeated_and_overlapping_rows() {
        let p = Program::rnn(vec![Instruction::Multiply {
            rows: vec![0, 0],
            vec: 0,
            dst: 0,
            target: 1,
        }])
        .unwrap();
        let mut r = RegisterFile::new();
        store_vector(&mut r, 0, &RVector::from_ratios(&[(1, 2), (-1, 1)]).unwrap());
        step(&p, 0, &mut r);
        let v = load_vector(&r, 0).unwrap();
        assert_eq!(v.elems(), &[Rational::new(5, 4).unwrap(), Rational::new(5, 4).unwrap()]);
    }

    #[test]
    fn trace_lengths() {
        let (t, out) = trace_abacus(&fixtures::succ(), regs(&[(0, 7)]), 100).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].instr, Instruction::Halt);
        assert_eq!(t[0].writes, vec![(0, BigUint::from(8u32))]);
        assert_eq!(out, run_abacus(&fixtures::succ(), regs(&[(0, 7)]), 100).unwrap());

        let (t, out) = trace_abacus(&fixtures::add2(), regs(&[(0, 2), (1, 3)]), 1).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(out, Outcome::BudgetExceeded { steps: 1 });
    }

    #[test]
    fn budget_monotone_on_add2() {
        let init = regs(&[(0, 4), (1, 6)]);
        let exact = run_abacus(&fixtures::add2(), init.clone(), u64::MAX).unwrap();
        let steps = exact.steps();
        assert!(matches!(
            run_abacus(&fixtures::add2(), init.clone(), steps - 1).unwrap(),
            Outcome::BudgetExceeded { .. }
        ));
        for b in [steps, steps + 1, steps * 10] {
            assert_eq!(run_abacus(&fixtures::add2(), init.clone(), b).unwrap(), exact);
        }
        assert_eq!(halted_regs(&exact).get(0).unwrap().to_u64(), Some(10));
    }
}
