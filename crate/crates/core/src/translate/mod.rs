//! Compilation between the two machine models.
//!
//! [`rnn_to_abacus`] turns an RNN program into an abacus program computing
//! the same partial function on codes, for inputs and outputs within a
//! [`ShapeBound`]. [`abacus_to_rnn`] goes the other way. Codes or stored
//! sequences outside the bound make the compiled program diverge.
//!
//! Both are built from [`MacroSnippet`]s: straight abacus code with exits
//! past its end, using scratch registers from a caller-chosen base.

mod emitter;
pub mod macros;
mod seqio;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::machine::{Instruction, MachineKind, Program, Reg};
use emitter::{Emitter, Label};
pub use macros::MacroSnippet;

/// Largest sequence length and vector arity the compiled programs handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeBound {
    pub max_len: usize,
    pub max_arity: usize,
}

impl ShapeBound {
    pub fn new(max_len: usize, max_arity: usize) -> Result<Self, TranslateError> {
        if max_arity == 0 {
            return Err(TranslateError::ZeroArityBound);
        }
        Ok(ShapeBound { max_len, max_arity })
    }

    /// Registers spanned by the largest stored sequence within the bound.
    pub fn footprint(&self) -> usize {
        1 + self.max_len * (1 + 3 * self.max_arity)
    }

    pub fn contains(&self, x: &crate::numeric::VecSeq) -> bool {
        x.len() <= self.max_len && x.iter().all(|v| v.arity() <= self.max_arity)
    }
}

impl fmt::Display for ShapeBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.max_len, self.max_arity)
    }
}

/// Parses `SxW`, e.g. `2x3`.
impl FromStr for ShapeBound {
    type Err = TranslateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TranslateError::BadBound(s.to_string());
        let (l, w) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let l = l.trim().parse().map_err(|_| bad())?;
        let w = w.trim().parse().map_err(|_| bad())?;
        ShapeBound::new(l, w)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LayoutError {
    #[error("operand register {reg} lies at or above the scratch base {base}")]
    Overlap { reg: Reg, base: Reg },
    #[error("operand register {0} is used twice")]
    Aliased(Reg),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("expected a {expected} program, found {found}")]
    WrongKind {
        expected: MachineKind,
        found: MachineKind,
    },
    #[error("shape bound needs arity at least 1")]
    ZeroArityBound,
    #[error("cannot parse shape bound `{0}` (expected e.g. 2x3)")]
    BadBound(String),
    #[error("instruction {0} is not a vector operation")]
    NotVectorOp(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
}

/// First register an instruction's expansion may use as scratch: past
/// every operand and every register its vector reads or writes can reach
/// under the bound.
pub fn instruction_footprint(instr: &Instruction, bound: ShapeBound) -> Reg {
    let span = |n: usize| 1 + 3 * n;
    let w = bound.max_arity;
    match instr {
        Instruction::Halt => 0,
        Instruction::Zero { reg }
        | Instruction::Increase { reg, .. }
        | Instruction::Decrease { reg, .. } => reg + 1,
        Instruction::Add { lhs, rhs, dst, .. } => {
            (*lhs.max(rhs)).max(*dst) + span(w)
        }
        Instruction::NonLinear { src, dst, .. } => (*src.max(dst)) + span(w),
        Instruction::Multiply { rows, vec, dst, .. } => {
            let reads = rows.iter().chain([vec]).max().copied().unwrap_or(0) + span(w);
            reads.max(dst + span(w.max(rows.len())))
        }
    }
}

/// Expands one vector instruction into abacus code.
///
/// Exit 0 of the snippet is the fall-through to the next instruction;
/// exit 1 is the jump taken when an operand does not determine a vector
/// or the arities disagree. Operands with arity above the bound diverge.
pub fn expand_instruction(
    instr: &Instruction,
    bound: ShapeBound,
    scratch_base: Reg,
) -> Result<MacroSnippet, TranslateError> {
    if !instr.is_vector_op() {
        return Err(TranslateError::NotVectorOp(
            crate::asm::InstrDisplay(instr).to_string(),
        ));
    }
    let need = instruction_footprint(instr, bound);
    if need > scratch_base {
        return Err(LayoutError::Overlap {
            reg: need - 1,
            base: scratch_base,
        }
        .into());
    }
    let mut e = Emitter::new(scratch_base);
    let ok = e.label();
    let fail = e.label();
    let wide = e.label();
    emit_vector_op(&mut e, instr, bound, fail, wide);
    e.goto(ok);
    e.bind(wide);
    e.diverge();
    e.bind_exit(ok, 0);
    e.bind_exit(fail, 1);
    let end = e.scratch_end();
    Ok(MacroSnippet::from_parts(e.finish(), scratch_base, end, 2))
}

fn emit_vector_op(e: &mut Emitter, instr: &Instruction, bound: ShapeBound, fail: Label, wide: Label) {
    let w = bound.max_arity;
    let m = e.mark();
    let done = e.label();
    match instr {
        Instruction::Add { lhs, rhs, dst, .. } => {
            let x = e.vec_bank(w);
            let y = e.vec_bank(w);
            let z: Vec<_> = (0..w).map(|_| e.rat_regs()).collect();
            let read_y = e.label();
            e.read_vector(*lhs, &x, fail, wide, &vec![read_y; w]);
            e.bind(read_y);
            let check = e.label();
            e.read_vector(*rhs, &y, fail, wide, &vec![check; w]);
            e.bind(check);
            let same = e.label();
            e.compare(x.arity, y.arity, fail, same, fail);
            e.bind(same);
            let cases = arity_cases(e, x.arity, w, fail);
            for (n, case) in cases.into_iter().enumerate().map(|(i, c)| (i + 1, c)) {
                e.bind(case);
                for k in 0..n {
                    e.rat_add(x.coords[k], y.coords[k], z[k]);
                }
                e.write_vector(*dst, &z[..n]);
                e.goto(done);
            }
        }
        Instruction::NonLinear { src, dst, .. } => {
            let x = e.vec_bank(w);
            let z: Vec<_> = (0..w).map(|_| e.rat_regs()).collect();
            let cases: Vec<Label> = (0..w).map(|_| e.label()).collect();
            e.read_vector(*src, &x, fail, wide, &cases);
            for (i, case) in cases.into_iter().enumerate() {
                e.bind(case);
                for k in 0..=i {
                    e.rat_relu(x.coords[k], z[k]);
                }
                e.write_vector(*dst, &z[..=i]);
                e.goto(done);
            }
        }
        Instruction::Multiply { rows, vec, dst, .. } => {
            let banks: Vec<_> = rows.iter().map(|_| e.vec_bank(w)).collect();
            let v = e.vec_bank(w);
            let out: Vec<_> = rows.iter().map(|_| e.rat_regs()).collect();
            let prod = e.rat_regs();
            let acc = e.rat_regs();
            for (row, bank) in rows.iter().zip(&banks) {
                let next = e.label();
                e.read_vector(*row, bank, fail, wide, &vec![next; w]);
                e.bind(next);
            }
            let next = e.label();
            e.read_vector(*vec, &v, fail, wide, &vec![next; w]);
            e.bind(next);
            for bank in &banks {
                let same = e.label();
                e.compare(bank.arity, v.arity, fail, same, fail);
                e.bind(same);
            }
            let cases = arity_cases(e, v.arity, w, fail);
            for (n, case) in cases.into_iter().enumerate().map(|(i, c)| (i + 1, c)) {
                e.bind(case);
                for (bank, &o) in banks.iter().zip(&out) {
                    e.set_rat_zero(o);
                    for k in 0..n {
                        e.rat_mul(bank.coords[k], v.coords[k], prod);
                        e.rat_add(o, prod, acc);
                        e.copy_rat(acc, o);
                    }
                }
                e.write_vector(*dst, &out);
                e.goto(done);
            }
        }
        _ => unreachable!("checked by caller"),
    }
    e.bind(done);
    e.release(m);
}

/// Labels for arities `1..=w` read from `r`; anything else goes to `other`.
fn arity_cases(e: &mut Emitter, r: Reg, w: usize, other: Label) -> Vec<Label> {
    let cases: Vec<Label> = (0..w).map(|_| e.label()).collect();
    let mut table = vec![other];
    table.extend(&cases);
    e.switch(r, &table, other);
    cases
}

/// Lowers `program` to an abacus program `A` with `A(b(x)) = b(N(x))`
/// whenever `x` and `N(x)` lie within `bound`.
///
/// Registers of `program` keep their indices; the input and output code
/// live in register 0.
pub fn rnn_to_abacus(program: &Program, bound: ShapeBound) -> Result<Program, TranslateError> {
    if program.kind() != MachineKind::Rnn {
        return Err(TranslateError::WrongKind {
            expected: MachineKind::Rnn,
            found: program.kind(),
        });
    }
    let scratch = program
        .instrs()
        .iter()
        .map(|i| instruction_footprint(i, bound))
        .max()
        .unwrap_or(0)
        .max(bound.footprint());

    let mut e = Emitter::new(scratch);
    let diverge = e.label();
    let epilogue = e.label();

    let m = e.mark();
    let n = e.temp();
    e.move_add(0, n);
    let bank = e.seq_bank(bound);
    e.decode_seq(n, &bank, diverge);
    e.pack_seq(&bank, 0);
    e.release(m);

    let len = program.len();
    let image: Vec<Label> = (0..len).map(|_| e.label()).collect();
    let target = |q: usize| if q < len { image[q] } else { epilogue };
    for (pc, instr) in program.instrs().iter().enumerate() {
        e.bind(image[pc]);
        let next = target(pc + 1);
        match instr {
            Instruction::Halt => e.goto(epilogue),
            Instruction::Zero { reg } => {
                e.zero(*reg);
                e.goto(next);
            }
            Instruction::Increase { reg, target: q } => {
                e.inc_or(*reg, target(*q));
                e.goto(next);
            }
            Instruction::Decrease { reg, target: q } => {
                e.dec_or(*reg, target(*q));
                e.goto(next);
            }
            _ => {
                let snippet = expand_instruction(instr, bound, e.mark())?;
                e.splice(snippet.instrs(), &[next, target(instr.target().expect("vector op"))]);
            }
        }
    }

    e.bind(epilogue);
    let m = e.mark();
    let bank = e.seq_bank(bound);
    e.unpack_seq(0, &bank, diverge);
    let y = e.temp();
    e.encode_seq(&bank, y);
    e.move_to(y, 0);
    e.halt();
    e.release(m);

    e.bind(diverge);
    e.diverge();
    Ok(Program::new(MachineKind::Abacus, e.finish()).expect("emitter resolves all targets"))
}

/// Lifts abacus program `a` to an RNN program `N` with
/// `N(x) = b^-1(a(b(x)))` whenever `x` and the result lie within `bound`.
///
/// `a`'s registers are relocated to start just past the input region.
pub fn abacus_to_rnn(a: &Program, bound: ShapeBound) -> Result<Program, TranslateError> {
    if a.kind() != MachineKind::Abacus {
        return Err(TranslateError::WrongKind {
            expected: MachineKind::Abacus,
            found: a.kind(),
        });
    }
    let base = bound.footprint();
    let scratch = base + a.max_register().map_or(0, |r| r + 1);
    let mut e = Emitter::new(scratch.max(base + 1));
    let diverge = e.label();
    let epilogue = e.label();

    let m = e.mark();
    let bank = e.seq_bank(bound);
    e.unpack_seq(0, &bank, diverge);
    let x = e.temp();
    e.encode_seq(&bank, x);
    e.move_to(x, base);
    e.release(m);

    let len = a.len();
    let image: Vec<Label> = (0..len).map(|_| e.label()).collect();
    let target = |q: usize| if q < len { image[q] } else { epilogue };
    for (pc, instr) in a.instrs().iter().enumerate() {
        e.bind(image[pc]);
        let next = target(pc + 1);
        match instr {
            Instruction::Halt => e.goto(epilogue),
            Instruction::Zero { reg } => {
                e.zero(base + reg);
                e.goto(next);
            }
            Instruction::Increase { reg, target: q } => {
                e.inc_or(base + reg, target(*q));
                e.goto(next);
            }
            Instruction::Decrease { reg, target: q } => {
                e.dec_or(base + reg, target(*q));
                e.goto(next);
            }
            _ => unreachable!("abacus programs hold no vector operations"),
        }
    }

    e.bind(epilogue);
    let m = e.mark();
    let y = e.temp();
    let present = e.label();
    e.branch_nonempty(base, present);
    e.goto(diverge);
    e.bind(present);
    e.copy(base, y);
    let bank = e.seq_bank(bound);
    e.decode_seq(y, &bank, diverge);
    e.pack_seq(&bank, 0);
    e.halt();
    e.release(m);

    e.bind(diverge);
    e.diverge();
    Ok(Program::new(MachineKind::Rnn, e.finish()).expect("emitter resolves all targets"))
}

#[cfg(test)]
mod tests;
