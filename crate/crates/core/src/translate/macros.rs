//! Standalone abacus snippets for the arithmetic building blocks.
//!
//! Each constructor takes its operand registers and a scratch base. The
//! operands must hold numbers on entry and lie below the base; on exit
//! every scratch register the snippet touched holds 0.

use super::emitter::Emitter;
use super::LayoutError;
use crate::machine::{Instruction, MachineKind, Program, Reg};

/// Straight-line abacus code with `exits` exits. A target of `len + k`
/// leaves through exit `k`; exit 0 is the normal fall-through.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MacroSnippet {
    instrs: Vec<Instruction>,
    scratch_base: Reg,
    scratch_end: Reg,
    exits: usize,
}

impl MacroSnippet {
    pub(crate) fn from_parts(
        instrs: Vec<Instruction>,
        scratch_base: Reg,
        scratch_end: Reg,
        exits: usize,
    ) -> Self {
        MacroSnippet {
            instrs,
            scratch_base,
            scratch_end,
            exits,
        }
    }

    pub fn instrs(&self) -> &[Instruction] {
        &self.instrs
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn exits(&self) -> usize {
        self.exits
    }

    /// Half-open range of scratch registers the snippet may write.
    pub fn scratch(&self) -> std::ops::Range<Reg> {
        self.scratch_base..self.scratch_end
    }

    /// A program that runs the snippet and halts at any exit.
    pub fn to_program(&self) -> Program {
        let len = self.instrs.len();
        let instrs = self
            .instrs
            .iter()
            .map(|i| i.clone().map_target(|t| t.min(len)))
            .collect();
        Program::new(MachineKind::Abacus, instrs).expect("targets clamped")
    }

    /// Sequential composition: exit 0 of `self` enters `next`; every other
    /// exit of either snippet keeps its number.
    pub fn then(&self, next: &MacroSnippet) -> MacroSnippet {
        let n1 = self.instrs.len();
        let n2 = next.instrs.len();
        let total = n1 + n2;
        let mut instrs = Vec::with_capacity(total);
        for i in &self.instrs {
            instrs.push(i.clone().map_target(|t| match t {
                t if t < n1 => t,
                t if t == n1 => n1,
                t => total + (t - n1),
            }));
        }
        for i in &next.instrs {
            instrs.push(i.clone().map_target(|t| t + n1));
        }
        MacroSnippet {
            instrs,
            scratch_base: self.scratch_base.min(next.scratch_base),
            scratch_end: self.scratch_end.max(next.scratch_end),
            exits: self.exits.max(next.exits),
        }
    }
}

fn check(operands: &[Reg], base: Reg) -> Result<(), LayoutError> {
    for (i, &r) in operands.iter().enumerate() {
        if r >= base {
            return Err(LayoutError::Overlap { reg: r, base });
        }
        if operands[..i].contains(&r) {
            return Err(LayoutError::Aliased(r));
        }
    }
    Ok(())
}

fn build(
    operands: &[Reg],
    base: Reg,
    body: impl FnOnce(&mut Emitter),
) -> Result<MacroSnippet, LayoutError> {
    check(operands, base)?;
    let mut e = Emitter::new(base);
    body(&mut e);
    let end = e.scratch_end();
    for r in base..end {
        e.zero(r);
    }
    Ok(MacroSnippet::from_parts(e.finish(), base, end, 1))
}

/// `[dst] = [src]`.
pub fn copy(src: Reg, dst: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[src, dst], base, |e| e.copy(src, dst))
}

/// `[dst] = [src]; [src] = 0`.
pub fn move_to(src: Reg, dst: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[src, dst], base, |e| e.move_to(src, dst))
}

/// `[dst] += [src]`.
pub fn add_nat(dst: Reg, src: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[dst, src], base, |e| e.add_into(dst, src))
}

/// `[dst] = max(0, [dst] - [src])`.
pub fn sub_nat(dst: Reg, src: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[dst, src], base, |e| e.sub_sat(dst, src))
}

/// `[dst] = [a] * [b]`.
pub fn mul_nat(dst: Reg, a: Reg, b: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    check(&[dst, a], base)?;
    check(&[dst, b], base)?;
    build(&[], base, |e| e.mul(dst, a, b))
}

/// `[q] = [n] div [d]; [r] = [n] mod [d]`, or `q = 0, r = n` when `d = 0`.
pub fn divmod(n: Reg, d: Reg, q: Reg, r: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[n, d, q, r], base, |e| e.divmod(n, d, q, r))
}

/// `[a] = gcd([a], [b]); [b] = 0`.
pub fn gcd(a: Reg, b: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[a, b], base, |e| e.gcd(a, b))
}

/// `[flag]` = 0, 1 or 2 as `[a]` is less than, equal to or greater than `[b]`.
pub fn compare(a: Reg, b: Reg, flag: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[a, b, flag], base, |e| {
        let lt = e.label();
        let eq = e.label();
        let gt = e.label();
        let done = e.label();
        e.compare(a, b, lt, eq, gt);
        for (l, v) in [(lt, 0), (eq, 1), (gt, 2)] {
            e.bind(l);
            e.set_const(flag, v);
            e.goto(done);
        }
        e.bind(done);
    })
}

/// `[a] = pair([a], [b])`.
pub fn pair(a: Reg, b: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[a, b], base, |e| e.pair(a, b))
}

/// `([n], [b]) = unpair([n])`.
pub fn unpair(n: Reg, b: Reg, base: Reg) -> Result<MacroSnippet, LayoutError> {
    build(&[n, b], base, |e| {
        let m = e.mark();
        let a = e.temp();
        e.unpair(n, a, b);
        e.move_to(a, n);
        e.release(m);
    })
}
