use std::fmt;

use thiserror::Error;

pub type Reg = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MachineKind {
    Abacus,
    Rnn,
}

impl fmt::Display for MachineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MachineKind::Abacus => "abacus",
            MachineKind::Rnn => "rnn",
        })
    }
}

impl std::str::FromStr for MachineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "abacus" => Ok(MachineKind::Abacus),
            "rnn" => Ok(MachineKind::Rnn),
            _ => Err(format!("unknown machine kind `{s}` (expected abacus or rnn)")),
        }
    }
}

/// One machine instruction. Conditional instructions carry a jump `target`
/// taken when their condition fails.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Instruction {
    Halt,
    Zero {
        reg: Reg,
    },
    Increase {
        reg: Reg,
        target: usize,
    },
    Decrease {
        reg: Reg,
        target: usize,
    },
    Add {
        lhs: Reg,
        rhs: Reg,
        dst: Reg,
        target: usize,
    },
    Multiply {
        rows: Vec<Reg>,
        vec: Reg,
        dst: Reg,
        target: usize,
    },
    NonLinear {
        src: Reg,
        dst: Reg,
        target: usize,
    },
}

impl Instruction {
    pub fn is_vector_op(&self) -> bool {
        matches!(
            self,
            Instruction::Add { .. } | Instruction::Multiply { .. } | Instruction::NonLinear { .. }
        )
    }

    pub fn target(&self) -> Option<usize> {
        match self {
            Instruction::Halt | Instruction::Zero { .. } => None,
            Instruction::Increase { target, .. }
            | Instruction::Decrease { target, .. }
            | Instruction::Add { target, .. }
            | Instruction::Multiply { target, .. }
            | Instruction::NonLinear { target, .. } => Some(*target),
        }
    }

    /// Rewrites the jump target, if any.
    pub fn map_target(&self, f: impl FnOnce(usize) -> usize) -> Instruction {
        let mut out = self.clone();
        match &mut out {
            Instruction::Halt | Instruction::Zero { .. } => {}
            Instruction::Increase { target, .. }
            | Instruction::Decrease { target, .. }
            | Instruction::Add { target, .. }
            | Instruction::Multiply { target, .. }
            | Instruction::NonLinear { target, .. } => *target = f(*target),
        }
        out
    }

    /// Rewrites every register operand.
    pub fn map_regs(&self, f: impl Fn(Reg) -> Reg) -> Instruction {
        match self {
            Instruction::Halt => Instruction::Halt,
            Instruction::Zero { reg } => Instruction::Zero { reg: f(*reg) },
            Instruction::Increase { reg, target } => Instruction::Increase {
                reg: f(*reg),
                target: *target,
            },
            Instruction::Decrease { reg, target } => Instruction::Decrease {
                reg: f(*reg),
                target: *target,
            },
            Instruction::Add {
                lhs,
                rhs,
                dst,
                target,
            } => Instruction::Add {
                lhs: f(*lhs),
                rhs: f(*rhs),
                dst: f(*dst),
                target: *target,
            },
            Instruction::Multiply {
                rows,
                vec,
                dst,
                target,
            } => Instruction::Multiply {
                rows: rows.iter().map(|&r| f(r)).collect(),
                vec: f(*vec),
                dst: f(*dst),
                target: *target,
            },
            Instruction::NonLinear { src, dst, target } => Instruction::NonLinear {
                src: f(*src),
                dst: f(*dst),
                target: *target,
            },
        }
    }

    /// Register indices named directly by the instruction.
    pub fn operands(&self) -> Vec<Reg> {
        match self {
            Instruction::Halt => vec![],
            Instruction::Zero { reg }
            | Instruction::Increase { reg, .. }
            | Instruction::Decrease { reg, .. } => vec![*reg],
            Instruction::Add { lhs, rhs, dst, .. } => vec![*lhs, *rhs, *dst],
            Instruction::Multiply { rows, vec, dst, .. } => {
                let mut regs = rows.clone();
                regs.push(*vec);
                regs.push(*dst);
                regs
            }
            Instruction::NonLinear { src, dst, .. } => vec![*src, *dst],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProgramError {
    #[error("instruction {index}: jump target {target} exceeds program length {len}")]
    TargetOutOfRange {
        index: usize,
        target: usize,
        len: usize,
    },
    #[error("instruction {index}: vector instruction in an abacus program")]
    VectorOpInAbacus { index: usize },
    #[error("instruction {index}: multiply needs at least one row")]
    EmptyRows { index: usize },
}

/// A validated instruction list for one machine kind.
///
/// Jump targets range over `0..=len`; a target equal to the length acts as
/// an implicit halt.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    kind: MachineKind,
    instrs: Vec<Instruction>,
}

impl Program {
    pub fn new(kind: MachineKind, instrs: Vec<Instruction>) -> Result<Self, ProgramError> {
        let len = instrs.len();
        for (index, instr) in instrs.iter().enumerate() {
            if kind == MachineKind::Abacus && instr.is_vector_op() {
                return Err(ProgramError::VectorOpInAbacus { index });
            }
            if let Instruction::Multiply { rows, .. } = instr {
                if rows.is_empty() {
                    return Err(ProgramError::EmptyRows { index });
                }
            }
            if let Some(target) = instr.target() {
                if target > len {
                    return Err(ProgramError::TargetOutOfRange { index, target, len });
                }
            }
        }
        Ok(Program { kind, instrs })
    }

    pub fn abacus(instrs: Vec<Instruction>) -> Result<Self, ProgramError> {
        Self::new(MachineKind::Abacus, instrs)
    }

    pub fn rnn(instrs: Vec<Instruction>) -> Result<Self, ProgramError> {
        Self::new(MachineKind::Rnn, instrs)
    }

    pub fn kind(&self) -> MachineKind {
        self.kind
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

    /// Same instructions under another kind; fails if an abacus program
    /// would contain vector instructions.
    pub fn with_kind(&self, kind: MachineKind) -> Result<Self, ProgramError> {
        Self::new(kind, self.instrs.clone())
    }

    /// Appends instructions that can never execute. A trailing `Halt` takes
    /// the place of the implicit halt at the old end, so the computed
    /// function and every step count are unchanged.
    pub fn pad_unreachable(&self, junk: &[Instruction]) -> Self {
        let mut instrs = self.instrs.clone();
        instrs.push(Instruction::Halt);
        let len = instrs.len() + junk.len();
        instrs.extend(junk.iter().map(|i| i.map_target(|t| t.min(len))));
        Program::new(self.kind, instrs).expect("padding keeps targets in range")
    }

    /// Highest register index named by any instruction, if any.
    pub fn max_register(&self) -> Option<Reg> {
        self.instrs.iter().flat_map(Instruction::operands).max()
    }
}
