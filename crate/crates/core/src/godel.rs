//! Computable bijections between naturals and the objects the machines
//! manipulate.
//!
//! * pairs: Cantor pairing `pair(a, b) = (a+b)(a+b+1)/2 + b`
//! * rationals: `0 -> 0`, `2m-1 -> +cw(m)`, `2m -> -cw(m)` where `cw` is the
//!   Calkin–Wilf enumeration of the positive rationals
//! * vectors: `pair(arity - 1, c_1 ⊕ (c_2 ⊕ ... c_n))` with `⊕` = `pair`,
//!   right-nested over the coordinate codes
//! * sequences: empty `-> 0`, `head :: tail -> 1 + pair(vec(head), seq(tail))`
//! * programs: empty `-> 0`, otherwise `1 + pair(len - 1, i_1 ⊕ ... i_len)`
//!   over instruction codes in which every jump target is reduced modulo
//!   `len + 1`; every natural decodes to some RNN program.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::machine::{run_rnn, Instruction, MachineError, Program, Reg, RnnOutcome};
use crate::numeric::{RVector, Rational, VecSeq};

/// Largest arity or program length decoded into memory.
const MAX_DECODED_LEN: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GodelError {
    #[error("decoded {0} does not fit in memory")]
    Oversized(&'static str),
    #[error(transparent)]
    Machine(#[from] MachineError),
}

pub fn pair(a: &BigUint, b: &BigUint) -> BigUint {
    let w = a + b;
    ((&w * (&w + 1u32)) >> 1usize) + b
}

pub fn unpair(n: &BigUint) -> (BigUint, BigUint) {
    let w = ((n * 8u32 + 1u32).sqrt() - 1u32) >> 1usize;
    let t = (&w * (&w + 1u32)) >> 1usize;
    let b = n - t;
    let a = &w - &b;
    (a, b)
}

pub fn pair_u64(a: u64, b: u64) -> BigUint {
    pair(&a.into(), &b.into())
}

/// The `m`-th positive rational (1-based) in Calkin–Wilf order.
pub fn calkin_wilf(m: &BigUint) -> (BigUint, BigUint) {
    assert!(!m.is_zero(), "Calkin–Wilf enumeration starts at 1");
    let (mut a, mut b) = (BigUint::one(), BigUint::one());
    for i in (0..m.bits() - 1).rev() {
        if m.bit(i) {
            a += &b;
        } else {
            b += &a;
        }
    }
    (a, b)
}

/// Position of the positive rational `a/b` (in lowest terms) in Calkin–Wilf
/// order.
pub fn calkin_wilf_index(a: &BigUint, b: &BigUint) -> BigUint {
    let (mut a, mut b) = (a.clone(), b.clone());
    let mut index = BigUint::zero();
    let mut pos = 0u64;
    while a != b {
        if a < b {
            // Run of left moves, each contributing a 0 bit.
            let k = (&b - 1u32) / &a;
            b -= &k * &a;
            pos += k.to_u64().expect("run length fits in memory");
        } else {
            let k = (&a - 1u32) / &b;
            a -= &k * &b;
            let run = k.to_u64().expect("run length fits in memory");
            index += ((BigUint::one() << run) - 1u32) << pos;
            pos += run;
        }
    }
    index + (BigUint::one() << pos)
}

pub fn nat_to_rat(n: &BigUint) -> Rational {
    if n.is_zero() {
        return Rational::zero();
    }
    let negative = n.is_even();
    let m = if negative { n >> 1usize } else { (n + 1u32) >> 1usize };
    let (a, b) = calkin_wilf(&m);
    Rational::from_parts(negative, a, b).expect("nonzero denominator")
}

pub fn rat_to_nat(q: &Rational) -> BigUint {
    if q.is_zero() {
        return BigUint::zero();
    }
    let m = calkin_wilf_index(q.numer(), q.denom());
    if q.is_negative() {
        m << 1usize
    } else {
        (m << 1usize) - 1u32
    }
}

/// Right-nested pairing of a nonempty list of codes.
fn nest(codes: &[BigUint]) -> BigUint {
    let (last, init) = codes.split_last().expect("nonempty list");
    init.iter().rev().fold(last.clone(), |acc, c| pair(c, &acc))
}

fn unnest(mut code: BigUint, count: usize) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(count);
    for _ in 1..count {
        let (head, rest) = unpair(&code);
        out.push(head);
        code = rest;
    }
    out.push(code);
    out
}

/// A nonempty list of naturals: `pair(len - 1, nest(items))`.
fn list_encode(items: &[BigUint]) -> BigUint {
    pair(&BigUint::from(items.len() - 1), &nest(items))
}

fn list_decode(code: &BigUint, what: &'static str) -> Result<Vec<BigUint>, GodelError> {
    let (len_minus_one, body) = unpair(code);
    let len = len_minus_one
        .to_usize()
        .filter(|&n| n < MAX_DECODED_LEN)
        .ok_or(GodelError::Oversized(what))?
        + 1;
    Ok(unnest(body, len))
}

pub fn vec_encode(v: &RVector) -> BigUint {
    let codes: Vec<BigUint> = v.iter().map(rat_to_nat).collect();
    list_encode(&codes)
}

pub fn vec_decode(code: &BigUint) -> Result<RVector, GodelError> {
    let elems = list_decode(code, "vector arity")?
        .iter()
        .map(nat_to_rat)
        .collect();
    Ok(RVector::new(elems).expect("nonempty"))
}

/// The bijection `b` from sequences to naturals.
pub fn seq_encode(x: &VecSeq) -> BigUint {
    x.iter()
        .rev()
        .fold(BigUint::zero(), |acc, v| pair(&vec_encode(v), &acc) + 1u32)
}

/// The inverse bijection `b⁻¹`.
pub fn seq_decode(n: &BigUint) -> Result<VecSeq, GodelError> {
    let mut vecs = Vec::new();
    let mut n = n.clone();
    while !n.is_zero() {
        let (head, tail) = unpair(&(n - 1u32));
        vecs.push(vec_decode(&head)?);
        n = tail;
    }
    Ok(VecSeq::new(vecs))
}

const KINDS: u32 = 6;

fn big(r: Reg) -> BigUint {
    BigUint::from(r)
}

fn small(n: &BigUint, what: &'static str) -> Result<usize, GodelError> {
    n.to_usize().ok_or(GodelError::Oversized(what))
}

fn instr_encode(instr: &Instruction, targets: &BigUint) -> BigUint {
    let with_target = |fields: BigUint, q: usize| fields * targets + q;
    let (kind, rest) = match instr {
        Instruction::Halt => return BigUint::zero(),
        Instruction::Zero { reg } => (0u32, big(*reg)),
        Instruction::Increase { reg, target } => (1, with_target(big(*reg), *target)),
        Instruction::Decrease { reg, target } => (2, with_target(big(*reg), *target)),
        Instruction::Add {
            lhs,
            rhs,
            dst,
            target,
        } => (
            3,
            with_target(pair(&big(*lhs), &pair(&big(*rhs), &big(*dst))), *target),
        ),
        Instruction::Multiply {
            rows,
            vec,
            dst,
            target,
        } => {
            let rows: Vec<BigUint> = rows.iter().map(|&r| big(r)).collect();
            let fields = pair(&list_encode(&rows), &pair(&big(*vec), &big(*dst)));
            (4, with_target(fields, *target))
        }
        Instruction::NonLinear { src, dst, target } => {
            (5, with_target(pair(&big(*src), &big(*dst)), *target))
        }
    };
    rest * KINDS + kind + 1u32
}

fn instr_decode(code: &BigUint, targets: &BigUint) -> Result<Instruction, GodelError> {
    if code.is_zero() {
        return Ok(Instruction::Halt);
    }
    let (rest, kind) = (code - 1u32).div_rem(&BigUint::from(KINDS));
    if kind.is_zero() {
        return Ok(Instruction::Zero {
            reg: small(&rest, "register")?,
        });
    }
    let (fields, target) = rest.div_rem(targets);
    let target = small(&target, "target")?;
    let reg = |n: &BigUint| small(n, "register");
    Ok(match kind.to_u32().expect("kind below 6") {
        1 => Instruction::Increase {
            reg: reg(&fields)?,
            target,
        },
        2 => Instruction::Decrease {
            reg: reg(&fields)?,
            target,
        },
        3 => {
            let (lhs, rest) = unpair(&fields);
            let (rhs, dst) = unpair(&rest);
            Instruction::Add {
                lhs: reg(&lhs)?,
                rhs: reg(&rhs)?,
                dst: reg(&dst)?,
                target,
            }
        }
        4 => {
            let (rows, rest) = unpair(&fields);
            let (vec, dst) = unpair(&rest);
            Instruction::Multiply {
                rows: list_decode(&rows, "row list")?
                    .iter()
                    .map(reg)
                    .collect::<Result<_, _>>()?,
                vec: reg(&vec)?,
                dst: reg(&dst)?,
                target,
            }
        }
        5 => {
            let (src, dst) = unpair(&fields);
            Instruction::NonLinear {
                src: reg(&src)?,
                dst: reg(&dst)?,
                target,
            }
        }
        _ => unreachable!("kind below 6"),
    })
}

/// The description of a program. The machine kind is not part of the
/// description: every description denotes an RNN machine.
pub fn program_encode(p: &Program) -> BigUint {
    if p.is_empty() {
        return BigUint::zero();
    }
    let targets = BigUint::from(p.len() + 1);
    let codes: Vec<BigUint> = p.instrs().iter().map(|i| instr_encode(i, &targets)).collect();
    list_encode(&codes) + 1u32
}

/// The RNN machine `N_e` with description `e`.
pub fn program_decode(e: &BigUint) -> Result<Program, GodelError> {
    if e.is_zero() {
        return Ok(Program::rnn(vec![]).expect("empty program"));
    }
    let codes = list_decode(&(e - 1u32), "program length")?;
    let targets = BigUint::from(codes.len() + 1);
    let instrs = codes
        .iter()
        .map(|c| instr_decode(c, &targets))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Program::rnn(instrs).expect("targets reduced into range"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsiOutcome {
    Output { value: BigUint, steps: u64 },
    HaltedMalformed { steps: u64 },
    BudgetExceeded { steps: u64 },
}

impl PsiOutcome {
    pub fn value(&self) -> Option<&BigUint> {
        match self {
            PsiOutcome::Output { value, .. } => Some(value),
            _ => None,
        }
    }
}

/// `b ∘ ψ_p ∘ b⁻¹` evaluated on the host.
pub fn psi_prime(p: &Program, n: &BigUint, budget: u64) -> Result<PsiOutcome, GodelError> {
    let x = seq_decode(n)?;
    Ok(match run_rnn(p, &x, budget)? {
        RnnOutcome::Output { y, steps } => PsiOutcome::Output {
            value: seq_encode(&y),
            steps,
        },
        RnnOutcome::HaltedMalformed { steps } => PsiOutcome::HaltedMalformed { steps },
        RnnOutcome::BudgetExceeded { steps } => PsiOutcome::BudgetExceeded { steps },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn n(v: u64) -> BigUint {
        BigUint::from(v)
    }

    fn r(a: i64, b: u64) -> Rational {
        Rational::new(a, b).unwrap()
    }

    #[test]
    fn pairing_examples() {
        assert_eq!(pair_u64(0, 0), n(0));
        assert_eq!(pair_u64(2, 1), n(7));
        assert_eq!(unpair(&n(7)), (n(2), n(1)));
        for k in 0..2000u64 {
            let (a, b) = unpair(&n(k));
            assert_eq!(pair(&a, &b), n(k));
        }
    }

    /// Successor rule `next(q) = 1 / (2⌊q⌋ - q + 1)`, independent of the
    /// bit-walk used by the implementation.
    fn cw_by_successor(count: usize) -> Vec<Rational> {
        let mut out = vec![Rational::one()];
        while out.len() < count {
            let q = out.last().unwrap();
            let floor = Rational::from_nat(q.floor_nat());
            let two_floor = &floor + &floor;
            let denom = &(&two_floor - q) + &Rational::one();
            out.push(denom.recip().unwrap());
        }
        out
    }

    #[test]
    fn calkin_wilf_matches_successor_rule() {
        let seq = cw_by_successor(500);
        for (i, q) in seq.iter().enumerate() {
            let m = n(i as u64 + 1);
            let (a, b) = calkin_wilf(&m);
            assert_eq!(Rational::from_parts(false, a, b).unwrap(), *q, "cw({m})");
            assert_eq!(calkin_wilf_index(q.numer(), q.denom()), m);
        }
    }

    #[test]
    fn rational_codec_examples() {
        assert_eq!(nat_to_rat(&n(0)), Rational::zero());
        assert_eq!(nat_to_rat(&n(5)), r(2, 1));
        assert_eq!(nat_to_rat(&n(6)), r(-2, 1));
        assert_eq!(rat_to_nat(&r(1, 2)), n(3));
        for k in 0..10_000u64 {
            assert_eq!(rat_to_nat(&nat_to_rat(&n(k))), n(k));
        }
        assert_eq!(rat_to_nat(&r(8, 1)), n(509));
    }

    #[test]
    fn sequence_codec_examples() {
        let seq = |v: Vec<RVector>| VecSeq::new(v);
        let vr = |a, b| RVector::from_ratios(&[(a, b)]).unwrap();
        assert_eq!(seq_encode(&VecSeq::empty()), n(0));
        assert_eq!(seq_encode(&seq(vec![vr(0, 1)])), n(1));
        assert_eq!(seq_encode(&seq(vec![vr(1, 2)])), n(46));
        assert_eq!(seq_encode(&seq(vec![vr(1, 1)])), n(4));
        assert_eq!(seq_encode(&seq(vec![vr(0, 1), vr(0, 1)])), n(3));
        assert_eq!(seq_decode(&n(46)).unwrap(), seq(vec![vr(1, 2)]));
        assert_eq!(
            seq_decode(&n(2)).unwrap(),
            seq(vec![RVector::from_ints(&[0, 0]).unwrap()])
        );
    }

    #[test]
    fn program_codec_examples() {
        assert_eq!(program_decode(&n(0)).unwrap(), Program::rnn(vec![]).unwrap());
        let succ = fixtures::succ_rnn();
        assert_eq!(program_decode(&program_encode(&succ)).unwrap(), succ);
        for e in 0..3000u64 {
            let p = program_decode(&n(e)).unwrap();
            assert_eq!(program_encode(&p), n(e), "e = {e}");
        }
    }

    #[test]
    fn psi_prime_examples() {
        let out = psi_prime(&fixtures::double(), &n(46), 100).unwrap();
        assert_eq!(out.value(), Some(&n(4)));
        for k in [0u64, 1, 2, 46, 999] {
            assert_eq!(psi_prime(&fixtures::identity(), &n(k), 10).unwrap().value(), Some(&n(k)));
        }
        let looping = Program::rnn(vec![
            Instruction::Zero { reg: 0 },
            Instruction::Decrease { reg: 0, target: 1 },
        ])
        .unwrap();
        assert!(matches!(
            psi_prime(&looping, &n(3), 1000).unwrap(),
            PsiOutcome::BudgetExceeded { .. }
        ));
    }
}
