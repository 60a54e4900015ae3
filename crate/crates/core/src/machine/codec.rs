//! Register layouts for rationals, vectors and sequences.
//!
//! * rational at `i`: `[i]` sign, `[i+1]` numerator, `[i+2]` denominator
//! * vector at `i`: `[i]` arity `n >= 1`, then `n` rationals at `i+1+3(k-1)`
//! * sequence at `i`: `[i]` length `s`, then each vector with its own arity
//!   header, packed back to back (`s + 3(n_1 + ... + n_s)` registers)

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use super::program::Reg;
use super::registers::RegisterFile;
use crate::numeric::{RVector, Rational, VecSeq};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Malformed {
    #[error("register {0} is empty")]
    EmptyRegister(Reg),
    #[error("register {0} holds a sign other than 0 or 1")]
    BadSign(Reg),
    #[error("register {0} holds a zero denominator")]
    ZeroDenominator(Reg),
    #[error("register {0} holds arity 0")]
    ZeroArity(Reg),
    #[error("register {0} holds a count too large to be backed by registers")]
    Oversized(Reg),
}

fn require(regs: &RegisterFile, i: Reg) -> Result<BigUint, Malformed> {
    regs.get(i).ok_or(Malformed::EmptyRegister(i))
}

/// Reads a count header. A count above the number of occupied registers
/// can never be satisfied, so it is rejected without scanning.
fn require_count(regs: &RegisterFile, i: Reg) -> Result<usize, Malformed> {
    let n = require(regs, i)?;
    n.to_usize()
        .filter(|&n| n <= regs.nonempty_count())
        .ok_or(Malformed::Oversized(i))
}

pub fn store_rational(regs: &mut RegisterFile, base: Reg, r: &Rational) {
    regs.set_u64(base, r.sign() as u64);
    regs.set(base + 1, r.numer().clone());
    regs.set(base + 2, r.denom().clone());
}

/// Accepts any nonzero denominator and canonicalizes on read.
pub fn load_rational(regs: &RegisterFile, base: Reg) -> Result<Rational, Malformed> {
    let sign = require(regs, base)?;
    let num = require(regs, base + 1)?;
    let den = require(regs, base + 2)?;
    let sign = match sign.to_u8() {
        Some(s @ (0 | 1)) => s,
        _ => return Err(Malformed::BadSign(base)),
    };
    if den.is_zero() {
        return Err(Malformed::ZeroDenominator(base + 2));
    }
    Ok(Rational::canon(sign, num, den).expect("checked denominator"))
}

/// Number of registers a stored vector of arity `n` occupies.
pub fn vector_span(n: usize) -> usize {
    1 + 3 * n
}

pub fn store_vector(regs: &mut RegisterFile, base: Reg, v: &RVector) {
    regs.set_u64(base, v.arity() as u64);
    for (k, r) in v.iter().enumerate() {
        store_rational(regs, base + 1 + 3 * k, r);
    }
}

/// The "determines a vector" predicate, returning the vector on success.
pub fn load_vector(regs: &RegisterFile, base: Reg) -> Result<RVector, Malformed> {
    let n = require_count(regs, base)?;
    if n == 0 {
        return Err(Malformed::ZeroArity(base));
    }
    let elems = (0..n)
        .map(|k| load_rational(regs, base + 1 + 3 * k))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RVector::new(elems).expect("nonzero arity"))
}

/// Register offset, relative to the sequence base, of each vector header.
pub fn sequence_offsets(shape: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(shape.len());
    let mut at = 1;
    for &n in shape {
        offsets.push(at);
        at += vector_span(n);
    }
    offsets
}

pub fn store_sequence(regs: &mut RegisterFile, base: Reg, x: &VecSeq) {
    regs.set_u64(base, x.len() as u64);
    for (v, off) in x.iter().zip(sequence_offsets(&x.shape())) {
        store_vector(regs, base + off, v);
    }
}

pub fn load_sequence(regs: &RegisterFile, base: Reg) -> Result<VecSeq, Malformed> {
    let s = require_count(regs, base)?;
    let mut vecs = Vec::with_capacity(s);
    let mut at = base + 1;
    for _ in 0..s {
        let v = load_vector(regs, at)?;
        at += vector_span(v.arity());
        vecs.push(v);
    }
    Ok(VecSeq::new(vecs))
}
