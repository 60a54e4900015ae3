//! Exact rationals in sign-magnitude form, rational vectors, and sequences
//! of vectors.
//!
//! Every [`Rational`] is kept in canonical form: lowest terms, a positive
//! denominator, and a non-negative sign for zero. Equality is therefore
//! structural, which the metric and codec layers rely on.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("arity mismatch: {0} vs {1}")]
    ArityMismatch(usize, usize),
    #[error("a vector must have at least one element")]
    EmptyVector,
    #[error("invalid rational literal `{0}`")]
    Syntax(String),
}

/// A rational number `(-1)^sign * num / den` in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational {
    negative: bool,
    num: BigUint,
    den: BigUint,
}

impl Rational {
    /// Canonicalizes an arbitrary sign/numerator/denominator triple.
    pub fn from_parts(negative: bool, num: BigUint, den: BigUint) -> Result<Self, NumericError> {
        if den.is_zero() {
            return Err(NumericError::ZeroDenominator);
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let g = num.gcd(&den);
        Ok(Rational {
            negative,
            num: num / &g,
            den: den / g,
        })
    }

    /// Same as [`from_parts`](Self::from_parts) with the register-level sign
    /// convention (0 or 1; any other value is treated as negative).
    pub fn canon(sign: u8, num: BigUint, den: BigUint) -> Result<Self, NumericError> {
        Self::from_parts(sign != 0, num, den)
    }

    pub fn new(num: i64, den: u64) -> Result<Self, NumericError> {
        Self::from_parts(num < 0, BigUint::from(num.unsigned_abs()), BigUint::from(den))
    }

    pub fn zero() -> Self {
        Rational {
            negative: false,
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn one() -> Self {
        Self::from(1)
    }

    pub fn from_nat(n: BigUint) -> Self {
        Rational {
            negative: false,
            num: n,
            den: BigUint::one(),
        }
    }

    pub fn sign(&self) -> u8 {
        self.negative as u8
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn numer(&self) -> &BigUint {
        &self.num
    }

    pub fn denom(&self) -> &BigUint {
        &self.den
    }

    pub fn abs(&self) -> Self {
        Rational {
            negative: false,
            ..self.clone()
        }
    }

    /// ReLU: `max(0, self)`.
    pub fn max0(&self) -> Self {
        if self.negative {
            Self::zero()
        } else {
            self.clone()
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        Some(Rational {
            negative: self.negative,
            num: self.den.clone(),
            den: self.num.clone(),
        })
    }

    pub fn checked_div(&self, rhs: &Rational) -> Option<Self> {
        rhs.recip().map(|r| self * &r)
    }

    /// Division by a positive natural count, used for averages.
    pub fn div_count(&self, count: usize) -> Self {
        assert!(count > 0, "average over an empty collection");
        Self::from_parts(self.negative, self.num.clone(), &self.den * BigUint::from(count))
            .expect("nonzero denominator")
    }

    /// `floor(self)` for non-negative values, as a natural.
    pub fn floor_nat(&self) -> BigUint {
        debug_assert!(!self.negative);
        &self.num / &self.den
    }

    /// Multiply by `2^-k`.
    pub fn halve_times(&self, k: u32) -> Self {
        Self::from_parts(self.negative, self.num.clone(), &self.den << k as usize)
            .expect("nonzero denominator")
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::new(n, 1).expect("nonzero denominator")
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negative {
            f.write_str("-")?;
        }
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for Rational {
    type Err = NumericError;

    /// Accepts an optional `-` followed by `a` or `a/b` in decimal.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let syntax = || NumericError::Syntax(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let digits = |t: &str| -> Result<BigUint, NumericError> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(syntax());
            }
            t.parse::<BigUint>().map_err(|_| syntax())
        };
        match body.split_once('/') {
            Some((a, b)) => Self::from_parts(negative, digits(a)?, digits(b)?),
            None => Self::from_parts(negative, digits(body)?, BigUint::one()),
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.negative, other.negative) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (neg, _) => {
                let mag = (&self.num * &other.den).cmp(&(&other.num * &self.den));
                if neg {
                    mag.reverse()
                } else {
                    mag
                }
            }
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> Add<&'a Rational> for &'a Rational {
    type Output = Rational;

    fn add(self, rhs: &'a Rational) -> Rational {
        let lhs_n = &self.num * &rhs.den;
        let rhs_n = &rhs.num * &self.den;
        let den = &self.den * &rhs.den;
        let (negative, num) = if self.negative == rhs.negative {
            (self.negative, lhs_n + rhs_n)
        } else if lhs_n >= rhs_n {
            (self.negative, lhs_n - rhs_n)
        } else {
            (rhs.negative, rhs_n - lhs_n)
        };
        Rational::from_parts(negative, num, den).expect("nonzero denominator")
    }
}

impl<'a> Sub<&'a Rational> for &'a Rational {
    type Output = Rational;

    fn sub(self, rhs: &'a Rational) -> Rational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Rational> for &'a Rational {
    type Output = Rational;

    fn mul(self, rhs: &'a Rational) -> Rational {
        Rational::from_parts(
            self.negative != rhs.negative,
            &self.num * &rhs.num,
            &self.den * &rhs.den,
        )
        .expect("nonzero denominator")
    }
}

impl Neg for &Rational {
    type Output = Rational;

    fn neg(self) -> Rational {
        if self.is_zero() {
            return self.clone();
        }
        Rational {
            negative: !self.negative,
            ..self.clone()
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                (&self).$m(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Rational {
    type Output = Rational;

    fn neg(self) -> Rational {
        -&self
    }
}

/// Choice of the vector norm wherever `‖u − v‖` appears.
///
/// Both options stay inside the rationals; Euclidean norm does not and is
/// not offered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Norm {
    #[default]
    Linf,
    L1,
}

impl FromStr for Norm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "linf" => Ok(Norm::Linf),
            "l1" => Ok(Norm::L1),
            other => Err(format!("unknown norm `{other}` (expected linf or l1)")),
        }
    }
}

/// A rational vector of arity at least one.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RVector(Vec<Rational>);

impl RVector {
    pub fn new(elems: Vec<Rational>) -> Result<Self, NumericError> {
        if elems.is_empty() {
            return Err(NumericError::EmptyVector);
        }
        Ok(RVector(elems))
    }

    /// Convenience constructor from integer pairs `(num, den)`.
    pub fn from_ratios(elems: &[(i64, u64)]) -> Result<Self, NumericError> {
        let elems = elems
            .iter()
            .map(|&(n, d)| Rational::new(n, d))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(elems)
    }

    pub fn from_ints(elems: &[i64]) -> Result<Self, NumericError> {
        Self::new(elems.iter().map(|&n| Rational::from(n)).collect())
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn elems(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_elems(self) -> Vec<Rational> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn get(&self, k: usize) -> Option<&Rational> {
        self.0.get(k)
    }

    /// Replaces coordinate `k`; panics when out of range.
    pub fn with_elem(&self, k: usize, value: Rational) -> Self {
        let mut elems = self.0.clone();
        elems[k] = value;
        RVector(elems)
    }

    pub fn relu(&self) -> Self {
        RVector(self.0.iter().map(Rational::max0).collect())
    }

    pub fn checked_add(&self, other: &RVector) -> Result<Self, NumericError> {
        self.check_arity(other)?;
        Ok(RVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn dot(&self, other: &RVector) -> Result<Rational, NumericError> {
        self.check_arity(other)?;
        Ok(self
            .0
            .iter()
            .zip(&other.0)
            .fold(Rational::zero(), |acc, (a, b)| &acc + &(a * b)))
    }

    pub fn dist(&self, other: &RVector, norm: Norm) -> Result<Rational, NumericError> {
        self.check_arity(other)?;
        let diffs = self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs());
        Ok(match norm {
            Norm::Linf => diffs.max().unwrap_or_default(),
            Norm::L1 => diffs.fold(Rational::zero(), |acc, d| &acc + &d),
        })
    }

    fn check_arity(&self, other: &RVector) -> Result<(), NumericError> {
        if self.arity() != other.arity() {
            return Err(NumericError::ArityMismatch(self.arity(), other.arity()));
        }
        Ok(())
    }
}

impl fmt::Debug for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for RVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, r) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{r}")?;
        }
        f.write_str(")")
    }
}

/// `max_k |u_k - v_k|`, the default vector distance.
pub fn linf_dist(u: &RVector, v: &RVector) -> Result<Rational, NumericError> {
    u.dist(v, Norm::Linf)
}

/// A finite, possibly empty, sequence of rational vectors whose arities may
/// differ.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct VecSeq(Vec<RVector>);

impl VecSeq {
    pub fn new(vecs: Vec<RVector>) -> Self {
        VecSeq(vecs)
    }

    pub fn empty() -> Self {
        VecSeq(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn vecs(&self) -> &[RVector] {
        &self.0
    }

    pub fn into_vecs(self) -> Vec<RVector> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, RVector> {
        self.0.iter()
    }

    /// Arity of every vector, in order.
    pub fn shape(&self) -> Vec<usize> {
        self.0.iter().map(RVector::arity).collect()
    }

    /// Replaces one coordinate of one vector; panics when out of range.
    pub fn with_elem(&self, pos: usize, k: usize, value: Rational) -> Self {
        let mut vecs = self.0.clone();
        vecs[pos] = vecs[pos].with_elem(k, value);
        VecSeq(vecs)
    }
}

impl From<Vec<RVector>> for VecSeq {
    fn from(v: Vec<RVector>) -> Self {
        VecSeq(v)
    }
}

impl fmt::Debug for VecSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for VecSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}
