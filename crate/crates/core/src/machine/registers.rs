use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use super::program::Reg;

const EMPTY: u64 = u64::MAX;
/// Marks a dense cell whose value lives in the overflow map.
const BIG: u64 = u64::MAX - 1;
/// Registers at or above this index live in the sparse map.
const DENSE_LIMIT: usize = 1 << 20;

/// An unbounded array of registers, each empty or holding a natural.
///
/// Low registers with word-sized values take a fast path; anything larger
/// spills into maps keyed by register index.
#[derive(Clone, Default)]
pub struct RegisterFile {
    cells: Vec<u64>,
    big: BTreeMap<Reg, BigUint>,
    far: BTreeMap<Reg, BigUint>,
}

impl RegisterFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, V>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Reg, V)>,
        V: Into<BigUint>,
    {
        let mut regs = Self::new();
        for (i, v) in pairs {
            regs.set(i, v.into());
        }
        regs
    }

    pub fn is_empty(&self, i: Reg) -> bool {
        if i >= DENSE_LIMIT {
            return !self.far.contains_key(&i);
        }
        self.cells.get(i).is_none_or(|&c| c == EMPTY)
    }

    pub fn get(&self, i: Reg) -> Option<BigUint> {
        if i >= DENSE_LIMIT {
            return self.far.get(&i).cloned();
        }
        match self.cells.get(i).copied() {
            None | Some(EMPTY) => None,
            Some(BIG) => Some(self.big[&i].clone()),
            Some(c) => Some(BigUint::from(c)),
        }
    }

    /// Small-value read; `None` for empty registers and values that do not
    /// fit in a `u64`.
    pub fn get_u64(&self, i: Reg) -> Option<u64> {
        if i >= DENSE_LIMIT {
            return self.far.get(&i).and_then(ToPrimitive::to_u64);
        }
        match self.cells.get(i).copied() {
            None | Some(EMPTY) => None,
            Some(BIG) => self.big[&i].to_u64(),
            Some(c) => Some(c),
        }
    }

    pub fn set(&mut self, i: Reg, value: BigUint) {
        if i >= DENSE_LIMIT {
            self.far.insert(i, value);
            return;
        }
        let small = value.to_u64().filter(|&v| v < BIG);
        let cell = self.cell_mut(i);
        match small {
            Some(v) => {
                *cell = v;
                self.big.remove(&i);
            }
            None => {
                *cell = BIG;
                self.big.insert(i, value);
            }
        }
    }

    pub fn set_u64(&mut self, i: Reg, value: u64) {
        self.set(i, BigUint::from(value));
    }

    /// Makes register `i` empty again.
    pub fn clear(&mut self, i: Reg) {
        if i >= DENSE_LIMIT {
            self.far.remove(&i);
        } else if let Some(c) = self.cells.get_mut(i) {
            *c = EMPTY;
            self.big.remove(&i);
        }
    }

    pub fn zero(&mut self, i: Reg) {
        if i < DENSE_LIMIT {
            *self.cell_mut(i) = 0;
            self.big.remove(&i);
        } else {
            self.far.insert(i, BigUint::zero());
        }
    }

    /// `[i] += 1` if `R_i` holds a number; returns whether it did.
    #[inline]
    pub fn increment(&mut self, i: Reg) -> bool {
        if let Some(c) = self.cells.get_mut(i) {
            match *c {
                EMPTY => return false,
                v if v < BIG - 1 => {
                    *c = v + 1;
                    return true;
                }
                BIG => {
                    *self.big.get_mut(&i).expect("spilled value") += 1u32;
                    return true;
                }
                v => {
                    *c = BIG;
                    self.big.insert(i, BigUint::from(v) + 1u32);
                    return true;
                }
            }
        }
        match self.far.get_mut(&i) {
            Some(v) => {
                *v += 1u32;
                true
            }
            None => false,
        }
    }

    /// `[i] -= 1` if `R_i` holds a positive number; returns whether it did.
    #[inline]
    pub fn decrement(&mut self, i: Reg) -> bool {
        if let Some(c) = self.cells.get_mut(i) {
            match *c {
                EMPTY | 0 => return false,
                BIG => {
                    let v = self.big.get_mut(&i).expect("spilled value");
                    *v -= 1u32;
                    if let Some(small) = v.to_u64().filter(|&s| s < BIG) {
                        *c = small;
                        self.big.remove(&i);
                    }
                    return true;
                }
                v => {
                    *c = v - 1;
                    return true;
                }
            }
        }
        match self.far.get_mut(&i) {
            Some(v) if !v.is_zero() => {
                *v -= 1u32;
                true
            }
            _ => false,
        }
    }

    /// Whether `R_i` is empty or holds zero.
    #[inline]
    pub fn is_empty_or_zero(&self, i: Reg) -> bool {
        match self.cells.get(i).copied() {
            Some(c) => c == EMPTY || c == 0,
            None => self.far.get(&i).is_none_or(Zero::is_zero),
        }
    }

    /// Nonempty registers in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Reg, BigUint)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != EMPTY)
            .map(|(i, &c)| {
                let v = if c == BIG {
                    self.big[&i].clone()
                } else {
                    BigUint::from(c)
                };
                (i, v)
            })
            .chain(self.far.iter().map(|(&i, v)| (i, v.clone())))
    }

    pub fn nonempty_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != EMPTY).count() + self.far.len()
    }

    fn cell_mut(&mut self, i: Reg) -> &mut u64 {
        if i >= self.cells.len() {
            self.cells.resize(i + 1, EMPTY);
        }
        &mut self.cells[i]
    }
}

impl PartialEq for RegisterFile {
    fn eq(&self, other: &Self) -> bool {
        self.iter().eq(other.iter())
    }
}

impl Eq for RegisterFile {}

impl fmt::Debug for RegisterFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}
