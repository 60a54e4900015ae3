//! Exact rational arithmetic on register triples, the Calkin-Wilf and
//! pairing codecs, and conversion between coded naturals and the stored
//! sequence layout. Everything here is plain abacus code.

use super::emitter::{Emitter, Label, LabelMap};
use super::ShapeBound;
use crate::machine::Reg;

#[derive(Debug, Clone, Copy)]
pub(crate) struct RatRegs {
    pub s: Reg,
    pub a: Reg,
    pub b: Reg,
}

/// Staging for one vector of arity at most `W`.
#[derive(Debug, Clone)]
pub(crate) struct VecBank {
    pub arity: Reg,
    pub coords: Vec<RatRegs>,
}

/// Staging for one sequence within a shape bound.
#[derive(Debug, Clone)]
pub(crate) struct SeqBank {
    pub len: Reg,
    pub vecs: Vec<VecBank>,
}

impl Emitter {
    pub fn rat_regs(&mut self) -> RatRegs {
        RatRegs {
            s: self.alloc(),
            a: self.alloc(),
            b: self.alloc(),
        }
    }

    pub fn vec_bank(&mut self, width: usize) -> VecBank {
        VecBank {
            arity: self.alloc(),
            coords: (0..width).map(|_| self.rat_regs()).collect(),
        }
    }

    pub fn seq_bank(&mut self, bound: ShapeBound) -> SeqBank {
        SeqBank {
            len: self.alloc(),
            vecs: (0..bound.max_len)
                .map(|_| self.vec_bank(bound.max_arity))
                .collect(),
        }
    }

    pub fn set_rat_zero(&mut self, x: RatRegs) {
        self.zero(x.s);
        self.zero(x.a);
        self.set_const(x.b, 1);
    }

    pub fn copy_rat(&mut self, from: RatRegs, to: RatRegs) {
        self.copy(from.s, to.s);
        self.copy(from.a, to.a);
        self.copy(from.b, to.b);
    }

    /// Divides numerator and denominator by their gcd; zero becomes
    /// `(0, 0, 1)`. The denominator must be positive.
    pub fn canonicalize(&mut self, x: RatRegs) {
        let m = self.mark();
        let is_zero = self.label();
        let done = self.label();
        self.branch_zero(x.a, is_zero);
        let g = self.temp();
        let t = self.temp();
        let q = self.temp();
        let r = self.temp();
        self.copy(x.a, g);
        self.copy(x.b, t);
        self.gcd(g, t);
        for part in [x.a, x.b] {
            self.divmod(part, g, q, r);
            self.move_to(q, part);
            self.zero(r);
        }
        self.zero(g);
        self.goto(done);
        self.bind(is_zero);
        self.zero(x.s);
        self.set_const(x.b, 1);
        self.bind(done);
        self.release(m);
    }

    /// `z = x + y`, canonical. `z` must not overlap the operands.
    pub fn rat_add(&mut self, x: RatRegs, y: RatRegs, z: RatRegs) {
        let m = self.mark();
        let n1 = self.temp();
        let n2 = self.temp();
        self.mul(n1, x.a, y.b);
        self.mul(n2, y.a, x.b);
        self.mul(z.b, x.b, y.b);
        let same = self.label();
        let differ = self.label();
        let x_big = self.label();
        let y_big = self.label();
        let done = self.label();
        self.compare(x.s, y.s, differ, same, differ);
        self.bind(same);
        self.move_to(n1, z.a);
        self.move_add(n2, z.a);
        self.copy(x.s, z.s);
        self.goto(done);
        self.bind(differ);
        self.compare(n1, n2, y_big, x_big, x_big);
        self.bind(x_big);
        self.sub_sat(n1, n2);
        self.move_to(n1, z.a);
        self.copy(x.s, z.s);
        self.goto(done);
        self.bind(y_big);
        self.sub_sat(n2, n1);
        self.move_to(n2, z.a);
        self.copy(y.s, z.s);
        self.bind(done);
        self.zero(n1);
        self.zero(n2);
        self.canonicalize(z);
        self.release(m);
    }

    /// `z = x * y`, canonical. `z` must not overlap the operands.
    pub fn rat_mul(&mut self, x: RatRegs, y: RatRegs, z: RatRegs) {
        let m = self.mark();
        let t = self.temp();
        self.copy(x.s, t);
        self.add_into(t, y.s);
        let even = self.label();
        let odd = self.label();
        let signed = self.label();
        self.switch(t, &[even, odd, even], even);
        self.bind(even);
        self.zero(z.s);
        self.goto(signed);
        self.bind(odd);
        self.set_const(z.s, 1);
        self.bind(signed);
        self.zero(t);
        self.mul(z.a, x.a, y.a);
        self.mul(z.b, x.b, y.b);
        self.canonicalize(z);
        self.release(m);
    }

    /// `z = max(0, x)`, canonical.
    pub fn rat_relu(&mut self, x: RatRegs, z: RatRegs) {
        let pos = self.label();
        let neg = self.label();
        let done = self.label();
        self.switch(x.s, &[pos, neg], neg);
        self.bind(pos);
        self.copy_rat(x, z);
        self.canonicalize(z);
        self.goto(done);
        self.bind(neg);
        self.set_rat_zero(z);
        self.bind(done);
    }

    /// `c` = natural code of the rational `x` (which need not be reduced).
    pub fn rat_to_nat(&mut self, x: RatRegs, c: Reg) {
        let m = self.mark();
        let is_zero = self.label();
        let done = self.label();
        self.zero(c);
        self.branch_zero(x.a, is_zero);
        let a = self.temp();
        let b = self.temp();
        let pow = self.temp();
        self.copy(x.a, a);
        self.copy(x.b, b);
        self.inc(pow);
        // Walk from a/b up to 1/1; each step records one bit of the index.
        let top = self.here();
        let lt = self.label();
        let gt = self.label();
        let eq = self.label();
        self.compare(a, b, lt, eq, gt);
        self.bind(lt);
        self.sub_sat(b, a);
        self.double(pow);
        self.goto(top);
        self.bind(gt);
        self.sub_sat(a, b);
        self.add_into(c, pow);
        self.double(pow);
        self.goto(top);
        self.bind(eq);
        self.add_into(c, pow);
        self.double(c);
        self.zero(a);
        self.zero(b);
        self.zero(pow);
        // Positive codes are odd.
        let pos = self.label();
        self.switch(x.s, &[pos, done], done);
        self.bind(pos);
        self.dec(c);
        self.bind(is_zero);
        self.bind(done);
        self.release(m);
    }

    /// `x` = the rational with natural code `c`; `c` preserved.
    pub fn nat_to_rat(&mut self, c: Reg, x: RatRegs) {
        let m = self.mark();
        let is_zero = self.label();
        let done = self.label();
        self.branch_zero(c, is_zero);
        let h = self.temp();
        let bit = self.temp();
        let p0 = self.temp();
        let p1 = self.temp();
        let d0 = self.temp();
        let d1 = self.temp();
        self.copy(c, h);
        self.halve(h, bit);
        let odd = self.label();
        let even = self.label();
        let walk = self.label();
        self.switch(bit, &[even, odd], odd);
        self.bind(odd);
        self.inc(h);
        self.zero(x.s);
        self.goto(walk);
        self.bind(even);
        self.set_const(x.s, 1);
        self.bind(walk);
        // h is now the Calkin-Wilf index; fold its bits below the leading
        // one, least significant first, into the matrix (p0 p1; d0 d1).
        self.inc(p0);
        self.inc(d1);
        let top = self.here();
        let fin = self.label();
        let zero_bit = self.label();
        let one_bit = self.label();
        let t = self.temp();
        self.copy(h, t);
        self.dec(t);
        self.branch_zero(t, fin);
        self.zero(t);
        self.halve(h, bit);
        self.switch(bit, &[zero_bit, one_bit], one_bit);
        self.bind(zero_bit);
        self.add_into(p0, p1);
        self.add_into(d0, d1);
        self.goto(top);
        self.bind(one_bit);
        self.add_into(p1, p0);
        self.add_into(d1, d0);
        self.goto(top);
        self.bind(fin);
        self.move_to(p0, x.a);
        self.move_add(p1, x.a);
        self.move_to(d0, x.b);
        self.move_add(d1, x.b);
        for r in [h, bit, t] {
            self.zero(r);
        }
        self.goto(done);
        self.bind(is_zero);
        self.set_rat_zero(x);
        self.bind(done);
        self.release(m);
    }

    /// Reads the vector stored at `base` into `bank`, then jumps to
    /// `cont[n - 1]` for arity `n`. Malformed storage jumps to `fail`, an
    /// arity above the bank width to `wide`.
    pub fn read_vector(
        &mut self,
        base: Reg,
        bank: &VecBank,
        fail: Label,
        wide: Label,
        cont: &[Label],
    ) {
        let width = bank.coords.len();
        let present = self.label();
        self.branch_nonempty(base, present);
        self.goto(fail);
        self.bind(present);
        let mut cases = vec![fail];
        cases.extend((0..width).map(|_| self.label()));
        self.switch(base, &cases, wide);
        for n in 1..=width {
            self.bind(cases[n]);
            for k in 0..n {
                self.read_rational(base + 1 + 3 * k, bank.coords[k], fail);
            }
            self.set_const(bank.arity, n);
            self.goto(cont[n - 1]);
        }
    }

    fn read_rational(&mut self, base: Reg, x: RatRegs, fail: Label) {
        for r in [base, base + 1, base + 2] {
            let ok = self.label();
            self.branch_nonempty(r, ok);
            self.goto(fail);
            self.bind(ok);
        }
        let ok = self.label();
        self.switch(base, &[ok, ok], fail);
        self.bind(ok);
        self.branch_zero(base + 2, fail);
        self.copy(base, x.s);
        self.copy(base + 1, x.a);
        self.copy(base + 2, x.b);
    }

    /// Writes `values` as a vector at `base`. Sources are consumed.
    pub fn write_vector(&mut self, base: Reg, values: &[RatRegs]) {
        self.set_const(base, values.len());
        for (k, x) in values.iter().enumerate() {
            let at = base + 1 + 3 * k;
            self.move_to(x.s, at);
            self.move_to(x.a, at + 1);
            self.move_to(x.b, at + 2);
        }
    }

    /// Decodes the natural in `n` (consumed) into `bank`. Codes of
    /// sequences outside the bound jump to `out`.
    pub fn decode_seq(&mut self, n: Reg, bank: &SeqBank, out: Label) {
        let m = self.mark();
        let done = self.label();
        let rest = self.temp();
        let head = self.temp();
        let tail = self.temp();
        self.move_add(n, rest);
        self.zero(bank.len);
        for vb in &bank.vecs {
            self.branch_zero(rest, done);
            self.dec(rest);
            self.unpair(rest, head, tail);
            self.decode_vec(head, vb, out);
            self.move_to(tail, rest);
            self.inc(bank.len);
        }
        self.branch_zero(rest, done);
        self.zero(rest);
        self.goto(out);
        self.bind(done);
        self.zero(head);
        self.release(m);
    }

    /// Decodes the vector code in `v` (consumed) into `vb`.
    fn decode_vec(&mut self, v: Reg, vb: &VecBank, out: Label) {
        let m = self.mark();
        let width = vb.coords.len();
        let am1 = self.temp();
        let rest = self.temp();
        let c = self.temp();
        let r2 = self.temp();
        self.unpair(v, am1, rest);
        self.zero(v);
        let done = self.label();
        let cases: Vec<Label> = (0..width).map(|_| self.label()).collect();
        self.switch(am1, &cases, out);
        for (i, &case) in cases.iter().enumerate() {
            let n = i + 1;
            self.bind(case);
            for k in 0..n - 1 {
                self.unpair(rest, c, r2);
                self.nat_to_rat(c, vb.coords[k]);
                self.move_to(r2, rest);
            }
            self.nat_to_rat(rest, vb.coords[n - 1]);
            self.set_const(vb.arity, n);
            self.goto(done);
        }
        self.bind(done);
        for r in [am1, rest, c] {
            self.zero(r);
        }
        self.release(m);
    }

    /// Stores the staged sequence at `base`. The bank is consumed.
    pub fn pack_seq(&mut self, bank: &SeqBank, base: Reg) {
        let m = self.mark();
        let done = self.label();
        let remaining = self.temp();
        self.copy(bank.len, remaining);
        self.move_to(bank.len, base);
        let width = bank.vecs.first().map_or(0, |v| v.coords.len());
        let mut blocks: LabelMap<(usize, usize)> = LabelMap::new();
        let start = blocks.get(self, (0, 1));
        self.goto(start);
        while let Some(((idx, off), label)) = blocks.next_pending() {
            self.bind(label);
            self.dec_or(remaining, done);
            if idx == bank.vecs.len() {
                // Unreachable for staged data within the bound.
                self.goto(done);
                continue;
            }
            let vb = &bank.vecs[idx];
            let fail = self.label();
            let mut cases = vec![fail];
            cases.extend((0..width).map(|_| self.label()));
            self.switch(vb.arity, &cases, fail);
            for n in 1..=width {
                self.bind(cases[n]);
                self.write_vector(base + off, &vb.coords[..n]);
                let next = blocks.get(self, (idx + 1, off + 1 + 3 * n));
                self.goto(next);
            }
            self.bind(fail);
            self.goto(done);
        }
        self.bind(done);
        self.zero(remaining);
        self.release(m);
    }

    /// Reads the sequence stored at `base` into `bank`. Malformed or
    /// out-of-bound storage jumps to `bad`.
    pub fn unpack_seq(&mut self, base: Reg, bank: &SeqBank, bad: Label) {
        let m = self.mark();
        let done = self.label();
        let present = self.label();
        self.branch_nonempty(base, present);
        self.goto(bad);
        self.bind(present);
        let ok = self.label();
        let lens: Vec<Label> = (0..=bank.vecs.len()).map(|_| ok).collect();
        self.switch(base, &lens, bad);
        self.bind(ok);
        let remaining = self.temp();
        self.copy(base, bank.len);
        self.copy(base, remaining);
        let width = bank.vecs.first().map_or(0, |v| v.coords.len());
        let mut blocks: LabelMap<(usize, usize)> = LabelMap::new();
        let start = blocks.get(self, (0, 1));
        self.goto(start);
        while let Some(((idx, off), label)) = blocks.next_pending() {
            self.bind(label);
            self.dec_or(remaining, done);
            if idx == bank.vecs.len() {
                self.goto(done);
                continue;
            }
            let cont: Vec<Label> = (1..=width)
                .map(|n| blocks.get(self, (idx + 1, off + 1 + 3 * n)))
                .collect();
            self.read_vector(base + off, &bank.vecs[idx], bad, bad, &cont);
        }
        self.bind(done);
        self.release(m);
    }

    /// `out` = code of the staged sequence. The bank is consumed.
    pub fn encode_seq(&mut self, bank: &SeqBank, out: Reg) {
        let m = self.mark();
        let codes: Vec<Reg> = bank.vecs.iter().map(|_| self.temp()).collect();
        let remaining = self.temp();
        self.copy(bank.len, remaining);
        let fold = self.label();
        for (vb, &code) in bank.vecs.iter().zip(&codes) {
            self.dec_or(remaining, fold);
            self.encode_vec(vb, code);
        }
        self.bind(fold);
        self.zero(remaining);
        self.zero(out);
        let done = self.label();
        let cases: Vec<Label> = (0..=codes.len()).map(|_| self.label()).collect();
        self.switch(bank.len, &cases, done);
        for (len, &case) in cases.iter().enumerate() {
            self.bind(case);
            for &code in codes[..len].iter().rev() {
                self.pair(code, out);
                self.move_to(code, out);
                self.inc(out);
            }
            self.goto(done);
        }
        self.bind(done);
        self.zero(bank.len);
        self.release(m);
    }

    fn encode_vec(&mut self, vb: &VecBank, code: Reg) {
        let m = self.mark();
        let width = vb.coords.len();
        let parts: Vec<Reg> = (0..width).map(|_| self.temp()).collect();
        let done = self.label();
        let mut cases = vec![done];
        cases.extend((0..width).map(|_| self.label()));
        self.switch(vb.arity, &cases, done);
        for n in 1..=width {
            self.bind(cases[n]);
            for k in 0..n {
                self.rat_to_nat(vb.coords[k], parts[k]);
            }
            for k in (0..n - 1).rev() {
                self.pair(parts[k], parts[k + 1]);
                self.zero(parts[k + 1]);
            }
            self.set_const(code, n - 1);
            self.pair(code, parts[0]);
            self.zero(parts[0]);
            self.goto(done);
        }
        self.bind(done);
        self.release(m);
    }
}
