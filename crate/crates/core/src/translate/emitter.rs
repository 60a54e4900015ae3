//! Label-based code emission and the unary-arithmetic macro layer.
//!
//! Conventions shared by every macro below:
//! * operands hold numbers (never empty) on entry;
//! * temporaries come from a bump allocator above the scratch base and are
//!   zeroed when allocated, so they may start out empty;
//! * temporaries are left at zero on every exit path;
//! * unconditional jumps use `dec z L` on a register `z` held at zero.

use std::collections::HashMap;

use crate::machine::{Instruction, Reg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) struct Label(usize);

#[derive(Debug, Clone, Copy)]
enum Binding {
    At(usize),
    Exit(usize),
}

pub(crate) struct Emitter {
    code: Vec<Instruction>,
    labels: Vec<Option<Binding>>,
    zr: Reg,
    next: Reg,
    high_water: Reg,
}

impl Emitter {
    /// Starts a code block whose scratch space begins at `scratch_base`.
    /// The first scratch register is the block's zero register.
    pub fn new(scratch_base: Reg) -> Self {
        let mut e = Emitter {
            code: Vec::new(),
            labels: Vec::new(),
            zr: scratch_base,
            next: scratch_base + 1,
            high_water: scratch_base + 1,
        };
        e.zero(scratch_base);
        e
    }

    pub fn scratch_end(&self) -> Reg {
        self.high_water
    }

    pub fn label(&mut self) -> Label {
        self.labels.push(None);
        Label(self.labels.len() - 1)
    }

    pub fn bind(&mut self, l: Label) {
        debug_assert!(self.labels[l.0].is_none(), "label bound twice");
        self.labels[l.0] = Some(Binding::At(self.code.len()));
    }

    /// Binds `l` to exit number `k` of the finished block (address
    /// `len + k`).
    pub fn bind_exit(&mut self, l: Label, k: usize) {
        self.labels[l.0] = Some(Binding::Exit(k));
    }

    pub fn here(&mut self) -> Label {
        let l = self.label();
        self.bind(l);
        l
    }

    /// A fresh register, zeroed.
    pub fn temp(&mut self) -> Reg {
        let r = self.alloc();
        self.zero(r);
        r
    }

    /// A fresh register with no initialization; the caller must write it
    /// before reading.
    pub fn alloc(&mut self) -> Reg {
        let r = self.next;
        self.next += 1;
        self.high_water = self.high_water.max(self.next);
        r
    }

    pub fn mark(&self) -> Reg {
        self.next
    }

    pub fn release(&mut self, mark: Reg) {
        debug_assert!(mark <= self.next);
        self.next = mark;
    }

    fn push_to(&mut self, instr: Instruction, target: Option<Label>) {
        let instr = match target {
            Some(l) => instr.map_target(|_| l.0),
            None => instr,
        };
        self.code.push(instr);
    }

    pub fn halt(&mut self) {
        self.code.push(Instruction::Halt);
    }

    pub fn zero(&mut self, r: Reg) {
        self.code.push(Instruction::Zero { reg: r });
    }

    /// `[r] += 1` on a register known to hold a number.
    pub fn inc(&mut self, r: Reg) {
        let next = self.label();
        self.inc_or(r, next);
        self.bind(next);
    }

    /// `[r] -= 1` on a register known to be positive.
    pub fn dec(&mut self, r: Reg) {
        let next = self.label();
        self.dec_or(r, next);
        self.bind(next);
    }

    pub fn inc_or(&mut self, r: Reg, if_empty: Label) {
        self.push_to(Instruction::Increase { reg: r, target: 0 }, Some(if_empty));
    }

    pub fn dec_or(&mut self, r: Reg, if_zero: Label) {
        self.push_to(Instruction::Decrease { reg: r, target: 0 }, Some(if_zero));
    }

    pub fn goto(&mut self, l: Label) {
        let zr = self.zr;
        self.dec_or(zr, l);
    }

    /// A one-instruction busy loop.
    pub fn diverge(&mut self) {
        let l = self.here();
        self.goto(l);
    }

    pub fn set_const(&mut self, r: Reg, value: usize) {
        self.zero(r);
        for _ in 0..value {
            self.inc(r);
        }
    }

    /// Falls through when `r` is empty, jumping to `if_full` otherwise;
    /// `r` is unchanged.
    pub fn branch_nonempty(&mut self, r: Reg, if_full: Label) {
        let empty = self.label();
        self.inc_or(r, empty);
        self.dec_or(r, if_full);
        self.goto(if_full);
        self.bind(empty);
    }

    /// Jumps to `if_zero` when `[r] = 0`; falls through otherwise. `r` is
    /// unchanged.
    pub fn branch_zero(&mut self, r: Reg, if_zero: Label) {
        self.dec_or(r, if_zero);
        self.inc(r);
    }

    /// `dst += src; src = 0`.
    pub fn move_add(&mut self, src: Reg, dst: Reg) {
        debug_assert_ne!(src, dst);
        let top = self.here();
        let done = self.label();
        self.dec_or(src, done);
        self.inc(dst);
        self.goto(top);
        self.bind(done);
    }

    /// `dst = src; src = 0`.
    pub fn move_to(&mut self, src: Reg, dst: Reg) {
        self.zero(dst);
        self.move_add(src, dst);
    }

    /// `dst += src`, preserving `src`.
    pub fn add_into(&mut self, dst: Reg, src: Reg) {
        debug_assert_ne!(src, dst);
        let m = self.mark();
        let t = self.temp();
        let top = self.here();
        let done = self.label();
        self.dec_or(src, done);
        self.inc(dst);
        self.inc(t);
        self.goto(top);
        self.bind(done);
        self.move_add(t, src);
        self.release(m);
    }

    /// `dst = src`, preserving `src`.
    pub fn copy(&mut self, src: Reg, dst: Reg) {
        if src == dst {
            return;
        }
        self.zero(dst);
        self.add_into(dst, src);
    }

    /// `dst = max(0, dst - src)`, preserving `src`.
    pub fn sub_sat(&mut self, dst: Reg, src: Reg) {
        debug_assert_ne!(src, dst);
        let m = self.mark();
        let t = self.temp();
        let top = self.here();
        let done = self.label();
        self.dec_or(src, done);
        self.inc(t);
        self.dec_or(dst, top);
        self.goto(top);
        self.bind(done);
        self.move_add(t, src);
        self.release(m);
    }

    /// `dst = a * b`; `dst` must differ from both factors.
    pub fn mul(&mut self, dst: Reg, a: Reg, b: Reg) {
        debug_assert!(dst != a && dst != b);
        let m = self.mark();
        self.zero(dst);
        let t = self.temp();
        self.copy(b, t);
        let top = self.here();
        let done = self.label();
        self.dec_or(t, done);
        self.add_into(dst, a);
        self.goto(top);
        self.bind(done);
        self.release(m);
    }

    /// `r += r`.
    pub fn double(&mut self, r: Reg) {
        let m = self.mark();
        let t = self.temp();
        self.move_add(r, t);
        let top = self.here();
        let done = self.label();
        self.dec_or(t, done);
        self.inc(r);
        self.inc(r);
        self.goto(top);
        self.bind(done);
        self.release(m);
    }

    /// `bit = r mod 2; r = r div 2`.
    pub fn halve(&mut self, r: Reg, bit: Reg) {
        debug_assert_ne!(r, bit);
        let m = self.mark();
        let q = self.temp();
        self.zero(bit);
        let top = self.here();
        let odd = self.label();
        let done = self.label();
        self.dec_or(r, done);
        self.dec_or(r, odd);
        self.inc(q);
        self.goto(top);
        self.bind(odd);
        self.inc(bit);
        self.bind(done);
        self.move_add(q, r);
        self.release(m);
    }

    /// Three-way branch on `a` versus `b`; both preserved.
    pub fn compare(&mut self, a: Reg, b: Reg, lt: Label, eq: Label, gt: Label) {
        let m = self.mark();
        let ta = self.temp();
        let tb = self.temp();
        self.copy(a, ta);
        self.copy(b, tb);
        let top = self.here();
        let a_out = self.label();
        let a_more = self.label();
        self.dec_or(ta, a_out);
        self.dec_or(tb, a_more);
        self.goto(top);
        self.bind(a_out);
        self.dec_or(tb, eq);
        self.zero(tb);
        self.goto(lt);
        self.bind(a_more);
        self.zero(ta);
        self.goto(gt);
        self.release(m);
    }

    /// Jumps to `cases[v]` where `v = [r]`, or to `overflow` when
    /// `v >= cases.len()`. `r` is preserved.
    pub fn switch(&mut self, r: Reg, cases: &[Label], overflow: Label) {
        let m = self.mark();
        let t = self.temp();
        self.copy(r, t);
        for &case in cases {
            self.dec_or(t, case);
        }
        self.zero(t);
        self.goto(overflow);
        self.release(m);
    }

    /// `q = n div d; r = n mod d`, with `q = 0, r = n` when `d = 0`.
    /// `n` and `d` are preserved.
    pub fn divmod(&mut self, n: Reg, d: Reg, q: Reg, r: Reg) {
        let m = self.mark();
        self.zero(q);
        self.copy(n, r);
        let t = self.temp();
        let taken = self.temp();
        let done = self.label();
        self.branch_zero(d, done);
        let top = self.here();
        let sub = self.label();
        let short = self.label();
        let whole = self.label();
        self.copy(d, t);
        self.zero(taken);
        self.bind(sub);
        self.dec_or(t, whole);
        self.dec_or(r, short);
        self.inc(taken);
        self.goto(sub);
        self.bind(whole);
        self.inc(q);
        self.goto(top);
        self.bind(short);
        self.move_add(taken, r);
        self.zero(t);
        self.bind(done);
        self.release(m);
    }

    /// `a = gcd(a, b); b = 0`.
    pub fn gcd(&mut self, a: Reg, b: Reg) {
        let m = self.mark();
        let q = self.temp();
        let r = self.temp();
        let top = self.here();
        let done = self.label();
        self.branch_zero(b, done);
        self.divmod(a, b, q, r);
        self.move_to(b, a);
        self.move_add(r, b);
        self.zero(q);
        self.goto(top);
        self.bind(done);
        self.release(m);
    }

    /// `a = pair(a, b)`, preserving `b`.
    pub fn pair(&mut self, a: Reg, b: Reg) {
        debug_assert_ne!(a, b);
        let m = self.mark();
        let w = self.temp();
        let acc = self.temp();
        let k = self.temp();
        self.move_add(a, w);
        self.add_into(w, b);
        let top = self.here();
        let done = self.label();
        self.dec_or(w, done);
        self.inc(k);
        self.add_into(acc, k);
        self.goto(top);
        self.bind(done);
        self.add_into(acc, b);
        self.move_add(acc, a);
        self.zero(k);
        self.release(m);
    }

    /// `(a, b) = unpair(n)`, preserving `n`; `a`, `b`, `n` distinct.
    pub fn unpair(&mut self, n: Reg, a: Reg, b: Reg) {
        debug_assert!(a != b && a != n && b != n);
        let m = self.mark();
        let w = self.temp();
        let t = self.temp();
        let taken = self.temp();
        self.copy(n, b);
        // Invariant: b = n - w(w+1)/2. Try to remove w + 1 more.
        let top = self.here();
        let sub = self.label();
        let short = self.label();
        let whole = self.label();
        self.inc(w);
        self.copy(w, t);
        self.zero(taken);
        self.bind(sub);
        self.dec_or(t, whole);
        self.dec_or(b, short);
        self.inc(taken);
        self.goto(sub);
        self.bind(whole);
        self.goto(top);
        self.bind(short);
        self.move_add(taken, b);
        self.zero(t);
        self.dec(w);
        self.move_to(w, a);
        self.sub_sat(a, b);
        self.release(m);
    }

    /// Appends another block, wiring its exits to `exits`.
    pub fn splice(&mut self, instrs: &[Instruction], exits: &[Label]) {
        let len = instrs.len();
        let local: Vec<Label> = (0..len).map(|_| self.label()).collect();
        for (i, instr) in instrs.iter().enumerate() {
            self.bind(local[i]);
            let target = instr
                .target()
                .map(|t| if t < len { local[t] } else { exits[t - len] });
            self.push_to(instr.clone(), target);
        }
    }

    /// Resolves labels. Exit bindings resolve past the end of the code.
    pub fn finish(self) -> Vec<Instruction> {
        let len = self.code.len();
        let addr: Vec<usize> = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, b)| match b.unwrap_or_else(|| panic!("label {i} never bound")) {
                Binding::At(a) => a,
                Binding::Exit(k) => len + k,
            })
            .collect();
        self.code
            .into_iter()
            .map(|i| i.map_target(|l| addr[l]))
            .collect()
    }
}

/// Labels created on demand for states keyed by `K`.
pub(crate) struct LabelMap<K> {
    labels: HashMap<K, Label>,
    pending: Vec<K>,
}

impl<K: std::hash::Hash + Eq + Clone> LabelMap<K> {
    pub fn new() -> Self {
        LabelMap {
            labels: HashMap::new(),
            pending: Vec::new(),
        }
    }

    pub fn get(&mut self, e: &mut Emitter, key: K) -> Label {
        if let Some(&l) = self.labels.get(&key) {
            return l;
        }
        let l = e.label();
        self.labels.insert(key.clone(), l);
        self.pending.push(key);
        l
    }

    pub fn next_pending(&mut self) -> Option<(K, Label)> {
        let key = self.pending.pop()?;
        let l = self.labels[&key];
        Some((key, l))
    }
}
