use num_bigint::BigUint;

use super::*;
use crate::fixtures;
use crate::godel::{seq_decode, seq_encode};
use crate::machine::{abacus_output, run, run_abacus_on, run_rnn, Outcome, RegisterFile};
use crate::numeric::{RVector, VecSeq};

const BUDGET: u64 = 50_000_000;

fn exec(s: &MacroSnippet, pairs: &[(usize, u64)]) -> RegisterFile {
    let regs = RegisterFile::from_pairs(pairs.iter().copied());
    match run(&s.to_program(), regs, BUDGET) {
        Outcome::Halted { regs, .. } => regs,
        other => panic!("snippet did not halt: {other:?}"),
    }
}

fn val(regs: &RegisterFile, i: usize) -> u64 {
    regs.get_u64(i).expect("register holds a number")
}

/// Registers outside the operands and the scratch range are untouched, and
/// scratch ends at zero or empty.
fn assert_hygiene(s: &MacroSnippet, before: &[(usize, u64)], after: &RegisterFile, operands: &[usize]) {
    let before = RegisterFile::from_pairs(before.iter().copied());
    for (i, v) in after.iter() {
        if operands.contains(&i) {
            continue;
        }
        if s.scratch().contains(&i) {
            assert_eq!(v, BigUint::from(0u8), "scratch {i} left dirty");
        } else {
            assert_eq!(before.get(i), Some(v), "register {i} clobbered");
        }
    }
}

#[test]
fn add_and_copy_snippets() {
    let s = macros::add_nat(3, 4, 10).unwrap();
    let init = [(3, 2), (4, 5), (7, 9)];
    let out = exec(&s, &init);
    assert_eq!((val(&out, 3), val(&out, 4)), (7, 5));
    assert_hygiene(&s, &init, &out, &[3, 4]);

    let s = macros::copy(1, 2, 5).unwrap();
    let out = exec(&s, &[(1, 6), (2, 1)]);
    assert_eq!((val(&out, 1), val(&out, 2)), (6, 6));

    let s = macros::sub_nat(0, 1, 5).unwrap();
    assert_eq!(val(&exec(&s, &[(0, 3), (1, 5)]), 0), 0);
    assert_eq!(val(&exec(&s, &[(0, 9), (1, 5)]), 0), 4);
}

#[test]
fn arithmetic_snippets_match_integers() {
    let mul = macros::mul_nat(2, 0, 1, 8).unwrap();
    let div = macros::divmod(0, 1, 2, 3, 8).unwrap();
    let gcd = macros::gcd(0, 1, 8).unwrap();
    let cmp = macros::compare(0, 1, 2, 8).unwrap();
    for a in 0..9u64 {
        for b in 0..9u64 {
            let init = [(0, a), (1, b)];
            let out = exec(&mul, &init);
            assert_eq!(val(&out, 2), a * b);
            assert_hygiene(&mul, &init, &out, &[2]);

            let out = exec(&div, &init);
            let (q, r) = if b == 0 { (0, a) } else { (a / b, a % b) };
            assert_eq!((val(&out, 2), val(&out, 3)), (q, r), "{a} divmod {b}");
            assert_hygiene(&div, &init, &out, &[2, 3]);

            let out = exec(&gcd, &init);
            assert_eq!(val(&out, 0), num_integer::Integer::gcd(&a, &b));
            assert_eq!(val(&out, 1), 0);

            let out = exec(&cmp, &init);
            assert_eq!(val(&out, 2), (a.cmp(&b) as i64 + 1) as u64);
        }
    }
    assert_eq!(val(&exec(&gcd, &[(0, 6), (1, 4)]), 0), 2);
}

#[test]
fn pairing_snippets_match_codec() {
    let p = macros::pair(0, 1, 4).unwrap();
    let u = macros::unpair(3, 4, 6).unwrap();
    assert_eq!((val(&exec(&u, &[(3, 7)]), 3), val(&exec(&u, &[(3, 7)]), 4)), (2, 1));
    for a in 0..12u64 {
        for b in 0..12u64 {
            let code = crate::godel::pair_u64(a, b);
            let out = exec(&p, &[(0, a), (1, b)]);
            assert_eq!(out.get(0), Some(code.clone()));
            let back = exec(&u, &[(3, u64::try_from(code).unwrap())]);
            assert_eq!((val(&back, 3), val(&back, 4)), (a, b));
        }
    }
}

#[test]
fn layout_errors() {
    assert_eq!(
        macros::copy(3, 9, 5),
        Err(LayoutError::Overlap { reg: 9, base: 5 })
    );
    assert_eq!(macros::add_nat(2, 2, 5), Err(LayoutError::Aliased(2)));
    let add = Instruction::Add { lhs: 1, rhs: 8, dst: 1, target: 0 };
    let bound = ShapeBound::new(1, 2).unwrap();
    assert!(matches!(
        expand_instruction(&add, bound, 10),
        Err(TranslateError::Layout(_))
    ));
    assert!(expand_instruction(&add, bound, 15).is_ok());
    assert!(expand_instruction(&Instruction::Halt, bound, 15).is_err());
}

#[test]
fn then_is_associative_and_sequential() {
    let a = macros::add_nat(0, 1, 10).unwrap();
    let b = macros::mul_nat(2, 0, 1, 10).unwrap();
    let c = macros::pair(2, 0, 10).unwrap();
    let left = a.then(&b).then(&c);
    let right = a.then(&b.then(&c));
    assert_eq!(left, right);
    let out = exec(&left, &[(0, 2), (1, 3)]);
    // a: r0 = 5; b: r2 = 15; c: r2 = pair(15, 5)
    assert_eq!(out.get(2), Some(crate::godel::pair_u64(15, 5)));
}

#[test]
fn expanded_add_behaves_like_the_instruction() {
    let bound = ShapeBound::new(1, 2).unwrap();
    let add = Instruction::Add { lhs: 0, rhs: 7, dst: 14, target: 0 };
    let s = expand_instruction(&add, bound, 30).unwrap();
    let mut regs = RegisterFile::new();
    let u = RVector::from_ratios(&[(1, 2), (-3, 4)]).unwrap();
    let v = RVector::from_ratios(&[(1, 3), (1, 4)]).unwrap();
    crate::machine::store_vector(&mut regs, 0, &u);
    crate::machine::store_vector(&mut regs, 7, &v);
    let Outcome::Halted { regs: out, .. } = run(&s.to_program(), regs, BUDGET) else {
        panic!("no halt")
    };
    let w = crate::machine::load_vector(&out, 14).unwrap();
    assert_eq!(w, u.checked_add(&v).unwrap());

    // Arity mismatch takes the failure exit.
    let mut regs = RegisterFile::new();
    crate::machine::store_vector(&mut regs, 0, &u);
    crate::machine::store_vector(&mut regs, 7, &RVector::from_ints(&[1]).unwrap());
    let mut program = s.instrs().to_vec();
    program.push(Instruction::Halt);
    program.push(Instruction::Zero { reg: 29 });
    program.push(Instruction::Halt);
    let p = Program::new(MachineKind::Abacus, program).unwrap();
    let Outcome::Halted { regs: out, .. } = run(&p, regs, BUDGET) else {
        panic!("no halt")
    };
    assert_eq!(out.get_u64(29), Some(0));
    assert!(out.is_empty(14));
}

fn nat(n: u64) -> BigUint {
    BigUint::from(n)
}

fn run_code(p: &Program, n: u64) -> Option<BigUint> {
    abacus_output(&run_abacus_on(p, nat(n), BUDGET).unwrap())
}

#[test]
fn lowered_double() {
    let a = rnn_to_abacus(&fixtures::double(), ShapeBound::new(1, 1).unwrap()).unwrap();
    assert_eq!(a.kind(), MachineKind::Abacus);
    assert_eq!(run_code(&a, 46), Some(nat(4)));
    assert_eq!(run_code(&a, 1), Some(nat(1)));
    // ((0), (0)) is longer than the bound allows.
    assert_eq!(run_code(&a, 3), None);
}

#[test]
fn lowered_programs_agree_on_small_codes() {
    let bound = ShapeBound::new(2, 2).unwrap();
    for program in [fixtures::double(), fixtures::relu1(), fixtures::identity(), fixtures::garbage()] {
        let lowered = rnn_to_abacus(&program, bound).unwrap();
        for n in 0..120u64 {
            let x = seq_decode(&nat(n)).unwrap();
            if !bound.contains(&x) {
                continue;
            }
            let expect = run_rnn(&program, &x, 10_000).unwrap();
            let expect = expect.output().filter(|y| bound.contains(y)).map(seq_encode);
            assert_eq!(run_code(&lowered, n), expect, "n = {n} on {x}");
        }
    }
}

#[test]
fn lifted_succ() {
    let bound = ShapeBound::new(2, 2).unwrap();
    let n = abacus_to_rnn(&fixtures::succ(), bound).unwrap();
    assert_eq!(n.kind(), MachineKind::Rnn);
    let x = VecSeq::new(vec![RVector::from_ints(&[0]).unwrap(); 2]);
    let y = run_rnn(&n, &x, BUDGET).unwrap();
    assert_eq!(y.output(), Some(&VecSeq::new(vec![RVector::from_ints(&[1]).unwrap()])));

    // A stored input wider than the bound diverges.
    let wide = VecSeq::new(vec![RVector::from_ints(&[0, 0, 0]).unwrap()]);
    assert!(run_rnn(&n, &wide, BUDGET).unwrap().output().is_none());
}

#[test]
fn lifted_programs_agree_on_small_inputs() {
    let bound = ShapeBound::new(2, 2).unwrap();
    for a in [fixtures::succ(), fixtures::add2(), fixtures::busy_loop()] {
        let lifted = abacus_to_rnn(&a, bound).unwrap();
        for n in 0..60u64 {
            let x = seq_decode(&nat(n)).unwrap();
            if !bound.contains(&x) {
                continue;
            }
            let expect = run_code(&a, n)
                .map(|y| seq_decode(&y).unwrap())
                .filter(|y| bound.contains(y));
            let got = run_rnn(&lifted, &x, BUDGET).unwrap();
            assert_eq!(got.output(), expect.as_ref(), "n = {n}");
        }
    }
}

#[test]
fn bound_parsing() {
    assert_eq!("2x3".parse::<ShapeBound>().unwrap(), ShapeBound::new(2, 3).unwrap());
    assert!("2x0".parse::<ShapeBound>().is_err());
    assert!("23".parse::<ShapeBound>().is_err());
    assert_eq!(ShapeBound::new(2, 3).unwrap().footprint(), 21);
}

#[test]
fn expanded_relu_behaves_like_the_instruction() {
    let bound = ShapeBound::new(1, 2).unwrap();
    let relu = Instruction::NonLinear { src: 0, dst: 0, target: 0 };
    let s = expand_instruction(&relu, bound, 20).unwrap();
    let mut regs = RegisterFile::new();
    crate::machine::store_vector(&mut regs, 0, &RVector::from_ints(&[-3, 2]).unwrap());
    let Outcome::Halted { regs: out, .. } = run(&s.to_program(), regs, BUDGET) else {
        panic!("no halt")
    };
    assert_eq!(
        crate::machine::load_vector(&out, 0).unwrap(),
        RVector::from_ints(&[0, 2]).unwrap()
    );
    // Nothing at the operand: the failure exit, registers untouched.
    let out = match run(&s.to_program(), RegisterFile::new(), BUDGET) {
        Outcome::Halted { regs, .. } => regs,
        other => panic!("{other:?}"),
    };
    assert!(out.iter().all(|(i, v)| i >= 20 && v == BigUint::from(0u8)));
}

/// Whole-program lowering contains each instruction's expansion verbatim,
/// up to relocation of its internal jumps.
#[test]
fn lowering_splices_instruction_expansions() {
    let bound = ShapeBound::new(1, 1).unwrap();
    let program = fixtures::double();
    let lowered = rnn_to_abacus(&program, bound).unwrap();
    let scratch = instruction_footprint(&program.instrs()[0], bound).max(bound.footprint());
    // The expansion is allocated right after the prologue's zero register.
    let snippet = expand_instruction(&program.instrs()[0], bound, scratch + 1).unwrap();
    let code = lowered.instrs();
    let n = snippet.len();
    let found = (0..=code.len() - n).any(|off| {
        snippet.instrs().iter().zip(&code[off..off + n]).all(|(a, b)| {
            let a_t = a.target();
            let b_t = b.target();
            match a_t {
                Some(t) if t < n => a.clone().map_target(|t| t + off) == *b,
                Some(_) => a.clone().map_target(|_| b_t.unwrap()) == *b,
                None => a == b,
            }
        })
    });
    assert!(found);
}

#[test]
fn non_halting_source_never_halts_when_lowered() {
    let spin = Program::rnn(vec![Instruction::Decrease { reg: 9, target: 0 }]).unwrap();
    let lowered = rnn_to_abacus(&spin, ShapeBound::new(1, 1).unwrap()).unwrap();
    for n in [0u64, 1, 4, 46] {
        assert!(matches!(
            run_abacus_on(&lowered, nat(n), 1_000_000).unwrap(),
            Outcome::BudgetExceeded { .. }
        ));
    }
}
