//! Property tests over the public API.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use proptest::prelude::*;

use abacus_rnn::analysis::{d_align, d_lcs, d_perturb, lcs_len};
use abacus_rnn::asm::{parse_program, parse_seq_literal, print_program, print_seq_literal};
use abacus_rnn::godel::{
    calkin_wilf, calkin_wilf_index, nat_to_rat, pair, program_decode, program_encode, rat_to_nat, seq_decode,
    seq_encode, unpair,
};
use abacus_rnn::machine::{
    load_sequence, run_abacus, store_sequence, trace_abacus, Instruction, Outcome, Program, RegisterFile,
};
use abacus_rnn::numeric::{Norm, RVector, Rational, VecSeq};

fn oracle(r: &Rational) -> BigRational {
    let n = BigInt::from(r.numer().clone());
    BigRational::new(if r.is_negative() { -n } else { n }, BigInt::from(r.denom().clone()))
}

fn rational() -> impl Strategy<Value = Rational> {
    (-1000i64..=1000, 1u64..=1000).prop_map(|(n, d)| Rational::new(n, d).unwrap())
}

fn vector(max_arity: usize) -> impl Strategy<Value = RVector> {
    prop::collection::vec(rational(), 1..=max_arity).prop_map(|v| RVector::new(v).unwrap())
}

fn seq() -> impl Strategy<Value = VecSeq> {
    prop::collection::vec(vector(4), 0..=4).prop_map(VecSeq::new)
}

fn instruction(len: usize, kinds: u8) -> impl Strategy<Value = Instruction> {
    let reg = 0usize..12;
    (0..kinds, reg.clone(), reg.clone(), reg, 0..=len, prop::collection::vec(0usize..12, 1..3)).prop_map(
        |(k, a, b, c, target, rows)| match k {
            0 => Instruction::Halt,
            1 => Instruction::Zero { reg: a },
            2 => Instruction::Increase { reg: a, target },
            3 => Instruction::Decrease { reg: a, target },
            4 => Instruction::Add { lhs: a, rhs: b, dst: c, target },
            5 => Instruction::NonLinear { src: a, dst: b, target },
            _ => Instruction::Multiply { rows, vec: a, dst: b, target },
        },
    )
}

fn program(kinds: u8) -> impl Strategy<Value = Vec<Instruction>> {
    (0usize..10).prop_flat_map(move |len| prop::collection::vec(instruction(len, kinds), len))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn rational_arithmetic_matches_oracle(a in rational(), b in rational()) {
        prop_assert_eq!(oracle(&(&a + &b)), oracle(&a) + oracle(&b));
        prop_assert_eq!(oracle(&(&a - &b)), oracle(&a) - oracle(&b));
        prop_assert_eq!(oracle(&(&a * &b)), oracle(&a) * oracle(&b));
        prop_assert_eq!(a.cmp(&b), oracle(&a).cmp(&oracle(&b)));
        prop_assert_eq!(oracle(&a.max0()), oracle(&a).max(BigRational::from_integer(0.into())));
    }

    #[test]
    fn pairing_round_trips(a in any::<u64>(), b in any::<u64>()) {
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        prop_assert_eq!(unpair(&pair(&a, &b)), (a, b));
    }

    #[test]
    fn calkin_wilf_round_trips(m in 1u64..u64::MAX) {
        let m = BigUint::from(m);
        let (a, b) = calkin_wilf(&m);
        prop_assert_eq!(calkin_wilf_index(&a, &b), m);
    }

    #[test]
    fn rational_codes_round_trip(q in rational(), n in any::<u32>()) {
        prop_assert_eq!(nat_to_rat(&rat_to_nat(&q)), q);
        let n = BigUint::from(n);
        prop_assert_eq!(rat_to_nat(&nat_to_rat(&n)), n);
    }

    #[test]
    fn sequence_codes_round_trip(x in seq()) {
        prop_assert_eq!(seq_decode(&seq_encode(&x)).unwrap(), x);
    }

    #[test]
    fn storage_round_trips(x in seq(), base in 0usize..40) {
        let mut regs = RegisterFile::new();
        store_sequence(&mut regs, base, &x);
        prop_assert_eq!(load_sequence(&regs, base).unwrap(), x);
    }

    #[test]
    fn literals_round_trip(x in seq()) {
        prop_assert_eq!(parse_seq_literal(&print_seq_literal(&x)).unwrap(), x);
    }

    #[test]
    fn program_codes_round_trip(instrs in program(7)) {
        let p = Program::rnn(instrs).unwrap();
        prop_assert_eq!(program_decode(&program_encode(&p)).unwrap(), p);
    }

    #[test]
    fn assembly_round_trips(instrs in program(7), abacus in any::<bool>()) {
        let p = if abacus {
            let plain = instrs.into_iter().filter(|i| !i.is_vector_op()).collect::<Vec<_>>();
            let len = plain.len();
            Program::abacus(plain.into_iter().map(|i| i.map_target(|t| t.min(len))).collect()).unwrap()
        } else {
            Program::rnn(instrs).unwrap()
        };
        prop_assert_eq!(parse_program(&print_program(&p)).unwrap(), p);
    }

    #[test]
    fn runs_are_deterministic_and_budget_monotone(instrs in program(4), x in 0u64..20, extra in 0u64..1000) {
        let p = Program::abacus(instrs).unwrap();
        let init = RegisterFile::from_pairs([(0usize, x)]);
        let first = run_abacus(&p, init.clone(), 2000).unwrap();
        prop_assert_eq!(&run_abacus(&p, init.clone(), 2000).unwrap(), &first);
        if let Outcome::Halted { steps, .. } = &first {
            prop_assert_eq!(&run_abacus(&p, init.clone(), steps + extra).unwrap(), &first);
        }
        let (entries, traced) = trace_abacus(&p, init, 2000).unwrap();
        prop_assert_eq!(&traced, &first);
        prop_assert!(entries.len() as u64 >= first.steps());
    }

    #[test]
    fn metrics_are_symmetric_and_bounded(x in seq(), y in seq()) {
        prop_assert_eq!(d_lcs(&x, &y), d_lcs(&y, &x));
        prop_assert!(d_lcs(&x, &y) <= Rational::one());
        prop_assert!(lcs_len(&x, &y) <= x.len().min(y.len()));
        let g = Rational::new(1, 2).unwrap();
        prop_assert_eq!(d_align(&x, &y, &g, Norm::Linf), d_align(&y, &x, &g, Norm::Linf));
        // Deleting everything and inserting everything is always allowed.
        let cap = &g * &Rational::from((x.len() + y.len()) as i64);
        prop_assert!(d_align(&x, &y, &g, Norm::L1) <= cap);
        prop_assert_eq!(d_perturb(&x, &y, Norm::Linf).is_ok(), x.shape() == y.shape());
    }
}
