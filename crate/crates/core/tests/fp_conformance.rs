mod common;

use common::fp_oracle::{self as oracle, Outcome, Small};
use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcbench_core::fp::*;
use tcbench_core::Error;

const P: u32 = 3;

fn lift(x: Small) -> FpNumber {
    FpNumber::from_parts(x.m, x.e, P).unwrap()
}

fn outcome(r: tcbench_core::Result<FpNumber>) -> Outcome {
    match r {
        Ok(x) => Outcome::Value(Small { m: x.significand().try_into().unwrap(), e: x.exponent() }),
        Err(Error::Overflow { .. }) => Outcome::Overflow,
        Err(Error::DivisionByZero) => Outcome::DivZero,
        Err(e) => panic!("unexpected error {e}"),
    }
}

#[test]
fn exhaustive_window_matches_definitions() {
    let table = oracle::all_values(P);
    let xs = oracle::window_values(P, -4, 4);
    let mut checked = 0usize;
    for &a in &xs {
        assert_eq!(outcome(fp_floor(&lift(a))), oracle::floor(a, P, &table), "floor {a:?}");
        for &b in &xs {
            let (fa, fb) = (lift(a), lift(b));
            assert_eq!(outcome(fp_add(&fa, &fb)), oracle::add(a, b, P, &table), "add {a:?} {b:?}");
            assert_eq!(outcome(fp_mul(&fa, &fb)), oracle::mul(a, b, P, &table), "mul {a:?} {b:?}");
            assert_eq!(outcome(fp_div(&fa, &fb)), oracle::div(a, b, P, &table), "div {a:?} {b:?}");
            assert_eq!(fp_compare(&fa, &fb).unwrap(), oracle::compare(a, b), "cmp {a:?} {b:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 65 * 65);
}

#[test]
fn round_matches_brute_force_on_random_rationals() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [2u32, 3, 4] {
        let table = oracle::all_values(p);
        let bound = 1i64 << (1 << p);
        for _ in 0..3000 {
            let den: i64 = rng.gen_range(1..=1 << 12);
            let num: i64 = rng.gen_range(-bound * 2..=bound * 2);
            let x = Q::new(BigInt::from(num), BigInt::from(den));
            assert_eq!(outcome(round_p(&x, p)), oracle::round_brute(&x, p, &table), "round_{p}({x})");
        }
        // the tiny end, including the halfway point between zero and the smallest value
        let lo = -(1i64 << p);
        for k in 0..64 {
            let x = Q::new(BigInt::from(k), BigInt::from(16)) * oracle::pow2(lo + i64::from(p) - 1);
            assert_eq!(outcome(round_p(&x, p)), oracle::round_brute(&x, p, &table), "round_{p}({x})");
        }
    }
}

#[test]
fn spec_examples() {
    let r = |n: i64| round_p(&oracle::q(n), 3).unwrap();
    assert_eq!(r(8), FpNumber::from_parts(4, 1, 3).unwrap());
    assert_eq!(r(0), FpNumber::zero(3));
    assert_eq!(r(9), FpNumber::from_parts(4, 1, 3).unwrap());
    assert_eq!(r(9).to_rational(), oracle::q(8));

    assert_eq!(approx_div(&oracle::q(5), &oracle::q(2)).unwrap(), Q::new(5.into(), 2.into()));
    assert_eq!(approx_div(&oracle::q(5), &oracle::q(3)).unwrap(), Q::new(43.into(), 24.into()));
    assert!(approx_div(&oracle::q(0), &oracle::q(7)).unwrap().is_zero());
    assert_eq!(approx_div(&oracle::q(1), &oracle::q(0)), Err(Error::DivisionByZero));

    let f = |m, e| FpNumber::from_parts(m, e, 3).unwrap();
    assert_eq!(fp_add(&f(4, 0), &f(4, 0)).unwrap(), f(4, 1));
    assert_eq!(fp_add(&f(4, 0), &FpNumber::zero(3)).unwrap(), f(4, 0));
    let table = oracle::all_values(3);
    assert_eq!(
        outcome(fp_add(&f(5, 0), &f(5, -2))),
        oracle::add(Small { m: 5, e: 0 }, Small { m: 5, e: -2 }, 3, &table)
    );
    assert_eq!(fp_mul(&f(4, 0), &f(4, 0)).unwrap(), f(4, 2));
    assert_eq!(fp_compare(&f(4, 0), &f(4, 1)).unwrap(), std::cmp::Ordering::Less);
    assert_eq!(fp_floor(&f(5, -1)).unwrap(), f(4, -1));
    assert_eq!(fp_div(&f(4, 0), &FpNumber::zero(3)), Err(Error::DivisionByZero));
}

#[test]
fn iter_add_examples() {
    let f = |m, e| FpNumber::from_parts(m, e, 3).unwrap();
    assert_eq!(iter_add(&[f(4, 0)]).unwrap(), f(4, 0));
    assert_eq!(iter_add(&[f(4, 0), f(4, 0), f(4, 0), f(4, 0)]).unwrap(), f(4, 2));
    assert_eq!(iter_add(&[]), Err(Error::EmptyOperands));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let xs: Vec<FpNumber> = (0..7)
            .map(|_| {
                let m: i64 = rng.gen_range(8..16) * if rng.gen_bool(0.5) { -1 } else { 1 };
                FpNumber::from_parts(m, rng.gen_range(-6..6), 4).unwrap()
            })
            .collect();
        let exact = xs.iter().fold(Q::zero(), |acc, x| acc + x.to_rational());
        assert_eq!(iter_add(&xs).unwrap(), round_p(&exact, 4).unwrap());
        let prod = xs.iter().fold(Q::from_integer(1.into()), |acc, x| acc * x.to_rational());
        assert_eq!(iter_mul(&xs), round_p(&prod, 4));
    }
}

#[test]
fn overflow_is_an_error() {
    let big = FpNumber::from_parts(7, 7, 3).unwrap();
    assert!(matches!(fp_mul(&big, &big), Err(Error::Overflow { .. })));
    assert!(matches!(fp_add(&big, &big), Err(Error::Overflow { .. })));
}
