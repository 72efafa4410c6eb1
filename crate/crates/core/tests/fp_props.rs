use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::Signed;
use proptest::prelude::*;
use tcbench_core::fp::*;

fn float(p: u32) -> impl Strategy<Value = FpNumber> {
    let lo = 1i64 << (p - 1);
    let hi = 1i64 << p;
    let emax = (1i64 << p).min(40);
    prop_oneof![
        1 => Just(FpNumber::zero(p)),
        8 => (lo..hi, any::<bool>(), -emax..emax).prop_map(move |(m, neg, e)| {
            FpNumber::from_parts(if neg { -m } else { m }, e, p).unwrap()
        }),
    ]
}

fn any_p() -> impl Strategy<Value = u32> {
    prop_oneof![Just(3u32), Just(4), Just(8)]
}

fn pair() -> impl Strategy<Value = (FpNumber, FpNumber)> {
    any_p().prop_flat_map(|p| (float(p), float(p)))
}

fn normalized(x: &FpNumber) -> bool {
    FpNumber::new(x.significand().clone(), x.exponent(), x.precision()).is_ok()
}

proptest! {
    #[test]
    fn results_stay_normalized((a, b) in pair()) {
        for r in [fp_add(&a, &b), fp_mul(&a, &b), fp_div(&a, &b), fp_floor(&a), iter_add(&[a.clone(), b.clone()])].into_iter().flatten() {
            prop_assert!(normalized(&r), "{r:?}");
        }
    }

    #[test]
    fn add_and_mul_commute((a, b) in pair()) {
        prop_assert_eq!(fp_add(&a, &b), fp_add(&b, &a));
        prop_assert_eq!(fp_mul(&a, &b), fp_mul(&b, &a));
    }

    #[test]
    fn compare_is_antisymmetric((a, b) in pair()) {
        prop_assert_eq!(fp_compare(&a, &b).unwrap(), fp_compare(&b, &a).unwrap().reverse());
    }

    #[test]
    fn iterated_ops_ignore_order(p in any_p(), seed in any::<u64>(), xs in prop::collection::vec(0usize..1000, 1..9)) {
        let pool: Vec<FpNumber> = (0..16).map(|i| {
            let m = (1i64 << (p - 1)) + ((seed >> i) as i64 & ((1 << (p - 1)) - 1));
            FpNumber::from_parts(if i % 3 == 0 { -m } else { m }, (i as i64 % 7) - 3, p).unwrap()
        }).collect();
        let ops: Vec<FpNumber> = xs.iter().map(|&i| pool[i % 16].clone()).collect();
        let mut rev = ops.clone();
        rev.reverse();
        rev.rotate_left(ops.len() / 2);
        prop_assert_eq!(iter_add(&ops), iter_add(&rev));
        prop_assert_eq!(iter_mul(&ops), iter_mul(&rev));
    }

    #[test]
    fn exact_matmul_is_associative(a in prop::collection::vec(-20i64..20, 6), b in prop::collection::vec(-20i64..20, 6), c in prop::collection::vec(-20i64..20, 8)) {
        let m = |r, c, v: &[i64]| FpMatrix::exact(Matrix::from_vec(r, c, v.iter().map(|&x| Q::new(BigInt::from(x), BigInt::from(3))).collect()).unwrap());
        let (a, b, c) = (m(2, 3, &a), m(3, 2, &b), m(2, 4, &c));
        let left = matmul(&matmul(&a, &b).unwrap(), &c).unwrap();
        let right = matmul(&a, &matmul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn json_round_trip(x in any_p().prop_flat_map(float)) {
        let s = serde_json::to_string(&x).unwrap();
        let back: FpNumber = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, x);
    }
}

fn random_pbit(rows: usize, cols: usize, p: u32, seed: u64) -> FpMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q = Matrix::from_fn(rows, cols, |_, _| Q::new(BigInt::from(rng.gen_range(-1000i64..1000)), BigInt::from(64)));
    FpMatrix::from_rationals(&q, Mode::PBit(p)).unwrap()
}

#[test]
fn matmul_examples() {
    let a = random_pbit(3, 3, 8, 1);
    assert_eq!(matmul(&FpMatrix::identity(3, Mode::PBit(8)), &a).unwrap(), a);
    let x = random_pbit(1, 1, 8, 2);
    let y = random_pbit(1, 1, 8, 3);
    let (FpMatrix::PBit { m: xm, .. }, FpMatrix::PBit { m: ym, .. }) = (&x, &y) else { unreachable!() };
    let FpMatrix::PBit { m: prod, .. } = matmul(&x, &y).unwrap() else { unreachable!() };
    assert_eq!(prod.get(0, 0), &fp_mul(xm.get(0, 0), ym.get(0, 0)).unwrap());

    // every entry within one rounding of the exact product of the rounded entries
    let b = random_pbit(3, 3, 8, 4);
    let exact = matmul(&a.convert(Mode::ExactRational).unwrap(), &b.convert(Mode::ExactRational).unwrap()).unwrap();
    let got = matmul(&a, &b).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let e = exact.rational(i, j);
            let g = got.rational(i, j);
            // one rounding per product plus the final rounding of the sum
            let mass =
                (0..3).fold(Q::from_integer(0.into()), |acc, k| acc + (a.rational(i, k) * b.rational(k, j)).abs());
            let tol = (mass + e.abs()) * Q::new(BigInt::from(1), BigInt::from(256));
            assert!((g - e).abs() <= tol, "entry ({i},{j})");
        }
    }
    assert!(matches!(matmul(&a, &random_pbit(2, 3, 8, 5)), Err(tcbench_core::Error::ShapeMismatch(_))));
}

#[test]
fn hadamard_examples() {
    let a = random_pbit(2, 3, 8, 9);
    let ones = FpMatrix::from_rationals(&Matrix::filled(2, 3, Q::from_integer(1.into())), Mode::PBit(8)).unwrap();
    assert_eq!(hadamard(&a, &ones).unwrap(), a);
    assert!(hadamard(&a, &FpMatrix::zeros(2, 3, Mode::PBit(8))).unwrap().is_zero());
    let b = random_pbit(2, 3, 8, 10);
    let h = hadamard(&a, &b).unwrap();
    for i in 0..2 {
        for j in 0..3 {
            assert_eq!(h.rational(i, j), round_p(&(a.rational(i, j) * b.rational(i, j)), 8).unwrap().to_rational());
        }
    }
}

#[test]
fn matrix_json_round_trip() {
    let a = random_pbit(2, 2, 8, 3);
    let s = serde_json::to_string(&a).unwrap();
    assert!(s.contains("\"rows\":2") && s.contains("\"entries\""));
    assert_eq!(serde_json::from_str::<FpMatrix>(&s).unwrap(), a);
    let e = a.convert(Mode::ExactRational).unwrap();
    let s = serde_json::to_string(&e).unwrap();
    assert_eq!(serde_json::from_str::<FpMatrix>(&s).unwrap(), e);
}
