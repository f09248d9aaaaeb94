use cqs_core::conegeom::{sigma_polyline, supplementary_polyline};
use cqs_core::contfrac::{hj_eval, hj_expand, q_conjugate};
use cqs_core::fillings::{count_components, milnor_numbers};
use cqs_core::toricfan::indeterminacy_count;
use cqs_core::zeroseq::{block_matrix, enumerate_components, point_count};
use cqs_core::Error;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::One;
use proptest::prelude::*;

/// Coprime `p > q > 0` with up to ~120-bit `p`.
fn big_pair() -> impl Strategy<Value = (BigInt, BigInt)> {
    (any::<u64>(), any::<u64>(), any::<u128>()).prop_filter_map("coprime", |(hi, lo, q)| {
        let p: BigInt = (BigInt::from(hi >> 8) << 64u32) + BigInt::from(lo) + 2u32;
        let q: BigInt = BigInt::from(q) % (&p - 1u32) + 1u32;
        p.gcd(&q).is_one().then_some((p, q))
    })
}

/// Whether every ceiling quotient of `p/q` fits in an `i64`.
fn entries_fit(p: &BigInt, q: &BigInt) -> bool {
    let (mut num, mut den) = (p.clone(), q.clone());
    while den.sign() == Sign::Plus {
        let x = (&num + &den - 1u32) / &den;
        if x > BigInt::from(i64::MAX) {
            return false;
        }
        let rem = &x * &den - &num;
        num = std::mem::replace(&mut den, rem);
    }
    true
}

fn small_pair() -> impl Strategy<Value = (i64, i64)> {
    (2i64..60, 1i64..60).prop_filter_map("coprime", |(p, q)| (q < p && p.gcd(&q) == 1).then_some((p, q)))
}

fn a_of(p: i64, q: i64) -> Vec<i64> {
    hj_expand(&p.into(), &(p - q).into()).unwrap().into_vec()
}

proptest! {
    #[test]
    fn expansion_round_trips_on_big_pairs((p, q) in big_pair()) {
        if !entries_fit(&p, &q) {
            prop_assert!(matches!(hj_expand(&p, &q), Err(Error::EntryOverflow)));
            return Ok(());
        }
        let b = hj_expand(&p, &q).unwrap();
        let v = hj_eval(&b).unwrap();
        prop_assert_eq!((v.numerator(), v.denominator()), (&p, &q));
        let qp = q_conjugate(&p, &q).unwrap();
        prop_assert!((&qp * &q - 1u32).is_multiple_of(&p));
        prop_assert_eq!(hj_expand(&p, &qp).unwrap(), b.reversed());
    }

    #[test]
    fn polyline_lengths_match_expansions((p, q) in small_pair()) {
        let (pb, qb) = (BigInt::from(p), BigInt::from(q));
        let s = hj_expand(&pb, &qb).unwrap().len();
        let r = a_of(p, q).len();
        prop_assert_eq!(sigma_polyline(&pb, &qb).unwrap().points.len(), s + 2);
        prop_assert_eq!(supplementary_polyline(&pb, &qb).unwrap().points.len(), r + 2);
    }

    #[test]
    fn component_counts_agree_under_conjugation((p, q) in small_pair()) {
        let (pb, qb) = (BigInt::from(p), BigInt::from(q));
        let qp = q_conjugate(&pb, &qb).unwrap();
        prop_assert_eq!(count_components(&pb, &qb).unwrap(), count_components(&pb, &qp).unwrap());
    }
}

#[test]
fn block_matrix_sign_structure() {
    for p in 2i64..=40 {
        for q in (1..p).filter(|q| p.gcd(q) == 1) {
            let a = a_of(p, q);
            for c in enumerate_components(&a).unwrap() {
                let d = block_matrix(&a, &c.k, &c.triangulation).unwrap();
                let minus = |i: usize| d.row(i).iter().filter(|x| **x == BigInt::from(-1)).count();
                assert_eq!(minus(0), 0, "a={a:?} k={}", c.k);
                for i in 1..d.rows {
                    assert_eq!(minus(i), 1, "a={a:?} k={} row {i}", c.k);
                }
            }
        }
    }
}

#[test]
fn point_counts_agree_across_modules() {
    for p in 2i64..=40 {
        for q in (1..p).filter(|q| p.gcd(q) == 1) {
            let a = a_of(p, q);
            let r = a.len();
            for c in enumerate_components(&a).unwrap() {
                let n = point_count(&a, &c.k);
                let m = milnor_numbers(&a, &c.k).unwrap();
                assert_eq!(m.n_points, n as i64);
                assert_eq!(m.n_points - (r as i64 - 1), m.euler_characteristic_fiber);
                let indeterminacy: i64 = (1..=r).map(|j| indeterminacy_count(&a, &c.k, j).unwrap()).sum();
                assert_eq!(indeterminacy, n as i64 - (r as i64 - 1), "a={a:?} k={}", c.k);
            }
        }
    }
}
