//! The one-parameter smoothing `z_{i-1} z_{i+1} = z_i^{a_i} + t z_i^{k_i}`
//! written in the coordinates `(t, z0, z1)`.
//!
//! On the deformed surface `z_i = z0^{-E_i} P_i` with
//! `E_i = Z_{i-2}(a_2..a_{i-1})` and polynomials `P_i` satisfying
//! `P_{i-1} P_{i+1} = P_i^{a_i} + t P_i^{k_i} z0^{(a_i-k_i) E_i}`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{check_pair, hj_eval, z_window, HjSequence};
use crate::error::{Error, Result};
use crate::poly::MultiPoly;
use crate::zeroseq::ZeroSequence;

/// Weights `w_0..w_{r+1}` of the coordinates `z_0..z_{r+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w: Vec<BigInt>,
}

/// `w_i = Z_{i-1}(a_1..a_{i-1}) - Z_{i-2}(a_2..a_{i-1})`, normalized by
/// `w_0 = w_1 = 1`.
pub fn weights(a: &[i64], p: &BigInt, q: &BigInt) -> Result<WeightVector> {
    check_pair(p, q)?;
    HjSequence::from(a).require_at_least(2)?;
    let value = hj_eval(a)?;
    if value.numerator() != p || value.denominator() != &(p - q) {
        return Err(Error::Verification(format!("a-chain {:?} does not expand {}/{}", a, p, p - q)));
    }
    let r = a.len() as isize;
    let mut w = vec![BigInt::one()];
    for i in 1..=r + 1 {
        w.push(z_window(a, 1, i - 1) - z_window(a, 2, i - 1));
    }
    let ok = w[0].is_one() && w[1].is_one() && w.windows(2).all(|x| x[0] <= x[1]) && w.last() == Some(q);
    if !ok {
        return Err(Error::Verification(format!("weight chain {w:?} is not 1 = w0 = w1 <= ... <= q")));
    }
    Ok(WeightVector { w })
}

/// `(Z_{i-2}(a_2..a_{i-1}))_{i=2..r+1}`: strictly increasing from 1 to `p - q`.
pub fn z0_exponents(a: &[i64]) -> Result<Vec<BigInt>> {
    if a.is_empty() {
        return Err(Error::EmptySequence("a-chain must be nonempty"));
    }
    HjSequence::from(a).require_at_least(2)?;
    let r = a.len() as isize;
    let e: Vec<BigInt> = (2..=r + 1).map(|i| z_window(a, 2, i - 1)).collect();
    let p_minus_q = hj_eval(a)?.denominator().clone();
    if !e[0].is_one() || !e.windows(2).all(|x| x[0] < x[1]) || e.last() != Some(&p_minus_q) {
        return Err(Error::Verification(format!("z0 exponent chain {e:?} does not rise from 1 to {p_minus_q}")));
    }
    Ok(e)
}

pub(crate) fn check_bounded(a: &[i64], k: &ZeroSequence) -> Result<()> {
    if a.len() != k.r() {
        return Err(Error::LengthMismatch { expected: a.len(), got: k.r() });
    }
    let a_seq = HjSequence::from(a);
    a_seq.require_at_least(2)?;
    if !k.seq().le_entrywise(&a_seq) {
        return Err(Error::NotBounded { k: k.to_vec(), a: a.to_vec() });
    }
    Ok(())
}

fn to_u32(x: &BigInt) -> Result<u32> {
    x.to_u32().ok_or(Error::EntryOverflow)
}

/// `E_i = Z_{i-2}(a_2..a_{i-1})` for `i = 1..=r+1` (index 0 unused, `E_1 = 0`).
pub(crate) fn exponents_e(a: &[i64]) -> Vec<BigInt> {
    let r = a.len() as isize;
    let mut e = vec![BigInt::zero()];
    e.extend((1..=r + 1).map(|i| z_window(a, 2, i - 1)));
    e
}

/// `P_0, ..., P_{r+1}` without a degree cap.
pub fn deformation_chain(a: &[i64], k: &ZeroSequence) -> Result<Vec<MultiPoly>> {
    deformation_chain_capped(a, k, None)
}

/// `P_0, ..., P_{r+1}`. Every division must be exact and no `P_i` may be
/// divisible by `z0`. `cap` bounds the total degree of each numerator
/// `P_i^{a_i} + t P_i^{k_i} z0^{...}`.
///
/// The numerator is `P_i^{k_i} F_i` with `F_i = P_i^{d_i} + t z0^{d_i E_i}`.
/// Each `P_i` is kept as a product of earlier factors (`z1` and the `F_j`),
/// so dividing by `P_{i-1}` subtracts exponents; it is exact when none goes
/// negative. Otherwise the quotient comes from long division and becomes a
/// factor of its own.
pub fn deformation_chain_capped(a: &[i64], k: &ZeroSequence, cap: Option<u64>) -> Result<Vec<MultiPoly>> {
    check_bounded(a, k)?;
    let r = a.len();
    let e = exponents_e(a);
    let mut chain = vec![MultiPoly::one(), MultiPoly::z1()];
    let mut factors = vec![MultiPoly::z1()];
    let mut exps: Vec<Vec<u64>> = vec![vec![], vec![1]];
    for i in 1..=r {
        let (ai, ki) = (a[i - 1] as u64, k[i - 1] as u64);
        let pi = &chain[i];
        let di = pi.total_degree().unwrap_or(0);
        let z0_exp = to_u32(&(BigInt::from(ai - ki) * &e[i]))?;
        if let Some(cap) = cap {
            let bound = (ai * di).max(1 + ki * di + z0_exp as u64);
            if bound > cap {
                return Err(Error::DegreeCapExceeded { degree: bound, cap });
            }
        }
        factors.push(pi.pow(ai - ki).add(&MultiPoly::monomial(1, z0_exp, 0)));
        let mut w = vec![0i64; factors.len()];
        for (j, &x) in exps[i].iter().enumerate() {
            w[j] += (ki * x) as i64;
        }
        w[factors.len() - 1] += 1;
        for (j, &x) in exps[i - 1].iter().enumerate() {
            w[j] -= x as i64;
        }
        let (next, w) = if w.iter().all(|&x| x >= 0) {
            let w: Vec<u64> = w.into_iter().map(|x| x as u64).collect();
            (expand_product(&factors, &w), w)
        } else {
            let numerator = pi.pow(ki).mul(&factors[factors.len() - 1]);
            let next = numerator
                .div_exact(&chain[i - 1])
                .map_err(|err| Error::InexactDivision(format!("P_{} for a={:?}, k={}: {err}", i + 1, a, k)))?;
            factors.push(next.clone());
            let mut w = vec![0; factors.len()];
            w[factors.len() - 1] = 1;
            (next, w)
        };
        if next.divisible_by_z0() {
            return Err(Error::Verification(format!("z0 divides P_{} for a={:?}, k={}", i + 1, a, k)));
        }
        chain.push(next);
        exps.push(w);
    }
    Ok(chain)
}

fn expand_product(factors: &[MultiPoly], w: &[u64]) -> MultiPoly {
    factors.iter().zip(w).filter(|(_, &x)| x > 0).fold(MultiPoly::one(), |acc, (f, &x)| acc.mul(&f.pow(x)))
}

/// Checks `P_{r+1} = prod_j (P_j^{d_j} + t z0^{d_j E_j})^{Z_{j-1}(k_1..k_{j-1})}`
/// with `d_j = a_j - k_j`.
///
/// A factor with `d_j = 0` is the unit `1 + t`: the equation at `j` then
/// reads `z_{j-1} z_{j+1} = (1 + t) z_j^{a_j}`. Over `C` with `t` fixed it is
/// a nonzero constant and drops out of the irreducible decomposition, but
/// the identity in `Z[t, z0, z1]` needs it.
pub fn verify_factorization(a: &[i64], k: &ZeroSequence) -> Result<bool> {
    let chain = deformation_chain(a, k)?;
    factorization_holds(a, k, &chain)
}

/// Same check against an already computed chain.
pub fn factorization_holds(a: &[i64], k: &ZeroSequence, chain: &[MultiPoly]) -> Result<bool> {
    check_bounded(a, k)?;
    let r = a.len();
    if chain.len() != r + 2 {
        return Err(Error::LengthMismatch { expected: r + 2, got: chain.len() });
    }
    let e = exponents_e(a);
    let mut factors = Vec::new();
    for j in 1..=r {
        let d = (a[j - 1] - k[j - 1]) as u64;
        let mult = z_window(k, 1, j as isize - 1);
        if mult.is_zero() {
            continue;
        }
        let z0_exp = to_u32(&(BigInt::from(d) * &e[j]))?;
        let inner = chain[j].pow(d).add(&MultiPoly::monomial(1, z0_exp, 0));
        factors.push((inner, mult.to_u64().ok_or(Error::EntryOverflow)?));
    }
    let lhs = &chain[r + 1];
    let predicted: u64 = factors.iter().map(|(f, m)| f.total_degree().unwrap_or(0) * m).sum();
    if lhs.total_degree() != Some(predicted) {
        return Ok(false);
    }
    let rhs = factors.iter().fold(MultiPoly::one(), |acc, (f, m)| acc.mul(&f.pow(*m)));
    Ok(&rhs == lhs)
}

/// Builds the chain and checks it: exact divisions, `z0` dividing no `P_i`,
/// `P_i(t = 0) = z1^{Z_{i-1}(a_1..a_{i-1})}`, and the factorization of
/// `P_{r+1}`.
pub fn verify_chain(a: &[i64], k: &ZeroSequence, cap: Option<u64>) -> Result<Vec<MultiPoly>> {
    let chain = deformation_chain_capped(a, k, cap)?;
    for (i, pi) in chain.iter().enumerate().skip(1) {
        let zi = to_u32(&z_window(a, 1, i as isize - 1))?;
        if pi.at_t_zero() != MultiPoly::monomial(0, 0, zi) {
            return Err(Error::Verification(format!("P_{i}(t = 0) is not z1^{zi} for a={a:?}, k={k}")));
        }
    }
    if !factorization_holds(a, k, &chain)? {
        return Err(Error::Verification(format!("P_{} does not factor for a={a:?}, k={k}", a.len() + 1)));
    }
    Ok(chain)
}

/// One instance of the estimate: if `nu_{i+1} >= x_i nu_i - nu_{i-1}` for
/// all `i`, then `nu_{i+1} >= Z_i(x_i..x_1) nu_1 - Z_{i-1}(x_i..x_2) nu_0`.
/// Returns whether the implication holds (vacuously true if the hypothesis
/// fails).
pub fn check_valuation_bound(x: &[i64], nu: &[BigInt]) -> Result<bool> {
    let n = x.len();
    if nu.len() != n + 2 {
        return Err(Error::LengthMismatch { expected: n + 2, got: nu.len() });
    }
    let hypothesis = (1..=n).all(|i| nu[i + 1] >= BigInt::from(x[i - 1]) * &nu[i] - &nu[i - 1]);
    if !hypothesis {
        return Ok(true);
    }
    let rev: Vec<i64> = x.iter().rev().copied().collect();
    // Z_i(x_i..x_1) is the window rev[n-i+1..=n]; Z_{i-1}(x_i..x_2) drops the last.
    let conclusion = (1..=n).all(|i| {
        let from = (n - i + 1) as isize;
        let zi = z_window(&rev, from, n as isize);
        let zi1 = z_window(&rev, from, n as isize - 1);
        nu[i + 1] >= zi * &nu[1] - zi1 * &nu[0]
    });
    Ok(conclusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::{hj_expand, is_admissible, z_value};
    use crate::zeroseq::enumerate_k;
    use proptest::prelude::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn zs(k: &[i64]) -> ZeroSequence {
        ZeroSequence::new(k.to_vec()).unwrap()
    }

    #[test]
    fn weights_examples() {
        let w = weights(&[2, 3, 2, 2], &BigInt::from(11), &BigInt::from(4)).unwrap();
        assert_eq!(w.w, big(&[1, 1, 1, 2, 3, 4]));
        assert_eq!(weights(&[2], &BigInt::from(2), &BigInt::from(1)).unwrap().w, big(&[1, 1, 1]));
        // (2,...,2) of length r expands (r+1)/r = p/(p-q), so q = 1.
        for r in 1..8i64 {
            let a = vec![2; r as usize];
            let w = weights(&a, &BigInt::from(r + 1), &BigInt::one()).unwrap();
            assert_eq!(w.w, big(&vec![1; r as usize + 2]));
            if r > 1 {
                assert!(weights(&a, &BigInt::from(r + 1), &BigInt::from(r)).is_err());
            }
        }
        assert!(weights(&[2, 3, 2, 2], &BigInt::from(11), &BigInt::from(3)).is_err());
    }

    #[test]
    fn weights_match_direct_formula() {
        // Oracle: w_i from the rational expression z_i = z1^{Z_{i-1}} z0^{-E_i}, weight
        // Z_{i-1}(a_1..a_{i-1}) - Z_{i-2}(a_2..a_{i-1}), computed from slices.
        for p in 2i64..60 {
            for q in 1..p {
                if num_integer::Integer::gcd(&p, &q) != 1 {
                    continue;
                }
                let a = hj_expand(&BigInt::from(p), &BigInt::from(p - q)).unwrap();
                let w = weights(&a, &BigInt::from(p), &BigInt::from(q)).unwrap();
                for i in 1..=a.len() + 1 {
                    let direct = z_value(&a[..i - 1]) - if i >= 2 { z_value(&a[1..i - 1]) } else { BigInt::zero() };
                    assert_eq!(w.w[i], direct);
                }
            }
        }
    }

    #[test]
    fn z0_exponent_examples() {
        assert_eq!(z0_exponents(&[2, 3, 2, 2]).unwrap(), big(&[1, 3, 5, 7]));
        assert_eq!(z0_exponents(&[2]).unwrap(), big(&[1]));
        assert_eq!(z0_exponents(&[3, 3]).unwrap(), big(&[1, 3]));
        assert!(z0_exponents(&[]).is_err());
    }

    #[test]
    fn chain_first_steps() {
        let chain = deformation_chain(&[2, 3, 2, 2], &zs(&[1, 2, 2, 1])).unwrap();
        assert_eq!(chain.len(), 6);
        assert_eq!(chain[0], MultiPoly::one());
        assert_eq!(chain[1], MultiPoly::z1());
        assert_eq!(chain[2], MultiPoly::z1().pow(2).add(&MultiPoly::t().mul(&MultiPoly::z1())));
        assert_eq!(chain[5].at_t_zero(), MultiPoly::monomial(0, 0, 11));
    }

    #[test]
    fn factored_chain_matches_long_division() {
        for p in 2i64..=16 {
            for q in 1..p {
                if num_integer::Integer::gcd(&p, &q) != 1 {
                    continue;
                }
                let a = crate::contfrac::hj_expand(&p.into(), &(p - q).into()).unwrap().into_vec();
                let e = exponents_e(&a);
                for k in crate::zeroseq::enumerate_k(&a).unwrap() {
                    let chain = deformation_chain(&a, &k).unwrap();
                    for i in 1..=a.len() {
                        let (ai, ki) = (a[i - 1] as u64, k[i - 1] as u64);
                        let z0 = ((ai - ki) as u32) * e[i].to_u32().unwrap();
                        let numerator =
                            chain[i].pow(ai).add(&chain[i].pow(ki).mul(&MultiPoly::monomial(1, z0, 0)));
                        assert_eq!(numerator.div_exact(&chain[i - 1]).unwrap(), chain[i + 1], "a={a:?} k={k} i={i}");
                    }
                }
            }
        }
    }

    #[test]
    fn chain_rejects_bad_input() {
        assert!(matches!(deformation_chain(&[2, 2, 2, 2], &zs(&[1, 3, 1, 2])), Err(Error::NotBounded { .. })));
        assert!(deformation_chain(&[2, 3], &zs(&[1, 2, 2, 1])).is_err());
        assert!(matches!(
            deformation_chain_capped(&[2, 3, 2, 2], &zs(&[1, 2, 2, 1]), Some(5)),
            Err(Error::DegreeCapExceeded { .. })
        ));
    }

    #[test]
    fn chain_properties_small_sweep() {
        for p in 2i64..=14 {
            for q in 1..p {
                if num_integer::Integer::gcd(&p, &q) != 1 {
                    continue;
                }
                let a = hj_expand(&BigInt::from(p), &BigInt::from(p - q)).unwrap();
                for k in enumerate_k(&a).unwrap() {
                    let chain = deformation_chain(&a, &k).unwrap();
                    for (i, pi) in chain.iter().enumerate().skip(1) {
                        assert!(!pi.divisible_by_z0());
                        let zi = z_value(&a[..i - 1]);
                        let at0 = pi.at_t_zero();
                        assert_eq!(at0, MultiPoly::monomial(0, 0, zi.to_u32().unwrap()));
                        // No monomial exceeds the t = 0 degree in (z0, z1).
                        assert!(pi.terms().all(|(m, _)| BigInt::from(m.z0 + m.z1) <= zi));
                    }
                    assert_eq!(chain[a.len() + 1].degree_z1(), Some(p as u32));
                    assert!(factorization_holds(&a, &k, &chain).unwrap(), "a={a:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn verify_chain_examples() {
        let chain = verify_chain(&[2, 3, 2, 2], &zs(&[1, 3, 1, 2]), None).unwrap();
        assert_eq!(chain.len(), 6);
        assert!(verify_chain(&[2, 3, 2, 2], &zs(&[1, 2, 2, 1]), Some(3)).is_err());
    }

    #[test]
    fn factorization_examples() {
        assert!(verify_factorization(&[2, 3, 2, 2], &zs(&[1, 2, 2, 1])).unwrap());
        assert!(verify_factorization(&[2, 3, 2, 2], &zs(&[1, 3, 1, 2])).unwrap());
        let chain = deformation_chain(&[2], &zs(&[0])).unwrap();
        assert_eq!(chain[2], MultiPoly::z1().pow(2).add(&MultiPoly::t()));
        assert!(verify_factorization(&[2], &zs(&[0])).unwrap());
    }

    #[test]
    fn factorization_detects_corruption() {
        let a = [2, 3, 2, 2];
        let k = zs(&[1, 2, 2, 1]);
        let mut chain = deformation_chain(&a, &k).unwrap();
        chain[5] = chain[5].add(&MultiPoly::t());
        assert!(!factorization_holds(&a, &k, &chain).unwrap());
    }

    #[test]
    fn homogeneous_when_deformation_weight_is_constant() {
        // For r = 1 the single equation is homogeneous with w(t) = (a_1 - k_1) w_1.
        for a1 in 2..7 {
            let chain = deformation_chain(&[a1], &zs(&[0])).unwrap();
            let wt = a1 as u32;
            let degs: Vec<u32> = chain[2].terms().map(|(m, _)| m.t * wt + m.z0 + m.z1).collect();
            assert!(degs.iter().all(|&d| d == a1 as u32));
        }
    }

    #[test]
    fn valuation_bound_examples() {
        assert!(check_valuation_bound(&[2, 2], &big(&[0, 1, 2, 3])).unwrap());
        assert!(check_valuation_bound(&[2], &big(&[0, 0, 0])).unwrap());
        assert!(check_valuation_bound(&[2], &big(&[0, 0])).is_err());
    }

    fn admissible_seq() -> impl Strategy<Value = Vec<i64>> {
        prop::collection::vec(0i64..=4, 1..=6).prop_filter("admissible", |x| is_admissible(x))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]
        #[test]
        fn valuation_bound_random(
            x in admissible_seq(),
            nu0 in -20i64..20,
            nu1 in -20i64..20,
            slack in prop::collection::vec(0i64..5, 6),
        ) {
            let mut nu = vec![BigInt::from(nu0), BigInt::from(nu1)];
            for i in 1..=x.len() {
                let next = BigInt::from(x[i - 1]) * &nu[i] - &nu[i - 1] + slack[i - 1];
                nu.push(next);
            }
            prop_assert!(check_valuation_bound(&x, &nu).unwrap());
            // Direct check of the conclusion against sliced continuants.
            for i in 1..=x.len() {
                let rev: Vec<i64> = x[..i].iter().rev().copied().collect();
                let bound = z_value(&rev) * &nu[1] - z_value(&rev[..i - 1]) * &nu[0];
                prop_assert!(nu[i + 1] >= bound);
            }
        }
    }
}
