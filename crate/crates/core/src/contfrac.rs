//! Hirzebruch-Jung (minus-sign) continued fractions.
//!
//! `[x_1, ..., x_n] = x_1 - 1/(x_2 - 1/(... - 1/x_n))`, evaluated exactly
//! through the continuants `Z_n`, which are the determinants of the
//! tridiagonal matrices with diagonal `x` and off-diagonal `-1`.

use std::fmt;
use std::ops::Deref;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite integer sequence read as a continued fraction.
///
/// The same carrier is used for the `b`-chain of `p/q`, the `a`-chain of
/// `p/(p-q)` and zero sequences `k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HjSequence(pub Vec<i64>);

impl HjSequence {
    pub fn new(entries: Vec<i64>) -> Self {
        HjSequence(entries)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn reversed(&self) -> HjSequence {
        HjSequence(self.0.iter().rev().copied().collect())
    }

    pub fn into_vec(self) -> Vec<i64> {
        self.0
    }

    /// `true` when every entry is at least `bound`.
    pub fn all_at_least(&self, bound: i64) -> bool {
        self.0.iter().all(|&x| x >= bound)
    }

    /// Entrywise comparison `self <= other`; sequences of different length are incomparable.
    pub fn le_entrywise(&self, other: &HjSequence) -> bool {
        self.len() == other.len() && self.0.iter().zip(&other.0).all(|(x, y)| x <= y)
    }

    pub(crate) fn require_at_least(&self, bound: i64) -> Result<()> {
        match self.0.iter().position(|&x| x < bound) {
            Some(index) => Err(Error::EntryTooSmall { index, value: self.0[index], bound }),
            None => Ok(()),
        }
    }
}

impl Deref for HjSequence {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl From<Vec<i64>> for HjSequence {
    fn from(v: Vec<i64>) -> Self {
        HjSequence(v)
    }
}

impl From<&[i64]> for HjSequence {
    fn from(v: &[i64]) -> Self {
        HjSequence(v.to_vec())
    }
}

impl fmt::Display for HjSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A reduced fraction with non-negative denominator.
///
/// Denominator zero (numerator `±1`) stands for the value of a continued
/// fraction whose tail evaluates to zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fraction {
    numerator: BigInt,
    denominator: BigInt,
}

impl Fraction {
    /// Builds a reduced fraction. Fails only for `0/0`.
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if numerator.is_zero() && denominator.is_zero() {
            return Err(Error::UndefinedValue);
        }
        let g = numerator.gcd(&denominator);
        let (mut n, mut d) = (numerator / &g, denominator / &g);
        if d.is_negative() {
            n = -n;
            d = -d;
        }
        Ok(Fraction { numerator: n, denominator: d })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn is_infinite(&self) -> bool {
        self.denominator.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.numerator.is_zero()
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Continuant `Z_n(x_1, ..., x_n)` with `Z_{-1} = 0`, `Z_0 = 1`.
pub fn z_value(x: &[i64]) -> BigInt {
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    for &xi in x {
        let next = &cur * xi - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Continuant of the 1-based inclusive window `x_from, ..., x_to`.
///
/// Windows of length 0 give `Z_0 = 1` and of length -1 give `Z_{-1} = 0`,
/// so expressions like `Z_{j-2}(a_2, ..., a_{j-1})` can be written
/// literally for every `j >= 1`.
pub fn z_window(x: &[i64], from: isize, to: isize) -> BigInt {
    let len = to - from + 1;
    match len {
        -1 => BigInt::zero(),
        0 => BigInt::one(),
        l if l < -1 => panic!("continuant window of length {l}"),
        _ => {
            assert!(from >= 1 && (to as usize) <= x.len(), "window {from}..={to} out of range");
            z_value(&x[(from - 1) as usize..to as usize])
        }
    }
}

/// Leading continuants `Z_0, Z_1(x_1), ..., Z_n(x_1..x_n)`.
pub fn prefix_continuants(x: &[i64]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(x.len() + 1);
    let mut prev = BigInt::zero();
    let mut cur = BigInt::one();
    out.push(cur.clone());
    for &xi in x {
        let next = &cur * xi - &prev;
        prev = std::mem::replace(&mut cur, next);
        out.push(cur.clone());
    }
    out
}

/// Value `Z_n(x_1..x_n) / Z_{n-1}(x_2..x_n)` of a nonempty sequence.
pub fn hj_eval(x: &[i64]) -> Result<Fraction> {
    if x.is_empty() {
        return Err(Error::EmptySequence("the empty continued fraction has no value"));
    }
    Fraction::new(z_value(x), z_value(&x[1..]))
}

/// Checks `p > q > 0` and `gcd(p, q) = 1`.
pub fn check_pair(p: &BigInt, q: &BigInt) -> Result<()> {
    if q.is_positive() && p > q && p.gcd(q).is_one() {
        Ok(())
    } else {
        Err(Error::InvalidPair { p: p.clone(), q: q.clone() })
    }
}

/// The unique expansion `p/q = [x_1, ..., x_n]` with every `x_i >= 2`.
pub fn hj_expand(p: &BigInt, q: &BigInt) -> Result<HjSequence> {
    check_pair(p, q)?;
    let (mut num, mut den) = (p.clone(), q.clone());
    let mut out = Vec::new();
    // num/den > 1 throughout; den strictly decreases.
    while !den.is_zero() {
        let x = num.div_ceil(&den);
        out.push(x.to_i64().ok_or(Error::EntryOverflow)?);
        let rem = &x * &den - &num;
        num = std::mem::replace(&mut den, rem);
    }
    Ok(HjSequence(out))
}

/// `M(x)` positive semi-definite of rank at least `n - 1`.
///
/// For these tridiagonal matrices the test reduces to the leading minors:
/// `Z_i(x_1..x_i) > 0` for `i < n` and `Z_n(x) >= 0`.
pub fn is_admissible(x: &[i64]) -> bool {
    let minors = prefix_continuants(x);
    let n = x.len();
    minors[1..n.max(1)].iter().all(|z| z.is_positive()) && !minors[n].is_negative()
}

/// The `m`/`n` decomposition of an `a`-chain:
/// `a = [(2)^{m_1-1}, n_1, (2)^{m_2-1}, ..., n_t, (2)^{m_{t+1}-1}]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeData {
    pub m: Vec<i64>,
    pub n: Vec<i64>,
    pub t_count: usize,
}

impl EdgeData {
    /// Reassembles the `a`-chain.
    pub fn a_chain(&self) -> HjSequence {
        let mut out = Vec::new();
        for (i, &mi) in self.m.iter().enumerate() {
            out.extend(std::iter::repeat(2).take((mi - 1) as usize));
            if let Some(&ni) = self.n.get(i) {
                out.push(ni);
            }
        }
        HjSequence(out)
    }

    /// The dual `b`-chain read off the point diagram:
    /// `[m_1+1, (2)^{n_1-3}, m_2+2, ..., m_t+2, (2)^{n_t-3}, m_{t+1}+1]`.
    pub fn b_chain(&self) -> HjSequence {
        if self.t_count == 0 {
            return HjSequence(vec![self.m[0]]);
        }
        let t = self.t_count;
        let mut out = Vec::new();
        for (i, &mi) in self.m.iter().enumerate() {
            let bump = if i == 0 || i == t { 1 } else { 2 };
            out.push(mi + bump);
            if let Some(&ni) = self.n.get(i) {
                out.extend(std::iter::repeat(2).take((ni - 3) as usize));
            }
        }
        HjSequence(out)
    }
}

pub fn edge_data(a: &[i64]) -> Result<EdgeData> {
    if a.is_empty() {
        return Err(Error::EmptySequence("edge data needs a nonempty a-chain"));
    }
    HjSequence::from(a).require_at_least(2)?;
    let mut m = vec![1];
    let mut n = Vec::new();
    for &x in a {
        if x == 2 {
            *m.last_mut().unwrap() += 1;
        } else {
            n.push(x);
            m.push(1);
        }
    }
    let t_count = n.len();
    Ok(EdgeData { m, n, t_count })
}

/// Riemenschneider duality `[a] = p/(p-q)  <->  [b] = p/q`.
pub fn riemenschneider_dual(a: &[i64]) -> Result<HjSequence> {
    Ok(edge_data(a)?.b_chain())
}

/// The inverse `q'` of `q` modulo `p`, normalised to `0 < q' < p`.
pub fn q_conjugate(p: &BigInt, q: &BigInt) -> Result<BigInt> {
    check_pair(p, q)?;
    let ext = q.extended_gcd(p);
    Ok(ext.x.mod_floor(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// Determinant by cofactor expansion, independent of the recursion.
    fn tridiagonal_det(x: &[i64]) -> BigInt {
        let n = x.len();
        if n == 0 {
            return BigInt::one();
        }
        let m: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { x[i] } else if i.abs_diff(j) == 1 { -1 } else { 0 })
                    .collect()
            })
            .collect();
        fn det(m: &[Vec<i64>]) -> BigInt {
            if m.len() == 1 {
                return big(m[0][0]);
            }
            let mut acc = BigInt::zero();
            for (c, &v) in m[0].iter().enumerate() {
                if v == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &e)| e).collect())
                    .collect();
                let term = det(&minor) * v;
                if c % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
        det(&m)
    }

    #[test]
    fn z_value_examples() {
        assert_eq!(z_value(&[]), big(1));
        assert_eq!(tridiagonal_det(&[3, 4]), big(11));
        assert_eq!(z_value(&[3, 4]), big(11));
        assert_eq!(tridiagonal_det(&[2, 3, 2, 2]), big(11));
        assert_eq!(z_value(&[2, 3, 2, 2]), big(11));
    }

    #[test]
    fn z_window_conventions() {
        let a = [2, 3, 2, 2];
        assert_eq!(z_window(&a, 2, 0), big(0));
        assert_eq!(z_window(&a, 2, 1), big(1));
        assert_eq!(z_window(&a, 2, 3), big(5));
        assert_eq!(z_window(&a, 1, 4), big(11));
    }

    #[test]
    fn hj_eval_examples() {
        let v = hj_eval(&[3, 4]).unwrap();
        assert_eq!((v.numerator(), v.denominator()), (&big(11), &big(4)));
        let v = hj_eval(&[1, 2, 2, 1]).unwrap();
        assert_eq!((v.numerator(), v.denominator()), (&big(0), &big(1)));
        let v = hj_eval(&[2]).unwrap();
        assert_eq!((v.numerator(), v.denominator()), (&big(2), &big(1)));
        assert!(hj_eval(&[]).is_err());
    }

    #[test]
    fn hj_eval_infinite_tail() {
        // [3,1,1]: the tail [1,1] is zero.
        let v = hj_eval(&[3, 1, 1]).unwrap();
        assert!(v.is_infinite());
        assert_eq!(v.numerator(), &big(-1));
    }

    #[test]
    fn hj_expand_examples() {
        assert_eq!(hj_expand(&big(11), &big(4)).unwrap().0, vec![3, 4]);
        assert_eq!(hj_expand(&big(11), &big(7)).unwrap().0, vec![2, 3, 2, 2]);
        assert_eq!(hj_expand(&big(2), &big(1)).unwrap().0, vec![2]);
        assert!(hj_expand(&big(4), &big(2)).is_err());
        assert!(hj_expand(&big(3), &big(3)).is_err());
        assert!(hj_expand(&big(3), &big(0)).is_err());
    }

    #[test]
    fn admissibility_examples() {
        assert!(!is_admissible(&[2, 1, 1, 1, 1, 2]));
        assert!(hj_eval(&[2, 1, 1, 1, 1, 2]).unwrap().is_zero());
        assert!(is_admissible(&[1, 2, 2, 1]));
        assert!(is_admissible(&[0]));
        assert!(!is_admissible(&[-1]));
        assert!(is_admissible(&[]));
        assert!(!is_admissible(&[0, 3]));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(riemenschneider_dual(&[2, 3, 2, 2]).unwrap().0, vec![3, 4]);
        assert_eq!(riemenschneider_dual(&[2]).unwrap().0, vec![2]);
        assert_eq!(riemenschneider_dual(&[3, 4]).unwrap().0, vec![2, 3, 2, 2]);
        assert!(riemenschneider_dual(&[2, 1]).is_err());
    }

    #[test]
    fn edge_data_examples() {
        let e = edge_data(&[2, 3, 2, 2]).unwrap();
        assert_eq!((e.m.clone(), e.n.clone(), e.t_count), (vec![2, 3], vec![3], 1));
        assert_eq!(e.b_chain().0, vec![3, 4]);
        let e = edge_data(&[3]).unwrap();
        assert_eq!((e.m.clone(), e.n.clone(), e.t_count), (vec![1, 1], vec![3], 1));
        assert_eq!(e.b_chain().0, vec![2, 2]);
        let e = edge_data(&[2, 2, 2]).unwrap();
        assert_eq!((e.m.clone(), e.n.clone(), e.t_count), (vec![4], vec![], 0));
        assert!(edge_data(&[]).is_err());
    }

    #[test]
    fn q_conjugate_examples() {
        assert_eq!(q_conjugate(&big(11), &big(4)).unwrap(), big(3));
        assert_eq!(q_conjugate(&big(5), &big(2)).unwrap(), big(3));
        for p in 2..40 {
            assert_eq!(q_conjugate(&big(p), &big(1)).unwrap(), big(1));
        }
    }

    #[test]
    fn q_conjugate_matches_search() {
        for p in 2i64..60 {
            for q in 1..p {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let brute = (1..p).find(|x| (q * x) % p == 1).unwrap();
                assert_eq!(q_conjugate(&big(p), &big(q)).unwrap(), big(brute));
            }
        }
    }

    #[test]
    fn eq_s4_counts() {
        for p in 2i64..80 {
            for q in 1..p {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let b = hj_expand(&big(p), &big(q)).unwrap();
                let a = hj_expand(&big(p), &big(p - q)).unwrap();
                let e = edge_data(&a).unwrap();
                let r = a.len() as i64;
                assert_eq!(r, 1 + b.iter().map(|x| x - 2).sum::<i64>());
                assert_eq!(r, -1 + e.m.iter().sum::<i64>());
                assert_eq!(b.len() as i64, 1 + e.n.iter().map(|x| x - 2).sum::<i64>());
                assert_eq!(e.a_chain(), a);
            }
        }
    }

    proptest! {
        #[test]
        fn z_symmetry(x in proptest::collection::vec(-6i64..9, 0..10)) {
            let rev: Vec<i64> = x.iter().rev().copied().collect();
            prop_assert_eq!(z_value(&x), z_value(&rev));
        }

        #[test]
        fn z_matches_determinant(x in proptest::collection::vec(-4i64..6, 1..6)) {
            prop_assert_eq!(z_value(&x), tridiagonal_det(&x));
        }

        #[test]
        fn z_strictly_increasing(x in proptest::collection::vec(2i64..7, 1..10)) {
            let zs = prefix_continuants(&x);
            for w in zs.windows(2) {
                prop_assert!(w[1] > w[0]);
            }
        }

        #[test]
        fn dual_is_involution(a in proptest::collection::vec(2i64..6, 1..9)) {
            let b = riemenschneider_dual(&a).unwrap();
            prop_assert_eq!(riemenschneider_dual(&b).unwrap().0, a);
        }

        #[test]
        fn admissible_is_monotone(
            x in proptest::collection::vec(0i64..4, 1..7),
            bump in proptest::collection::vec(0i64..3, 7),
        ) {
            if is_admissible(&x) {
                let y: Vec<i64> = x.iter().zip(&bump).map(|(a, b)| a + b).collect();
                prop_assert!(is_admissible(&y));
            }
        }
    }
}
