//! Sparse polynomials with big-integer coefficients.
//!
//! [`MultiPoly`] lives in `Z[t, z0, z1]`; [`LaurentPoly`] lives in
//! `Z[t][x, x^-1, y, y^-1]` and carries chart pullbacks.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wide::W256;

/// Exponent triple `t^t z0^z0 z1^z1`, ordered graded-lexicographically
/// (total degree first, then `t`, `z0`, `z1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Monomial {
    pub t: u32,
    pub z0: u32,
    pub z1: u32,
}

impl Monomial {
    pub const ONE: Monomial = Monomial { t: 0, z0: 0, z1: 0 };

    pub fn new(t: u32, z0: u32, z1: u32) -> Self {
        Monomial { t, z0, z1 }
    }

    pub fn degree(&self) -> u64 {
        self.t as u64 + self.z0 as u64 + self.z1 as u64
    }

    fn mul(self, o: Monomial) -> Monomial {
        Monomial { t: self.t + o.t, z0: self.z0 + o.z0, z1: self.z1 + o.z1 }
    }

    fn checked_div(self, o: Monomial) -> Option<Monomial> {
        Some(Monomial {
            t: self.t.checked_sub(o.t)?,
            z0: self.z0.checked_sub(o.z0)?,
            z1: self.z1.checked_sub(o.z1)?,
        })
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then(self.t.cmp(&other.t))
            .then(self.z0.cmp(&other.z0))
            .then(self.z1.cmp(&other.z1))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Coefficient with an `i128` fast path; `B` never holds a value that fits.
#[derive(Clone, Debug, PartialEq, Eq)]
enum Int {
    S(i128),
    B(Box<BigInt>),
}

const ZERO: Int = Int::S(0);

impl Int {
    fn from_big(b: BigInt) -> Int {
        match b.to_i128() {
            Some(s) => Int::S(s),
            None => Int::B(Box::new(b)),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Int::S(s) => BigInt::from(*s),
            Int::B(b) => (**b).clone(),
        }
    }

    fn bits(&self) -> u64 {
        match self {
            Int::S(s) => 128 - u64::from(s.unsigned_abs().leading_zeros()),
            Int::B(b) => b.bits(),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Int::S(0))
    }

    fn is_one(&self) -> bool {
        matches!(self, Int::S(1))
    }

    /// `self += a * b`, or `self -= a * b` when `negate`.
    fn add_mul(&mut self, a: &Int, b: &Int, negate: bool) {
        if let (Int::S(x), Int::S(y), Int::S(s)) = (a, b, &*self) {
            let sum = x.checked_mul(*y).and_then(|p| if negate { s.checked_sub(p) } else { s.checked_add(p) });
            if let Some(v) = sum {
                *self = Int::S(v);
                return;
            }
        }
        let prod = a.to_big() * b.to_big();
        let acc = self.to_big();
        *self = Int::from_big(if negate { acc - prod } else { acc + prod });
    }

    fn add(&mut self, a: &Int, negate: bool) {
        self.add_mul(a, &Int::S(1), negate);
    }

    fn mul(&self, b: &Int) -> Int {
        let mut out = ZERO;
        out.add_mul(self, b, false);
        out
    }

    fn div_exact(&self, d: &Int) -> Option<Int> {
        if let (Int::S(x), Int::S(y)) = (self, d) {
            if *y != 0 && *y != -1 {
                return if x % y == 0 { Some(Int::S(x / y)) } else { None };
            }
        }
        let (q, r) = self.to_big().div_rem(&d.to_big());
        if d.is_zero() || !r.is_zero() {
            None
        } else {
            Some(Int::from_big(q))
        }
    }
}

/// Fixed-width two's complement cells for the dense kernels. All arithmetic
/// wraps, so results are exact only when the caller bounds them.
trait Wide: Copy + PartialEq {
    const BITS: u64;
    const ZERO: Self;
    fn wrap(x: &Int) -> Self;
    fn unwrap(self) -> Int;
    fn mul_add(self, a: Self, b: Self) -> Self;
    /// `self + b * m` for a machine word `m`.
    fn mac(self, b: Self, m: u64) -> Self;
    /// `self +- b * m` for magnitudes below `2^128`.
    fn mac_wide(self, b: u128, m: u128, negative: bool) -> Self;
    fn neg(self) -> Self;
}

impl Wide for i128 {
    const BITS: u64 = 128;
    const ZERO: Self = 0;
    fn wrap(x: &Int) -> Self {
        match x {
            Int::S(s) => *s,
            Int::B(b) => {
                let lo: BigInt = b.mod_floor(&(BigInt::one() << 128u32));
                lo.to_u128().unwrap() as i128
            }
        }
    }
    fn unwrap(self) -> Int {
        Int::S(self)
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self.wrapping_add(a.wrapping_mul(b))
    }
    fn mac(self, b: Self, m: u64) -> Self {
        self.wrapping_add(b.wrapping_mul(m as i128))
    }
    fn mac_wide(self, b: u128, m: u128, negative: bool) -> Self {
        let p = b.wrapping_mul(m) as i128;
        if negative {
            self.wrapping_sub(p)
        } else {
            self.wrapping_add(p)
        }
    }
    fn neg(self) -> Self {
        self.wrapping_neg()
    }
}

impl Wide for W256 {
    const BITS: u64 = 256;
    const ZERO: Self = W256::ZERO;
    fn wrap(x: &Int) -> Self {
        match x {
            Int::S(s) => W256::from_i128(*s),
            Int::B(b) => W256::from_big(b),
        }
    }
    fn unwrap(self) -> Int {
        match self.to_i128() {
            Some(s) => Int::S(s),
            None => Int::B(Box::new(self.to_big())),
        }
    }
    fn mul_add(self, a: Self, b: Self) -> Self {
        self.add(a.mul(b))
    }
    fn mac(self, b: Self, m: u64) -> Self {
        self.mac_u64(b, m)
    }
    fn mac_wide(self, b: u128, m: u128, negative: bool) -> Self {
        self.mac_u128(b, m, negative)
    }
    fn neg(self) -> Self {
        W256::neg(self)
    }
}

/// Dense scratch arrays above this many cells fall back to hashing.
const DENSE_LIMIT: usize = 1 << 23;

/// Exponent box `[0, t) x [0, z0) x [0, z1)` with lex index
/// `(t * z0_len + z0) * z1_len + z1`.
#[derive(Clone, Copy)]
struct Grid {
    t: usize,
    z0: usize,
    z1: usize,
}

impl Grid {
    fn size(&self) -> Option<usize> {
        self.t.checked_mul(self.z0)?.checked_mul(self.z1)
    }

    fn contains(&self, m: Monomial) -> bool {
        (m.t as usize) < self.t && (m.z0 as usize) < self.z0 && (m.z1 as usize) < self.z1
    }

    fn index(&self, m: Monomial) -> usize {
        (m.t as usize * self.z0 + m.z0 as usize) * self.z1 + m.z1 as usize
    }

    fn decode(&self, idx: usize) -> Monomial {
        let z1 = idx % self.z1;
        let rest = idx / self.z1;
        Monomial::new((rest / self.z0) as u32, (rest % self.z0) as u32, z1 as u32)
    }

    fn collect(&self, cells: Vec<Int>) -> Vec<(Monomial, Int)> {
        let mut out: Vec<(Monomial, Int)> = cells
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.decode(i), c))
            .collect();
        out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Polynomial in `Z[t, z0, z1]`. Terms are kept sorted by monomial and
/// zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiPoly {
    terms: Vec<(Monomial, Int)>,
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn one() -> Self {
        Self::term(BigInt::one(), Monomial::ONE)
    }

    pub fn term(c: BigInt, m: Monomial) -> Self {
        Self::from_terms([(m, c)])
    }

    /// `t^t z0^z0 z1^z1` with coefficient 1.
    pub fn monomial(t: u32, z0: u32, z1: u32) -> Self {
        Self::term(BigInt::one(), Monomial::new(t, z0, z1))
    }

    pub fn t() -> Self {
        Self::monomial(1, 0, 0)
    }

    pub fn z0() -> Self {
        Self::monomial(0, 1, 0)
    }

    pub fn z1() -> Self {
        Self::monomial(0, 0, 1)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, BigInt)>) -> Self {
        Self::normalize(terms.into_iter().map(|(m, c)| (m, Int::from_big(c))).collect())
    }

    fn normalize(mut v: Vec<(Monomial, Int)>) -> Self {
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Monomial, Int)> = Vec::with_capacity(v.len());
        for (m, c) in v {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => lc.add(&c, false),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        MultiPoly { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in increasing monomial order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (Monomial, BigInt)> + '_ {
        self.terms.iter().map(|(m, c)| (*m, c.to_big()))
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        match self.terms.binary_search_by(|(k, _)| k.cmp(m)) {
            Ok(i) => self.terms[i].1.to_big(),
            Err(_) => BigInt::zero(),
        }
    }

    pub fn leading_term(&self) -> Option<(Monomial, BigInt)> {
        self.terms.last().map(|(m, c)| (*m, c.to_big()))
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.last().map(|(m, _)| m.degree())
    }

    pub fn degree_z1(&self) -> Option<u32> {
        self.terms.iter().map(|(m, _)| m.z1).max()
    }

    /// Largest exponent of each variable.
    pub fn max_exponents(&self) -> Monomial {
        self.terms.iter().fold(Monomial::ONE, |acc, (m, _)| Monomial::new(acc.t.max(m.t), acc.z0.max(m.z0), acc.z1.max(m.z1)))
    }

    fn merge(&self, other: &MultiPoly, negate: bool) -> MultiPoly {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() || j < other.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (m, c) = &other.terms[j];
                    let mut v = ZERO;
                    v.add(c, negate);
                    out.push((*m, v));
                    j += 1;
                }
                Ordering::Equal => {
                    let mut v = self.terms[i].1.clone();
                    v.add(&other.terms[j].1, negate);
                    if !v.is_zero() {
                        out.push((self.terms[i].0, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        MultiPoly { terms: out }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        self.merge(other, true)
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        if self.is_zero() || other.is_zero() {
            return MultiPoly::zero();
        }
        if other.len() == 1 {
            return self.mul_int_term(&other.terms[0].1, other.terms[0].0);
        }
        if self.len() == 1 {
            return other.mul_int_term(&self.terms[0].1, self.terms[0].0);
        }
        let (ea, eb) = (self.max_exponents(), other.max_exponents());
        let grid = Grid {
            t: (ea.t + eb.t) as usize + 1,
            z0: (ea.z0 + eb.z0) as usize + 1,
            z1: (ea.z1 + eb.z1) as usize + 1,
        };
        let work = self.len().saturating_mul(other.len());
        match grid.size() {
            Some(size) if size <= DENSE_LIMIT && size <= work.saturating_mul(16) => {
                let (outer, inner) = if self.len() <= other.len() { (self, other) } else { (other, self) };
                // |coefficient| <= max|a| * max|b| * min(len), partial sums included.
                let bound = self.max_bits() + other.max_bits() + bit_len(outer.len() as u64) + 1;
                if bound < i128::BITS as u64 {
                    return MultiPoly { terms: dense_mul::<i128>(grid, size, outer, inner) };
                }
                if bound < W256::BITS as u64 {
                    return MultiPoly { terms: dense_mul::<W256>(grid, size, outer, inner) };
                }
                let mut cells = vec![ZERO; size];
                // Walk the inner operand in grid order so each row sweeps memory.
                let mut idx_b: Vec<(usize, &Int)> = inner.terms.iter().map(|(m, c)| (grid.index(*m), c)).collect();
                idx_b.sort_unstable_by_key(|(i, _)| *i);
                for (m1, c1) in &outer.terms {
                    let base = grid.index(*m1);
                    for (ib, c2) in &idx_b {
                        cells[base + ib].add_mul(c1, c2, false);
                    }
                }
                MultiPoly { terms: grid.collect(cells) }
            }
            _ => {
                let mut acc: HashMap<Monomial, Int> = HashMap::new();
                for (m1, c1) in &self.terms {
                    for (m2, c2) in &other.terms {
                        acc.entry(m1.mul(*m2)).or_insert(ZERO).add_mul(c1, c2, false);
                    }
                }
                Self::normalize(acc.into_iter().collect())
            }
        }
    }

    fn mul_int_term(&self, c: &Int, m: Monomial) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero();
        }
        MultiPoly { terms: self.terms.iter().map(|(k, v)| (k.mul(m), if c.is_one() { v.clone() } else { v.mul(c) })).collect() }
    }

    /// Multiplies by `c * m`.
    pub fn mul_term(&self, c: &BigInt, m: Monomial) -> MultiPoly {
        self.mul_int_term(&Int::from_big(c.clone()), m)
    }

    pub fn pow(&self, e: u64) -> MultiPoly {
        let mut result = MultiPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Exact quotient `self / divisor`; a nonzero remainder is an error.
    pub fn div_exact(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        if divisor.is_zero() {
            return Err(Error::InexactDivision("division by zero polynomial".into()));
        }
        if self.is_zero() {
            return Ok(MultiPoly::zero());
        }
        let inexact = |what: String| Error::InexactDivision(what);
        if divisor.len() == 1 {
            let (dm, dc) = &divisor.terms[0];
            let mut out = Vec::with_capacity(self.len());
            for (m, c) in &self.terms {
                let qm = m.checked_div(*dm).ok_or_else(|| inexact(format!("monomial {m:?} not divisible by {dm:?}")))?;
                let qc = c.div_exact(dc).ok_or_else(|| inexact("coefficient not divisible".into()))?;
                out.push((qm, qc));
            }
            return Ok(MultiPoly { terms: out });
        }
        let en = self.max_exponents();
        let grid = Grid { t: en.t as usize + 1, z0: en.z0 as usize + 1, z1: en.z1 as usize + 1 };
        match grid.size() {
            Some(size) if size <= DENSE_LIMIT => self.div_dense(divisor, grid, size),
            _ => self.div_sparse(divisor),
        }
    }

    /// Long division in lex order `t > z0 > z1` on a dense grid sized by the
    /// dividend. An exact quotient never leaves that grid.
    fn div_dense(&self, divisor: &MultiPoly, grid: Grid, size: usize) -> Result<MultiPoly> {
        // A finished wrapping run leaves `self - divisor * q` zero modulo 2^w.
        // If both sides are below 2^(w-1) in size that is equality over Z;
        // otherwise multiplying back decides.
        let bits = self.max_bits() + 8;
        let fast = if bits < i128::BITS as u64 {
            dense_div::<i128>(grid, size, self, divisor).map(|q| (q, i128::BITS as u64))
        } else if bits < W256::BITS as u64 {
            dense_div::<W256>(grid, size, self, divisor).map(|q| (q, W256::BITS as u64))
        } else {
            None
        };
        if let Some((q, width)) = fast {
            let q = MultiPoly { terms: q };
            let product_bits = divisor.max_bits() + q.max_bits() + bit_len(divisor.len().min(q.len()) as u64) + 1;
            if product_bits < width && self.max_bits() + 1 < width {
                return Ok(q);
            }
            if &divisor.mul(&q) == self {
                return Ok(q);
            }
        }
        let lex = |m: &Monomial| (m.t, m.z0, m.z1);
        let (lm, lc) = divisor.terms.iter().max_by_key(|(m, _)| lex(m)).map(|(m, c)| (*m, c.clone())).unwrap();
        let ed = divisor.max_exponents();
        let mut cells = vec![ZERO; size];
        for (m, c) in &self.terms {
            cells[grid.index(*m)] = c.clone();
        }
        let mut d_idx: Vec<(usize, &Int)> = divisor.terms.iter().map(|(m, c)| (grid.index(*m), c)).collect();
        d_idx.sort_unstable_by_key(|(i, _)| *i);
        if !grid.contains(lm) {
            return Err(Error::InexactDivision("divisor exceeds dividend degrees".into()));
        }
        let lead_idx = grid.index(lm);
        let mut quotient = Vec::new();
        for idx in (0..size).rev() {
            if cells[idx].is_zero() {
                continue;
            }
            let m = grid.decode(idx);
            let qm = m
                .checked_div(lm)
                .filter(|q| grid.contains(q.mul(ed)))
                .ok_or_else(|| Error::InexactDivision(format!("remainder term {m:?} not reducible by {lm:?}")))?;
            let qc = cells[idx]
                .div_exact(&lc)
                .ok_or_else(|| Error::InexactDivision(format!("coefficient not divisible at {m:?}")))?;
            let base = idx - lead_idx;
            for (di, dc) in &d_idx {
                cells[base + di].add_mul(&qc, dc, true);
            }
            quotient.push((qm, qc));
        }
        Ok(Self::normalize(quotient))
    }

    fn div_sparse(&self, divisor: &MultiPoly) -> Result<MultiPoly> {
        let (lm, lc) = divisor.terms.last().map(|(m, c)| (*m, c.clone())).unwrap();
        let mut rem: BTreeMap<Monomial, Int> = self.terms.iter().cloned().collect();
        let mut quotient = Vec::new();
        while let Some((m, c)) = rem.pop_last() {
            let qm = m
                .checked_div(lm)
                .ok_or_else(|| Error::InexactDivision(format!("leading monomial {m:?} not divisible by {lm:?}")))?;
            let qc = c.div_exact(&lc).ok_or_else(|| Error::InexactDivision("coefficient not divisible".into()))?;
            for (dm, dc) in &divisor.terms[..divisor.len() - 1] {
                let e = rem.entry(dm.mul(qm)).or_insert(ZERO);
                e.add_mul(&qc, dc, true);
                if e.is_zero() {
                    rem.remove(&dm.mul(qm));
                }
            }
            quotient.push((qm, qc));
        }
        Ok(Self::normalize(quotient))
    }

    fn max_bits(&self) -> u64 {
        self.terms.iter().map(|(_, c)| c.bits()).max().unwrap_or(0)
    }

    /// True iff every term contains `z0`.
    pub fn divisible_by_z0(&self) -> bool {
        !self.is_zero() && self.terms.iter().all(|(m, _)| m.z0 > 0)
    }

    /// Specialization `t = 0`.
    pub fn at_t_zero(&self) -> MultiPoly {
        MultiPoly { terms: self.terms.iter().filter(|(m, _)| m.t == 0).cloned().collect() }
    }

    /// Substitutes `z0 -> x^e0.0 y^e0.1`, `z1 -> x^e1.0 y^e1.1` and multiplies
    /// by `x^shift.0 y^shift.1`.
    pub fn substitute_monomial(&self, e0: (i64, i64), e1: (i64, i64), shift: (i64, i64)) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, c)| {
            let x = shift.0 + m.z0 as i64 * e0.0 + m.z1 as i64 * e1.0;
            let y = shift.1 + m.z0 as i64 * e0.1 + m.z1 as i64 * e1.1;
            (LaurentMonomial { t: m.t, x, y }, c.to_big())
        }))
    }
}

fn bit_len(n: u64) -> u64 {
    u64::from(64 - n.leading_zeros())
}

fn collect_wide<W: Wide>(grid: Grid, cells: Vec<W>) -> Vec<(Monomial, Int)> {
    let mut out: Vec<(Monomial, Int)> = cells
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c != W::ZERO)
        .map(|(i, c)| (grid.decode(i), c.unwrap()))
        .collect();
    out.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Per-term coefficient forms used by the dense product kernels.
#[derive(Clone, Copy)]
struct Coeff<W> {
    wide: W,
    neg_wide: W,
    mag: u128,
    negative: bool,
}

impl<W: Wide> Coeff<W> {
    fn new(c: &Int) -> Self {
        let wide = W::wrap(c);
        let (mag, negative) = match c {
            Int::S(s) => (s.unsigned_abs(), *s < 0),
            Int::B(_) => (0, false),
        };
        Coeff { wide, neg_wide: wide.neg(), mag, negative }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Kernel {
    /// Outer coefficients below `2^64`.
    Word,
    /// Both sides below `2^128`.
    Double,
    General,
}

fn dense_mul<W: Wide>(grid: Grid, size: usize, outer: &MultiPoly, inner: &MultiPoly) -> Vec<(Monomial, Int)> {
    let square = std::ptr::eq(outer, inner) || outer == inner;
    // Keep a machine-word operand on the outside when there is one.
    let (outer, inner) = if outer.max_bits() >= 64 && inner.max_bits() < 64 { (inner, outer) } else { (outer, inner) };
    let indexed = |p: &MultiPoly| -> Vec<(usize, Coeff<W>)> {
        let mut v: Vec<(usize, Coeff<W>)> = p.terms.iter().map(|(m, c)| (grid.index(*m), Coeff::new(c))).collect();
        v.sort_unstable_by_key(|(i, _)| *i);
        v
    };
    let inner_terms = indexed(inner);
    // A square only needs pairs `i <= j`; off-diagonal pairs use `2 c_i`.
    let outer_terms: Vec<(usize, Int)> = if square {
        inner.terms.iter().map(|(m, c)| (grid.index(*m), c.mul(&Int::S(2)))).collect::<Vec<_>>()
    } else {
        outer.terms.iter().map(|(m, c)| (grid.index(*m), c.clone())).collect()
    };
    let mut outer_terms = outer_terms;
    if square {
        outer_terms.sort_unstable_by_key(|(i, _)| *i);
    }
    let outer_bits = outer_terms.iter().map(|(_, c)| c.bits()).max().unwrap_or(0);
    let kernel = if outer_bits < 64 {
        Kernel::Word
    } else if outer_bits < 128 && inner.max_bits() < 128 {
        Kernel::Double
    } else {
        Kernel::General
    };
    let mut cells = vec![W::ZERO; size];
    // Output tiles sized for cache; `cursor[o]` is the first inner term whose
    // product with outer term `o` has not been written yet.
    let tile = (1usize << 22) / std::mem::size_of::<W>();
    let mut cursor: Vec<usize> = if square { (0..outer_terms.len()).collect() } else { vec![0; outer_terms.len()] };
    let mut start = 0;
    while start < size {
        let end = (start + tile).min(size);
        for (o, (base, c1)) in outer_terms.iter().enumerate() {
            let base = *base;
            if base >= end {
                continue;
            }
            let from = cursor[o];
            let stop = from + inner_terms[from..].partition_point(|(ib, _)| base + ib < end);
            let run = &inner_terms[from..stop];
            let c1 = Coeff::<W>::new(c1);
            match kernel {
                Kernel::Word => {
                    let m = c1.mag as u64;
                    for (ib, c2) in run {
                        let cell = &mut cells[base + ib];
                        *cell = cell.mac(if c1.negative { c2.neg_wide } else { c2.wide }, m);
                    }
                }
                Kernel::Double => {
                    for (ib, c2) in run {
                        let cell = &mut cells[base + ib];
                        *cell = cell.mac_wide(c2.mag, c1.mag, c1.negative != c2.negative);
                    }
                }
                Kernel::General => {
                    for (ib, c2) in run {
                        let cell = &mut cells[base + ib];
                        *cell = cell.mul_add(c1.wide, c2.wide);
                    }
                }
            }
            cursor[o] = stop;
        }
        start = end;
    }
    if square {
        // The diagonal got `2 c_i^2`; take one `c_i^2` back.
        for (m, c) in &inner.terms {
            let cell = &mut cells[2 * grid.index(*m)];
            *cell = cell.mac(W::wrap(&c.mul(c)).neg(), 1);
        }
    }
    collect_wide(grid, cells)
}

fn small_value(c: &Int) -> i64 {
    match c {
        Int::S(s) => *s as i64,
        Int::B(_) => unreachable!("checked by max_bits"),
    }
}

/// Lex-order long division modulo `2^W::BITS`. Needs a unit leading
/// coefficient and machine-word divisor coefficients; `None` when either
/// fails or the run goes off the grid.
fn dense_div<W: Wide>(grid: Grid, size: usize, dividend: &MultiPoly, divisor: &MultiPoly) -> Option<Vec<(Monomial, Int)>> {
    let lex = |m: &Monomial| (m.t, m.z0, m.z1);
    let (lm, lc) = divisor.terms.iter().max_by_key(|(m, _)| lex(m)).map(|(m, c)| (*m, c.clone()))?;
    let negate = match lc {
        Int::S(1) => false,
        Int::S(-1) => true,
        _ => return None,
    };
    if !grid.contains(lm) || divisor.max_bits() >= 64 {
        return None;
    }
    let ed = divisor.max_exponents();
    let mut cells = vec![W::ZERO; size];
    for (m, c) in &dividend.terms {
        cells[grid.index(*m)] = W::wrap(c);
    }
    let mut d_idx: Vec<(usize, i64)> = divisor.terms.iter().map(|(m, c)| (grid.index(*m), small_value(c))).collect();
    d_idx.sort_unstable_by_key(|(i, _)| *i);
    let lead_idx = grid.index(lm);
    let mut quotient = Vec::new();
    for idx in (0..size).rev() {
        let c = cells[idx];
        if c == W::ZERO {
            continue;
        }
        let qm = grid.decode(idx).checked_div(lm).filter(|q| grid.contains(q.mul(ed)))?;
        let qc = if negate { c.neg() } else { c };
        let neg_qc = qc.neg();
        let base = idx - lead_idx;
        for &(di, dc) in &d_idx {
            // cell -= qc * dc
            let cell = &mut cells[base + di];
            *cell = cell.mac(if dc < 0 { qc } else { neg_qc }, dc.unsigned_abs());
        }
        quotient.push((qm, qc.unwrap()));
    }
    quotient.sort_unstable_by(|a, b| a.0.cmp(&b.0));
    Some(quotient)
}

fn accumulate<K: std::hash::Hash + Eq>(acc: &mut HashMap<K, BigInt>, k: K, c: BigInt) {
    use std::collections::hash_map::Entry;
    match acc.entry(k) {
        Entry::Occupied(mut e) => {
            *e.get_mut() += c;
            if e.get().is_zero() {
                e.remove();
            }
        }
        Entry::Vacant(e) => {
            if !c.is_zero() {
                e.insert(c);
            }
        }
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, first: bool, c: &BigInt, vars: &[(&str, i64)]) -> fmt::Result {
    let neg = c.is_negative();
    let abs = c.abs();
    if first {
        if neg {
            write!(f, "-")?;
        }
    } else {
        write!(f, " {} ", if neg { '-' } else { '+' })?;
    }
    let vars: Vec<String> = vars
        .iter()
        .filter(|(_, e)| *e != 0)
        .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
        .collect();
    if vars.is_empty() {
        write!(f, "{abs}")
    } else if abs.is_one() {
        write!(f, "{}", vars.join("*"))
    } else {
        write!(f, "{abs}*{}", vars.join("*"))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            write_term(f, i == 0, &c.to_big(), &[("t", m.t as i64), ("z0", m.z0 as i64), ("z1", m.z1 as i64)])?;
        }
        Ok(())
    }
}

/// Exponents of `t^t x^x y^y`; `x`, `y` may be negative.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LaurentMonomial {
    pub x: i64,
    pub y: i64,
    pub t: u32,
}

/// Laurent polynomial in `x, y` with coefficients in `Z[t]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LaurentPoly {
    terms: BTreeMap<LaurentMonomial, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        LaurentPoly::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigInt::one(), 0, 0, 0)
    }

    pub fn monomial(c: BigInt, t: u32, x: i64, y: i64) -> Self {
        Self::from_terms([(LaurentMonomial { t, x, y }, c)])
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (LaurentMonomial, BigInt)>) -> Self {
        let mut acc = HashMap::new();
        for (m, c) in terms {
            accumulate(&mut acc, m, c);
        }
        LaurentPoly { terms: acc.into_iter().collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&LaurentMonomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn min_x(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.x).min()
    }

    pub fn min_y(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.y).min()
    }

    pub fn min_t(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.t).min()
    }

    /// Multiplies by `x^dx y^dy t^dt`.
    pub fn shift(&self, dx: i64, dy: i64, dt: u32) -> LaurentPoly {
        LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (LaurentMonomial { x: m.x + dx, y: m.y + dy, t: m.t + dt }, c.clone()))
                .collect(),
        }
    }

    /// Terms with `x` exponent 0, i.e. the restriction to `x = 0` of a polynomial.
    pub fn restrict_x_zero(&self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().filter(|(m, _)| m.x == 0).map(|(m, c)| (*m, c.clone())).collect() }
    }

    pub fn is_polynomial(&self) -> bool {
        self.terms.keys().all(|m| m.x >= 0 && m.y >= 0)
    }

    pub fn add(&self, other: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms.iter().chain(other.terms.iter()).map(|(m, c)| (*m, c.clone())))
    }

    pub fn mul(&self, other: &LaurentPoly) -> LaurentPoly {
        let mut acc = HashMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = LaurentMonomial { x: m1.x + m2.x, y: m1.y + m2.y, t: m1.t + m2.t };
                accumulate(&mut acc, m, c1 * c2);
            }
        }
        LaurentPoly { terms: acc.into_iter().collect() }
    }

    pub fn pow(&self, e: u64) -> LaurentPoly {
        let mut result = LaurentPoly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn scale(&self, c: &BigInt) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms.iter().map(|(m, v)| (*m, v * c)))
    }

    /// Largest `c * t^e` dividing every coefficient (`c > 0`), together with
    /// the primitive cofactor.
    pub fn split_content(&self) -> Option<(BigInt, u32, LaurentPoly)> {
        let e = self.min_t()?;
        let g = self.terms.values().fold(BigInt::zero(), |g, c| g.gcd(c));
        let p = LaurentPoly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (LaurentMonomial { t: m.t - e, ..*m }, c / &g))
                .collect(),
        };
        Some((g, e, p))
    }

    /// Substitutes `y -> xi + y` where `xi` is a polynomial in `t`
    /// (given as `(t exponent, coefficient)` pairs). Requires `y >= 0`.
    pub fn shift_y_by(&self, xi: &[(u32, BigInt)]) -> Option<LaurentPoly> {
        let base = LaurentPoly::from_terms(
            xi.iter()
                .map(|(t, c)| (LaurentMonomial { t: *t, x: 0, y: 0 }, c.clone()))
                .chain([(LaurentMonomial { t: 0, x: 0, y: 1 }, BigInt::one())]),
        );
        let max_y = self.terms.keys().map(|m| m.y).max().unwrap_or(0);
        if self.terms.keys().any(|m| m.y < 0) {
            return None;
        }
        let mut powers = vec![LaurentPoly::one()];
        for i in 1..=max_y as usize {
            let next = powers[i - 1].mul(&base);
            powers.push(next);
        }
        let mut acc = HashMap::new();
        for (m, c) in &self.terms {
            for (pm, pc) in &powers[m.y as usize].terms {
                accumulate(&mut acc, LaurentMonomial { x: m.x + pm.x, y: pm.y, t: m.t + pm.t }, c * pc);
            }
        }
        Some(LaurentPoly { terms: acc.into_iter().collect() })
    }

    /// Lowest total degree in `(x, y)` among nonzero terms.
    pub fn order_xy(&self) -> Option<i64> {
        self.terms.keys().map(|m| m.x + m.y).min()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().rev().enumerate() {
            write_term(f, i == 0, c, &[("t", m.t as i64), ("x", m.x), ("y", m.y)])?;
        }
        Ok(())
    }
}
