//! Lattice models of the Milnor fibers: chain plumbings, the diagonal
//! `n<-1>` model cut out by `D(a; k)`, the fingerprint that recovers `k`,
//! and the classification of fillings with and without order.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{check_pair, hj_expand, q_conjugate, HjSequence};
use crate::deformpoly::check_bounded;
use crate::error::{Error, Result};
use crate::matrix::IntegerMatrix;
use crate::zeroseq::{block_matrix, enumerate_k, triangulation_of, ZeroSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Marking {
    Forward,
    Reversed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainFlavor {
    /// Weights `-b_i` from `p/q`.
    BChain,
    /// Weights `-a_i` from `p/(p-q)`.
    AChain,
}

/// Linear plumbing graph; `marking` says which end is vertex 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlumbingChain {
    pub weights: Vec<i64>,
    pub marking: Marking,
}

impl PlumbingChain {
    /// The same graph read from the other end.
    pub fn reversed(&self) -> PlumbingChain {
        let marking = match self.marking {
            Marking::Forward => Marking::Reversed,
            Marking::Reversed => Marking::Forward,
        };
        PlumbingChain { weights: self.weights.iter().rev().copied().collect(), marking }
    }

    /// Intersection matrix: weights on the diagonal, `1` between neighbours.
    pub fn intersection_matrix(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::tridiagonal(&self.weights);
        for i in 1..self.weights.len() {
            m[(i - 1, i)] = BigInt::one();
            m[(i, i - 1)] = BigInt::one();
        }
        m
    }
}

pub fn chain_graph(p: &BigInt, q: &BigInt, flavor: ChainFlavor) -> Result<PlumbingChain> {
    let seq = match flavor {
        ChainFlavor::BChain => hj_expand(p, q)?,
        ChainFlavor::AChain => hj_expand(p, &(p - q))?,
    };
    Ok(PlumbingChain { weights: seq.iter().map(|x| -x).collect(), marking: Marking::Forward })
}

/// `D(a; k) D(a; k)^T`, checked against `M(a)`.
pub fn gram_from_blocks(a: &[i64], k: &ZeroSequence) -> Result<IntegerMatrix> {
    let d = block_matrix(a, k, &triangulation_of(k)?)?;
    gram_of(a, &d)
}

/// The check behind [`gram_from_blocks`] for an already built `D(a; k)`.
pub fn gram_of(a: &[i64], d: &IntegerMatrix) -> Result<IntegerMatrix> {
    let gram = d.mul(&d.transpose())?;
    if gram != IntegerMatrix::tridiagonal(a) {
        return Err(Error::Verification(format!("D D^T differs from M({a:?}):\n{gram}")));
    }
    Ok(gram)
}

/// Classes `c_i` in the lattice `n<-1>` with orthogonal basis `E_1..E_n`;
/// row `i` holds the coordinates of `c_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalLatticeModel {
    pub rank: usize,
    pub class_rows: IntegerMatrix,
}

impl DiagonalLatticeModel {
    pub fn new(class_rows: IntegerMatrix) -> Self {
        DiagonalLatticeModel { rank: class_rows.cols, class_rows }
    }

    /// The model whose classes are the rows of `D(a; k)`.
    pub fn from_blocks(a: &[i64], k: &ZeroSequence) -> Result<Self> {
        Ok(Self::new(block_matrix(a, k, &triangulation_of(k)?)?))
    }

    /// `u . v` in the lattice, i.e. minus the dot product.
    pub fn pairing(u: &[BigInt], v: &[BigInt]) -> BigInt {
        -u.iter().zip(v).map(|(x, y)| x * y).sum::<BigInt>()
    }

    /// `c_i . c_j` for all `i, j`.
    pub fn intersection_matrix(&self) -> IntegerMatrix {
        let r = self.class_rows.rows;
        let mut m = IntegerMatrix::zeros(r, r);
        for i in 0..r {
            for j in 0..r {
                m[(i, j)] = Self::pairing(self.class_rows.row(i), self.class_rows.row(j));
            }
        }
        m
    }
}

/// Per `i`, the number of classes `e` with `e^2 = -1`, `e . c_i != 0` and
/// `e . c_j = 0` for `j != i`. In `n<-1>` those `e` are `±E_m`, so this is
/// twice the number of columns whose only nonzero entry is in row `i`.
pub fn lisca_fingerprint(model: &DiagonalLatticeModel) -> Vec<i64> {
    let d = &model.class_rows;
    let mut counts = vec![0i64; d.rows];
    for m in 0..d.cols {
        let mut rows = (0..d.rows).filter(|&i| !d[(i, m)].is_zero());
        if let (Some(i), None) = (rows.next(), rows.next()) {
            counts[i] += 2;
        }
    }
    counts
}

/// Inverts the fingerprint: `k_i = a_i - f_i / 2`, then checks `k ∈ K_r(a)`.
pub fn recover_k(a: &[i64], fingerprint: &[i64]) -> Result<ZeroSequence> {
    if fingerprint.len() != a.len() {
        return Err(Error::LengthMismatch { expected: a.len(), got: fingerprint.len() });
    }
    let mut k = Vec::with_capacity(a.len());
    for (i, (&ai, &f)) in a.iter().zip(fingerprint).enumerate() {
        if f % 2 != 0 || f < 0 || f / 2 > ai {
            return Err(Error::Verification(format!("fingerprint entry {f} at position {} is not in 0, 2, .., 2a_i", i + 1)));
        }
        k.push(ai - f / 2);
    }
    let k = ZeroSequence::new(k)?;
    check_bounded(a, &k)?;
    Ok(k)
}

/// Which element of `{p/q, p/q'}` a descriptor names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderType {
    AsGiven,
    Conjugated,
}

/// The filling `W_{p,q}(k)` together with an order type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FillingDescriptor {
    pub p: BigInt,
    pub q: BigInt,
    pub k: ZeroSequence,
    pub order_type: OrderType,
}

impl FillingDescriptor {
    pub fn new(p: BigInt, q: BigInt, k: ZeroSequence, order_type: OrderType) -> Result<Self> {
        let a = hj_expand(&p, &(&p - &q))?;
        check_bounded(&a, &k)?;
        Ok(FillingDescriptor { p, q, k, order_type })
    }

    /// `(q', k')` with `k'` the reversal of `k`; `k' ∈ K_r(a')` where `a'`
    /// is `a` reversed.
    pub fn conjugate(&self) -> FillingDescriptor {
        FillingDescriptor {
            p: self.p.clone(),
            q: q_conjugate(&self.p, &self.q).expect("valid descriptor"),
            k: self.k.reversed(),
            order_type: self.order_type,
        }
    }

    /// `(q, k)` read in the as-given order.
    fn normalized(&self) -> (BigInt, ZeroSequence) {
        match self.order_type {
            OrderType::AsGiven => (self.q.clone(), self.k.clone()),
            OrderType::Conjugated => {
                let c = self.conjugate();
                (c.q, c.k)
            }
        }
    }
}

/// Without order, fillings agree iff `(q_2, k_2)` is `(q_1, k_1)` or
/// `(q_1', k_1')`. With order, only identical normalized data agree.
pub fn classify(d1: &FillingDescriptor, d2: &FillingDescriptor, respect_order: bool) -> bool {
    if d1.p != d2.p {
        return false;
    }
    let (n1, n2) = (d1.normalized(), d2.normalized());
    if respect_order {
        return n1 == n2;
    }
    let c1 = FillingDescriptor { p: d1.p.clone(), q: n1.0.clone(), k: n1.1.clone(), order_type: OrderType::AsGiven }.conjugate();
    n2 == n1 || n2 == (c1.q, c1.k)
}

/// Point count and Euler data of the Milnor fiber of `(a, k)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MilnorData {
    pub euler_characteristic_fiber: i64,
    pub mu: i64,
    pub n_points: i64,
}

/// The fiber is `n` blow-ups of `P^2` minus a chain of `r + 1` spheres:
/// `χ = (3 + n) - (r + 2) = Σ(a_i - k_i)`. Taking `b_1 = 0`, `μ = χ - 1`.
pub fn milnor_numbers(a: &[i64], k: &ZeroSequence) -> Result<MilnorData> {
    check_bounded(a, k)?;
    let excess: i64 = a.iter().zip(k.iter()).map(|(x, y)| x - y).sum();
    let n_points = a.len() as i64 - 1 + excess;
    Ok(MilnorData { euler_characteristic_fiber: excess, mu: excess - 1, n_points })
}

/// `|K_r(a)|` for `a` the expansion of `p/(p-q)`.
pub fn count_components(p: &BigInt, q: &BigInt) -> Result<usize> {
    check_pair(p, q)?;
    Ok(enumerate_k(&hj_expand(p, &(p - q))?)?.len())
}

/// All descriptors `(p, q, k)` with the as-given order, in `(q, k)` order.
pub fn descriptors(p: &BigInt) -> Result<Vec<FillingDescriptor>> {
    let mut out = Vec::new();
    let mut q = BigInt::one();
    while &q < p {
        if num_integer::Integer::gcd(p, &q).is_one() {
            let a = hj_expand(p, &(p - &q))?;
            for k in enumerate_k(&a)? {
                out.push(FillingDescriptor { p: p.clone(), q: q.clone(), k, order_type: OrderType::AsGiven });
            }
        }
        q += 1;
    }
    Ok(out)
}

/// Sizes of the equivalence classes of [`classify`] on `items`.
pub fn class_sizes(items: &[FillingDescriptor], respect_order: bool) -> Vec<usize> {
    let mut class_of: Vec<Option<usize>> = vec![None; items.len()];
    let mut sizes = Vec::new();
    for i in 0..items.len() {
        if class_of[i].is_some() {
            continue;
        }
        let id = sizes.len();
        sizes.push(0);
        for j in i..items.len() {
            if class_of[j].is_none() && classify(&items[i], &items[j], respect_order) {
                class_of[j] = Some(id);
                sizes[id] += 1;
            }
        }
    }
    sizes
}

impl From<&PlumbingChain> for HjSequence {
    fn from(c: &PlumbingChain) -> HjSequence {
        HjSequence::new(c.weights.iter().map(|w| -w).collect())
    }
}
