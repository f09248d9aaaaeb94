//! Zero sequences `K_r`, their triangulations and the incidence matrices
//! of picture deformations.
//!
//! A triangulation of the convex polygon `A_1 ... A_{r+1}` gives the zero
//! sequence `k_i = #{triangles at A_i}` for `i <= r`; every element of
//! `K_r` arises exactly once this way.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::contfrac::{hj_eval, is_admissible, HjSequence};
use crate::error::{Error, Result};
use crate::matrix::IntegerMatrix;

/// A triangulation of the polygon with vertices `1..=polygon_size`.
///
/// Triangles are stored as sorted vertex triples, in increasing order.
/// `polygon_size == 2` with no triangles stands for the degenerate polygon
/// behind `K_1 = {(0)}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triangulation {
    pub polygon_size: usize,
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn new(polygon_size: usize, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in triangles.iter_mut() {
            t.sort_unstable();
        }
        triangles.sort_unstable();
        let theta = Triangulation { polygon_size, triangles };
        theta.validate()?;
        Ok(theta)
    }

    /// The empty triangulation of the two-vertex "polygon" (`r = 1`).
    pub fn degenerate() -> Self {
        Triangulation { polygon_size: 2, triangles: Vec::new() }
    }

    pub fn r(&self) -> usize {
        self.polygon_size - 1
    }

    /// Diagonals (non-side edges), sorted.
    pub fn diagonals(&self) -> Vec<(usize, usize)> {
        let n = self.polygon_size;
        let is_side = |i: usize, j: usize| j == i + 1 || (i == 1 && j == n);
        let mut set = BTreeSet::new();
        for t in &self.triangles {
            for (i, j) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                if !is_side(i, j) {
                    set.insert((i, j));
                }
            }
        }
        set.into_iter().collect()
    }

    /// Mirror image fixing `A_{r+1}`: `A_i -> A_{r+1-i}` for `i <= r`.
    pub fn reflect(&self) -> Triangulation {
        let n = self.polygon_size;
        let map = |v: usize| if v == n { n } else { n - v };
        let triangles = self.triangles.iter().map(|t| [map(t[0]), map(t[1]), map(t[2])]).collect();
        Triangulation::new(n, triangles).expect("reflection of a triangulation")
    }

    fn validate(&self) -> Result<()> {
        let n = self.polygon_size;
        if n == 2 && self.triangles.is_empty() {
            return Ok(());
        }
        let bad = |msg: &str| Error::Verification(format!("invalid triangulation of {n}-gon: {msg}"));
        if n < 3 {
            return Err(Error::PolygonTooSmall(n));
        }
        if self.triangles.len() != n - 2 {
            return Err(bad("wrong number of triangles"));
        }
        if self.triangles.iter().any(|t| t[0] < 1 || t[2] > n || t[0] == t[1] || t[1] == t[2]) {
            return Err(bad("vertex out of range"));
        }
        let diags = self.diagonals();
        if diags.len() != n - 3 {
            return Err(bad("wrong number of diagonals"));
        }
        for (x, &(a, b)) in diags.iter().enumerate() {
            for &(c, d) in &diags[x + 1..] {
                if (a < c && c < b && b < d) || (c < a && a < d && d < b) {
                    return Err(bad("crossing diagonals"));
                }
            }
        }
        // Non-crossing n-3 diagonals with n-2 distinct triangles tile the polygon
        // exactly when the triangle areas add up; count each edge's uses instead.
        let mut uses = std::collections::BTreeMap::new();
        for t in &self.triangles {
            for e in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                *uses.entry(e).or_insert(0usize) += 1;
            }
        }
        for (&(i, j), &u) in &uses {
            let side = j == i + 1 || (i == 1 && j == n);
            if (side && u != 1) || (!side && u != 2) {
                return Err(bad("triangles do not tile the polygon"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Triangulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.triangles.iter().map(|t| format!("A{}A{}A{}", t[0], t[1], t[2])).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// An admissible sequence with `[k_1, ..., k_r] = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "HjSequence", into = "HjSequence")]
pub struct ZeroSequence(HjSequence);

impl ZeroSequence {
    pub fn new(k: impl Into<HjSequence>) -> Result<Self> {
        let k = k.into();
        let zero = !k.is_empty() && hj_eval(&k).map(|v| v.is_zero()).unwrap_or(false);
        if zero && is_admissible(&k) {
            Ok(ZeroSequence(k))
        } else {
            Err(Error::NotZeroSequence { k: k.0 })
        }
    }

    pub fn seq(&self) -> &HjSequence {
        &self.0
    }

    pub fn r(&self) -> usize {
        self.0.len()
    }

    /// `k' = (k_r, ..., k_1)`, again a zero sequence.
    pub fn reversed(&self) -> ZeroSequence {
        ZeroSequence(self.0.reversed())
    }
}

impl std::ops::Deref for ZeroSequence {
    type Target = [i64];

    fn deref(&self) -> &[i64] {
        &self.0
    }
}

impl TryFrom<HjSequence> for ZeroSequence {
    type Error = Error;

    fn try_from(k: HjSequence) -> Result<Self> {
        ZeroSequence::new(k)
    }
}

impl From<ZeroSequence> for HjSequence {
    fn from(k: ZeroSequence) -> HjSequence {
        k.0
    }
}

impl fmt::Display for ZeroSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All triangulations of the `polygon_size`-gon, ordered by their sorted
/// diagonal lists.
pub fn enumerate_triangulations(polygon_size: usize) -> Result<Vec<Triangulation>> {
    if polygon_size < 3 {
        return Err(Error::PolygonTooSmall(polygon_size));
    }
    Ok(bounded_triangulations(polygon_size, |_| None))
}

/// Triangulation of the sub-polygon `A_i..A_j` together with the triangle
/// counts at its two ends.
struct Partial {
    ci: i64,
    cj: i64,
    triangles: Vec<[usize; 3]>,
}

/// Triangulations in which every vertex `v` lies in at most `bound(v)`
/// triangles, in canonical order.
///
/// Built over sub-polygons `A_i..A_j` by the triangle `A_i A_m A_j` on the
/// base edge. Interior vertices of a sub-polygon are finished there, and
/// ends only gain triangles later, so both can be pruned early.
fn bounded_triangulations(n: usize, bound: impl Fn(usize) -> Option<i64>) -> Vec<Triangulation> {
    let fits = |v: usize, c: i64| bound(v).map_or(true, |b| c <= b);
    let mut table: Vec<Vec<Vec<Partial>>> = (0..=n).map(|_| (0..=n).map(|_| Vec::new()).collect()).collect();
    for i in 1..n {
        table[i][i + 1].push(Partial { ci: 0, cj: 0, triangles: Vec::new() });
    }
    for len in 2..n {
        for i in 1..=n - len {
            let j = i + len;
            // A diagonal still has the triangle on its other side to come.
            let outer = if (i, j) == (1, n) { 0 } else { 1 };
            let mut out = Vec::new();
            for m in i + 1..j {
                for l in &table[i][m] {
                    if !fits(i, l.ci + 1 + outer) {
                        continue;
                    }
                    for rt in &table[m][j] {
                        if !fits(m, l.cj + rt.ci + 1) || !fits(j, rt.cj + 1 + outer) {
                            continue;
                        }
                        let mut triangles = Vec::with_capacity(l.triangles.len() + rt.triangles.len() + 1);
                        triangles.push([i, m, j]);
                        triangles.extend_from_slice(&l.triangles);
                        triangles.extend_from_slice(&rt.triangles);
                        out.push(Partial { ci: l.ci + 1, cj: rt.cj + 1, triangles });
                    }
                }
            }
            table[i][j] = out;
        }
    }
    let mut all: Vec<(Vec<(usize, usize)>, Triangulation)> = std::mem::take(&mut table[1][n])
        .into_iter()
        .map(|part| {
            let mut triangles = part.triangles;
            triangles.sort_unstable();
            let theta = Triangulation { polygon_size: n, triangles };
            (theta.diagonals(), theta)
        })
        .collect();
    all.sort_by(|a, b| a.0.cmp(&b.0));
    all.into_iter().map(|(_, t)| t).collect()
}

/// Triangle counts at `A_1, ..., A_r`.
pub fn triangulation_to_k(theta: &Triangulation) -> Result<ZeroSequence> {
    if theta.polygon_size == 2 {
        return ZeroSequence::new(vec![0]);
    }
    let r = theta.r();
    let mut k = vec![0i64; r];
    for t in &theta.triangles {
        for &v in t {
            if v <= r {
                k[v - 1] += 1;
            }
        }
    }
    ZeroSequence::new(k)
}

/// The unique triangulation with triangle counts `k`, by cutting ears: a
/// vertex lying on one triangle is the tip of an ear.
pub fn triangulation_of(k: &ZeroSequence) -> Result<Triangulation> {
    let r = k.r();
    if r == 1 {
        return Ok(Triangulation::degenerate());
    }
    let n = r + 1;
    let mut counts: Vec<i64> = k.to_vec();
    counts.push(3 * (r as i64 - 1) - k.iter().sum::<i64>());
    let mut live: Vec<usize> = (1..=n).collect();
    let mut triangles = Vec::with_capacity(n - 2);
    while live.len() > 3 {
        let pos = live
            .iter()
            .position(|&v| counts[v - 1] == 1)
            .ok_or_else(|| Error::NotZeroSequence { k: k.to_vec() })?;
        let m = live.len();
        let (prev, next) = (live[(pos + m - 1) % m], live[(pos + 1) % m]);
        triangles.push([prev, live[pos], next]);
        counts[prev - 1] -= 1;
        counts[next - 1] -= 1;
        live.remove(pos);
    }
    triangles.push([live[0], live[1], live[2]]);
    let theta = Triangulation::new(n, triangles)?;
    if &triangulation_to_k(&theta)? != k {
        return Err(Error::NotZeroSequence { k: k.to_vec() });
    }
    Ok(theta)
}

/// A zero sequence together with the triangulation that produces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub k: ZeroSequence,
    pub triangulation: Triangulation,
}

/// All of `K_r` with witnessing triangulations, in triangulation order.
pub fn zero_sequences(r: usize) -> Result<Vec<Component>> {
    match r {
        0 => Err(Error::EmptySequence("K_0 is not defined")),
        1 => Ok(vec![Component { k: ZeroSequence::new(vec![0])?, triangulation: Triangulation::degenerate() }]),
        _ => enumerate_triangulations(r + 1)?
            .into_iter()
            .map(|triangulation| Ok(Component { k: triangulation_to_k(&triangulation)?, triangulation }))
            .collect(),
    }
}

/// Restricts `K_r` to `k <= a`.
pub fn bounded_by(all: &[Component], a: &[i64]) -> Vec<Component> {
    let a = HjSequence::from(a);
    all.iter().filter(|c| c.k.seq().le_entrywise(&a)).cloned().collect()
}

/// `K_r(a)` with witnessing triangulations.
pub fn enumerate_components(a: &[i64]) -> Result<Vec<Component>> {
    if a.is_empty() {
        return Err(Error::EmptySequence("a-chain must be nonempty"));
    }
    HjSequence::from(a).require_at_least(2)?;
    let r = a.len();
    if r == 1 {
        return zero_sequences(1);
    }
    bounded_triangulations(r + 1, |v| a.get(v - 1).copied())
        .into_iter()
        .map(|triangulation| Ok(Component { k: triangulation_to_k(&triangulation)?, triangulation }))
        .collect()
}

/// `K_r(a)`.
pub fn enumerate_k(a: &[i64]) -> Result<Vec<ZeroSequence>> {
    Ok(enumerate_components(a)?.into_iter().map(|c| c.k).collect())
}

/// Sign-incidence matrix `D(k)`: rows `A_1..A_r`, one column per triangle
/// (in stored order); `+1` at the first and third vertex, `-1` at the second.
pub fn sign_incidence(theta: &Triangulation) -> IntegerMatrix {
    let r = theta.r();
    let mut d = IntegerMatrix::zeros(r, theta.triangles.len());
    for (j, t) in theta.triangles.iter().enumerate() {
        for (pos, &v) in t.iter().enumerate() {
            if v <= r {
                d[(v - 1, j)] = BigInt::from(if pos == 1 { -1 } else { 1 });
            }
        }
    }
    d
}

/// `D(a; k) = (D(k) | M_{r, a_1-k_1}(1) | ... | M_{r, a_r-k_r}(r))`.
pub fn block_matrix(a: &[i64], k: &ZeroSequence, theta: &Triangulation) -> Result<IntegerMatrix> {
    if a.len() != k.r() {
        return Err(Error::LengthMismatch { expected: a.len(), got: k.r() });
    }
    if &triangulation_to_k(theta)? != k {
        return Err(Error::Verification(format!("triangulation {theta} does not produce {k}")));
    }
    if !k.seq().le_entrywise(&HjSequence::from(a)) {
        return Err(Error::NotBounded { k: k.to_vec(), a: a.to_vec() });
    }
    let r = a.len();
    let d = sign_incidence(theta);
    let extra: usize = a.iter().zip(k.iter()).map(|(x, y)| (x - y) as usize).sum();
    let mut blocks = IntegerMatrix::zeros(r, extra);
    let mut col = 0;
    for i in 0..r {
        for _ in 0..(a[i] - k[i]) {
            blocks[(i, col)] = BigInt::from(1);
            col += 1;
        }
    }
    d.hconcat(&blocks)
}

/// Row `i` of the result is the sum of rows `1..=i` of `m`.
pub fn cumsum_rows(m: &IntegerMatrix) -> IntegerMatrix {
    let mut out = m.clone();
    for i in 1..m.rows {
        for j in 0..m.cols {
            let above = out[(i - 1, j)].clone();
            out[(i, j)] += above;
        }
    }
    out
}

/// Multiplicities `l_i = 2 + sum_{j <= i} (a_j - 2)`.
pub fn weights_l(a: &[i64]) -> Result<Vec<i64>> {
    HjSequence::from(a).require_at_least(2)?;
    let mut acc = 2;
    Ok(a.iter()
        .map(|&x| {
            acc += x - 2;
            acc
        })
        .collect())
}

/// Number of points of the picture deformation, `r - 1 + sum (a_i - k_i)`.
pub fn point_count(a: &[i64], k: &ZeroSequence) -> usize {
    a.len() - 1 + a.iter().zip(k.iter()).map(|(x, y)| (x - y) as usize).sum::<usize>()
}
