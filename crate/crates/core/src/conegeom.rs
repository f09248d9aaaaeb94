//! Boundary polylines of two-dimensional lattice cones.
//!
//! Everything lives in one fixed coordinate model: `e_1 = v_0 = (1, 0)`,
//! `v_1 = (0, 1)` and `e_2 = -q v_0 + p v_1 = (-q, p)`. The cone `sigma`
//! is spanned by `(e_1, e_2)` and its supplementary cone by `(-e_1, e_2)`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::contfrac::{check_pair, edge_data, hj_expand, z_window, HjSequence};
use crate::error::{Error, Result};

/// Default bound on `p` for the brute-force hull oracle.
pub const DEFAULT_ORACLE_LIMIT: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeVector {
    pub x: BigInt,
    pub y: BigInt,
}

impl LatticeVector {
    pub fn new(x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        LatticeVector { x: x.into(), y: y.into() }
    }

    pub fn det(&self, other: &LatticeVector) -> BigInt {
        &self.x * &other.y - &self.y * &other.x
    }

    pub fn is_primitive(&self) -> bool {
        self.x.gcd(&self.y) == BigInt::from(1)
    }

    pub fn neg(&self) -> LatticeVector {
        LatticeVector { x: -&self.x, y: -&self.y }
    }
}

impl Add for &LatticeVector {
    type Output = LatticeVector;

    fn add(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector { x: &self.x + &rhs.x, y: &self.y + &rhs.y }
    }
}

impl Sub for &LatticeVector {
    type Output = LatticeVector;

    fn sub(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector { x: &self.x - &rhs.x, y: &self.y - &rhs.y }
    }
}

impl Mul<&LatticeVector> for &BigInt {
    type Output = LatticeVector;

    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector { x: self * &rhs.x, y: self * &rhs.y }
    }
}

impl Mul<&LatticeVector> for i64 {
    type Output = LatticeVector;

    fn mul(self, rhs: &LatticeVector) -> LatticeVector {
        LatticeVector { x: &rhs.x * self, y: &rhs.y * self }
    }
}

impl fmt::Display for LatticeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// The lattice points `v_0, ..., v_{s+1}` on the compact boundary of a cone,
/// together with the sequence `c` satisfying `v_{i-1} + v_{i+1} = c_i v_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConePolyline {
    pub points: Vec<LatticeVector>,
    pub sequence: HjSequence,
}

impl ConePolyline {
    /// Checks `v_{i-1} + v_{i+1} = c_i v_i` for every interior point.
    pub fn satisfies_recursion(&self) -> bool {
        self.points.len() == self.sequence.len() + 2
            && self.sequence.iter().enumerate().all(|(i, &c)| {
                &self.points[i] + &self.points[i + 2] == c * &self.points[i + 1]
            })
    }

    pub fn first(&self) -> &LatticeVector {
        &self.points[0]
    }

    pub fn last(&self) -> &LatticeVector {
        self.points.last().expect("polyline has at least two points")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeSide {
    Sigma,
    Supplementary,
}

fn endpoint(p: &BigInt, q: &BigInt) -> LatticeVector {
    LatticeVector { x: -q, y: p.clone() }
}

fn run_recursion(start: LatticeVector, second: LatticeVector, seq: &[i64]) -> Vec<LatticeVector> {
    let mut pts = vec![start, second];
    for &c in seq {
        let n = pts.len();
        let next = &(c * &pts[n - 1]) - &pts[n - 2];
        pts.push(next);
    }
    pts
}

/// Boundary of `sigma`: `v_0 = (1,0)`, `v_1 = (0,1)`, `v_{i+1} = b_i v_i - v_{i-1}`.
pub fn sigma_polyline(p: &BigInt, q: &BigInt) -> Result<ConePolyline> {
    let b = hj_expand(p, q)?;
    let points = run_recursion(LatticeVector::new(1, 0), LatticeVector::new(0, 1), &b);
    if points.last() != Some(&endpoint(p, q)) {
        return Err(Error::Verification(format!("sigma polyline of {p}/{q} misses e_2")));
    }
    Ok(ConePolyline { points, sequence: b })
}

/// Boundary of the supplementary cone, built from the sigma polyline by the
/// edge-difference rule: `vbar_{i+1} - vbar_i = w_l` on the `l`-th edge, where
/// `w_l = v_{1 + sum_{j<l}(n_j - 2)}`.
pub fn supplementary_polyline(p: &BigInt, q: &BigInt) -> Result<ConePolyline> {
    let sigma = sigma_polyline(p, q)?;
    let a = hj_expand(p, &(p - q))?;
    let edges = edge_data(&a)?;
    let w = edge_directions(&sigma, &edges.n);
    let mut points = vec![LatticeVector::new(-1, 0)];
    for (l, &len) in edges.m.iter().enumerate() {
        for _ in 0..len {
            let next = &points[points.len() - 1] + &w[l];
            points.push(next);
        }
    }
    let line = ConePolyline { points, sequence: a };
    if !line.satisfies_recursion() || line.last() != &endpoint(p, q) {
        return Err(Error::Verification(format!("supplementary polyline of {p}/{q} is inconsistent")));
    }
    Ok(line)
}

fn edge_directions(sigma: &ConePolyline, n: &[i64]) -> Vec<LatticeVector> {
    let mut idx = 1usize;
    let mut w = vec![sigma.points[idx].clone()];
    for &nj in n {
        idx += (nj - 2) as usize;
        w.push(sigma.points[idx].clone());
    }
    w
}

/// Checks the edge-difference description of the supplementary boundary
/// against the boundary obtained from the `a`-recursion alone.
pub fn verify_precdual(p: &BigInt, q: &BigInt) -> Result<bool> {
    let sigma = sigma_polyline(p, q)?;
    let a = hj_expand(p, &(p - q))?;
    let r = a.len() as isize;
    let e2 = endpoint(p, q);
    let vbar0 = LatticeVector::new(-1, 0);
    // e_2 = Z_r(a) vbar_1 - Z_{r-1}(a_2..a_r) vbar_0 and Z_r(a) = p.
    let rhs = &e2 + &(&z_window(&a, 2, r) * &vbar0);
    if !(rhs.x.is_multiple_of(p) && rhs.y.is_multiple_of(p)) {
        return Ok(false);
    }
    let vbar1 = LatticeVector { x: &rhs.x / p, y: &rhs.y / p };
    let from_recursion = run_recursion(vbar0, vbar1, &a);
    if from_recursion.last() != Some(&e2) {
        return Ok(false);
    }
    let edges = edge_data(&a)?;
    let w = edge_directions(&sigma, &edges.n);
    let mut i = 0usize;
    for (l, &len) in edges.m.iter().enumerate() {
        for _ in 0..len {
            if &from_recursion[i + 1] - &from_recursion[i] != w[l] {
                return Ok(false);
            }
            i += 1;
        }
    }
    Ok(i + 1 == from_recursion.len())
}

/// Brute-force boundary: convex hull of the lattice points of the cone
/// minus the origin, restricted to the compact edges.
pub fn hull_polyline_oracle(p: &BigInt, q: &BigInt, side: ConeSide, limit: u64) -> Result<ConePolyline> {
    check_pair(p, q)?;
    let pp = match p.to_u64() {
        Some(v) if v <= limit => v as i64,
        _ => return Err(Error::OracleLimit { p: p.clone(), limit }),
    };
    let qq = q.to_i64().expect("q < p fits");
    let u = match side {
        ConeSide::Sigma => (1i64, 0i64),
        ConeSide::Supplementary => (-1, 0),
    };
    let w = (-qq, pp);
    let cands = column_extremes(u, w, pp);
    let hull = convex_hull(cands);
    let chain = near_chain(&hull, u, w);

    let mut points = vec![LatticeVector::new(chain[0].0, chain[0].1)];
    for pair in chain.windows(2) {
        let (dx, dy) = (pair[1].0 - pair[0].0, pair[1].1 - pair[0].1);
        let steps = Integer::gcd(&dx, &dy);
        for s in 1..=steps {
            points.push(LatticeVector::new(pair[0].0 + dx / steps * s, pair[0].1 + dy / steps * s));
        }
    }
    let mut sequence = Vec::with_capacity(points.len().saturating_sub(2));
    for i in 1..points.len() - 1 {
        let sum = &points[i - 1] + &points[i + 1];
        let v = &points[i];
        let c = if !v.x.is_zero() { &sum.x / &v.x } else { &sum.y / &v.y };
        if &c * v != sum {
            return Err(Error::Verification(format!("hull points around {v} are not in lattice relation")));
        }
        sequence.push(c.to_i64().ok_or(Error::EntryOverflow)?);
    }
    Ok(ConePolyline { points, sequence: HjSequence(sequence) })
}

/// Lowest and highest lattice point of the cone in every column `|x| <= bound`.
fn column_extremes(u: (i64, i64), w: (i64, i64), bound: i64) -> Vec<(i64, i64)> {
    let orient = (u.0 * w.1 - u.1 * w.0).signum();
    // det(P, w) and det(u, P) as c*y + d, scaled so that membership is ">= 0".
    let mut out = Vec::new();
    for x in -bound..=bound {
        let constraints = [(-w.0 * orient, x * w.1 * orient), (u.0 * orient, -u.1 * x * orient)];
        let (mut lo, mut hi) = (-bound, bound);
        for (c, d) in constraints {
            match c.signum() {
                1 => lo = lo.max(Integer::div_ceil(&(-d), &c)),
                -1 => hi = hi.min(Integer::div_floor(&d, &(-c))),
                _ if d < 0 => hi = lo - 1,
                _ => {}
            }
        }
        if x == 0 {
            if lo == 0 {
                lo = 1;
            }
            if hi == 0 {
                hi = -1;
            }
        }
        if lo <= hi {
            out.push((x, lo));
            if hi != lo {
                out.push((x, hi));
            }
        }
    }
    out
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    (a.0 - o.0) as i128 * (b.1 - o.1) as i128 - (a.1 - o.1) as i128 * (b.0 - o.0) as i128
}

/// Andrew's monotone chain; counter-clockwise, collinear points dropped.
fn convex_hull(mut pts: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    pts.sort_unstable();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &pt in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], pt) <= 0 {
            lower.pop();
        }
        lower.push(pt);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &pt in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], pt) <= 0 {
            upper.pop();
        }
        upper.push(pt);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Of the two hull arcs joining `u` and `w`, the one facing the origin,
/// returned in the order `u -> w`.
fn near_chain(hull: &[(i64, i64)], u: (i64, i64), w: (i64, i64)) -> Vec<(i64, i64)> {
    let n = hull.len();
    let iu = hull.iter().position(|&pt| pt == u).expect("u is a hull vertex");
    let iw = hull.iter().position(|&pt| pt == w).expect("w is a hull vertex");
    let arc = |from: usize, to: usize| {
        let mut out = vec![hull[from]];
        let mut i = from;
        while i != to {
            i = (i + 1) % n;
            out.push(hull[i]);
        }
        out
    };
    let forward = arc(iu, iw);
    // The origin lies strictly to the right of every edge of the near arc.
    if cross(forward[0], forward[1], (0, 0)) < 0 {
        forward
    } else {
        let mut back = arc(iw, iu);
        back.reverse();
        back
    }
}

/// Image of a lattice vector in `H_1(L) = Z/p`, killing `v_0` and `e_2`.
pub fn homology_class(v: &LatticeVector, p: &BigInt) -> BigInt {
    v.y.mod_floor(p)
}

fn canonical_sign(mut classes: Vec<BigInt>, p: &BigInt) -> Vec<BigInt> {
    let half: BigInt = p / 2;
    if let Some(first) = classes.iter().find(|c| !c.is_zero()) {
        if first > &half {
            for c in classes.iter_mut() {
                *c = (p - &*c).mod_floor(p);
            }
        }
    }
    classes
}

/// Classes of `v_1, ..., v_s` in `Z/p`, defined up to a global sign; the sign
/// is fixed so that the first nonzero class lies in `[1, p/2]`.
pub fn alpha_classes(p: &BigInt, q: &BigInt) -> Result<Vec<BigInt>> {
    let sigma = sigma_polyline(p, q)?;
    let s = sigma.sequence.len();
    let classes = sigma.points[1..=s].iter().map(|v| homology_class(v, p)).collect();
    Ok(canonical_sign(classes, p))
}

/// Classes of `vbar_1, ..., vbar_r` in `Z/p`, same sign convention.
pub fn supplementary_alpha_classes(p: &BigInt, q: &BigInt) -> Result<Vec<BigInt>> {
    let line = supplementary_polyline(p, q)?;
    let r = line.sequence.len();
    let classes = line.points[1..=r].iter().map(|v| homology_class(v, p)).collect();
    Ok(canonical_sign(classes, p))
}

/// Compares two class vectors up to a global sign.
pub fn classes_equal_up_to_sign(a: &[BigInt], b: &[BigInt], p: &BigInt) -> bool {
    a.len() == b.len()
        && (a.iter().zip(b).all(|(x, y)| x.mod_floor(p) == y.mod_floor(p))
            || a.iter().zip(b).all(|(x, y)| (x + y).mod_floor(p).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn pts(v: &[(i64, i64)]) -> Vec<LatticeVector> {
        v.iter().map(|&(x, y)| LatticeVector::new(x, y)).collect()
    }

    #[test]
    fn sigma_examples() {
        let s = sigma_polyline(&big(11), &big(4)).unwrap();
        assert_eq!(s.points, pts(&[(1, 0), (0, 1), (-1, 3), (-4, 11)]));
        assert_eq!(s.sequence.0, vec![3, 4]);
        let s = sigma_polyline(&big(2), &big(1)).unwrap();
        assert_eq!(s.points, pts(&[(1, 0), (0, 1), (-1, 2)]));
        assert_eq!(s.sequence.0, vec![2]);
    }

    #[test]
    fn supplementary_examples() {
        let s = supplementary_polyline(&big(11), &big(4)).unwrap();
        assert_eq!(s.points, pts(&[(-1, 0), (-1, 1), (-1, 2), (-2, 5), (-3, 8), (-4, 11)]));
        assert_eq!(s.sequence.0, vec![2, 3, 2, 2]);
        let s = supplementary_polyline(&big(2), &big(1)).unwrap();
        assert_eq!(s.points, pts(&[(-1, 0), (-1, 1), (-1, 2)]));
        assert_eq!(s.sequence.0, vec![2]);
    }

    #[test]
    fn precdual_examples() {
        assert!(verify_precdual(&big(11), &big(4)).unwrap());
        assert!(verify_precdual(&big(5), &big(2)).unwrap());
        for p in 2..=50 {
            assert!(verify_precdual(&big(p), &big(1)).unwrap());
        }
    }

    #[test]
    fn hull_oracle_examples() {
        let s = hull_polyline_oracle(&big(11), &big(4), ConeSide::Sigma, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(s, sigma_polyline(&big(11), &big(4)).unwrap());
        let s = hull_polyline_oracle(&big(11), &big(4), ConeSide::Supplementary, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(s, supplementary_polyline(&big(11), &big(4)).unwrap());
        let s = hull_polyline_oracle(&big(3), &big(1), ConeSide::Sigma, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(s.points, pts(&[(1, 0), (0, 1), (-1, 3)]));
        assert!(hull_polyline_oracle(&big(101), &big(3), ConeSide::Sigma, 100).is_err());
    }

    #[test]
    fn hull_oracle_agrees_small() {
        for p in 2i64..=60 {
            for q in 1..p {
                if num_integer::gcd(p, q) != 1 {
                    continue;
                }
                let (bp, bq) = (big(p), big(q));
                let s = sigma_polyline(&bp, &bq).unwrap();
                let t = supplementary_polyline(&bp, &bq).unwrap();
                assert_eq!(hull_polyline_oracle(&bp, &bq, ConeSide::Sigma, 1000).unwrap(), s);
                assert_eq!(hull_polyline_oracle(&bp, &bq, ConeSide::Supplementary, 1000).unwrap(), t);
                assert_eq!(s.last(), t.last());
                for w in s.points.windows(2) {
                    assert_eq!(w[0].det(&w[1]), big(1));
                }
                // The supplementary boundary runs clockwise in this model.
                for w in t.points.windows(2) {
                    assert_eq!(w[0].det(&w[1]), big(-1));
                }
                assert!(verify_precdual(&bp, &bq).unwrap());
            }
        }
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_classes(&big(11), &big(4)).unwrap(), vec![big(1), big(3)]);
        assert_eq!(alpha_classes(&big(7), &big(1)).unwrap(), vec![big(1)]);
        assert_eq!(alpha_classes(&big(5), &big(2)).unwrap(), vec![big(1), big(3)]);
    }

    #[test]
    fn endpoint_class_vanishes() {
        for (p, q) in [(11, 4), (13, 5), (7, 3)] {
            let t = supplementary_polyline(&big(p), &big(q)).unwrap();
            assert!(homology_class(t.last(), &big(p)).is_zero());
        }
    }

    #[test]
    fn sign_insensitive_comparison() {
        let p = big(11);
        assert!(classes_equal_up_to_sign(&[big(1), big(3)], &[big(10), big(8)], &p));
        assert!(!classes_equal_up_to_sign(&[big(1), big(3)], &[big(10), big(3)], &p));
    }
}
