//! The smooth complete fan `F_k` and the pullbacks of `z_i` to its charts.
//!
//! Coordinates are pinned by `u_1 = (1, 0)`, `u_{r+1} = (0, 1)` and
//! `u_0 = (-1, -1)`. Chart `j` is the cone on `(u_j, u_{j+1})` with
//! coordinates `(x, y)` dual to that basis.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::conegeom::LatticeVector;
use crate::contfrac::z_window;
use crate::deformpoly::{check_bounded, deformation_chain_capped, exponents_e};
use crate::error::{Error, Result};
use crate::poly::{LaurentPoly, Monomial, MultiPoly};
use crate::zeroseq::{triangulation_of, ZeroSequence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    /// `u_0, ..., u_{r+1}`.
    pub rays: Vec<LatticeVector>,
}

impl Fan {
    pub fn r(&self) -> usize {
        self.rays.len() - 2
    }

    /// Adjacent pairs `(u_j, u_{j+1})` including the wrap `(u_{r+1}, u_0)`.
    pub fn cones(&self) -> impl Iterator<Item = (&LatticeVector, &LatticeVector)> {
        let n = self.rays.len();
        (0..n).map(move |j| (&self.rays[j], &self.rays[(j + 1) % n]))
    }
}

fn fan_error(k: &[i64], what: impl std::fmt::Display) -> Error {
    Error::Verification(format!("fan of {k:?}: {what}"))
}

/// Builds `F_k` from the recursion `u_0 + u_2 = (k_1 - 1) u_1`,
/// `u_{j-1} + u_{j+1} = k_j u_j`, and checks that it closes up at
/// `u_{r+1} = (0, 1)` into a smooth complete fan.
pub fn build_fan(k: &ZeroSequence) -> Result<Fan> {
    fan_from_sequence(k)
}

/// Same as [`build_fan`] for an arbitrary sequence; fails unless `k` is an
/// admissible sequence representing zero.
pub fn fan_from_sequence(k: &[i64]) -> Result<Fan> {
    if k.is_empty() {
        return Err(Error::EmptySequence("fan needs r >= 1"));
    }
    let r = k.len();
    let u0 = LatticeVector::new(-1, -1);
    let u1 = LatticeVector::new(1, 0);
    let top = LatticeVector::new(0, 1);
    let mut rays = vec![u0.clone(), u1.clone()];
    rays.push(&(&BigInt::from(k[0] - 1) * &u1) - &u0);
    for j in 2..=r {
        let next = &(&BigInt::from(k[j - 1]) * &rays[j]) - &rays[j - 1];
        rays.push(next);
    }
    if rays[r + 1] != top {
        return Err(fan_error(k, format!("recursion ends at {} instead of (0,1)", rays[r + 1])));
    }
    if &rays[r + 1] + &rays[1] != u0.neg() {
        return Err(fan_error(k, "u_{r+1} + u_1 != -u_0"));
    }
    let fan = Fan { rays };
    for j in 1..=r {
        let closed = &(&z_window(k, 1, j as isize - 1) * &u1) + &(&z_window(k, 2, j as isize - 1) * &top);
        if closed != fan.rays[j] {
            return Err(fan_error(k, format!("u_{j} = {} but the closed form gives {closed}", fan.rays[j])));
        }
    }
    if let Some(u) = fan.rays.iter().find(|u| !u.is_primitive()) {
        return Err(fan_error(k, format!("ray {u} is not primitive")));
    }
    for (j, (u, v)) in fan.cones().enumerate() {
        if !u.det(v).is_one() {
            return Err(fan_error(k, format!("det(u_{j}, u_{}) = {}", (j + 1) % (r + 2), u.det(v))));
        }
    }
    // Positive turns everywhere; the fan is complete iff they add up to one
    // full turn, i.e. the positive x-axis is crossed once.
    let crossings = fan.cones().filter(|(u, v)| u.y.is_negative() && !v.y.is_negative()).count();
    if crossings != 1 {
        return Err(fan_error(k, format!("rays wind {crossings} times around the origin")));
    }
    Ok(fan)
}

/// `m_i^{(j)}` for `i = 0..=r+1` and `j = 1..=r+1`; row `i = 0` holds the
/// exponents of `z0`. Column `r+1` carries the `y` exponents of chart `r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartExponentTable {
    pub r: usize,
    m: Vec<Vec<BigInt>>,
}

impl ChartExponentTable {
    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        assert!(i <= self.r + 1 && (1..=self.r + 1).contains(&j), "m_{i}^({j}) out of range");
        &self.m[i][j - 1]
    }

    /// Exponents `(x, y)` of `z_i` in chart `j`.
    pub fn chart(&self, i: usize, j: usize) -> (&BigInt, &BigInt) {
        (self.get(i, j), self.get(i, j + 1))
    }
}

pub fn chart_exponents(a: &[i64], k: &ZeroSequence) -> Result<ChartExponentTable> {
    check_bounded(a, k)?;
    let r = a.len();
    let m = (0..=r + 1)
        .map(|i| {
            (1..=r + 1)
                .map(|j| {
                    let (i, j) = (i as isize, j as isize);
                    if i <= j {
                        z_window(k, i + 1, j - 1)
                    } else {
                        -z_window(a, j + 1, i - 1)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ChartExponentTable { r, m })
}

/// `z_i` pulled back to chart `j`, split as `x^mx y^my Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pullback {
    pub i: usize,
    pub mx: i64,
    pub my: i64,
    pub q: LaurentPoly,
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64().ok_or(Error::EntryOverflow)
}

/// `z_i ∘ ψ_j` for `i = 1..=r+1`. The monomial part must be exactly
/// `x^{m_i^{(j)}} y^{m_i^{(j+1)}}` and the cofactor `Q` a polynomial
/// divisible by neither `x` nor `y`.
pub fn pullback_chain(a: &[i64], k: &ZeroSequence, j: usize, cap: Option<u64>) -> Result<Vec<Pullback>> {
    ChartData::new(a, k, cap)?.pullback(j)
}

/// The chain and exponent table of one component, shared by all charts.
pub struct ChartData<'a> {
    a: &'a [i64],
    table: ChartExponentTable,
    chain: Vec<MultiPoly>,
    e: Vec<BigInt>,
}

impl<'a> ChartData<'a> {
    pub fn new(a: &'a [i64], k: &ZeroSequence, cap: Option<u64>) -> Result<Self> {
        Ok(ChartData { a, table: chart_exponents(a, k)?, chain: deformation_chain_capped(a, k, cap)?, e: exponents_e(a) })
    }

    pub fn table(&self) -> &ChartExponentTable {
        &self.table
    }

    pub fn pullback(&self, j: usize) -> Result<Vec<Pullback>> {
        let r = self.a.len();
        if !(1..=r).contains(&j) {
            return Err(Error::Verification(format!("chart index {j} outside 1..={r}")));
        }
        let table = &self.table;
        let (z0x, z0y) = (to_i64(table.get(0, j))?, to_i64(table.get(0, j + 1))?);
        let (z1x, z1y) = (to_i64(table.get(1, j))?, to_i64(table.get(1, j + 1))?);
        let mut out = Vec::with_capacity(r + 1);
        for i in 1..=r + 1 {
            let ei = to_i64(&self.e[i])?;
            let pulled = self.chain[i].substitute_monomial((z0x, z0y), (z1x, z1y), (-ei * z0x, -ei * z0y));
            let (mx, my) = (to_i64(table.get(i, j))?, to_i64(table.get(i, j + 1))?);
            let q = pulled.shift(-mx, -my, 0);
            if !q.is_polynomial() {
                return Err(Error::Verification(format!("z_{i} in chart {j}: cofactor has negative exponents")));
            }
            if q.min_x() != Some(0) || q.min_y() != Some(0) {
                return Err(Error::Verification(format!("z_{i} in chart {j}: x or y divides the cofactor")));
            }
            out.push(Pullback { i, mx, my, q });
        }
        Ok(out)
    }
}

/// Outcome of checking the restriction and Taylor-order claims on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartReport {
    pub j: usize,
    /// `a_j - k_j`.
    pub d: i64,
    /// Lowest order at the root `y = ξ` per `i > j`; only filled when `d = 1`.
    pub taylor_orders: Option<Vec<i64>>,
}

/// A polynomial `Q(t, x, y)` as a [`MultiPoly`] in `(t, z0, z1) = (t, x, y)`.
fn to_multi(q: &LaurentPoly) -> Result<MultiPoly> {
    let exp = |e: i64| u32::try_from(e).map_err(|_| Error::Verification(format!("exponent {e} out of range")));
    let terms = q.terms().map(|(m, c)| Ok((Monomial::new(m.t, exp(m.x)?, exp(m.y)?), c.clone())));
    Ok(MultiPoly::from_terms(terms.collect::<Result<Vec<_>>>()?))
}

/// Splits `R(t, x, y)` into its `y`-slices `y^e -> R_e(t, x)`.
fn y_slices(r: &MultiPoly) -> BTreeMap<u32, MultiPoly> {
    let mut out: BTreeMap<u32, Vec<_>> = BTreeMap::new();
    for (m, c) in r.terms() {
        out.entry(m.z1).or_default().push((Monomial::new(m.t, m.z0, 0), c));
    }
    out.into_iter().map(|(e, v)| (e, MultiPoly::from_terms(v))).collect()
}

/// Checks on chart `j`, with `t` kept symbolic so that constants are
/// nonzero elements of `Z[t]`. For `i <= j`, `Q_i` at `x = 0` does not
/// involve `y`. For `i > j` it is proportional to `B^E` with
/// `E = Z_{i-j-1}(a_{j+1}..a_{i-1})`, where `B = b y^d + β` comes from
/// `i = j + 1` and `d = a_j - k_j`. When `d = 1` the order of `Q_i` at the
/// root of `B` is `E` as well.
pub fn verify_chart(a: &[i64], k: &ZeroSequence, j: usize, cap: Option<u64>) -> Result<ChartReport> {
    verify_chart_with(&ChartData::new(a, k, cap)?, k, j)
}

/// [`verify_chart`] on every chart `j = 1..=r`.
pub fn verify_all_charts(a: &[i64], k: &ZeroSequence, cap: Option<u64>) -> Result<Vec<ChartReport>> {
    let data = ChartData::new(a, k, cap)?;
    (1..=a.len()).map(|j| verify_chart_with(&data, k, j)).collect()
}

fn verify_chart_with(data: &ChartData<'_>, k: &ZeroSequence, j: usize) -> Result<ChartReport> {
    let a = data.a;
    let pullbacks = data.pullback(j)?;
    let d = a[j - 1] - k[j - 1];
    let fail = |i: usize, what: &str| Error::Verification(format!("z_{i} in chart {j} of a={a:?}, k={k}: {what}"));
    // (B, b, β) with B = b y^d + β.
    let mut base: Option<(MultiPoly, MultiPoly, MultiPoly)> = None;
    let mut orders = Vec::new();
    for pb in &pullbacks {
        let i = pb.i;
        let restricted = to_multi(&pb.q.restrict_x_zero())?;
        let slices = y_slices(&restricted);
        if slices.is_empty() {
            return Err(fail(i, "restriction to x = 0 vanishes"));
        }
        if i <= j {
            if slices.len() != 1 || !slices.contains_key(&0) {
                return Err(fail(i, "restriction to x = 0 involves y"));
            }
            continue;
        }
        let exponent = z_window(a, j as isize + 1, i as isize - 1).to_u64().ok_or(Error::EntryOverflow)?;
        let (b, lead, beta) = match &base {
            Some(found) => found.clone(),
            None => {
                let keys: Vec<i64> = slices.keys().map(|&e| i64::from(e)).collect();
                let expected = if d == 0 { vec![0] } else { vec![0, d] };
                if keys != expected {
                    return Err(fail(i, &format!("restriction has y-degrees {keys:?}, expected {expected:?}")));
                }
                let found = (restricted.clone(), slices[&(d as u32)].clone(), slices[&0].clone());
                base = Some(found.clone());
                found
            }
        };
        let (&top, lead_i) = slices.last_key_value().expect("nonempty");
        if i64::from(top) != d * exponent as i64 {
            return Err(fail(i, "restriction has the wrong y-degree"));
        }
        match d {
            0 => {}
            1 => {
                // At x = 0 the expansion in Y = b y + β is b^D R_i, so R_i is
                // proportional to B^E iff only Y^E survives there.
                let expanded = expand_at_root(&to_multi(&pb.q)?, &lead, &beta, exponent);
                if expanded.terms().any(|(m, _)| m.z0 == 0 && u64::from(m.z1) != exponent) {
                    return Err(fail(i, "restriction is not proportional to the power of the binomial"));
                }
                orders.push(expanded.terms().map(|(m, _)| i64::from(m.z0) + i64::from(m.z1)).min().expect("nonzero"));
            }
            _ => {
                if restricted.mul(&lead.pow(exponent)) != lead_i.mul(&b.pow(exponent)) {
                    return Err(fail(i, "restriction is not proportional to the power of the binomial"));
                }
            }
        }
    }
    if d == 1 {
        for (pb, h) in pullbacks.iter().filter(|pb| pb.i > j).zip(&orders) {
            let expected = z_window(a, j as isize + 1, pb.i as isize - 1);
            if BigInt::from(*h) != expected {
                return Err(fail(pb.i, &format!("order {h} at the root, expected {expected}")));
            }
        }
    }
    Ok(ChartReport { j, d, taylor_orders: (d == 1).then_some(orders) })
}

/// `b^D q` in the local coordinate `Y = b y + β` at the root of the
/// binomial, `b, β ∈ Z[t]`, with `Y` in the `z1` slot, up to `(x, Y)`-degree
/// `cap`. Substituting `y = (Y - β) / b` keeps everything integral; `b` is a
/// unit at generic `t`.
fn expand_at_root(q: &MultiPoly, b: &MultiPoly, beta: &MultiPoly, cap: u64) -> MultiPoly {
    let truncate = |p: MultiPoly| MultiPoly::from_terms(p.terms().filter(|(m, _)| u64::from(m.z0) + u64::from(m.z1) <= cap));
    let slices: BTreeMap<u32, MultiPoly> = y_slices(q).into_iter().map(|(e, p)| (e, truncate(p))).collect();
    let top = slices.last_key_value().map_or(0, |(&e, _)| e);
    let step = MultiPoly::monomial(0, 0, 1).sub(beta);
    let mut acc = MultiPoly::zero();
    let mut scale = MultiPoly::one();
    // Horner from the top slice down; `scale` is b^{top - e}. Multiplying by
    // `Y - β` never lowers the degree, so truncating as we go is exact.
    for e in (0..=top).rev() {
        acc = truncate(acc.mul(&step));
        if let Some(slice) = slices.get(&e) {
            acc = acc.add(&slice.mul(&scale));
        }
        scale = scale.mul(b);
    }
    acc
}

/// Number of indeterminacy points on the orbit `O_j`: the degree `a_j - k_j`
/// of the binomial. Cross-checked against the width of block `j` of `D(a; k)`.
pub fn indeterminacy_count(a: &[i64], k: &ZeroSequence, j: usize) -> Result<i64> {
    check_bounded(a, k)?;
    let r = a.len();
    if !(1..=r).contains(&j) {
        return Err(Error::Verification(format!("chart index {j} outside 1..={r}")));
    }
    let count = a[j - 1] - k[j - 1];
    let theta = triangulation_of(k)?;
    let d = crate::zeroseq::block_matrix(a, k, &theta)?;
    let triangles = theta.triangles.len();
    let width = (triangles..d.cols).filter(|&c| !d[(j - 1, c)].is_zero()).count();
    if width as i64 != count {
        return Err(Error::Verification(format!("block {j} has width {width}, expected {count}")));
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contfrac::HjSequence;
    use crate::zeroseq::{enumerate_k, zero_sequences};

    fn zs(k: &[i64]) -> ZeroSequence {
        ZeroSequence::new(HjSequence::from(k)).unwrap()
    }

    fn rays(f: &Fan) -> Vec<(i64, i64)> {
        f.rays.iter().map(|u| (u.x.to_i64().unwrap(), u.y.to_i64().unwrap())).collect()
    }

    #[test]
    fn fan_examples() {
        let f = build_fan(&zs(&[1, 2, 2, 1])).unwrap();
        assert_eq!(rays(&f), vec![(-1, -1), (1, 0), (1, 1), (1, 2), (1, 3), (0, 1)]);
        assert_eq!(rays(&build_fan(&zs(&[0])).unwrap()), vec![(-1, -1), (1, 0), (0, 1)]);
        assert_eq!(rays(&build_fan(&zs(&[1, 1])).unwrap()), vec![(-1, -1), (1, 0), (1, 1), (0, 1)]);
    }

    #[test]
    fn fan_rejects_non_admissible_zero() {
        // Represents 0 but is not admissible.
        let k = [2, 1, 1, 1, 1, 2];
        assert!(crate::contfrac::hj_eval(&k).unwrap().is_zero());
        assert!(fan_from_sequence(&k).is_err());
        assert!(fan_from_sequence(&[1, 2, 2, 1]).is_ok());
    }

    #[test]
    fn every_zero_sequence_gives_a_fan() {
        for r in 1..=8 {
            for c in zero_sequences(r).unwrap() {
                let f = build_fan(&c.k).unwrap();
                assert_eq!(f.r(), r);
            }
        }
    }

    #[test]
    fn exponent_table_examples() {
        let a = [2, 3, 2, 2];
        let t = chart_exponents(&a, &zs(&[1, 2, 2, 1])).unwrap();
        assert_eq!(t.get(1, 1), &BigInt::zero());
        assert_eq!(t.get(2, 1), &BigInt::from(-1));
        for j in 1..=4 {
            assert_eq!(t.get(j, j), &BigInt::zero());
            assert_eq!(t.get(j, j + 1), &BigInt::one());
        }
        // -(p - q) for 11/4.
        assert_eq!(t.get(5, 1), &BigInt::from(-7));
    }

    #[test]
    fn pullbacks_factor_on_worked_example() {
        let a = [2, 3, 2, 2];
        for k in enumerate_k(&a).unwrap() {
            for j in 1..=4 {
                let pbs = pullback_chain(&a, &k, j, None).unwrap();
                assert_eq!(pbs[0].q, LaurentPoly::one());
                let report = verify_chart(&a, &k, j, None).unwrap();
                assert_eq!(report.d, a[j - 1] - k[j - 1]);
            }
        }
    }

    #[test]
    fn second_coordinate_in_first_chart() {
        // j = 1, i = 2 with k_1 = 1: z_2 = (z1^2 + t) / z0 pulls back to y^{m} (y + ...).
        let a = [2, 3, 2, 2];
        let k = zs(&[1, 2, 2, 1]);
        let pbs = pullback_chain(&a, &k, 1, None).unwrap();
        let t = chart_exponents(&a, &k).unwrap();
        assert_eq!((BigInt::from(pbs[1].mx), BigInt::from(pbs[1].my)), (t.get(2, 1).clone(), t.get(2, 2).clone()));
        assert_eq!(pbs[1].q.restrict_x_zero().len(), 2);
    }

    #[test]
    fn chart_checks_small_sweep() {
        for p in 2i64..=13 {
            for q in 1..p {
                if num_integer::Integer::gcd(&p, &q) != 1 {
                    continue;
                }
                let a = crate::contfrac::hj_expand(&BigInt::from(p), &BigInt::from(p - q)).unwrap();
                for k in enumerate_k(&a).unwrap() {
                    for report in verify_all_charts(&a, &k, None).unwrap() {
                        if report.d == 1 {
                            assert!(report.taylor_orders.is_some());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn indeterminacy_examples() {
        let a = [2, 3, 2, 2];
        assert_eq!(indeterminacy_count(&a, &zs(&[1, 2, 2, 1]), 1).unwrap(), 1);
        assert_eq!(indeterminacy_count(&a, &zs(&[1, 3, 1, 2]), 4).unwrap(), 0);
        let total: i64 = (1..=4).map(|j| indeterminacy_count(&a, &zs(&[1, 2, 2, 1]), j).unwrap()).sum();
        assert_eq!(total as usize, crate::zeroseq::point_count(&a, &zs(&[1, 2, 2, 1])) - 3);
    }

    proptest::proptest! {
        #[test]
        fn charts_and_counts_agree(a in proptest::collection::vec(2i64..=4, 1..=4), pick in 0usize..64) {
            let ks = enumerate_k(&a).unwrap();
            let k = &ks[pick % ks.len()];
            let fan = build_fan(k).unwrap();
            proptest::prop_assert_eq!(fan.r(), a.len());
            let reports = verify_all_charts(&a, k, None).unwrap();
            let total: i64 = reports.iter().map(|r| r.d).sum();
            let counted: i64 = (1..=a.len()).map(|j| indeterminacy_count(&a, k, j).unwrap()).sum();
            proptest::prop_assert_eq!(total, counted);
            proptest::prop_assert_eq!(counted as usize, crate::zeroseq::point_count(&a, k) - (a.len() - 1));
        }
    }
}
