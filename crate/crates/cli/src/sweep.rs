//! Exhaustive verification over all `a`-chains with bounded entry sum.

use std::collections::BTreeMap;

use cqs_core::fillings::{gram_of, lisca_fingerprint, recover_k, DiagonalLatticeModel};
use cqs_core::matrix::IntegerMatrix;
use cqs_core::toricfan::{build_fan, verify_all_charts};
use cqs_core::zeroseq::{
    block_matrix, cumsum_rows, enumerate_components, enumerate_triangulations, point_count, weights_l, zero_sequences,
    Component,
};
use cqs_core::{deformpoly, Error};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::parse::Check;

/// Every `a` with entries `>= 2` and `sum(a) <= max_sum`, by sum and then
/// lexicographically.
pub fn a_chains(max_sum: i64) -> Vec<Vec<i64>> {
    fn rec(rest: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if rest == 0 {
            out.push(prefix.clone());
            return;
        }
        for x in 2..=rest {
            prefix.push(x);
            rec(rest - x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for s in 2..=max_sum {
        rec(s, &mut Vec::new(), &mut out);
    }
    out
}

/// Outcome of one check on one instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
    Skipped(String),
}

impl Verdict {
    pub fn from_result(r: Result<(), Error>) -> Verdict {
        match r {
            Ok(()) => Verdict::Pass,
            Err(e @ Error::DegreeCapExceeded { .. }) => Verdict::Skipped(e.to_string()),
            Err(e) => Verdict::Fail(e.to_string()),
        }
    }

    pub fn render(&self) -> String {
        match self {
            Verdict::Pass => "pass".into(),
            Verdict::Fail(m) => format!("fail: {m}"),
            Verdict::Skipped(m) => format!("skipped: {m}"),
        }
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::Verification(msg.into())
}

/// `∫D` is 0/1 with row sums `l_i` and `r - 1 + sum(a_i - k_i)` columns.
pub fn check_incidence(a: &[i64], c: &Component, d: &IntegerMatrix) -> Result<(), Error> {
    let cum = cumsum_rows(d);
    if cum.data.iter().any(|x| !x.is_zero() && !x.is_one()) {
        return Err(fail(format!("cumD has an entry outside {{0,1}}:\n{cum}")));
    }
    let l = weights_l(a)?;
    let sums = cum.row_sums();
    if sums.iter().zip(&l).any(|(s, &li)| s != &BigInt::from(li)) {
        return Err(fail(format!("cumD row sums {sums:?} differ from l = {l:?}")));
    }
    if cum.cols != point_count(a, &c.k) {
        return Err(fail(format!("cumD has {} columns, expected {}", cum.cols, point_count(a, &c.k))));
    }
    Ok(())
}

/// Fingerprint equals `2(a_i - k_i)` and recovers `k`.
pub fn check_fingerprint(a: &[i64], c: &Component, d: &IntegerMatrix) -> Result<Vec<i64>, Error> {
    let fp = lisca_fingerprint(&DiagonalLatticeModel::new(d.clone()));
    let expected: Vec<i64> = a.iter().zip(c.k.iter()).map(|(x, y)| 2 * (x - y)).collect();
    if fp != expected {
        return Err(fail(format!("fingerprint {fp:?}, expected {expected:?}")));
    }
    let back = recover_k(a, &fp)?;
    if back != c.k {
        return Err(fail(format!("fingerprint recovers {back}, not {}", c.k)));
    }
    Ok(fp)
}

/// Runs the per-component checks on one `(a, k)`.
pub fn run_component(a: &[i64], c: &Component, checks: &[Check], degree_cap: Option<u64>) -> Vec<(Check, Verdict)> {
    let d = match block_matrix(a, &c.k, &c.triangulation) {
        Ok(d) => d,
        Err(e) => {
            let v = Verdict::Fail(e.to_string());
            return checks.iter().filter(|&&x| x != Check::Catalan).map(|&x| (x, v.clone())).collect();
        }
    };
    let mut out = Vec::new();
    for &check in checks {
        let verdict = match check {
            Check::Catalan => continue,
            Check::Incidence => Verdict::from_result(check_incidence(a, c, &d)),
            Check::Gram => Verdict::from_result(gram_of(a, &d).map(drop)),
            Check::Fingerprint => Verdict::from_result(check_fingerprint(a, c, &d).map(drop)),
            Check::Factorization => Verdict::from_result(deformpoly::verify_chain(a, &c.k, degree_cap).map(drop)),
            Check::Fan => Verdict::from_result(build_fan(&c.k).map(drop)),
            Check::Charts => Verdict::from_result(verify_all_charts(a, &c.k, degree_cap).map(drop)),
        };
        out.push((check, verdict));
    }
    out
}

/// `Catalan(n) = binom(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..n {
        c = c * BigInt::from(2 * (2 * i + 1)) / BigInt::from(i + 2);
    }
    c
}

/// `|K_r| = Catalan(r - 1)`, counted both as triangulations and as distinct
/// zero sequences.
pub fn check_catalan(r: usize) -> Result<(), Error> {
    let expected = catalan(r as u64 - 1);
    let count = if r == 1 { 1 } else { enumerate_triangulations(r + 1)?.len() };
    let mut ks: Vec<_> = zero_sequences(r)?.into_iter().map(|c| c.k).collect();
    ks.sort();
    ks.dedup();
    if BigInt::from(count) != expected || BigInt::from(ks.len()) != expected {
        return Err(fail(format!("|K_{r}|: {count} triangulations, {} sequences, Catalan = {expected}", ks.len())));
    }
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counterexample {
    pub check: String,
    pub a: Vec<i64>,
    pub k: Vec<i64>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub max_sum_a: i64,
    pub chains: usize,
    pub components: usize,
    pub checks: BTreeMap<String, Tally>,
    pub counterexamples: Vec<Counterexample>,
}

impl SweepSummary {
    pub fn all_passed(&self) -> bool {
        self.checks.values().all(|t| t.failed == 0)
    }
}

/// Keeps at most this many counterexamples in a summary.
pub const MAX_COUNTEREXAMPLES: usize = 50;

/// Largest `r` the Catalan check enumerates.
pub const CATALAN_MAX_R: usize = 12;

pub fn run_sweep(max_sum: i64, checks: &[Check], degree_cap: Option<u64>) -> SweepSummary {
    let chains = a_chains(max_sum);
    let per_chain: Vec<(usize, Vec<(Vec<i64>, Vec<(Check, Verdict)>)>)> = chains
        .par_iter()
        .map(|a| match enumerate_components(a) {
            Ok(comps) => {
                let rows = comps.iter().map(|c| (c.k.to_vec(), run_component(a, c, checks, degree_cap))).collect();
                (comps.len(), rows)
            }
            Err(e) => (0, vec![(Vec::new(), checks.iter().map(|&c| (c, Verdict::Fail(e.to_string()))).collect())]),
        })
        .collect();
    let mut summary = SweepSummary {
        max_sum_a: max_sum,
        chains: chains.len(),
        components: 0,
        checks: checks.iter().map(|c| (c.name().to_string(), Tally::default())).collect(),
        counterexamples: Vec::new(),
    };
    let record = |summary: &mut SweepSummary, check: Check, a: &[i64], k: Vec<i64>, v: Verdict| {
        let tally = summary.checks.get_mut(check.name()).expect("selected check");
        match v {
            Verdict::Pass => tally.passed += 1,
            Verdict::Skipped(_) => tally.skipped += 1,
            Verdict::Fail(message) => {
                tally.failed += 1;
                if summary.counterexamples.len() < MAX_COUNTEREXAMPLES {
                    summary.counterexamples.push(Counterexample { check: check.name().into(), a: a.to_vec(), k, message });
                }
            }
        }
    };
    for (a, (count, rows)) in chains.iter().zip(per_chain) {
        summary.components += count;
        for (k, verdicts) in rows {
            for (check, v) in verdicts {
                record(&mut summary, check, a, k.clone(), v);
            }
        }
    }
    if checks.contains(&Check::Catalan) {
        let top = usize::try_from(max_sum).unwrap_or(0).min(CATALAN_MAX_R);
        for r in 1..=top {
            let v = Verdict::from_result(check_catalan(r));
            record(&mut summary, Check::Catalan, &[], vec![r as i64], v);
        }
    }
    summary
}
