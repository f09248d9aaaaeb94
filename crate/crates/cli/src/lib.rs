//! The `cqs` command-line tool. [`run`] does all the work and returns the
//! text to print together with the exit code, so tests can drive it without
//! spawning a process.

pub mod parse;
pub mod report;
pub mod sweep;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use cqs_core::conegeom::{hull_polyline_oracle, sigma_polyline, supplementary_polyline, verify_precdual, ConeSide};
use cqs_core::contfrac::{edge_data, hj_expand, q_conjugate};
use cqs_core::deformpoly::{deformation_chain_capped, verify_chain};
use cqs_core::fillings::{class_sizes, classify, descriptors, milnor_numbers, FillingDescriptor, OrderType};
use cqs_core::matrix::IntegerMatrix;
use cqs_core::poly::MultiPoly;
use cqs_core::toricfan::{build_fan, chart_exponents, verify_chart};
use cqs_core::zeroseq::{block_matrix, cumsum_rows, enumerate_components, point_count, weights_l, ZeroSequence};
use num_bigint::BigInt;
use serde::Serialize;

use crate::parse::{builtin_golden, parse_checks, parse_golden, parse_int, parse_pair, parse_sequence, Check, Golden};
use crate::report::{ray_json, to_json, ComponentRecord, Input, JsonInt, MatrixJson, Report};
use crate::sweep::{check_fingerprint, check_incidence, run_sweep, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// Bound on the total degree of any chain polynomial unless `--degree-cap`
/// says otherwise.
pub const DEFAULT_DEGREE_CAP: u64 = 4096;

/// Largest `max_sum_a` a sweep accepts unless `--sum-cap` raises it.
pub const DEFAULT_SUM_CAP: i64 = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CliError {
    /// Bad arguments or input data; exit code 2.
    Usage(String),
    /// A check ran and failed; exit code 3.
    Verification(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Verification(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cqs_core::Error> for CliError {
    fn from(e: cqs_core::Error) -> Self {
        match e {
            cqs_core::Error::Verification(_) | cqs_core::Error::InexactDivision(_) => {
                CliError::Verification(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Verification(_) => EXIT_VERIFY,
        }
    }
}

/// What a run printed and how it ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome { stdout, stderr: String::new(), code: EXIT_OK }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cqs", version, about = "Cyclic quotient singularities: continued fractions, smoothing components and fillings")]
struct Cli {
    /// Emit a single JSON document.
    #[arg(long, global = true)]
    json: bool,
    /// Emit matrices as tab-separated values.
    #[arg(long, global = true)]
    tsv: bool,
    /// Largest total degree allowed for chain polynomials.
    #[arg(long, global = true, default_value_t = DEFAULT_DEGREE_CAP)]
    degree_cap: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Continued fractions, edge data and cone polylines of p/q.
    Expand {
        p: String,
        q: String,
        /// Cross-check the polylines against a convex hull when p is at most this.
        #[arg(long, default_value_t = 10_000)]
        oracle_limit: u64,
    },
    /// One record per smoothing component of the singularity of type (p, q).
    Components {
        p: String,
        q: String,
        #[arg(long)]
        emit_matrices: bool,
        #[arg(long)]
        emit_poly: bool,
        #[arg(long)]
        verify: bool,
        /// Compare against golden matrices up to a column permutation.
        #[arg(long)]
        perm_eq: bool,
        /// Golden JSON file; defaults to the built-in data when available.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
    /// Run checks over every a-chain with entry sum at most MAX_SUM_A.
    Sweep {
        max_sum_a: String,
        #[arg(long, default_value = "incidence,gram,fingerprint,fan")]
        checks: String,
        #[arg(long, default_value_t = DEFAULT_SUM_CAP)]
        sum_cap: i64,
    },
    /// Rays of the fan of a zero sequence k, and chart data when --a is given.
    Fan {
        k: String,
        #[arg(long)]
        a: Option<String>,
    },
    /// The deformation polynomials P_0..P_{r+1}.
    Poly {
        p: String,
        q: String,
        /// Restrict to one k; otherwise every component.
        #[arg(long)]
        k: Option<String>,
        #[arg(long)]
        verify: bool,
    },
    /// Compare two fillings (q1, k1) and (q2, k2) of L(p, q), or list the classes.
    Classify {
        p: String,
        q1: Option<String>,
        k1: Option<String>,
        q2: Option<String>,
        k2: Option<String>,
        /// Treat k2 as read in the conjugate order.
        #[arg(long)]
        conjugated: bool,
        #[arg(long)]
        respect_order: bool,
    },
}

/// Runs `cqs` on `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { stdout: String::new(), stderr: text, code: EXIT_USAGE }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let fmt = Format { json: cli.json, tsv: cli.tsv };
    let cap = Some(cli.degree_cap);
    let result = match cli.cmd {
        Cmd::Expand { p, q, oracle_limit } => cmd_expand(&p, &q, oracle_limit, fmt),
        Cmd::Components { p, q, emit_matrices, emit_poly, verify, perm_eq, golden } => {
            let flags = ComponentFlags { emit_matrices, emit_poly, verify, perm_eq, golden, degree_cap: cap };
            cmd_components(&p, &q, &flags, fmt)
        }
        Cmd::Sweep { max_sum_a, checks, sum_cap } => cmd_sweep(&max_sum_a, &checks, sum_cap, cap, fmt),
        Cmd::Fan { k, a } => cmd_fan(&k, a.as_deref(), cap, fmt),
        Cmd::Poly { p, q, k, verify } => cmd_poly(&p, &q, k.as_deref(), verify, cap, fmt),
        Cmd::Classify { p, q1, k1, q2, k2, conjugated, respect_order } => {
            cmd_classify(&p, [q1, k1, q2, k2], conjugated, respect_order, fmt)
        }
    };
    match result {
        Ok(o) => o,
        Err(e) => Outcome { stdout: String::new(), stderr: format!("error: {e}\n"), code: e.code() },
    }
}

#[derive(Clone, Copy, Debug)]
struct Format {
    json: bool,
    tsv: bool,
}

/// Output whose exit code depends on whether everything checked out.
fn finish(stdout: String, failures: &[String]) -> Result<Outcome, CliError> {
    if failures.is_empty() {
        return Ok(Outcome::ok(stdout));
    }
    let mut stderr = String::new();
    for f in failures {
        let _ = writeln!(stderr, "verification failed: {f}");
    }
    Ok(Outcome { stdout, stderr, code: EXIT_VERIFY })
}

fn fits_i64(x: &BigInt, what: &str) -> Result<i64, CliError> {
    i64::try_from(x).map_err(|_| CliError::Usage(format!("{what} {x} is too large")))
}

fn input_echo(p: &BigInt, q: &BigInt) -> Result<(Input, Vec<i64>), CliError> {
    let a = hj_expand(p, &(p - q))?.into_vec();
    let b = hj_expand(p, q)?.into_vec();
    let q_prime = q_conjugate(p, q)?;
    Ok((Input { p: p.into(), q: q.into(), a: a.clone(), b, q_prime: q_prime.into() }, a))
}

fn seq(x: &[i64]) -> String {
    let parts: Vec<String> = x.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

fn point(v: &cqs_core::conegeom::LatticeVector) -> String {
    format!("({},{})", v.x, v.y)
}

fn tsv(m: &IntegerMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows {
        let cells: Vec<String> = m.row(i).iter().map(|x| x.to_string()).collect();
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    out
}

fn indent(m: &IntegerMatrix) -> String {
    m.to_string().lines().map(|l| format!("    {l}\n")).collect()
}

#[derive(Serialize)]
struct ExpandReport {
    input: Input,
    edge: cqs_core::contfrac::EdgeData,
    sigma: [[JsonInt; 2]; 2],
    supplementary: [[JsonInt; 2]; 2],
    precdual: bool,
    oracle: String,
}

fn cmd_expand(p: &str, q: &str, oracle_limit: u64, fmt: Format) -> Result<Outcome, CliError> {
    let (p, q) = parse_pair(p, q)?;
    let (input, a) = input_echo(&p, &q)?;
    let edge = edge_data(&a)?;
    let sigma = sigma_polyline(&p, &q)?;
    let supp = supplementary_polyline(&p, &q)?;
    let precdual = verify_precdual(&p, &q)?;
    let mut failures = Vec::new();
    if !precdual {
        failures.push("supplementary cone is not the dual cone turned by 90 degrees".to_string());
    }
    let oracle = match (
        hull_polyline_oracle(&p, &q, ConeSide::Sigma, oracle_limit),
        hull_polyline_oracle(&p, &q, ConeSide::Supplementary, oracle_limit),
    ) {
        (Ok(h1), Ok(h2)) => {
            if h1.points != sigma.points {
                failures.push("sigma polyline differs from the convex hull".into());
            }
            if h2.points != supp.points {
                failures.push("supplementary polyline differs from the convex hull".into());
            }
            if failures.is_empty() { "agree" } else { "disagree" }.to_string()
        }
        (Err(cqs_core::Error::OracleLimit { .. }), _) | (_, Err(cqs_core::Error::OracleLimit { .. })) => {
            format!("skipped: p > {oracle_limit}")
        }
        (Err(e), _) | (_, Err(e)) => return Err(e.into()),
    };
    let stdout = if fmt.json {
        to_json(&ExpandReport {
            sigma: [ray_json(sigma.first()), ray_json(sigma.last())],
            supplementary: [ray_json(supp.first()), ray_json(supp.last())],
            input,
            edge,
            precdual,
            oracle,
        }) + "\n"
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "p={p} q={q}");
        let _ = writeln!(s, "b={}", seq(&input.b));
        let _ = writeln!(s, "a={}", seq(&input.a));
        let _ = writeln!(s, "q'={}", input.q_prime);
        let _ = writeln!(s, "edge m={} n={}", seq(&edge.m), seq(&edge.n));
        let _ = writeln!(s, "sigma {} .. {} ({} points)", point(sigma.first()), point(sigma.last()), sigma.points.len());
        let _ = writeln!(s, "supplementary {} .. {} ({} points)", point(supp.first()), point(supp.last()), supp.points.len());
        let _ = writeln!(s, "precdual {}", if precdual { "holds" } else { "FAILS" });
        let _ = writeln!(s, "hull oracle {oracle}");
        s
    };
    finish(stdout, &failures)
}

struct ComponentFlags {
    emit_matrices: bool,
    emit_poly: bool,
    verify: bool,
    perm_eq: bool,
    golden: Option<PathBuf>,
    degree_cap: Option<u64>,
}

fn chain_strings(chain: &[MultiPoly]) -> (Vec<u64>, Vec<String>) {
    (chain.iter().map(|f| f.total_degree().unwrap_or(0)).collect(), chain.iter().map(|f| f.to_string()).collect())
}

fn stacked(top: &IntegerMatrix, bottom: &IntegerMatrix) -> Option<IntegerMatrix> {
    let mut data = top.data.clone();
    data.extend(bottom.data.iter().cloned());
    IntegerMatrix::from_data(top.rows + bottom.rows, top.cols, data).ok()
}

/// Compares computed components with golden ones; an empty result means
/// they match.
fn compare_golden(golden: &Golden, p: &BigInt, q: &BigInt, records: &[(ComponentRecord, IntegerMatrix, IntegerMatrix)], perm: bool) -> Vec<String> {
    let mut problems = Vec::new();
    if (&golden.p, &golden.q) != (p, q) {
        problems.push(format!("golden data is for ({}, {}), not ({p}, {q})", golden.p, golden.q));
        return problems;
    }
    let mut mine: Vec<&Vec<i64>> = records.iter().map(|r| &r.0.k).collect();
    let mut theirs: Vec<&Vec<i64>> = golden.components.iter().map(|g| &g.k).collect();
    mine.sort();
    theirs.sort();
    if mine != theirs {
        problems.push(format!("components {mine:?} differ from golden {theirs:?}"));
        return problems;
    }
    for g in &golden.components {
        let (rec, d, cum) = records.iter().find(|r| r.0.k == g.k).expect("same component set");
        let k = seq(&g.k);
        if let Some(l) = &g.l {
            if l != &rec.l {
                problems.push(format!("k={k}: l={} but golden l={}", seq(&rec.l), seq(l)));
            }
        }
        if let Some(n) = g.n {
            if n != rec.n {
                problems.push(format!("k={k}: n={} but golden n={n}", rec.n));
            }
        }
        let same = if perm {
            // One permutation has to serve both matrices.
            match (stacked(d, cum), stacked(&g.d, &g.cum_d)) {
                (Some(x), Some(y)) => x.perm_eq(&y),
                _ => false,
            }
        } else {
            d == &g.d && cum == &g.cum_d
        };
        if !same {
            let how = if perm { "up to column permutation" } else { "exactly" };
            problems.push(format!("k={k}: D and cumD do not match the golden matrices {how}"));
        }
    }
    problems
}

fn cmd_components(p: &str, q: &str, flags: &ComponentFlags, fmt: Format) -> Result<Outcome, CliError> {
    let (p, q) = parse_pair(p, q)?;
    let (input, a) = input_echo(&p, &q)?;
    let golden = match (&flags.golden, flags.perm_eq) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            Some(parse_golden(&text)?)
        }
        (None, true) => Some(
            builtin_golden(&p, &q)
                .ok_or_else(|| CliError::Usage(format!("no built-in golden data for ({p}, {q}); pass --golden FILE")))?,
        ),
        (None, false) => None,
    };
    let mut failures = Vec::new();
    let mut records = Vec::new();
    for c in enumerate_components(&a)? {
        let d = block_matrix(&a, &c.k, &c.triangulation)?;
        let cum = cumsum_rows(&d);
        let fingerprint = cqs_core::fillings::lisca_fingerprint(&cqs_core::fillings::DiagonalLatticeModel::new(d.clone()));
        let milnor = milnor_numbers(&a, &c.k)?;
        let fan = build_fan(&c.k);
        let mut rec = ComponentRecord {
            k: c.k.to_vec(),
            l: weights_l(&a)?,
            n: point_count(&a, &c.k),
            d: MatrixJson::from(&d),
            cum_d: MatrixJson::from(&cum),
            fingerprint,
            mu: milnor.mu,
            fan_rays: fan.as_ref().map(|f| f.rays.iter().map(ray_json).collect()).unwrap_or_default(),
            factorization_ok: None,
            chain_degrees: None,
            polys: None,
            checks: None,
        };
        if flags.emit_poly {
            let chain = deformation_chain_capped(&a, &c.k, flags.degree_cap).map_err(|e| match e {
                cqs_core::Error::DegreeCapExceeded { .. } => {
                    CliError::Usage(format!("k={}: {e}; raise --degree-cap", c.k))
                }
                e => e.into(),
            })?;
            let (deg, polys) = chain_strings(&chain);
            rec.chain_degrees = Some(deg);
            rec.polys = Some(polys);
        }
        if flags.verify {
            let mut checks = BTreeMap::new();
            let fact = match verify_chain(&a, &c.k, flags.degree_cap) {
                Ok(_) => Verdict::Pass,
                Err(e @ cqs_core::Error::DegreeCapExceeded { .. }) => Verdict::Skipped(e.to_string()),
                Err(e) => Verdict::Fail(e.to_string()),
            };
            rec.factorization_ok = match fact {
                Verdict::Pass => Some(true),
                Verdict::Fail(_) => Some(false),
                Verdict::Skipped(_) => None,
            };
            let charts = match cqs_core::toricfan::verify_all_charts(&a, &c.k, flags.degree_cap) {
                Ok(_) => Verdict::Pass,
                Err(e) => Verdict::from_result(Err(e)),
            };
            let verdicts = [
                (Check::Incidence, Verdict::from_result(check_incidence(&a, &c, &d))),
                (Check::Gram, Verdict::from_result(cqs_core::fillings::gram_of(&a, &d).map(drop))),
                (Check::Fingerprint, Verdict::from_result(check_fingerprint(&a, &c, &d).map(drop))),
                (Check::Factorization, fact),
                (Check::Fan, Verdict::from_result(fan.as_ref().map(drop).map_err(Clone::clone))),
                (Check::Charts, charts),
            ];
            for (check, v) in verdicts {
                if let Verdict::Fail(m) = &v {
                    failures.push(format!("k={} {}: {m}", c.k, check.name()));
                }
                checks.insert(check.name().to_string(), v.render());
            }
            rec.checks = Some(checks);
        }
        records.push((rec, d, cum));
    }
    let golden_status = golden.as_ref().map(|g| {
        let problems = compare_golden(g, &p, &q, &records, flags.perm_eq);
        if problems.is_empty() {
            if flags.perm_eq { "match up to column permutation" } else { "exact match" }.to_string()
        } else {
            let msg = problems.join("; ");
            failures.push(format!("golden: {msg}"));
            format!("mismatch: {msg}")
        }
    });
    let stdout = if fmt.json {
        let report = Report { input, components: records.into_iter().map(|r| r.0).collect(), golden: golden_status };
        to_json(&report) + "\n"
    } else if fmt.tsv {
        let mut s = String::new();
        for (rec, d, cum) in &records {
            let _ = writeln!(s, "# k={} D {}x{}", seq(&rec.k), d.rows, d.cols);
            s.push_str(&tsv(d));
            let _ = writeln!(s, "# k={} cumD {}x{}", seq(&rec.k), cum.rows, cum.cols);
            s.push_str(&tsv(cum));
        }
        s
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "p={p} q={q} a={} b={} q'={}", seq(&input.a), seq(&input.b), input.q_prime);
        let _ = writeln!(s, "{} component(s)", records.len());
        for (rec, d, cum) in &records {
            let _ = writeln!(s, "k={} l={} n={} mu={} fingerprint={}", seq(&rec.k), seq(&rec.l), rec.n, rec.mu, seq(&rec.fingerprint));
            let rays: Vec<String> = rec.fan_rays.iter().map(|[x, y]| format!("({x},{y})")).collect();
            let _ = writeln!(s, "  fan rays {}", rays.join(" "));
            if flags.emit_matrices {
                let _ = writeln!(s, "  D ({}x{})", d.rows, d.cols);
                s.push_str(&indent(d));
                let _ = writeln!(s, "  cumD ({}x{})", cum.rows, cum.cols);
                s.push_str(&indent(cum));
            }
            if let (Some(deg), Some(polys)) = (&rec.chain_degrees, &rec.polys) {
                for (i, (d, f)) in deg.iter().zip(polys).enumerate() {
                    let _ = writeln!(s, "  P_{i} (degree {d}) = {f}");
                }
            }
            if let Some(checks) = &rec.checks {
                for (name, v) in checks {
                    let _ = writeln!(s, "  check {name}: {v}");
                }
            }
        }
        if let Some(g) = &golden_status {
            let _ = writeln!(s, "golden: {g}");
        }
        s
    };
    finish(stdout, &failures)
}

fn cmd_sweep(max: &str, checks: &str, sum_cap: i64, cap: Option<u64>, fmt: Format) -> Result<Outcome, CliError> {
    let max = fits_i64(&parse_int(max)?, "max_sum_a")?;
    if max < 2 {
        return Err(CliError::Usage(format!("max_sum_a must be at least 2, got {max}")));
    }
    if max > sum_cap {
        return Err(CliError::Usage(format!("max_sum_a {max} exceeds the cap {sum_cap}; raise --sum-cap")));
    }
    let checks = parse_checks(checks)?;
    let summary = run_sweep(max, &checks, cap);
    let failures: Vec<String> = summary
        .counterexamples
        .iter()
        .map(|c| format!("{} a={} k={}: {}", c.check, seq(&c.a), seq(&c.k), c.message))
        .collect();
    let stdout = if fmt.json {
        to_json(&summary) + "\n"
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "sum(a) <= {max}: {} chains, {} components", summary.chains, summary.components);
        for (name, t) in &summary.checks {
            let _ = writeln!(s, "{name:<14} passed {:>7}  failed {:>5}  skipped {:>5}", t.passed, t.failed, t.skipped);
        }
        for c in &summary.counterexamples {
            let _ = writeln!(s, "counterexample {} a={} k={}: {}", c.check, seq(&c.a), seq(&c.k), c.message);
        }
        s
    };
    finish(stdout, &failures)
}

#[derive(Serialize)]
struct ChartJson {
    j: usize,
    d: i64,
    status: String,
}

#[derive(Serialize)]
struct FanReport {
    k: Vec<i64>,
    rays: Vec<[JsonInt; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    a: Option<Vec<i64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponents: Option<Vec<Vec<JsonInt>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    charts: Option<Vec<ChartJson>>,
}

fn cmd_fan(k: &str, a: Option<&str>, cap: Option<u64>, fmt: Format) -> Result<Outcome, CliError> {
    let k_vec = parse_sequence(k)?;
    let zk = ZeroSequence::new(k_vec.clone())?;
    let fan = build_fan(&zk)?;
    let mut report = FanReport { k: k_vec.clone(), rays: fan.rays.iter().map(ray_json).collect(), a: None, exponents: None, charts: None };
    let mut failures = Vec::new();
    if let Some(a) = a {
        let a = parse_sequence(a)?;
        let table = chart_exponents(&a, &zk)?;
        let r = a.len();
        report.exponents =
            Some((0..=r + 1).map(|i| (1..=r + 1).map(|j| JsonInt(table.get(i, j).clone())).collect()).collect());
        let mut charts = Vec::new();
        for j in 1..=r {
            let status = match verify_chart(&a, &zk, j, cap) {
                Ok(_) => Verdict::Pass,
                Err(e) => Verdict::from_result(Err(e)),
            };
            if let Verdict::Fail(m) = &status {
                failures.push(format!("chart {j}: {m}"));
            }
            charts.push(ChartJson { j, d: a[j - 1] - k_vec[j - 1], status: status.render() });
        }
        report.a = Some(a);
        report.charts = Some(charts);
    }
    let stdout = if fmt.json {
        to_json(&report) + "\n"
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "k={} r={}", seq(&k_vec), fan.r());
        for (j, u) in fan.rays.iter().enumerate() {
            let _ = writeln!(s, "u_{j} = {}", point(u));
        }
        if let (Some(a), Some(ex), Some(charts)) = (&report.a, &report.exponents, &report.charts) {
            let _ = writeln!(s, "a={}", seq(a));
            let _ = writeln!(s, "chart exponents m_i^(j), rows i=0..{}, columns j=1..{}", a.len() + 1, a.len() + 1);
            for row in ex {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:>5}")).collect();
                let _ = writeln!(s, "  {}", cells.join(""));
            }
            for c in charts {
                let _ = writeln!(s, "chart {} (d={}): {}", c.j, c.d, c.status);
            }
        }
        s
    };
    finish(stdout, &failures)
}

#[derive(Serialize)]
struct PolyRecord {
    k: Vec<i64>,
    degrees: Vec<u64>,
    polys: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    factorization: Option<String>,
}

#[derive(Serialize)]
struct PolyReport {
    input: Input,
    chains: Vec<PolyRecord>,
}

fn cmd_poly(p: &str, q: &str, k: Option<&str>, verify: bool, cap: Option<u64>, fmt: Format) -> Result<Outcome, CliError> {
    let (p, q) = parse_pair(p, q)?;
    let (input, a) = input_echo(&p, &q)?;
    let ks: Vec<ZeroSequence> = match k {
        Some(k) => {
            let k = ZeroSequence::new(parse_sequence(k)?)?;
            if k.len() != a.len() || k.iter().zip(&a).any(|(x, y)| x > y) {
                return Err(CliError::Usage(format!("k={k} is not bounded by a={}", seq(&a))));
            }
            vec![k]
        }
        None => enumerate_components(&a)?.into_iter().map(|c| c.k).collect(),
    };
    let mut failures = Vec::new();
    let mut chains = Vec::new();
    for k in ks {
        let chain = deformation_chain_capped(&a, &k, cap).map_err(|e| match e {
            cqs_core::Error::DegreeCapExceeded { .. } => CliError::Usage(format!("k={k}: {e}; raise --degree-cap")),
            e => e.into(),
        })?;
        let factorization = verify.then(|| {
            let v = Verdict::from_result(verify_chain(&a, &k, cap).map(drop));
            if let Verdict::Fail(m) = &v {
                failures.push(format!("k={k}: {m}"));
            }
            v.render()
        });
        let (degrees, polys) = chain_strings(&chain);
        chains.push(PolyRecord { k: k.to_vec(), degrees, polys, factorization });
    }
    let stdout = if fmt.json {
        to_json(&PolyReport { input, chains }) + "\n"
    } else {
        let mut s = String::new();
        let _ = writeln!(s, "p={p} q={q} a={}", seq(&input.a));
        for c in &chains {
            let _ = writeln!(s, "k={}", seq(&c.k));
            for (i, (d, f)) in c.degrees.iter().zip(&c.polys).enumerate() {
                let _ = writeln!(s, "  P_{i} (degree {d}) = {f}");
            }
            if let Some(v) = &c.factorization {
                let _ = writeln!(s, "  factorization: {v}");
            }
        }
        s
    };
    finish(stdout, &failures)
}

#[derive(Serialize)]
struct ClassifyPair {
    p: JsonInt,
    first: (JsonInt, Vec<i64>),
    second: (JsonInt, Vec<i64>, OrderType),
    respect_order: bool,
    equivalent: bool,
}

#[derive(Serialize)]
struct ClassifyList {
    p: JsonInt,
    respect_order: bool,
    fillings: usize,
    classes: Vec<Vec<(JsonInt, Vec<i64>)>>,
}

fn cmd_classify(p: &str, rest: [Option<String>; 4], conjugated: bool, respect_order: bool, fmt: Format) -> Result<Outcome, CliError> {
    let p = parse_int(p)?;
    if p < BigInt::from(2) {
        return Err(CliError::Usage(format!("p must be at least 2, got {p}")));
    }
    match rest {
        [Some(q1), Some(k1), Some(q2), Some(k2)] => {
            let (_, q1) = parse_pair(&p.to_string(), &q1)?;
            let (_, q2) = parse_pair(&p.to_string(), &q2)?;
            let k1 = ZeroSequence::new(parse_sequence(&k1)?)?;
            let k2 = ZeroSequence::new(parse_sequence(&k2)?)?;
            let order = if conjugated { OrderType::Conjugated } else { OrderType::AsGiven };
            let d2 = FillingDescriptor::new(p.clone(), q2, k2, order)?;
            let d1 = FillingDescriptor::new(p.clone(), q1, k1, OrderType::AsGiven)?;
            let equivalent = classify(&d1, &d2, respect_order);
            let stdout = if fmt.json {
                to_json(&ClassifyPair {
                    p: (&p).into(),
                    first: ((&d1.q).into(), d1.k.to_vec()),
                    second: ((&d2.q).into(), d2.k.to_vec(), d2.order_type),
                    respect_order,
                    equivalent,
                }) + "\n"
            } else {
                let mode = if respect_order { "with order" } else { "without order" };
                format!(
                    "W_{{{p},{}}}{} and W_{{{p},{}}}{}: {} {mode}\n",
                    d1.q,
                    d1.k,
                    d2.q,
                    d2.k,
                    if equivalent { "equivalent" } else { "not equivalent" }
                )
            };
            Ok(Outcome::ok(stdout))
        }
        [None, None, None, None] => {
            let items = descriptors(&p)?;
            let mut classes: Vec<Vec<(JsonInt, Vec<i64>)>> = Vec::new();
            let mut taken = vec![false; items.len()];
            for i in 0..items.len() {
                if taken[i] {
                    continue;
                }
                let mut class = Vec::new();
                for j in i..items.len() {
                    if !taken[j] && classify(&items[i], &items[j], respect_order) {
                        taken[j] = true;
                        class.push(((&items[j].q).into(), items[j].k.to_vec()));
                    }
                }
                classes.push(class);
            }
            debug_assert_eq!(class_sizes(&items, respect_order), classes.iter().map(Vec::len).collect::<Vec<_>>());
            let stdout = if fmt.json {
                to_json(&ClassifyList { p: (&p).into(), respect_order, fillings: items.len(), classes }) + "\n"
            } else {
                let mut s = String::new();
                let mode = if respect_order { "with order" } else { "without order" };
                let _ = writeln!(s, "p={p}: {} fillings, {} classes {mode}", items.len(), classes.len());
                for class in &classes {
                    let members: Vec<String> = class.iter().map(|(q, k)| format!("q={q} k={}", seq(k))).collect();
                    let _ = writeln!(s, "  {}", members.join("  ~  "));
                }
                s
            };
            Ok(Outcome::ok(stdout))
        }
        _ => Err(CliError::Usage("classify takes P alone or P Q1 K1 Q2 K2".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cqs(args: &str) -> Outcome {
        run(std::iter::once("cqs").chain(args.split_whitespace()))
    }

    #[test]
    fn expand_examples() {
        let o = cqs("expand 11 4");
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("b=(3,4)\na=(2,3,2,2)\nq'=3\n"), "{}", o.stdout);
        assert!(o.stdout.contains("hull oracle agree"));
        let o = cqs("expand 2 1");
        assert!(o.stdout.contains("b=(2)\na=(2)\nq'=1\n"), "{}", o.stdout);
        let o = cqs("expand 4 2");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stdout.is_empty() && !o.stderr.is_empty());
        assert_eq!(cqs("expand 11").code, EXIT_USAGE);
        assert_eq!(cqs("frobnicate").code, EXIT_USAGE);
        assert_eq!(cqs("--help").code, EXIT_OK);
    }

    #[test]
    fn components_examples() {
        let o = cqs("components 11 4 --verify --json");
        assert_eq!(o.code, 0, "{}", o.stderr);
        let r = report::from_json(&o.stdout).unwrap();
        assert_eq!(r.components.len(), 2);
        for c in &r.components {
            assert_eq!(c.factorization_ok, Some(true));
            assert!(c.checks.as_ref().unwrap().values().all(|v| v == "pass"));
        }
        let o = cqs("components 2 1 --json");
        let r = report::from_json(&o.stdout).unwrap();
        assert_eq!(r.components.len(), 1);
        assert_eq!(r.components[0].k, vec![0]);
    }

    #[test]
    fn golden_needs_data() {
        assert_eq!(cqs("components 7 3 --perm-eq").code, EXIT_USAGE);
        let o = cqs("components 11 4 --perm-eq");
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("golden: match up to column permutation"));
    }

    #[test]
    fn output_is_deterministic() {
        for args in ["components 19 7 --json --verify --emit-poly", "sweep 8 --checks all --json", "classify 13"] {
            assert_eq!(cqs(args), cqs(args), "{args}");
        }
    }

    #[test]
    fn sweep_limits() {
        assert_eq!(cqs("sweep 30").code, EXIT_USAGE);
        assert_eq!(cqs("sweep 8 --checks nope").code, EXIT_USAGE);
        let o = cqs("sweep 6 --checks catalan");
        assert_eq!(o.code, 0, "{}", o.stderr);
    }

    #[test]
    fn degree_cap_is_enforced() {
        let o = cqs("components 11 4 --emit-poly --degree-cap 3");
        assert_eq!(o.code, EXIT_USAGE);
        assert!(o.stderr.contains("degree cap"), "{}", o.stderr);
        let o = cqs("components 11 4 --verify --degree-cap 3 --json");
        assert_eq!(o.code, 0);
        let r = report::from_json(&o.stdout).unwrap();
        assert!(r.components.iter().all(|c| c.factorization_ok.is_none()));
    }

    #[test]
    fn fan_and_classify() {
        let o = cqs("fan 1,2,2,1 --a 2,3,2,2");
        assert_eq!(o.code, 0, "{}", o.stderr);
        assert!(o.stdout.contains("u_0 = (-1,-1)"));
        assert_eq!(cqs("fan 2,1,1,1,1,2").code, EXIT_USAGE);
        let o = cqs("classify 11 4 1,2,2,1 3 1,2,2,1");
        assert!(o.stdout.contains(": equivalent without order"), "{}", o.stdout);
        let o = cqs("classify 11 4 1,2,2,1 3 1,2,2,1 --respect-order");
        assert!(o.stdout.contains("not equivalent"), "{}", o.stdout);
        let o = cqs("classify 11 4 1,2,2,1 3 1,2,2,1 --conjugated --respect-order");
        assert!(o.stdout.contains(": equivalent with order"), "{}", o.stdout);
        assert_eq!(cqs("classify 11 4").code, EXIT_USAGE);
    }
}
