//! Text inputs: integers, sequences, check lists and golden files.

use cqs_core::contfrac::check_pair;
use cqs_core::matrix::IntegerMatrix;
use num_bigint::BigInt;
use serde::Deserialize;

use crate::CliError;

pub fn parse_int(s: &str) -> Result<BigInt, CliError> {
    let t = s.trim();
    let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(CliError::Usage(format!("not an integer: {s:?}")));
    }
    t.parse().map_err(|_| CliError::Usage(format!("not an integer: {s:?}")))
}

/// A coprime pair `p > q > 0`.
pub fn parse_pair(p: &str, q: &str) -> Result<(BigInt, BigInt), CliError> {
    let (p, q) = (parse_int(p)?, parse_int(q)?);
    check_pair(&p, &q)?;
    Ok((p, q))
}

/// Accepts `1,2,2,1`, `(1,2,2,1)`, `[1, 2, 2, 1]` or `1 2 2 1`.
pub fn parse_sequence(s: &str) -> Result<Vec<i64>, CliError> {
    let t = s.trim();
    let inner = match (t.chars().next(), t.chars().last()) {
        (Some('('), Some(')')) | (Some('['), Some(']')) if t.len() >= 2 => &t[1..t.len() - 1],
        _ => t,
    };
    let parts: Vec<&str> = inner.split(|c: char| c == ',' || c.is_whitespace()).filter(|x| !x.is_empty()).collect();
    if parts.is_empty() {
        return Err(CliError::Usage(format!("empty sequence: {s:?}")));
    }
    parts
        .iter()
        .map(|x| x.parse::<i64>().map_err(|_| CliError::Usage(format!("bad sequence entry {x:?} in {s:?}"))))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Check {
    Catalan,
    Incidence,
    Gram,
    Fingerprint,
    Factorization,
    Fan,
    Charts,
}

impl Check {
    pub const ALL: [Check; 7] =
        [Check::Catalan, Check::Incidence, Check::Gram, Check::Fingerprint, Check::Factorization, Check::Fan, Check::Charts];

    pub fn name(self) -> &'static str {
        match self {
            Check::Catalan => "catalan",
            Check::Incidence => "incidence",
            Check::Gram => "gram",
            Check::Fingerprint => "fingerprint",
            Check::Factorization => "factorization",
            Check::Fan => "fan",
            Check::Charts => "charts",
        }
    }
}

/// Comma-separated check names; `all` selects everything.
pub fn parse_checks(s: &str) -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    for name in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        if name == "all" {
            out.extend(Check::ALL);
            continue;
        }
        let check = Check::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| CliError::Usage(format!("unknown check {name:?}")))?;
        out.push(check);
    }
    if out.is_empty() {
        return Err(CliError::Usage("no checks selected".into()));
    }
    out.sort();
    out.dedup();
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGolden {
    p: i64,
    q: i64,
    components: Vec<RawGoldenComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGoldenComponent {
    k: Vec<i64>,
    #[serde(default)]
    l: Option<Vec<i64>>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(rename = "D")]
    d: Vec<Vec<i64>>,
    #[serde(rename = "cumD")]
    cum_d: Vec<Vec<i64>>,
}

/// Reference matrices for one pair `(p, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Golden {
    pub p: BigInt,
    pub q: BigInt,
    pub components: Vec<GoldenComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenComponent {
    pub k: Vec<i64>,
    pub l: Option<Vec<i64>>,
    pub n: Option<usize>,
    pub d: IntegerMatrix,
    pub cum_d: IntegerMatrix,
}

/// Golden files are JSON: `{"p", "q", "components": [{"k", "l"?, "n"?,
/// "D": rows, "cumD": rows}]}`.
pub fn parse_golden(text: &str) -> Result<Golden, CliError> {
    let raw: RawGolden = serde_json::from_str(text).map_err(|e| CliError::Usage(format!("golden file: {e}")))?;
    let matrix = |rows: &[Vec<i64>]| {
        IntegerMatrix::from_rows(rows).map_err(|e| CliError::Usage(format!("golden file: {e}")))
    };
    let components = raw
        .components
        .iter()
        .map(|c| Ok(GoldenComponent { k: c.k.clone(), l: c.l.clone(), n: c.n, d: matrix(&c.d)?, cum_d: matrix(&c.cum_d)? }))
        .collect::<Result<_, CliError>>()?;
    Ok(Golden { p: raw.p.into(), q: raw.q.into(), components })
}

/// Golden data shipped with the tool.
pub fn builtin_golden(p: &BigInt, q: &BigInt) -> Option<Golden> {
    let text = match (i64::try_from(p).ok()?, i64::try_from(q).ok()?) {
        (11, 4) => include_str!("../golden/11_4.json"),
        _ => return None,
    };
    Some(parse_golden(text).expect("built-in golden data parses"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sequences_in_several_spellings() {
        for s in ["1,2,2,1", "(1,2,2,1)", "[1, 2, 2, 1]", " 1 2 2 1 "] {
            assert_eq!(parse_sequence(s).unwrap(), vec![1, 2, 2, 1]);
        }
        assert_eq!(parse_sequence("0").unwrap(), vec![0]);
        for s in ["", "()", "1,,x", "(1,2", "1.5"] {
            assert!(parse_sequence(s).is_err(), "{s}");
        }
    }

    #[test]
    fn pairs_and_integers() {
        assert!(parse_pair("11", "4").is_ok());
        assert!(parse_pair("4", "2").is_err());
        assert!(parse_pair("2", "3").is_err());
        assert!(parse_int("1e3").is_err());
        assert!(parse_int("").is_err());
        assert_eq!(parse_int("123456789012345678901234567890").unwrap().to_string(), "123456789012345678901234567890");
    }

    #[test]
    fn check_lists() {
        assert_eq!(parse_checks("gram,fingerprint").unwrap(), vec![Check::Gram, Check::Fingerprint]);
        assert_eq!(parse_checks("all").unwrap().len(), Check::ALL.len());
        assert!(parse_checks("gram,bogus").is_err());
        assert!(parse_checks(",").is_err());
    }

    #[test]
    fn builtin_golden_parses() {
        let g = builtin_golden(&11.into(), &4.into()).unwrap();
        assert_eq!(g.components.len(), 2);
        assert_eq!((g.components[0].d.rows, g.components[0].d.cols), (4, 6));
        assert!(builtin_golden(&7.into(), &3.into()).is_none());
        assert!(parse_golden("{\"p\": 1}").is_err());
    }
}
