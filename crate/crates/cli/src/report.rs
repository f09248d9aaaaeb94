//! The JSON report schema. Keys come out sorted because documents are
//! rendered through `serde_json::Value`.

use std::collections::BTreeMap;
use std::fmt;

use cqs_core::conegeom::LatticeVector;
use cqs_core::matrix::IntegerMatrix;
use num_bigint::BigInt;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// An integer written as a JSON number when it fits in 64 bits and as a
/// decimal string otherwise.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct JsonInt(pub BigInt);

impl From<BigInt> for JsonInt {
    fn from(b: BigInt) -> Self {
        JsonInt(b)
    }
}

impl From<&BigInt> for JsonInt {
    fn from(b: &BigInt) -> Self {
        JsonInt(b.clone())
    }
}

impl Serialize for JsonInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(&self.0) {
            Ok(v) => s.serialize_i64(v),
            Err(_) => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for JsonInt {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = JsonInt;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<JsonInt, E> {
                Ok(JsonInt(v.into()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<JsonInt, E> {
                Ok(JsonInt(v.into()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<JsonInt, E> {
                v.parse::<BigInt>().map(JsonInt).map_err(|_| E::custom(format!("not an integer: {v:?}")))
            }
        }
        d.deserialize_any(V)
    }
}

impl fmt::Display for JsonInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Row-major matrix with explicit dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<JsonInt>,
}

impl From<&IntegerMatrix> for MatrixJson {
    fn from(m: &IntegerMatrix) -> Self {
        MatrixJson { rows: m.rows, cols: m.cols, data: m.data.iter().map(JsonInt::from).collect() }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> cqs_core::Result<IntegerMatrix> {
        IntegerMatrix::from_data(self.rows, self.cols, self.data.iter().map(|x| x.0.clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Input {
    pub p: JsonInt,
    pub q: JsonInt,
    pub a: Vec<i64>,
    pub b: Vec<i64>,
    pub q_prime: JsonInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub k: Vec<i64>,
    pub l: Vec<i64>,
    pub n: usize,
    #[serde(rename = "D")]
    pub d: MatrixJson,
    #[serde(rename = "cumD")]
    pub cum_d: MatrixJson,
    pub fingerprint: Vec<i64>,
    pub mu: i64,
    pub fan_rays: Vec<[JsonInt; 2]>,
    /// `None` unless the chain was checked.
    pub factorization_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_degrees: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polys: Option<Vec<String>>,
    /// Check name to `pass`, `fail: ...` or `skipped: ...`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<BTreeMap<String, String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub input: Input,
    pub components: Vec<ComponentRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden: Option<String>,
}

pub fn ray_json(u: &LatticeVector) -> [JsonInt; 2] {
    [JsonInt(u.x.clone()), JsonInt(u.y.clone())]
}

/// Pretty JSON with sorted keys.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("report values serialize");
    serde_json::to_string_pretty(&v).expect("JSON values render")
}

pub fn from_json(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}
