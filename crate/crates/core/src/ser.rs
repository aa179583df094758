//! Serialization conventions: words and colorings as digit strings, big
//! integers as decimal strings, rationals as `p/q`.

use alloc::string::{String, ToString};

use num_bigint::BigUint;
use num_rational::Ratio;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::vdw::Coloring;
use crate::word::{parse_word, BinaryWord};

impl Serialize for BinaryWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BinaryWord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_word(&text).map_err(D::Error::custom)
    }
}

impl Serialize for Coloring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub(crate) fn big_decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub(crate) fn ratio<S: Serializer>(v: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", v.numer(), v.denom()))
}

pub(crate) fn ratio_pairs<S: Serializer>(v: &[(u64, Ratio<u64>)], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for (n, r) in v {
        seq.serialize_element(&(n, alloc::format!("{}/{}", r.numer(), r.denom())))?;
    }
    seq.end()
}
