//! JSON encoding: `{"n": 2, "t": [{"c": "3/2", "e": [1, 0]}, ...]}` with the
//! leading term first, and `{"num": .., "den": ..}` for rational functions.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Poly, RatFunc, Q};

/// Parses `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| format!("bad rational numerator in {s:?}"))?;
    let d: BigInt = d.parse().map_err(|_| format!("bad rational denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Q::new(n, d))
}

/// A rational written as a string; integers are also accepted on input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QJson(pub Q);

impl Serialize for QJson {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for QJson {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = QJson;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational as \"p/q\" or an integer")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<QJson, E> {
                parse_rational(v).map(QJson).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<QJson, E> {
                Ok(QJson(Q::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<QJson, E> {
                Ok(QJson(Q::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub c: QJson,
    pub e: Vec<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    pub n: usize,
    pub t: Vec<TermJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatFuncJson {
    pub num: Poly,
    pub den: Poly,
}

impl From<&Poly> for PolyJson {
    fn from(p: &Poly) -> Self {
        PolyJson { n: p.nvars(), t: p.terms().rev().map(|(m, c)| TermJson { c: QJson(c.clone()), e: m.0.clone() }).collect() }
    }
}

impl TryFrom<PolyJson> for Poly {
    type Error = String;
    fn try_from(j: PolyJson) -> Result<Self, String> {
        for (i, t) in j.t.iter().enumerate() {
            if t.e.len() != j.n {
                return Err(format!("term {i}: exponent vector has length {}, expected {}", t.e.len(), j.n));
            }
        }
        Poly::from_terms(j.n, j.t.into_iter().map(|t| (t.c.0, t.e))).map_err(|e| e.to_string())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PolyJson::deserialize(d)?;
        Poly::try_from(j).map_err(de::Error::custom)
    }
}

impl Serialize for RatFunc {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        RatFuncJson { num: self.num().clone(), den: self.den().clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatFunc {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = RatFuncJson::deserialize(d)?;
        if j.num.nvars() != j.den.nvars() {
            return Err(de::Error::custom("numerator and denominator arity differ"));
        }
        RatFunc::new(j.num, j.den).map_err(de::Error::custom)
    }
}

/// Serde helper for `Q` fields: `#[serde(with = "crate::poly::q_serde")]`.
pub mod q_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        QJson::deserialize(d).map(|q| q.0)
    }
}

/// Serde helper for `Vec<Q>` fields (rational points).
pub mod point_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Q], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<String> = v.iter().map(|c| c.to_string()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Q>, D::Error> {
        Vec::<QJson>::deserialize(d).map(|v| v.into_iter().map(|q| q.0).collect())
    }
}

/// Serde helper for `Vec<Vec<Q>>` fields (point lists).
pub mod points_serde {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<Q>], s: S) -> Result<S::Ok, S::Error> {
        let strs: Vec<Vec<String>> = v.iter().map(|p| p.iter().map(|c| c.to_string()).collect()).collect();
        strs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Q>>, D::Error> {
        Vec::<Vec<QJson>>::deserialize(d).map(|v| v.into_iter().map(|p| p.into_iter().map(|q| q.0).collect()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{p_kl, qf};

    #[test]
    fn poly_roundtrip_is_bit_exact() {
        let p = &p_kl(1, 1).scale(&qf(-3, 7)) + &Poly::one(2);
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.starts_with(r#"{"n":2,"t":[{"c":"-3/7","e":[4,0]}"#), "{s}");
        let back: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
    }

    #[test]
    fn ratfunc_json_normalizes() {
        let s = r#"{"num":{"n":1,"t":[{"c":"2","e":[1]}]},"den":{"n":1,"t":[{"c":"4","e":[2]}]}}"#;
        let f: RatFunc = serde_json::from_str(s).unwrap();
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"num":{"n":1,"t":[{"c":"1/2","e":[0]}]},"den":{"n":1,"t":[{"c":"1","e":[1]}]}}"#
        );
    }

    #[test]
    fn malformed_coefficient_is_rejected() {
        let s = r#"{"n":2,"t":[{"c":"1","e":[1,0]},{"c":"x/2","e":[0,1]}]}"#;
        let err = serde_json::from_str::<Poly>(s).unwrap_err().to_string();
        assert!(err.contains("bad rational"), "{err}");
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational(" -4/6 ").unwrap(), qf(-2, 3));
    }
}
