//! Instance files: `{kind, payload, limits?, seed?}`, validated against the
//! kind's schema before anything is computed.

use std::fmt;
use std::path::Path;

use cechblow::geometry::Tower;
use cechblow::poly::{Poly, RatFunc};
use cechblow::Limits;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Cousin,
    CechSolve,
    Snc,
    OrderByDivision,
    XiExperiment,
    LimitEq,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Cousin => "cousin",
            Kind::CechSolve => "cech_solve",
            Kind::Snc => "snc",
            Kind::OrderByDivision => "order_by_division",
            Kind::XiExperiment => "xi_experiment",
            Kind::LimitEq => "limit_eq",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsJson {
    deg: Option<u32>,
    power: Option<u32>,
    depth: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    kind: Kind,
    payload: Value,
    #[serde(default)]
    limits: LimitsJson,
    #[serde(default)]
    seed: u64,
}

/// Command-line overrides for the instance's limits and seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub deg: Option<u32>,
    pub power: Option<u32>,
    pub depth: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CousinPayload {
    pub covering: Vec<Poly>,
    pub parts: Vec<RatFunc>,
    #[serde(default)]
    pub mode: CousinMode,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CousinMode {
    /// Bounded direct solve first, blowups only if it finds nothing.
    #[default]
    Auto,
    Direct,
    Blownup,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CochainEntry {
    /// 1-based, as in cochain JSON elsewhere.
    pub idx: Vec<usize>,
    pub f: RatFunc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CechPayload {
    pub covering: Vec<Poly>,
    /// Values of a 1-cocycle on non-decreasing index pairs; missing pairs are zero.
    pub cocycle: Vec<CochainEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SncPayload {
    pub poly: Poly,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrderPayload {
    pub polys: Vec<Poly>,
}

/// Either one bundle `ξ_{k,l}` or the truncation `ξ_{1,1} ⊕ … ⊕ ξ_{K,K}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum XiPayload {
    One { k: u32, l: u32 },
    Sum { up_to: u32 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionPayload {
    #[serde(default)]
    pub tower: Tower,
    /// A base function pulled to every leaf.
    pub f: Option<RatFunc>,
    /// Or explicit values, one per leaf in leaf order.
    pub values: Option<Vec<(String, RatFunc)>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitEqPayload {
    pub open_q: Poly,
    pub s: SectionPayload,
    pub t: SectionPayload,
}

#[derive(Debug, Clone)]
pub enum Payload {
    Cousin(CousinPayload),
    Cech(CechPayload),
    Snc(SncPayload),
    Order(OrderPayload),
    Xi(XiPayload),
    LimitEq(Box<LimitEqPayload>),
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub kind: Kind,
    pub payload: Payload,
    pub limits: Limits,
    /// The instance as read, with limits and seed resolved. The solvers are
    /// deterministic, so the seed is only echoed.
    pub echo: Value,
}

/// An input problem: where it is, and what is wrong.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        if self.pointer.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "at {}: {}", self.pointer, self.message)
        }
    }
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        InputError { pointer: String::new(), message: message.into() }
    }
}

fn pointer(prefix: &str, path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = prefix.to_string();
    for seg in path.iter() {
        let token = match seg {
            Segment::Seq { index } => index.to_string(),
            Segment::Map { key } => key.replace('~', "~0").replace('/', "~1"),
            Segment::Enum { variant } => variant.clone(),
            Segment::Unknown => continue,
        };
        out.push('/');
        out.push_str(&token);
    }
    out
}

fn typed<T: DeserializeOwned>(v: Value, prefix: &str) -> Result<T, InputError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let p = pointer(prefix, e.path());
        InputError { pointer: if p.is_empty() { "/".into() } else { p }, message: e.into_inner().to_string() }
    })
}

pub fn parse(text: &str, ov: &Overrides) -> Result<Instance, InputError> {
    let raw: Value = serde_json::from_str(text).map_err(|e| InputError::new(format!("not JSON: {e}")))?;
    let h: Header = typed(raw.clone(), "")?;
    let payload = match h.kind {
        Kind::Cousin => Payload::Cousin(typed(h.payload, "/payload")?),
        Kind::CechSolve => Payload::Cech(typed(h.payload, "/payload")?),
        Kind::Snc => Payload::Snc(typed(h.payload, "/payload")?),
        Kind::OrderByDivision => Payload::Order(typed(h.payload, "/payload")?),
        Kind::XiExperiment => Payload::Xi(typed(h.payload, "/payload")?),
        Kind::LimitEq => Payload::LimitEq(typed(h.payload, "/payload")?),
    };
    let d = Limits::default();
    let limits = Limits {
        deg: ov.deg.or(h.limits.deg).unwrap_or(d.deg),
        power: ov.power.or(h.limits.power).unwrap_or(d.power),
        depth: ov.depth.or(h.limits.depth).unwrap_or(d.depth),
    };
    let seed = ov.seed.unwrap_or(h.seed);
    let mut echo = raw;
    echo["limits"] = serde_json::to_value(limits).expect("plain struct");
    echo["seed"] = seed.into();
    Ok(Instance { kind: h.kind, payload, limits, echo })
}

pub fn read(path: &Path, ov: &Overrides) -> Result<Instance, InputError> {
    let text = std::fs::read_to_string(path).map_err(|e| InputError::new(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, ov)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bad_coefficient_points_at_the_term() {
        let text = r#"{"kind":"snc","payload":{"poly":{"n":2,"t":[{"c":"1","e":[2,0]},{"c":"1/0","e":[0,3]}]}}}"#;
        let e = parse(text, &Overrides::default()).unwrap_err();
        assert_eq!(e.pointer, "/payload/poly/t/1/c");
        assert!(e.message.contains("zero denominator"), "{}", e.message);
    }

    #[test]
    fn unknown_kind_is_rejected_at_the_kind() {
        let e = parse(r#"{"kind":"nope","payload":{}}"#, &Overrides::default()).unwrap_err();
        assert_eq!(e.pointer, "/kind");
    }

    #[test]
    fn overrides_win_over_the_file() {
        let text = r#"{"kind":"xi_experiment","payload":{"k":1,"l":1},"limits":{"deg":3},"seed":4}"#;
        let i = parse(text, &Overrides { power: Some(2), seed: Some(9), ..Overrides::default() }).unwrap();
        assert_eq!(i.limits, Limits { deg: 3, power: 2, depth: 3 });
        assert_eq!(i.echo["seed"], 9);
    }

    #[test]
    fn pointer_escapes_keys() {
        let v: Value = serde_json::json!({"a/b": {"~": "x"}});
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct Inner {
            #[serde(rename = "~")]
            t: u32,
        }
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct Outer {
            #[serde(rename = "a/b")]
            ab: Inner,
        }
        let e = typed::<Outer>(v, "").unwrap_err();
        assert_eq!(e.pointer, "/a~1b/~0");
    }
}
