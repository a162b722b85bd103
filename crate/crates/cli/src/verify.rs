//! Replays every certificate embedded in a report. Only the polynomial and
//! real-zero layers are used, so the check does not trust any solver.

use cechblow::realzero::{RegularityCert, ZeroCert};
use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Default, Clone, Serialize)]
pub struct Tally {
    pub regularity: usize,
    pub zero_sets: usize,
    pub failures: Vec<String>,
}

fn is_regularity(m: &serde_json::Map<String, Value>) -> bool {
    ["function", "open_set_q", "denominator_cert", "containment"].iter().all(|k| m.contains_key(*k))
}

fn is_zero_cert(m: &serde_json::Map<String, Value>) -> bool {
    m.contains_key("subject") && m.get("kind").is_some_and(Value::is_string)
}

fn walk(v: &Value, at: &mut String, t: &mut Tally) {
    match v {
        Value::Object(m) if is_regularity(m) => {
            t.regularity += 1;
            let r = serde_json::from_value::<RegularityCert>(v.clone())
                .map_err(|e| e.to_string())
                .and_then(|c| c.replay().map_err(|e| e.to_string()));
            if let Err(e) = r {
                t.failures.push(format!("{at}: {e}"));
            }
        }
        Value::Object(m) if is_zero_cert(m) => {
            t.zero_sets += 1;
            let r = serde_json::from_value::<ZeroCert>(v.clone())
                .map_err(|e| e.to_string())
                .and_then(|c| c.replay().map_err(|e| e.to_string()));
            if let Err(e) = r {
                t.failures.push(format!("{at}: {e}"));
            }
        }
        Value::Object(m) => {
            for (k, x) in m {
                let len = at.len();
                at.push('/');
                at.push_str(&k.replace('~', "~0").replace('/', "~1"));
                walk(x, at, t);
                at.truncate(len);
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                let len = at.len();
                at.push_str(&format!("/{i}"));
                walk(x, at, t);
                at.truncate(len);
            }
        }
        _ => {}
    }
}

/// Counts and replays the certificates found anywhere in `report`.
pub fn verify(report: &Value) -> Tally {
    let mut t = Tally::default();
    walk(report, &mut String::new(), &mut t);
    t
}
