//! Dispatch from a validated instance to the solvers.

use std::collections::BTreeMap;

use cechblow::bundle::{search_trivializing_tower, BundleError, SearchOutcome};
use cechblow::cech::{solve_cocycle_blownup, tuples, CechError, Cochain, CocycleOutcome, SheafMode};
use cechblow::cousin::{solve_blownup, solve_direct, CousinData, CousinError, CousinOutcome};
use cechblow::geometry::{
    limit_eq, order_by_division, transform_to_snc, Covering, GeometryError, LimitEq, LimitSection, OrderResult, SncResult,
};
use cechblow::poly::{Poly, PolyError, RatFunc};
use serde::Serialize;
use serde_json::{json, Value};

use crate::instance::{CechPayload, CousinMode, CousinPayload, Instance, LimitEqPayload, Payload, SectionPayload, XiPayload};

pub const OK: i32 = 0;
pub const INVALID: i32 = 1;
pub const NEGATIVE: i32 = 2;

/// What a solver run produced, before it is wrapped into a report.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: i32,
    pub outcome: String,
    pub summary: String,
    pub result: Value,
}

impl Outcome {
    fn new(status: i32, outcome: &str, summary: String, result: impl Serialize) -> Self {
        Outcome { status, outcome: outcome.into(), summary, result: to_value(result) }
    }

    fn invalid(message: String) -> Self {
        Outcome::new(INVALID, "InvalidInput", message.clone(), json!({ "error": message }))
    }

    fn failed(message: String) -> Self {
        Outcome::new(NEGATIVE, "SolverError", message.clone(), json!({ "error": message }))
    }
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("solver output serializes")
}

/// Splits errors into bad input (status 1) and solver give-ups (status 2).
trait Classify: std::fmt::Display {
    fn is_input(&self) -> bool;

    fn outcome(&self) -> Outcome {
        if self.is_input() {
            Outcome::invalid(self.to_string())
        } else {
            Outcome::failed(self.to_string())
        }
    }
}

impl Classify for PolyError {
    fn is_input(&self) -> bool {
        true
    }
}

impl Classify for GeometryError {
    fn is_input(&self) -> bool {
        matches!(
            self,
            GeometryError::UnknownChart(_)
                | GeometryError::NotALeaf(_)
                | GeometryError::Poly(_)
                | GeometryError::EmptyOpenSet
                | GeometryError::NotACover(_)
                | GeometryError::Malformed(_)
        )
    }
}

impl Classify for CechError {
    fn is_input(&self) -> bool {
        match self {
            CechError::Geometry(g) => g.is_input(),
            CechError::Poly(_) | CechError::NotRegular { .. } | CechError::Malformed(_) => true,
            CechError::Undecidable(_) => false,
        }
    }
}

impl Classify for CousinError {
    fn is_input(&self) -> bool {
        match self {
            CousinError::InvalidData { .. } | CousinError::Shape { .. } => true,
            CousinError::Cech(c) => c.is_input(),
            CousinError::Geometry(g) => g.is_input(),
            CousinError::Undecidable(_) => false,
        }
    }
}

impl Classify for BundleError {
    fn is_input(&self) -> bool {
        false
    }
}

macro_rules! attempt {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(err) => return Classify::outcome(&err),
        }
    };
}

pub fn run(inst: &Instance) -> Outcome {
    match &inst.payload {
        Payload::Cousin(p) => cousin(p, inst),
        Payload::Cech(p) => cech(p, inst),
        Payload::Snc(p) => snc(&p.poly, inst),
        Payload::Order(p) => order(&p.polys, inst),
        Payload::Xi(p) => xi(p, inst),
        Payload::LimitEq(p) => limit(p),
    }
}

fn cousin(p: &CousinPayload, inst: &Instance) -> Outcome {
    let cov = attempt!(Covering::new("base", p.covering.clone()));
    let d = attempt!(CousinData::new(cov, p.parts.clone()));
    let lim = inst.limits;
    if p.mode != CousinMode::Blownup {
        if let Some(sol) = attempt!(solve_direct(&d, lim.deg, lim.power)) {
            let summary = "solved on the base".to_string();
            return Outcome::new(OK, "Solved", summary, json!({ "method": "direct", "depth": 0, "data": d, "solution": sol }));
        }
        if p.mode == CousinMode::Direct {
            let summary = format!("no solution with degree ≤ {} and power ≤ {}", lim.deg, lim.power);
            return Outcome::new(NEGATIVE, "NotSolved", summary, json!({ "method": "direct", "data": d }));
        }
    }
    match attempt!(solve_blownup(&d, &lim)) {
        CousinOutcome::Solved { zeta, n, solution } => {
            let depth = solution.tower.depth();
            let summary = format!("solved after {depth} blowups with N = {n}");
            Outcome::new(
                OK,
                "Solved",
                summary,
                json!({ "method": "blownup", "depth": depth, "n": n, "zeta": zeta, "data": d, "solution": solution }),
            )
        }
        CousinOutcome::Failed { zeta, depth, obstructions } => {
            let summary = format!("not solved within depth {depth}, {} obstructions", obstructions.len());
            let r = json!({ "method": "blownup", "depth": depth, "zeta": zeta, "data": d, "obstructions": obstructions });
            Outcome::new(NEGATIVE, "NotSolved", summary, r)
        }
    }
}

fn cocycle(p: &CechPayload) -> Result<Cochain, Outcome> {
    let cov = Covering::new("base", p.covering.clone()).map_err(|e| e.outcome())?;
    let n = cov.len();
    let mut values: BTreeMap<Vec<usize>, RatFunc> = tuples(n, 2).into_iter().map(|t| (t, RatFunc::zero(2))).collect();
    for (i, e) in p.cocycle.iter().enumerate() {
        let t: Option<Vec<usize>> = e.idx.iter().map(|i| i.checked_sub(1)).collect();
        let Some(slot) = t.and_then(|t| values.get_mut(&t)) else {
            return Err(Outcome::invalid(format!("at /payload/cocycle/{i}/idx: expected a non-decreasing pair in 1..={n}")));
        };
        *slot = e.f.clone();
    }
    Cochain::new(cov, 1, SheafMode::Rational, values).map_err(|e| e.outcome())
}

fn cech(p: &CechPayload, inst: &Instance) -> Outcome {
    let f = match cocycle(p) {
        Ok(f) => f,
        Err(o) => return o,
    };
    match attempt!(solve_cocycle_blownup(&f, inst.limits.power, inst.limits.depth)) {
        CocycleOutcome::Solved { tower, n, leaves } => {
            let summary = format!("split after {} blowups with N = {n}", tower.depth());
            Outcome::new(OK, "Solved", summary, json!({ "depth": tower.depth(), "n": n, "tower": tower, "leaves": leaves }))
        }
        CocycleOutcome::Failed { tower, depth, obstructions } => {
            let summary = format!("not split within depth {depth}, {} obstructions", obstructions.len());
            Outcome::new(NEGATIVE, "NotSolved", summary, json!({ "depth": depth, "tower": tower, "obstructions": obstructions }))
        }
    }
}

fn snc(p: &Poly, inst: &Instance) -> Outcome {
    let r = attempt!(transform_to_snc(p, inst.limits.depth));
    let depth = r.tower().depth();
    match r {
        SncResult::Resolved { tower, leaves } => {
            let summary = format!("normal crossings after {depth} blowups");
            Outcome::new(OK, "Resolved", summary, json!({ "depth": depth, "tower": tower, "leaves": leaves }))
        }
        SncResult::DepthExceeded { tower, leaves } => {
            let summary = format!("not normal crossings within depth {}", inst.limits.depth);
            Outcome::new(NEGATIVE, "DepthExceeded", summary, json!({ "depth": depth, "tower": tower, "leaves": leaves }))
        }
    }
}

fn order(ps: &[Poly], inst: &Instance) -> Outcome {
    match attempt!(order_by_division(ps, inst.limits.depth)) {
        OrderResult::Ordered { tower, chains } => {
            let summary = format!("ordered by division after {} blowups", tower.depth());
            Outcome::new(OK, "Ordered", summary, json!({ "depth": tower.depth(), "tower": tower, "chains": chains }))
        }
        OrderResult::DepthExceeded { tower } => {
            let summary = format!("not ordered within depth {}", inst.limits.depth);
            Outcome::new(NEGATIVE, "DepthExceeded", summary, json!({ "depth": tower.depth(), "tower": tower }))
        }
    }
}

/// The report body for one bundle: `k`, `l`, `min_depth` and `section` at
/// the top, the rest of the search record beside them.
fn xi_entry(o: SearchOutcome) -> (bool, Value) {
    let found = o.depth().is_some();
    let mut v = to_value(o);
    let m = v.as_object_mut().expect("tagged enum");
    m.remove("kind");
    let depth = m.remove("depth").unwrap_or(Value::Null);
    m.insert("min_depth".into(), depth);
    m.entry("section").or_insert(Value::Null);
    (found, v)
}

fn xi(p: &XiPayload, inst: &Instance) -> Outcome {
    let lim = inst.limits;
    let search = |k, l| search_trivializing_tower(k, l, lim.depth, lim.deg, lim.power);
    match *p {
        XiPayload::One { k, l } => {
            let (found, v) = xi_entry(attempt!(search(k, l)));
            if found {
                let summary = format!("ξ({k},{l}) trivial after {} blowups", v["min_depth"]);
                Outcome::new(OK, "Found", summary, v)
            } else {
                let summary = format!("ξ({k},{l}) has no trivializing tower of depth ≤ {}", lim.depth);
                Outcome::new(NEGATIVE, "NotFoundWithin", summary, v)
            }
        }
        XiPayload::Sum { up_to } => {
            if up_to == 0 {
                return Outcome::invalid("at /payload/up_to: the truncation needs at least one summand".into());
            }
            let mut all = true;
            let mut depth = 0u64;
            let mut summands = vec![];
            for k in 1..=up_to {
                let (found, v) = xi_entry(attempt!(search(k, k)));
                all &= found;
                depth = depth.max(v["min_depth"].as_u64().unwrap_or(0));
                summands.push(v);
            }
            let r = json!({ "up_to": up_to, "min_depth": if all { json!(depth) } else { Value::Null }, "summands": summands });
            if all {
                Outcome::new(OK, "Found", format!("ξ(1,1) ⊕ … ⊕ ξ({up_to},{up_to}) trivial after {depth} blowups"), r)
            } else {
                Outcome::new(
                    NEGATIVE,
                    "NotFoundWithin",
                    format!("some summand up to {up_to} has no trivializing tower of depth ≤ {}", lim.depth),
                    r,
                )
            }
        }
    }
}

fn section(p: &SectionPayload, open_q: &Poly, at: &str) -> Result<LimitSection, Outcome> {
    let r = match (&p.f, &p.values) {
        (Some(f), None) => LimitSection::pulled(f, open_q, &p.tower),
        (None, Some(v)) => LimitSection::new(p.tower.clone(), open_q.clone(), v.clone()),
        _ => return Err(Outcome::invalid(format!("at {at}: give exactly one of `f` and `values`"))),
    };
    r.map_err(|e| e.outcome())
}

fn limit(p: &LimitEqPayload) -> Outcome {
    let s = match section(&p.s, &p.open_q, "/payload/s") {
        Ok(s) => s,
        Err(o) => return o,
    };
    let t = match section(&p.t, &p.open_q, "/payload/t") {
        Ok(t) => t,
        Err(o) => return o,
    };
    let r = attempt!(limit_eq(&s, &t));
    let sections = json!({ "s": s, "t": t });
    match r {
        LimitEq::Equal => Outcome::new(OK, "Equal", "equal on a common refinement".into(), json!({ "sections": sections })),
        LimitEq::NotEqual { leaf } => {
            Outcome::new(OK, "NotEqual", format!("differ on {leaf} of a common refinement"), json!({ "leaf": leaf, "sections": sections }))
        }
        LimitEq::Incomparable { reason } => Outcome::new(
            NEGATIVE,
            "Incomparable",
            format!("no common refinement: {reason}"),
            json!({ "reason": reason, "sections": sections }),
        ),
    }
}
