//! Planar charts, open sets and coverings, point blowups and towers.

mod chart;
mod openset;
mod refine;
mod snc;
mod tower;

use thiserror::Error;

use crate::poly::{PolyError, Q};

pub use chart::{exceptional_coordinate, exceptional_form, step_inverse, step_map, Chart, Provenance, Which};
pub use openset::{describe_zero_set, pullback_covering, pullback_openset, Covering, OpenSet};
pub use refine::{common_refinement, limit_eq, LeafMap, LimitEq, LimitSection, RefineResult, Refinement};
pub use snc::{
    critical_points, is_chain, order_by_division, resolve_factored, snc_at_point, transform_to_snc, ChainReport, FactoredPoly, LeafReport,
    OrderResult, PointReport, SncDecomposition, SncOutcome, SncResult,
};
pub use tower::{Step, Tower};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("unknown chart {0}")]
    UnknownChart(String),
    #[error("chart {0} is not a leaf")]
    NotALeaf(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("open set defined by the zero polynomial is empty")]
    EmptyOpenSet,
    #[error("the sets do not cover: common zero {0:?}")]
    NotACover(Vec<Q>),
    #[error("undecidable: {0}")]
    Undecidable(String),
    #[error("a needed center is not rational (eliminant {0})")]
    NonRationalCritical(String),
    #[error("no factored form supplied")]
    NotFactored,
    #[error("exponent vectors are not a chain: {0}")]
    ChainViolation(String),
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error("malformed input: {0}")]
    Malformed(String),
}
