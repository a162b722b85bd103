//! Exact computer algebra for blowup towers, Čech cochains and rank-one
//! bundles on real planar charts.

pub mod bundle;
pub mod cech;
pub mod cousin;
pub mod geometry;
pub mod linsolve;
pub mod poly;
pub mod random;
pub mod realzero;

use serde::{Deserialize, Serialize};

/// Search limits shared by the bounded solvers: polynomial degree, power
/// of the set equations and number of blowups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub deg: u32,
    pub power: u32,
    pub depth: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { deg: 6, power: 4, depth: 3 }
    }
}
