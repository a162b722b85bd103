use serde::{Deserialize, Serialize};

use crate::poly::{point_serde, Poly, RatFunc, Q};

/// Which of the two standard charts of a point blowup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Which {
    One,
    Two,
}

impl Which {
    pub fn suffix(self) -> &'static str {
        match self {
            Which::One => "1",
            Which::Two => "2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Provenance {
    Base,
    Blowup {
        parent: String,
        #[serde(with = "point_serde")]
        center: Vec<Q>,
        which: Which,
        /// Parent coordinates as polynomials in this chart's coordinates.
        map_to_parent: Vec<Poly>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chart {
    pub id: String,
    pub names: [String; 2],
    pub provenance: Provenance,
}

impl Chart {
    pub fn base() -> Self {
        Chart { id: "base".into(), names: ["x".into(), "y".into()], provenance: Provenance::Base }
    }

    pub fn depth(&self) -> usize {
        self.id.matches('.').count()
    }

    pub fn names(&self) -> [&str; 2] {
        [&self.names[0], &self.names[1]]
    }
}

/// Parent coordinates in terms of chart coordinates `(r, s)` for the blowup
/// at `(a, b)`: chart One is `(r, b + (r - a) s)`, chart Two is
/// `(a + (s - b) r, s)`.
pub fn step_map(center: &[Q], which: Which) -> [Poly; 2] {
    let r = Poly::var(2, 0);
    let s = Poly::var(2, 1);
    let a = Poly::constant(2, center[0].clone());
    let b = Poly::constant(2, center[1].clone());
    match which {
        Which::One => [r.clone(), &b + &(&(&r - &a) * &s)],
        Which::Two => [&a + &(&(&s - &b) * &r), s],
    }
}

/// Chart coordinates as rational functions of the parent coordinates
/// `(u, v)`: chart One is `(u, (v - b)/(u - a))`, chart Two is
/// `((u - a)/(v - b), v)`.
pub fn step_inverse(center: &[Q], which: Which) -> [RatFunc; 2] {
    let u = Poly::var(2, 0);
    let v = Poly::var(2, 1);
    let du = &u - &Poly::constant(2, center[0].clone());
    let dv = &v - &Poly::constant(2, center[1].clone());
    match which {
        Which::One => [RatFunc::from_poly(u), RatFunc::new(dv, du).expect("nonzero")],
        Which::Two => [RatFunc::new(du, dv).expect("nonzero"), RatFunc::from_poly(v)],
    }
}

/// The equation of the exceptional curve in the chart.
pub fn exceptional_form(center: &[Q], which: Which) -> Poly {
    match which {
        Which::One => &Poly::var(2, 0) - &Poly::constant(2, center[0].clone()),
        Which::Two => &Poly::var(2, 1) - &Poly::constant(2, center[1].clone()),
    }
}

/// The exceptional curve's points in chart coordinates are those with
/// this coordinate equal to the center's.
pub fn exceptional_coordinate(which: Which) -> usize {
    match which {
        Which::One => 0,
        Which::Two => 1,
    }
}
