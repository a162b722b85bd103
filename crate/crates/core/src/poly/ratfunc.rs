use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::{gcd, Poly, PolyError, Q};

/// A reduced quotient `num / den` with monic denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatFunc {
    num: Poly,
    den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Result<Self, PolyError> {
        if den.is_zero() {
            return Err(PolyError::DivisionByZeroFunction);
        }
        let n = num.nvars();
        if num.is_zero() {
            return Ok(RatFunc { num, den: Poly::one(n) });
        }
        if let Some(c) = den.constant_value() {
            return Ok(RatFunc { num: num.scale(&c.recip()), den: Poly::one(n) });
        }
        let g = gcd(&num, &den);
        let (num, den) =
            if g.is_one() { (num, den) } else { (num.divide_exact(&g).expect("gcd divides"), den.divide_exact(&g).expect("gcd divides")) };
        let lc = den.leading_coeff();
        if lc.is_one() {
            Ok(RatFunc { num, den })
        } else {
            let inv = lc.recip();
            Ok(RatFunc { num: num.scale(&inv), den: den.scale(&inv) })
        }
    }

    /// Builds `num / den` when the pair is already reduced with monic `den`.
    /// Used on trusted paths where the gcd is known to be 1.
    pub(crate) fn from_reduced(num: Poly, den: Poly) -> Self {
        RatFunc { num, den }
    }

    pub fn from_poly(p: Poly) -> Self {
        let n = p.nvars();
        RatFunc { num: p, den: Poly::one(n) }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_poly(Poly::zero(nvars))
    }

    pub fn one(nvars: usize) -> Self {
        Self::from_poly(Poly::one(nvars))
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        Self::from_poly(Poly::constant(nvars, c))
    }

    pub fn num(&self) -> &Poly {
        &self.num
    }

    pub fn den(&self) -> &Poly {
        &self.den
    }

    pub fn nvars(&self) -> usize {
        self.num.nvars()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn recip(&self) -> Result<Self, PolyError> {
        RatFunc::new(self.den.clone(), self.num.clone())
    }

    pub fn div(&self, other: &RatFunc) -> Result<Self, PolyError> {
        if other.is_zero() {
            return Err(PolyError::DivisionByZeroFunction);
        }
        RatFunc::new(&self.num * &other.den, &self.den * &other.num)
    }

    pub fn pow(&self, e: u32) -> Self {
        // powers of a reduced fraction stay reduced
        RatFunc { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return RatFunc::zero(self.nvars());
        }
        RatFunc { num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn mul_poly(&self, p: &Poly) -> Self {
        RatFunc::new(&self.num * p, self.den.clone()).expect("nonzero denominator")
    }

    /// Value at a rational point.
    pub fn eval(&self, point: &[Q]) -> Result<Q, PolyError> {
        let d = self.den.eval(point);
        if d.is_zero() {
            let n = self.num.eval(point);
            let pt = point.iter().map(|c| c.to_string()).collect();
            return Err(if n.is_zero() { PolyError::IndeterminateAtPoint(pt) } else { PolyError::PoleAtPoint(pt) });
        }
        Ok(self.num.eval(point) / d)
    }

    /// Composition with rational maps `x_i -> maps[i]`.
    pub fn substitute(&self, maps: &[RatFunc]) -> Result<RatFunc, PolyError> {
        if maps.len() != self.nvars() {
            return Err(PolyError::ArityMismatch { expected: self.nvars(), got: maps.len() });
        }
        let (nn, nd) = homogenized(&self.num, maps)?;
        let (dn, dd) = homogenized(&self.den, maps)?;
        if dn.is_zero() {
            return Err(PolyError::DenominatorCollapse);
        }
        RatFunc::new(&nn * &dd, &nd * &dn)
    }

    pub fn derivative(&self, v: usize) -> RatFunc {
        let n = &(&self.num.derivative(v) * &self.den) - &(&self.num * &self.den.derivative(v));
        RatFunc::new(n, self.den.pow(2)).expect("nonzero denominator")
    }

    pub fn display_with(&self, names: &[&str]) -> String {
        if self.den.is_one() {
            self.num.display_with(names)
        } else {
            format!("({})/({})", self.num.display_with(names), self.den.display_with(names))
        }
    }
}

/// `p(maps)` as a fraction `N / D` with `D = Π den_i^{deg_i p}`.
fn homogenized(p: &Poly, maps: &[RatFunc]) -> Result<(Poly, Poly), PolyError> {
    let target = maps[0].nvars();
    let degs: Vec<u32> = (0..p.nvars()).map(|v| p.degree_in(v)).collect();
    let mut num_pows: Vec<Vec<Poly>> = maps.iter().map(|_| vec![Poly::one(target)]).collect();
    let mut den_pows: Vec<Vec<Poly>> = maps.iter().map(|_| vec![Poly::one(target)]).collect();
    let pw = |cache: &mut Vec<Vec<Poly>>, i: usize, e: usize, base: &Poly| -> Poly {
        while cache[i].len() <= e {
            let next = cache[i].last().expect("seeded") * base;
            cache[i].push(next);
        }
        cache[i][e].clone()
    };
    let mut out = Poly::zero(target);
    for (m, c) in p.terms() {
        let mut t = Poly::constant(target, c.clone());
        for (i, &e) in m.0.iter().enumerate() {
            let map = &maps[i];
            if e > 0 {
                t = &t * &pw(&mut num_pows, i, e as usize, &map.num);
            }
            let rest = (degs[i] - e) as usize;
            if rest > 0 && !map.den.is_one() {
                t = &t * &pw(&mut den_pows, i, rest, &map.den);
            }
        }
        out = &out + &t;
    }
    let mut den = Poly::one(target);
    for (i, map) in maps.iter().enumerate() {
        if degs[i] > 0 && !map.den.is_one() {
            den = &den * &pw(&mut den_pows, i, degs[i] as usize, &map.den);
        }
    }
    Ok((out, den))
}

impl From<Poly> for RatFunc {
    fn from(p: Poly) -> Self {
        RatFunc::from_poly(p)
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: &[&str] = if self.nvars() == 2 { &["x", "y"] } else { &[] };
        f.write_str(&self.display_with(names))
    }
}

impl fmt::Debug for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatFunc({self})")
    }
}

impl Add for &RatFunc {
    type Output = RatFunc;
    fn add(self, rhs: &RatFunc) -> RatFunc {
        if self.den == rhs.den {
            return RatFunc::new(&self.num + &rhs.num, self.den.clone()).expect("nonzero");
        }
        if self.den.is_one() {
            return RatFunc::from_reduced(&(&self.num * &rhs.den) + &rhs.num, rhs.den.clone());
        }
        if rhs.den.is_one() {
            return RatFunc::from_reduced(&self.num + &(&rhs.num * &self.den), self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a = self.den.divide_exact(&g).expect("gcd divides");
        let b = rhs.den.divide_exact(&g).expect("gcd divides");
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        RatFunc::new(num, &a * &rhs.den).expect("nonzero")
    }
}

impl Sub for &RatFunc {
    type Output = RatFunc;
    fn sub(self, rhs: &RatFunc) -> RatFunc {
        self + &(-rhs)
    }
}

impl Neg for &RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &RatFunc {
    type Output = RatFunc;
    fn mul(self, rhs: &RatFunc) -> RatFunc {
        if self.den.is_one() && rhs.den.is_one() {
            return RatFunc::from_poly(&self.num * &rhs.num);
        }
        RatFunc::new(&self.num * &rhs.num, &self.den * &rhs.den).expect("nonzero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RatFunc {
            type Output = RatFunc;
            fn $m(self, rhs: RatFunc) -> RatFunc {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
