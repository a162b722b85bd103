use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::Q;

/// Dense univariate polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniPoly {
    coeffs: Vec<Q>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn lc(&self) -> Q {
        self.coeffs.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        UniPoly::new(self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * Q::from_integer(BigInt::from(k))).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lc().recip();
        UniPoly::new(self.coeffs.iter().map(|c| c * &inv).collect())
    }

    pub fn div_rem(&self, d: &UniPoly) -> (UniPoly, UniPoly) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut rem = self.coeffs.clone();
        let dd = d.degree();
        if rem.len() < d.coeffs.len() {
            return (UniPoly::zero(), self.clone());
        }
        let mut quot = vec![Q::zero(); rem.len() - dd];
        let inv = d.lc().recip();
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] * &inv;
            if !c.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (UniPoly::new(quot), UniPoly::new(rem))
    }

    pub fn gcd(&self, other: &UniPoly) -> UniPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Product of the distinct irreducible factors.
    pub fn squarefree_part(&self) -> UniPoly {
        if self.degree() == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    fn sturm_sequence(&self) -> Vec<UniPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            seq.push(UniPoly::new(r.coeffs.iter().map(|c| -c).collect()));
        }
        seq
    }

    fn sign_changes(seq: &[UniPoly], x: &Q) -> usize {
        let signs: Vec<i8> = seq
            .iter()
            .map(|p| {
                let v = p.eval(x);
                if v.is_positive() {
                    1
                } else if v.is_negative() {
                    -1
                } else {
                    0
                }
            })
            .filter(|&s| s != 0)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Cauchy bound: every real root lies strictly inside `(-B, B)`.
    fn root_bound(&self) -> Q {
        let lc = self.lc().abs();
        let m = self.coeffs[..self.degree()].iter().map(|c| c.abs() / &lc).max().unwrap_or_else(Q::zero);
        m + Q::one()
    }

    /// Number of distinct real roots.
    pub fn count_real_roots(&self) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        let sf = self.squarefree_part();
        let seq = sf.sturm_sequence();
        let b = sf.root_bound();
        Self::sign_changes(&seq, &-&b) - Self::sign_changes(&seq, &b)
    }

    /// Disjoint intervals `(a, b]`, each holding exactly one real root, of
    /// width at most `width`.
    pub fn isolate_real_roots(&self, width: &Q) -> Vec<(Q, Q)> {
        if self.degree() == 0 {
            return vec![];
        }
        let sf = self.squarefree_part();
        let seq = sf.sturm_sequence();
        let b = sf.root_bound();
        let mut out = vec![];
        let mut stack = vec![(-&b, b)];
        while let Some((lo, hi)) = stack.pop() {
            let n = Self::sign_changes(&seq, &lo) - Self::sign_changes(&seq, &hi);
            if n == 0 {
                continue;
            }
            if n == 1 && &(&hi - &lo) <= width {
                out.push((lo, hi));
                continue;
            }
            let mid = (&lo + &hi) / Q::from_integer(BigInt::from(2));
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
        }
        out.sort();
        out
    }

    /// All distinct rational roots, ascending.
    pub fn rational_roots(&self) -> Vec<Q> {
        if self.degree() == 0 {
            return vec![];
        }
        let sf = self.squarefree_part();
        // clear denominators, then x = y / a_n turns the primitive integer
        // polynomial into a monic one whose rational roots are integers
        let lcm = sf.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = sf.coeffs.iter().map(|c| (c * Q::from_integer(lcm.clone())).to_integer()).collect();
        let n = ints.len() - 1;
        let an = ints[n].clone();
        let monic: Vec<Q> = (0..=n).map(|i| Q::from_integer(&ints[i] * num_traits::pow(an.clone(), n - i) / &an)).collect();
        let g = UniPoly::new(monic);
        let mut roots = vec![];
        for (lo, hi) in g.isolate_real_roots(&Q::one()) {
            let mut k = lo.floor() + Q::one();
            while k <= hi {
                if g.eval(&k).is_zero() {
                    roots.push(&k / Q::from_integer(an.clone()));
                }
                k += Q::one();
            }
        }
        roots.sort();
        roots.dedup();
        roots
    }

    /// True when some real root is irrational.
    pub fn has_irrational_real_root(&self) -> bool {
        self.count_real_roots() > self.rational_roots().len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{q, qf};

    fn up(c: &[i64]) -> UniPoly {
        UniPoly::new(c.iter().map(|&k| q(k)).collect())
    }

    #[test]
    fn rational_roots_of_product() {
        // (2x - 1)(x + 3)(x^2 + 1) = 2x^4 + 5x^3 - x^2 + 5x - 3
        let p = up(&[-3, 5, -1, 5, 2]);
        assert_eq!(p.rational_roots(), vec![q(-3), qf(1, 2)]);
        assert_eq!(p.count_real_roots(), 2);
        assert!(!p.has_irrational_real_root());
    }

    #[test]
    fn irrational_roots_detected() {
        let p = up(&[-2, 0, 1]);
        assert!(p.rational_roots().is_empty());
        assert!(p.has_irrational_real_root());
    }

    #[test]
    fn repeated_roots_count_once() {
        // x^2 (x - 1)^3
        let p = up(&[0, 0, -1, 3, -3, 1]);
        assert_eq!(p.rational_roots(), vec![q(0), q(1)]);
        assert_eq!(p.count_real_roots(), 2);
    }

    #[test]
    fn root_on_interval_boundary() {
        let p = up(&[-4, 1]);
        assert_eq!(p.rational_roots(), vec![q(4)]);
    }
}
