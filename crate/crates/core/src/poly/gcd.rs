//! Multivariate gcd over ℚ via recursive content and subresultant remainder
//! sequences.

use super::Poly;

/// Monic greatest common divisor. `gcd(0, 0) = 0`.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    let n = a.nvars();
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    if a == b {
        return a.monic();
    }
    let v = match (a.main_var(), b.main_var()) {
        (Some(x), Some(y)) => x.max(y),
        _ => return Poly::one(n),
    };
    gcd_in(a, b, v).monic()
}

fn gcd_in(a: &Poly, b: &Poly, v: usize) -> Poly {
    if !a.involves(v) {
        return gcd(a, &content_in(b, v));
    }
    if !b.involves(v) {
        return gcd(&content_in(a, v), b);
    }
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    let pa = a.divide_exact(&ca).expect("content divides");
    let pb = b.divide_exact(&cb).expect("content divides");
    let g = subresultant_gcd(&pa, &pb, v);
    &c * &g
}

/// Gcd of the coefficients of `p` viewed as a polynomial in `x_v`.
pub fn content_in(p: &Poly, v: usize) -> Poly {
    let mut acc = Poly::zero(p.nvars());
    for c in p.coeffs_in(v).into_iter().rev() {
        if c.is_zero() {
            continue;
        }
        acc = gcd(&acc, &c);
        if acc.is_constant() {
            return Poly::one(p.nvars());
        }
    }
    acc
}

pub fn primitive_part_in(p: &Poly, v: usize) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_in(p, v);
    p.divide_exact(&c).expect("content divides")
}

fn prem(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = b.degree_in(v);
    let lb = b.lc_in(v);
    let mut r = a.clone();
    let mut e = a.degree_in(v) as i64 - n as i64 + 1;
    while !r.is_zero() && r.involves(v) && r.degree_in(v) >= n {
        let t = r.lc_in(v).shift(v, r.degree_in(v) - n);
        r = &(&lb * &r) - &(&t * b);
        e -= 1;
    }
    if e > 0 {
        r = &lb.pow(e as u32) * &r;
    }
    r
}

/// Gcd of two primitive polynomials with positive degree in `x_v`.
fn subresultant_gcd(a: &Poly, b: &Poly, v: usize) -> Poly {
    let (mut a, mut b) = if a.degree_in(v) >= b.degree_in(v) { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
    let n = a.nvars();
    let mut g = Poly::one(n);
    let mut h = Poly::one(n);
    loop {
        let d = a.degree_in(v) - b.degree_in(v);
        let r = prem(&a, &b, v);
        if r.is_zero() {
            return primitive_part_in(&b, v);
        }
        if !r.involves(v) {
            return Poly::one(n);
        }
        let divisor = &g * &h.pow(d);
        a = b;
        b = r.divide_exact(&divisor).expect("subresultant division is exact");
        g = a.lc_in(v);
        if d > 0 {
            let num = g.pow(d);
            let den = h.pow(d - 1);
            h = num.divide_exact(&den).expect("subresultant h update is exact");
        }
        if b.is_one() {
            return Poly::one(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{p_kl, q};

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }

    #[test]
    fn gcd_of_products() {
        let f = &(&x() + &y()) * &(&x() - &Poly::one(2));
        let g = &(&x() + &y()) * &(&y().pow(2) + &Poly::one(2));
        assert_eq!(gcd(&f, &g), &x() + &y());
    }

    #[test]
    fn coprime_family_members() {
        assert!(gcd(&p_kl(1, 1), &p_kl(2, 1)).is_one());
        assert!(gcd(&p_kl(1, 1), &x()).is_one());
    }

    #[test]
    fn gcd_with_rational_scaling() {
        let f = (&x() * &y()).scale(&q(6));
        let g = x().pow(2).scale(&q(4));
        assert_eq!(gcd(&f, &g), x());
    }

    #[test]
    fn content_in_y() {
        let f = &(&x().pow(2) * &y()) + &(&x() * &y().pow(2));
        assert_eq!(content_in(&f, 1), x());
    }
}
