//! Common rational zeros of bivariate systems by resultant elimination.

use std::collections::BTreeSet;

use num_traits::Zero;

use super::{find_sos, ZeroError};
use crate::poly::{gcd, Poly, UniPoly, Q};

/// Resultant of `a` and `b` with respect to `x_v`, by fraction-free
/// elimination on the Sylvester matrix.
pub fn resultant(a: &Poly, b: &Poly, v: usize) -> Poly {
    let n = a.nvars();
    let (m, k) = (a.degree_in(v) as usize, b.degree_in(v) as usize);
    if a.is_zero() || b.is_zero() {
        return Poly::zero(n);
    }
    if m == 0 {
        return a.pow(k as u32);
    }
    if k == 0 {
        return b.pow(m as u32);
    }
    let ca = a.coeffs_in(v);
    let cb = b.coeffs_in(v);
    let size = m + k;
    let mut mat = vec![vec![Poly::zero(n); size]; size];
    for i in 0..k {
        for (j, c) in ca.iter().rev().enumerate() {
            mat[i][i + j] = c.clone();
        }
    }
    for i in 0..m {
        for (j, c) in cb.iter().rev().enumerate() {
            mat[k + i][i + j] = c.clone();
        }
    }
    bareiss_det(mat)
}

fn bareiss_det(mut mat: Vec<Vec<Poly>>) -> Poly {
    let size = mat.len();
    let n = mat[0][0].nvars();
    let mut prev = Poly::one(n);
    let mut negate = false;
    for k in 0..size {
        if mat[k][k].is_zero() {
            match (k + 1..size).find(|&i| !mat[i][k].is_zero()) {
                Some(i) => {
                    mat.swap(k, i);
                    negate = !negate;
                }
                None => return Poly::zero(n),
            }
        }
        for i in k + 1..size {
            for j in k + 1..size {
                let t = &(&mat[i][j] * &mat[k][k]) - &(&mat[i][k] * &mat[k][j]);
                mat[i][j] = t.divide_exact(&prev).expect("Bareiss step is exact");
            }
            mat[i][k] = Poly::zero(n);
        }
        prev = mat[k][k].clone();
    }
    let det = mat[size - 1][size - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// All common real zeros of `fs`, which must be finitely many and rational.
pub fn common_zeros(fs: &[Poly]) -> Result<Vec<Vec<Q>>, ZeroError> {
    let fs: Vec<Poly> = fs.iter().filter(|f| !f.is_zero()).cloned().collect();
    let Some(first) = fs.first() else { return Err(ZeroError::InfiniteZeroSet) };
    let n = first.nvars();
    if fs.iter().any(|f| f.is_constant()) {
        return Ok(vec![]);
    }
    let pts = match n {
        1 => univariate_common(&fs)?.into_iter().map(|x| vec![x]).collect(),
        2 => bivariate(fs, 0)?,
        _ => return Err(ZeroError::Unsupported),
    };
    let set: BTreeSet<Vec<Q>> = pts.into_iter().collect();
    Ok(set.into_iter().collect())
}

fn univariate_common(fs: &[Poly]) -> Result<Vec<Q>, ZeroError> {
    let mut g = fs[0].clone();
    for f in &fs[1..] {
        g = gcd(&g, f);
    }
    let u = g.to_univariate(0).expect("one variable");
    if u.has_irrational_real_root() {
        return Err(ZeroError::NonRationalZeros { eliminant: g.to_string() });
    }
    Ok(u.rational_roots())
}

const MAX_RECURSION: usize = 16;

fn bivariate(fs: Vec<Poly>, depth: usize) -> Result<Vec<Vec<Q>>, ZeroError> {
    if depth > MAX_RECURSION {
        return Err(ZeroError::Unknown);
    }
    if fs.iter().any(|f| f.is_constant()) {
        return Ok(vec![]);
    }
    let g = fs.iter().skip(1).fold(fs[0].clone(), |acc, f| gcd(&acc, f));
    if !g.is_constant() {
        // V(fs) = V(g) ∪ V(fs / g)
        let mut pts = finite_zeros_of(&g, depth)?;
        let rest: Vec<Poly> = fs.iter().map(|f| f.divide_exact(&g).expect("gcd divides")).collect();
        pts.extend(bivariate(rest, depth + 1)?);
        return Ok(pts);
    }
    if fs.len() == 1 {
        return finite_zeros_of(&fs[0], depth);
    }
    // make the first two coprime by splitting the first along their common factor
    let f1 = &fs[0];
    let h = gcd(f1, &fs[1]);
    if !h.is_constant() {
        let other = f1.divide_exact(&h).expect("gcd divides");
        let mut a = vec![h];
        let mut b = vec![other];
        a.extend(fs[1..].iter().cloned());
        b.extend(fs[1..].iter().cloned());
        let mut pts = bivariate(a, depth + 1)?;
        pts.extend(bivariate(b, depth + 1)?);
        return Ok(pts);
    }
    let candidates = coprime_pair_zeros(f1, &fs[1])?;
    Ok(candidates.into_iter().filter(|p| fs.iter().all(|f| f.eval(p).is_zero())).collect())
}

/// Real zeros of a single polynomial, required to be finite.
fn finite_zeros_of(g: &Poly, depth: usize) -> Result<Vec<Vec<Q>>, ZeroError> {
    if let Some((terms, c)) = find_sos(g) {
        if !c.is_zero() {
            return Ok(vec![]);
        }
        let parts: Vec<Poly> = terms.into_iter().map(|t| t.f).collect();
        if parts.len() > 1 || parts.first().is_some_and(|f| f.total_degree() < g.total_degree()) {
            return bivariate(parts, depth + 1);
        }
    }
    if super::rational_zero_on_lines(g).is_some_and(|p| has_smooth_point(g, &p)) {
        return Err(ZeroError::InfiniteZeroSet);
    }
    Err(ZeroError::Unknown)
}

/// A real zero where the gradient is nonzero lies on a real curve.
fn has_smooth_point(g: &Poly, p: &[Q]) -> bool {
    g.eval(p).is_zero() && (0..g.nvars()).any(|v| !g.derivative(v).eval(p).is_zero())
}

fn coprime_pair_zeros(f1: &Poly, f2: &Poly) -> Result<Vec<Vec<Q>>, ZeroError> {
    // eliminate y to get x candidates, or x to get y candidates
    for (keep, elim) in [(0usize, 1usize), (1, 0)] {
        let r = resultant(f1, f2, elim);
        let u = r.to_univariate(keep).expect("resultant is univariate");
        if u.is_zero() {
            continue;
        }
        if u.count_real_roots() == 0 {
            return Ok(vec![]);
        }
        if u.has_irrational_real_root() {
            continue;
        }
        let mut pts = vec![];
        for a in u.rational_roots() {
            let s1 = f1.specialize(keep, &a).to_univariate(elim).expect("univariate after specialization");
            let s2 = f2.specialize(keep, &a).to_univariate(elim).expect("univariate after specialization");
            let h = gcd_uni(&s1, &s2);
            if h.is_zero() {
                return Err(ZeroError::InfiniteZeroSet);
            }
            if h.has_irrational_real_root() {
                return Err(ZeroError::NonRationalZeros { eliminant: Poly::from_univariate(&h, 2, elim).to_string() });
            }
            for b in h.rational_roots() {
                let mut p = vec![Q::zero(), Q::zero()];
                p[keep] = a.clone();
                p[elim] = b;
                pts.push(p);
            }
        }
        return Ok(pts);
    }
    let r = resultant(f1, f2, 1);
    Err(ZeroError::NonRationalZeros { eliminant: r.to_string() })
}

fn gcd_uni(a: &UniPoly, b: &UniPoly) -> UniPoly {
    if a.is_zero() {
        return b.monic();
    }
    a.gcd(b)
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
    fn c(k: i64) -> Poly {
        Poly::constant(2, q(k))
    }

    #[test]
    fn resultant_of_circle_and_line() {
        // res_y(x^2 + y^2 - 1, y - x) = 2x^2 - 1
        let r = resultant(&(&(&x().pow(2) + &y().pow(2)) - &c(1)), &(&y() - &x()), 1);
        assert_eq!(r, &x().pow(2).scale(&q(2)) - &c(1));
    }

    #[test]
    fn intersection_points() {
        // circle x^2 + y^2 = 2 meets y = x at (1,1), (-1,-1)
        let pts = common_zeros(&[&(&x().pow(2) + &y().pow(2)) - &c(2), &y() - &x()]).unwrap();
        assert_eq!(pts, vec![vec![q(-1), q(-1)], vec![q(1), q(1)]]);
    }

    #[test]
    fn irrational_intersection_reported() {
        let r = common_zeros(&[&(&x().pow(2) + &y().pow(2)) - &c(1), &y() - &x()]);
        assert!(matches!(r, Err(ZeroError::NonRationalZeros { .. })));
    }

    #[test]
    fn complex_only_intersection_is_empty() {
        let pts = common_zeros(&[&(&x().pow(2) + &y().pow(2)) - &c(3), &y().pow(2) + &c(1)]).unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn shared_factor_handled() {
        // both contain x^2 + y^2, which vanishes only at the origin
        let base = &x().pow(2) + &y().pow(2);
        let pts = common_zeros(&[&base * &(&x() - &c(1)), &base * &(&y() - &c(2))]).unwrap();
        assert_eq!(pts, vec![vec![q(0), q(0)], vec![q(1), q(2)]]);
    }

    #[test]
    fn family_and_lines() {
        let pts = common_zeros(&[p_kl(2, 2), x()]).unwrap();
        assert_eq!(pts, vec![vec![q(0), q(0)]]);
        assert_eq!(common_zeros(&[x(), y()]).unwrap(), vec![vec![q(0), q(0)]]);
        assert_eq!(common_zeros(&[x(), &x() * &y()]), Err(ZeroError::InfiniteZeroSet));
    }
}
