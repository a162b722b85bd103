//! Cheap factor splitting: monomial and content extraction, square-free
//! decomposition (Yun) and rational linear factors. Not a full
//! factorization into irreducibles.

use num_traits::One;

use super::{content_in, gcd, Monomial, Poly, Q};

/// Splits `p = c · Π f_i^{m_i}` with monic, pairwise coprime, square-free
/// `f_i`. Factors are sorted by (degree, polynomial) for determinism.
pub fn factor_lite(p: &Poly) -> (Q, Vec<(Poly, u32)>) {
    assert!(!p.is_zero(), "cannot factor the zero polynomial");
    let n = p.nvars();
    let c = p.leading_coeff();
    let mut acc: Vec<(Poly, u32)> = vec![];
    split(&p.monic(), 1, &mut acc);
    // merge equal factors
    let mut merged: Vec<(Poly, u32)> = vec![];
    for (f, m) in acc {
        if f.is_constant() {
            continue;
        }
        match merged.iter_mut().find(|(g, _)| *g == f) {
            Some(e) => e.1 += m,
            None => merged.push((f, m)),
        }
    }
    merged.sort_by(|a, b| a.0.total_degree().cmp(&b.0.total_degree()).then_with(|| cmp_poly(&a.0, &b.0)));
    debug_assert_eq!(merged.iter().fold(Poly::constant(n, c.clone()), |acc, (f, m)| &acc * &f.pow(*m)), *p);
    (c, merged)
}

fn cmp_poly(a: &Poly, b: &Poly) -> std::cmp::Ordering {
    a.terms().rev().map(|(m, c)| (m.clone(), c.clone())).cmp(b.terms().rev().map(|(m, c)| (m.clone(), c.clone())))
}

fn split(p: &Poly, mult: u32, out: &mut Vec<(Poly, u32)>) {
    if p.is_constant() {
        return;
    }
    let n = p.nvars();
    // monomial factor
    let mut mins = vec![u32::MAX; n];
    for (m, _) in p.terms() {
        for (v, &e) in m.0.iter().enumerate() {
            mins[v] = mins[v].min(e);
        }
    }
    if mins.iter().any(|&e| e > 0) {
        let mono = Poly::monomial(Monomial(mins.clone()), Q::one());
        for (v, &e) in mins.iter().enumerate() {
            if e > 0 {
                out.push((Poly::var(n, v), e * mult));
            }
        }
        let rest = p.divide_exact(&mono).expect("monomial divides");
        return split(&rest, mult, out);
    }
    let vars: Vec<usize> = (0..n).filter(|&v| p.involves(v)).collect();
    if vars.len() == 1 {
        return split_univariate(p, vars[0], mult, out);
    }
    for &v in &vars {
        let c = content_in(p, v);
        if !c.is_constant() {
            let rest = p.divide_exact(&c).expect("content divides").monic();
            split(&c.monic(), mult, out);
            return split(&rest, mult, out);
        }
    }
    // primitive in every variable: square-free decomposition
    let v = *vars.last().expect("nonconstant");
    for (f, m) in yun(p, v) {
        split_linear(&f, mult * m, out);
    }
}

fn split_univariate(p: &Poly, v: usize, mult: u32, out: &mut Vec<(Poly, u32)>) {
    let n = p.nvars();
    let u = p.to_univariate(v).expect("univariate");
    let mut rest = p.clone();
    for r in u.rational_roots() {
        let lin = &Poly::var(n, v) - &Poly::constant(n, r);
        let (k, q) = rest.strip_factor(&lin);
        rest = q;
        out.push((lin, k * mult));
    }
    if !rest.is_constant() {
        for (f, m) in yun(&rest.monic(), v) {
            out.push((f, m * mult));
        }
    }
}

/// Yun's square-free decomposition with respect to `x_v`; `p` must be
/// primitive in `x_v`.
fn yun(p: &Poly, v: usize) -> Vec<(Poly, u32)> {
    let dp = p.derivative(v);
    let c = gcd(p, &dp);
    let mut w = p.divide_exact(&c).expect("gcd divides");
    let mut y = dp.divide_exact(&c).expect("gcd divides");
    let mut z = &y - &w.derivative(v);
    let mut out = vec![];
    let mut i = 1;
    while !w.is_constant() {
        let g = gcd(&w, &z);
        if !g.is_constant() {
            out.push((g.monic(), i));
        }
        w = w.divide_exact(&g).expect("gcd divides");
        y = z.divide_exact(&g).expect("gcd divides");
        z = &y - &w.derivative(v);
        i += 1;
    }
    out
}

/// Peels off factors `x_1 - a x_0 - b` with rational `a, b` from a bivariate
/// square-free polynomial.
fn split_linear(p: &Poly, mult: u32, out: &mut Vec<(Poly, u32)>) {
    if p.nvars() != 2 || p.total_degree() <= 1 || !p.involves(1) {
        out.push((p.monic(), mult));
        return;
    }
    let mut rest = p.clone();
    for lin in linear_factors(p) {
        if let Ok(q) = rest.divide_exact(&lin) {
            rest = q;
            out.push((lin, mult));
        }
    }
    if !rest.is_constant() {
        out.push((rest.monic(), mult));
    }
}

fn linear_factors(p: &Poly) -> Vec<Poly> {
    let d = p.total_degree();
    let x = Poly::var(2, 0);
    let y = Poly::var(2, 1);
    // top form evaluated on the line y = a x: coefficient polynomial in a
    let top =
        Poly::from_terms(2, p.terms().filter(|(m, _)| m.total_degree() == d).map(|(m, c)| (c.clone(), vec![0, m.0[1]]))).expect("arity");
    let Some(top_u) = top.to_univariate(1) else { return vec![] };
    let mut out = vec![];
    for a in top_u.rational_roots() {
        // p(x, a x + z) must vanish identically in x; z carried in slot 1
        let shifted = p.compose(&[x.clone(), &x.scale(&a) + &y]).expect("arity");
        let coeffs = shifted.coeffs_in(0);
        let mut g: Option<super::UniPoly> = None;
        for c in coeffs {
            let Some(u) = c.to_univariate(1) else { continue };
            g = Some(match g {
                None => u,
                Some(prev) => prev.gcd(&u),
            });
        }
        let Some(g) = g else { continue };
        if g.is_zero() {
            continue;
        }
        for b in g.rational_roots() {
            let lin = &(&y - &x.scale(&a)) - &Poly::constant(2, b);
            if !lin.is_zero() {
                out.push(lin.monic());
            }
        }
    }
    out.dedup();
    out
}
