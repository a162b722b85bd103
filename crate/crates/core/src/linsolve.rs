//! Incremental reduced row echelon form over ℚ for sparse systems.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::poly::{Monomial, Poly, Q};

#[derive(Debug, Clone, Default)]
struct Row {
    entries: BTreeMap<usize, Q>,
    rhs: Q,
}

impl Row {
    fn axpy(&mut self, c: &Q, other: &Row) {
        for (j, v) in &other.entries {
            let e = self.entries.entry(*j).or_insert_with(Q::zero);
            *e -= c * v;
            if e.is_zero() {
                self.entries.remove(j);
            }
        }
        self.rhs -= c * &other.rhs;
    }
}

/// A linear system `A x = b` kept in fully reduced echelon form as rows are
/// added. Pivot rows have a unit pivot and no entries in other pivot columns.
#[derive(Debug, Clone)]
pub struct Rref {
    ncols: usize,
    pivots: BTreeMap<usize, Row>,
    inconsistent: bool,
}

impl Rref {
    pub fn new(ncols: usize) -> Self {
        Rref { ncols, pivots: BTreeMap::new(), inconsistent: false }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_consistent(&self) -> bool {
        !self.inconsistent
    }

    /// Adds the equation `Σ row[j] x_j = rhs`.
    pub fn add_row<I>(&mut self, row: I, rhs: Q)
    where
        I: IntoIterator<Item = (usize, Q)>,
    {
        let mut r = Row { entries: BTreeMap::new(), rhs };
        for (j, v) in row {
            assert!(j < self.ncols, "column {j} out of range");
            if v.is_zero() {
                continue;
            }
            let e = r.entries.entry(j).or_insert_with(Q::zero);
            *e += v;
            if e.is_zero() {
                r.entries.remove(&j);
            }
        }
        let hits: Vec<usize> = r.entries.keys().filter(|j| self.pivots.contains_key(j)).copied().collect();
        for j in hits {
            let c = r.entries.get(&j).cloned().unwrap_or_else(Q::zero);
            if !c.is_zero() {
                r.axpy(&c, &self.pivots[&j]);
            }
        }
        let Some((&p, pv)) = r.entries.iter().next() else {
            if !r.rhs.is_zero() {
                self.inconsistent = true;
            }
            return;
        };
        let inv = pv.recip();
        if !inv.is_one() {
            for v in r.entries.values_mut() {
                *v *= &inv;
            }
            r.rhs *= &inv;
        }
        for row in self.pivots.values_mut() {
            if let Some(c) = row.entries.get(&p).cloned() {
                row.axpy(&c, &r);
            }
        }
        self.pivots.insert(p, r);
    }

    /// The pivot rows as `(pivot column, sparse row)`, in pivot order. For a
    /// homogeneous system built from vectors these span the same space in
    /// reduced echelon form.
    pub fn pivot_rows(&self) -> Vec<(usize, Vec<(usize, Q)>)> {
        self.pivots.iter().map(|(p, r)| (*p, r.entries.iter().map(|(j, v)| (*j, v.clone())).collect())).collect()
    }

    /// The solution with all free variables set to zero.
    pub fn particular(&self) -> Option<Vec<Q>> {
        if self.inconsistent {
            return None;
        }
        let mut x = vec![Q::zero(); self.ncols];
        for (p, row) in &self.pivots {
            x[*p] = row.rhs.clone();
        }
        Some(x)
    }

    /// Basis of the homogeneous solution space, one vector per free column
    /// in ascending column order.
    pub fn nullspace(&self) -> Vec<Vec<Q>> {
        let mut out = vec![];
        for f in (0..self.ncols).filter(|j| !self.pivots.contains_key(j)) {
            let mut v = vec![Q::zero(); self.ncols];
            v[f] = Q::one();
            for (p, row) in &self.pivots {
                if let Some(c) = row.entries.get(&f) {
                    v[*p] = -c;
                }
            }
            out.push(v);
        }
        out
    }
}

/// Unknown polynomials `a_0, …, a_{b-1}` of total degree at most `deg`,
/// flattened into columns of a linear system.
#[derive(Debug, Clone)]
pub struct PolyAnsatz {
    nvars: usize,
    monos: Vec<Monomial>,
    blocks: usize,
}

impl PolyAnsatz {
    pub fn new(nvars: usize, deg: u32, blocks: usize) -> Self {
        PolyAnsatz { nvars, monos: monomials_up_to(nvars, deg), blocks }
    }

    pub fn ncols(&self) -> usize {
        self.monos.len() * self.blocks
    }

    /// Adds the coefficientwise equations of `Σ c_b · a_b = rhs`.
    pub fn add_identity(&self, sys: &mut Rref, coefs: &[(usize, Poly)], rhs: &Poly) {
        let k = self.monos.len();
        let mut rows: BTreeMap<Monomial, Vec<(usize, Q)>> = BTreeMap::new();
        for (b, c) in coefs {
            for (j, m) in self.monos.iter().enumerate() {
                for (cm, cv) in c.terms() {
                    rows.entry(cm.mul(m)).or_default().push((b * k + j, cv.clone()));
                }
            }
        }
        for (m, _) in rhs.terms() {
            rows.entry(m.clone()).or_default();
        }
        for (m, row) in rows {
            // merge repeated columns
            let mut merged: BTreeMap<usize, Q> = BTreeMap::new();
            for (j, v) in row {
                *merged.entry(j).or_insert_with(Q::zero) += v;
            }
            sys.add_row(merged.into_iter().filter(|(_, v)| !v.is_zero()), rhs.coeff(&m));
        }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    /// The polynomial in block `b` described by a solution vector.
    pub fn poly(&self, sol: &[Q], b: usize) -> Poly {
        let k = self.monos.len();
        let terms = self.monos.iter().enumerate().map(|(j, m)| (sol[b * k + j].clone(), m.0.clone()));
        Poly::from_terms(self.nvars, terms).expect("arity matches")
    }
}

/// All exponent vectors of total degree at most `deg`, ascending.
pub fn monomials_up_to(nvars: usize, deg: u32) -> Vec<Monomial> {
    let mut out = vec![Monomial(vec![0; nvars])];
    for v in 0..nvars {
        let mut next = vec![];
        for m in &out {
            let used: u32 = m.0.iter().sum();
            for e in 0..=deg - used {
                let mut mm = m.0.clone();
                mm[v] = e;
                next.push(Monomial(mm));
            }
        }
        out = next;
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::q;

    #[test]
    fn solves_small_system() {
        // x + y = 3, x - y = 1
        let mut s = Rref::new(2);
        s.add_row([(0, q(1)), (1, q(1))], q(3));
        s.add_row([(0, q(1)), (1, q(-1))], q(1));
        assert_eq!(s.particular().unwrap(), vec![q(2), q(1)]);
        assert!(s.nullspace().is_empty());
    }

    #[test]
    fn detects_inconsistency() {
        let mut s = Rref::new(2);
        s.add_row([(0, q(1)), (1, q(1))], q(3));
        s.add_row([(0, q(2)), (1, q(2))], q(5));
        assert!(s.particular().is_none());
    }

    #[test]
    fn nullspace_vectors_solve_homogeneous_system() {
        let rows = [vec![(0, q(1)), (1, q(2)), (3, q(-1))], vec![(1, q(1)), (2, q(1))]];
        let mut s = Rref::new(4);
        for r in &rows {
            s.add_row(r.clone(), q(0));
        }
        let ns = s.nullspace();
        assert_eq!(ns.len(), 2);
        for v in ns {
            for r in &rows {
                let dot: Q = r.iter().map(|(j, c)| c * &v[*j]).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn ansatz_recovers_quotient() {
        // (x + y) a = x^2 - y^2 has the unique solution a = x - y
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let an = PolyAnsatz::new(2, 2, 1);
        let mut s = Rref::new(an.ncols());
        an.add_identity(&mut s, &[(0, &x + &y)], &(&x.pow(2) - &y.pow(2)));
        let sol = s.particular().unwrap();
        assert_eq!(an.poly(&sol, 0), &x - &y);
        assert!(s.nullspace().is_empty());
        assert_eq!(monomials_up_to(2, 2).len(), 6);
    }
}
