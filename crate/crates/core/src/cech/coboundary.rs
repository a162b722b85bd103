use std::collections::BTreeMap;

use super::{tuples, CechError, Cochain, SheafMode};
use crate::linsolve::{PolyAnsatz, Rref};
use crate::poly::RatFunc;

/// Searches `h` with `dh = f` among `h_σ = a_σ / Q_σ^m`, `deg a_σ ≤ deg`,
/// one global `m ≤ power`. The returned preimage is verified exactly.
pub fn is_coboundary_bounded(f: &Cochain, deg: u32, power: u32) -> Result<Option<Cochain>, CechError> {
    if f.degree == 0 {
        return Err(CechError::Malformed("a 0-cochain has no preimage".into()));
    }
    let cov = &f.covering;
    let n = cov.len();
    if f.is_zero() {
        return Ok(Some(Cochain::zero(cov, f.degree - 1, SheafMode::Regular)));
    }
    let sigmas = tuples(n, f.degree);
    let index: BTreeMap<&Vec<usize>, usize> = sigmas.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let ansatz = PolyAnsatz::new(2, deg, sigmas.len());
    for m in 0..=power {
        let mut sys = Rref::new(ansatz.ncols());
        for (tau, v) in f.values() {
            let q_tau = cov.intersection_q(tau);
            let mut coefs = vec![];
            for j in 0..tau.len() {
                let mut face = tau.clone();
                face.remove(j);
                let ratio = q_tau.divide_exact(&cov.intersection_q(&face))?.pow(m);
                let c = &ratio * v.den();
                coefs.push((index[&face], if j % 2 == 0 { c } else { -&c }));
            }
            ansatz.add_identity(&mut sys, &coefs, &(v.num() * &q_tau.pow(m)));
            if !sys.is_consistent() {
                break;
            }
        }
        let Some(sol) = sys.particular() else { continue };
        let mut values = BTreeMap::new();
        for (i, s) in sigmas.iter().enumerate() {
            let h = RatFunc::new(ansatz.poly(&sol, i), cov.intersection_q(s).pow(m))?;
            values.insert(s.clone(), h);
        }
        let h = Cochain::new(cov.clone(), f.degree - 1, SheafMode::Regular, values)?;
        if h.differential_values().iter().all(|(t, v)| v == f.get(t)) {
            return Ok(Some(h));
        }
        return Err(CechError::Undecidable("linear solution failed exact verification".into()));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Covering;
    use crate::poly::{p_kl, Poly};

    fn x() -> Poly {
        Poly::var(2, 0)
    }
    fn y() -> Poly {
        Poly::var(2, 1)
    }
    fn cov() -> Covering {
        Covering::new("base", vec![&x().pow(2) + &y().pow(2), &(&x() - &Poly::one(2)).pow(2) + &y().pow(2)]).unwrap()
    }

    #[test]
    fn recovers_preimage_of_coboundary() {
        let c = cov();
        let h = Cochain::from_fn(&c, 0, SheafMode::Regular, |t| {
            let q = c.q(t[0]).clone();
            RatFunc::new(&x() + &y().pow(2), q).unwrap()
        })
        .unwrap();
        let f = h.differential().unwrap();
        let pre = is_coboundary_bounded(&f, 2, 1).unwrap().expect("preimage exists");
        assert_eq!(pre.differential().unwrap().values().collect::<Vec<_>>(), f.values().collect::<Vec<_>>());
        pre.replay().unwrap();
    }

    #[test]
    fn zero_cocycle_has_zero_preimage() {
        let f = Cochain::zero(&cov(), 1, SheafMode::Regular);
        let pre = is_coboundary_bounded(&f, 3, 3).unwrap().unwrap();
        assert!(pre.is_zero());
    }

    #[test]
    fn family_cocycle_has_no_small_preimage() {
        let g = RatFunc::new(Poly::one(2), p_kl(1, 1)).unwrap();
        let f = Cochain::from_fn(&cov(), 1, SheafMode::Regular, |t| if t == [0, 1] { g.clone() } else { RatFunc::zero(2) }).unwrap();
        assert_eq!(is_coboundary_bounded(&f, 3, 2).unwrap(), None);
    }
}
