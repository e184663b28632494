use rustc_hash::FxHashMap;

use super::{Monomial, Poly, PolyError, Ring};
use crate::gf::Felt;

/// The monomials of one degree in a fixed number of variables, in
/// descending lex order; coordinates for dense linear algebra on a graded
/// piece.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    monos: Vec<Monomial>,
    index: FxHashMap<Monomial, u32>,
}

/// Number of monomials of degree `d` in `n` variables, `C(d + n - 1, n - 1)`.
pub fn count_monomials(nvars: usize, degree: u32) -> u64 {
    if nvars == 0 {
        return u64::from(degree == 0);
    }
    let k = (nvars - 1) as u64;
    let n = degree as u64 + k;
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn fill(nvars: usize, var: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
    if var + 1 == nvars {
        exps[var] = remaining;
        out.push(Monomial::from_exponents(exps));
        return;
    }
    for e in (0..=remaining).rev() {
        exps[var] = e;
        fill(nvars, var + 1, remaining - e, exps, out);
    }
    exps[var] = 0;
}

impl MonomialBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        let mut monos = Vec::with_capacity(count_monomials(nvars, degree) as usize);
        if nvars == 0 {
            if degree == 0 {
                monos.push(Monomial::ONE);
            }
        } else {
            fill(nvars, 0, degree, &mut vec![0; nvars], &mut monos);
        }
        let index = monos.iter().enumerate().map(|(i, &m)| (m, i as u32)).collect();
        MonomialBasis { nvars, degree, monos, index }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn index_of(&self, m: Monomial) -> Option<usize> {
        self.index.get(&m).map(|&i| i as usize)
    }

    /// Dense coordinates of a polynomial whose terms all have this degree.
    pub fn to_dense(&self, f: &Poly) -> Result<Vec<Felt>, PolyError> {
        let mut v = vec![Felt::ZERO; self.len()];
        for &(m, c) in f.terms() {
            let i = self.index_of(m).ok_or(PolyError::NotHomogeneous)?;
            v[i] = c;
        }
        Ok(v)
    }

    pub fn to_poly(&self, ring: &Ring, v: &[Felt]) -> Poly {
        let mut terms: Vec<(Monomial, Felt)> =
            v.iter().zip(&self.monos).filter(|(c, _)| !c.is_zero()).map(|(&c, &m)| (m, c)).collect();
        terms.reverse();
        Poly::from_sorted_terms(ring, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(count_monomials(4, 2), 10);
        assert_eq!(count_monomials(4, 12), 455);
        assert_eq!(count_monomials(3, 8), 45);
        assert_eq!(count_monomials(1, 7), 1);
        assert_eq!(count_monomials(4, 0), 1);
        for (n, d) in [(1, 3), (2, 5), (3, 6), (4, 7)] {
            assert_eq!(MonomialBasis::new(n, d).len() as u64, count_monomials(n, d));
        }
    }

    #[test]
    fn descending_lex() {
        let b = MonomialBasis::new(3, 2);
        assert!(b.monomials().windows(2).all(|w| w[0] > w[1]));
        assert_eq!(b.monomials()[0], Monomial::from_exponents(&[2, 0, 0]));
        assert_eq!(b.index_of(Monomial::from_exponents(&[0, 0, 2])), Some(5));
    }
}
