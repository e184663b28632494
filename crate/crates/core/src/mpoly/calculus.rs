use super::{Monomial, Poly, PolyError, MAX_VARS};
use crate::gf::Felt;

impl Poly {
    pub fn partial_derivative(&self, var: &str) -> Result<Poly, PolyError> {
        let i = self.ring.var_index(var)?;
        Ok(self.partial_derivative_at(i))
    }

    /// Formal derivative; the exponent is reduced mod `p` before multiplying.
    pub fn partial_derivative_at(&self, i: usize) -> Poly {
        let f = self.field();
        let unit = Monomial::var(i);
        let terms = self
            .terms
            .iter()
            .filter_map(|&(m, c)| {
                let e = m.exponent(i);
                if e == 0 {
                    return None;
                }
                let c = f.mul(c, f.from_int(e as i64));
                (!c.is_zero()).then(|| (m.div(unit).expect("exponent is positive"), c))
            })
            .collect();
        // Dividing every monomial by the same variable keeps the order.
        Poly::from_sorted_terms(&self.ring, terms)
    }

    /// Square root in characteristic two: halves exponents and applies the
    /// inverse Frobenius to coefficients.
    pub fn sqrt_char2(&self) -> Result<Poly, PolyError> {
        let f = self.field();
        if f.characteristic() != 2 {
            return Err(PolyError::NotCharacteristicTwo);
        }
        let mut terms = Vec::with_capacity(self.len());
        for &(m, c) in &self.terms {
            let mut half = [0u32; MAX_VARS];
            for (k, h) in half.iter_mut().enumerate() {
                let e = m.exponent(k);
                if e % 2 == 1 {
                    return Err(PolyError::NotSquare);
                }
                *h = e / 2;
            }
            terms.push((Monomial::from_exponents(&half), f.frobenius_inverse(c)));
        }
        Ok(Poly::from_sorted_terms(&self.ring, terms))
    }
}

/// Determinant of a square matrix of polynomials by cofactor expansion along
/// the first row, skipping zero entries.
pub fn determinant(rows: &[Vec<Poly>]) -> Poly {
    let n = rows.len();
    let ring = rows[0][0].ring().clone();
    if n == 1 {
        return rows[0][0].clone();
    }
    let f = ring.field();
    let mut total = Poly::zero(&ring);
    for j in 0..n {
        if rows[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<Poly>> = rows[1..]
            .iter()
            .map(|r| r.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, p)| p.clone()).collect())
            .collect();
        let mut term = &rows[0][j] * &determinant(&minor);
        if j % 2 == 1 {
            term = term.scale(f.neg(Felt::ONE));
        }
        total = &total + &term;
    }
    total
}

impl Poly {
    /// `det(d f_i / d x_j)` for exactly `arity` polynomials.
    pub fn jacobian_det(fs: &[Poly]) -> Result<Poly, PolyError> {
        let ring = fs.first().ok_or(PolyError::ArityMismatch { expected: 1, got: 0 })?.ring().clone();
        let n = ring.arity();
        if fs.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: fs.len() });
        }
        for f in fs {
            f.check_ring(&fs[0])?;
        }
        let rows: Vec<Vec<Poly>> = fs.iter().map(|f| (0..n).map(|j| f.partial_derivative_at(j)).collect()).collect();
        Ok(determinant(&rows))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::gf::FieldSpec;
    use crate::mpoly::{Ring, RingSpec};

    fn ring(q: u64) -> Ring {
        RingSpec::new(Arc::new(FieldSpec::of_order(q).unwrap()), &["a", "b", "c", "d"]).unwrap()
    }

    fn p(r: &Ring, s: &str) -> Poly {
        Poly::parse(r, s).unwrap()
    }

    #[test]
    fn derivatives() {
        let r = ring(3);
        assert_eq!(p(&r, "a*d + 2*b*c").partial_derivative("a").unwrap(), p(&r, "d"));
        assert!(p(&r, "a^3").partial_derivative("a").unwrap().is_zero());
        let f3 = p(&r, "a^3*d + a*d^3 + 2*b^3*c + 2*b*c^3");
        assert_eq!(f3.partial_derivative("a").unwrap(), p(&r, "d^3"));
        assert!(matches!(f3.partial_derivative("x"), Err(PolyError::UnknownVariable(_))));
        let r9 = ring(9);
        assert!(p(&r9, "a^9 + b^3").partial_derivative("a").unwrap().is_zero());
    }

    #[test]
    fn jacobians() {
        let r = ring(3);
        let vars: Vec<Poly> = ["a", "b", "c", "d"].iter().map(|v| p(&r, v)).collect();
        assert_eq!(Poly::jacobian_det(&vars).unwrap(), Poly::one(&r));
        let f1 = p(&r, "a + d");
        let f2 = p(&r, "a*d + 2*b*c");
        assert!(Poly::jacobian_det(&[f1.clone(), f1.clone(), f2.clone(), f2.clone()]).unwrap().is_zero());
        assert!(matches!(Poly::jacobian_det(&[f1, f2]), Err(PolyError::ArityMismatch { .. })));
    }

    #[test]
    fn square_roots_char2() {
        let r = ring(2);
        assert_eq!(p(&r, "a^2 + b^2").sqrt_char2().unwrap(), p(&r, "a + b"));
        assert_eq!(p(&r, "a*b").sqrt_char2(), Err(PolyError::NotSquare));
        assert_eq!(p(&ring(3), "a^2").sqrt_char2(), Err(PolyError::NotCharacteristicTwo));
    }

    fn arb_terms(q: u16) -> impl Strategy<Value = Vec<(Vec<u32>, u16)>> {
        prop::collection::vec((prop::collection::vec(0u32..5, 4), 1..q), 0..8)
    }

    fn mk(r: &Ring, q: u16, t: &[(Vec<u32>, u16)]) -> Poly {
        Poly::from_terms(r, t.iter().map(|(e, c)| (Monomial::from_exponents(e), Felt(c % q))))
    }

    proptest! {
        #[test]
        fn leibniz_rule(q in prop::sample::select(vec![2u16, 3, 4, 5, 7]), f in arb_terms(7), g in arb_terms(7), v in 0usize..4) {
            let r = ring(q as u64);
            let (f, g) = (mk(&r, q, &f), mk(&r, q, &g));
            let lhs = (&f * &g).partial_derivative_at(v);
            let rhs = &(&f * &g.partial_derivative_at(v)) + &(&g * &f.partial_derivative_at(v));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn jacobian_alternates(q in prop::sample::select(vec![3u16, 5, 7]), a in arb_terms(7), b in arb_terms(7), c in arb_terms(7), d in arb_terms(7)) {
            let r = ring(q as u64);
            let fs = [mk(&r, q, &a), mk(&r, q, &b), mk(&r, q, &c), mk(&r, q, &d)];
            let j = Poly::jacobian_det(&fs).unwrap();
            let swapped = [fs[1].clone(), fs[0].clone(), fs[2].clone(), fs[3].clone()];
            prop_assert_eq!(Poly::jacobian_det(&swapped).unwrap(), -&j);
            let swapped = [fs[0].clone(), fs[3].clone(), fs[2].clone(), fs[1].clone()];
            prop_assert_eq!(Poly::jacobian_det(&swapped).unwrap(), -&j);
        }

        #[test]
        fn sqrt_of_square(e in 1u32..4, f in arb_terms(16)) {
            let q = 2u16.pow(e);
            let r = ring(q as u64);
            let f = mk(&r, q, &f);
            let sq = &f * &f;
            prop_assert_eq!(sq.sqrt_char2().unwrap(), f);
        }
    }
}
