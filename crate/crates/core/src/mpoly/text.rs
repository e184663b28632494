//! Text form: terms in descending lex order joined by `" + "`, each
//! `coeff*var^exp*...` with the coefficient written as its decimal field
//! index. A unit coefficient on a non-constant term is omitted, exponent 1 is
//! omitted, and the zero polynomial prints as `0`.

use std::fmt;

use super::{Monomial, Poly, PolyError, Ring};
use crate::gf::Felt;

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let vars = self.ring.vars();
        for (k, &(m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if c != Felt::ONE || m == Monomial::ONE {
                factors.push(c.to_string());
            }
            for (i, name) in vars.iter().enumerate() {
                match m.exponent(i) {
                    0 => {}
                    1 => factors.push(name.clone()),
                    e => factors.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

fn parse_err(token: &str, reason: &str) -> PolyError {
    PolyError::Parse { token: token.to_string(), reason: reason.to_string() }
}

impl Poly {
    /// Parses the text form; accepts explicit unit coefficients and repeated
    /// variable factors.
    pub fn parse(ring: &Ring, text: &str) -> Result<Poly, PolyError> {
        let field = ring.field();
        let text = text.trim();
        if text.is_empty() {
            return Err(parse_err(text, "empty input"));
        }
        let mut terms = Vec::new();
        for raw_term in text.split('+') {
            let term = raw_term.trim();
            if term.is_empty() {
                return Err(parse_err(raw_term, "empty term"));
            }
            let mut coeff = Felt::ONE;
            let mut exps = vec![0u32; ring.arity()];
            for raw_factor in term.split('*') {
                let factor = raw_factor.trim();
                if factor.is_empty() {
                    return Err(parse_err(term, "empty factor"));
                }
                if factor.chars().all(|c| c.is_ascii_digit()) {
                    let v: u64 = factor.parse().map_err(|_| parse_err(factor, "bad coefficient"))?;
                    if v >= field.order() as u64 {
                        return Err(parse_err(factor, "coefficient index out of range"));
                    }
                    coeff = field.mul(coeff, Felt(v as u16));
                    continue;
                }
                let (name, exp) = match factor.split_once('^') {
                    Some((n, e)) => {
                        let e: u32 = e.trim().parse().map_err(|_| parse_err(factor, "bad exponent"))?;
                        (n.trim(), e)
                    }
                    None => (factor, 1),
                };
                let i = ring
                    .var_index(name)
                    .map_err(|_| parse_err(factor, "unknown variable"))?;
                exps[i] += exp;
                if exps[i] > super::MAX_EXPONENT {
                    return Err(parse_err(factor, "exponent too large"));
                }
            }
            terms.push((Monomial::from_exponents(&exps), coeff));
        }
        Ok(Poly::from_terms(ring, terms))
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use proptest::prelude::*;

    use super::*;
    use crate::gf::FieldSpec;
    use crate::mpoly::RingSpec;

    fn ring(q: u64) -> Ring {
        RingSpec::new(Arc::new(FieldSpec::of_order(q).unwrap()), &["a", "b", "c", "d"]).unwrap()
    }

    #[test]
    fn printing() {
        let r = ring(3);
        let f = Poly::parse(&r, "1*a^2*d + 2*b*c").unwrap();
        assert_eq!(f.to_string(), "a^2*d + 2*b*c");
        assert_eq!(Poly::zero(&r).to_string(), "0");
        assert_eq!(Poly::one(&r).to_string(), "1");
        assert_eq!(Poly::parse(&r, "2 + a").unwrap().to_string(), "a + 2");
    }

    #[test]
    fn parse_merges_and_reduces() {
        let r = ring(3);
        let f = Poly::parse(&r, "a*a + 2*a^2 + b").unwrap();
        assert_eq!(f.to_string(), "b");
        assert_eq!(Poly::parse(&r, "2*2*c").unwrap().to_string(), "c");
    }

    #[test]
    fn parse_errors() {
        let r = ring(3);
        for bad in ["", "a +", "3*a", "x", "a^", "a**b", "a^q"] {
            assert!(Poly::parse(&r, bad).is_err(), "{bad:?} should fail");
        }
    }

    fn arb_poly(q: u64) -> impl Strategy<Value = Vec<(Vec<u32>, u16)>> {
        prop::collection::vec((prop::collection::vec(0u32..6, 4), 0u16..(q as u16)), 0..12)
    }

    proptest! {
        #[test]
        fn text_round_trip(q in prop::sample::select(vec![2u64, 3, 4, 5, 9]), raw in arb_poly(9)) {
            let r = ring(q);
            let f = Poly::from_terms(&r, raw.into_iter().map(|(e, c)| (Monomial::from_exponents(&e), Felt(c % q as u16))));
            let text = f.to_string();
            let back = Poly::parse(&r, &text).unwrap();
            prop_assert_eq!(&back, &f);
            prop_assert_eq!(back.to_string(), text);
        }
    }
}
