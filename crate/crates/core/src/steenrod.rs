//! The total Steenrod operation `P`, the algebra map `x -> x + x^q T` on
//! linear forms, and its components `P^i`.

use rustc_hash::FxHashMap;

use crate::gf::Felt;
use crate::mpoly::{Monomial, Poly, Ring, MAX_VARS};

/// `P(f)` as a polynomial in `T`: `components[i]` is `P^i(f)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SteenrodExpansion {
    components: Vec<Poly>,
}

impl SteenrodExpansion {
    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// `P^i(f)`, zero past the last nonzero component.
    pub fn component(&self, i: usize) -> Poly {
        match self.components.get(i) {
            Some(p) => p.clone(),
            None => Poly::zero(self.components[0].ring()),
        }
    }

    /// Product as power series in `T`.
    pub fn mul(&self, other: &SteenrodExpansion) -> SteenrodExpansion {
        let ring = self.components[0].ring().clone();
        let n = self.components.len() + other.components.len() - 1;
        let mut out = vec![Poly::zero(&ring); n];
        for (i, a) in self.components.iter().enumerate() {
            for (j, b) in other.components.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        SteenrodExpansion::trimmed(&ring, out)
    }

    fn trimmed(ring: &Ring, mut components: Vec<Poly>) -> SteenrodExpansion {
        while components.len() > 1 && components.last().is_some_and(Poly::is_zero) {
            components.pop();
        }
        if components.is_empty() {
            components.push(Poly::zero(ring));
        }
        SteenrodExpansion { components }
    }
}

/// `C(n, k) mod p` by Lucas' theorem.
pub fn binomial_mod_p(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut out = 1u64;
    while k > 0 || n > 0 {
        let (nd, kd) = (n % p, k % p);
        if kd > nd {
            return 0;
        }
        let mut c = 1u64;
        for i in 0..kd {
            c = c * (nd - i) % p;
        }
        let mut den = 1u64;
        for i in 1..=kd {
            den = den * i % p;
        }
        // p is prime, so den^(p-2) inverts den.
        let mut inv = 1u64;
        let (mut b, mut e) = (den, p - 2);
        while e > 0 {
            if e & 1 == 1 {
                inv = inv * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        out = out * c % p * inv % p;
        n /= p;
        k /= p;
    }
    out
}

pub fn steenrod_total(f: &Poly) -> SteenrodExpansion {
    let ring = f.ring().clone();
    let field = ring.field();
    let p = field.characteristic() as u64;
    let q = field.order();
    let n = ring.arity();
    let mut acc: Vec<FxHashMap<Monomial, Felt>> = Vec::new();
    for &(m, c) in f.terms() {
        // Expand one variable at a time: (t-degree, exponents, coefficient).
        let mut partial: Vec<(usize, [u32; MAX_VARS], Felt)> = vec![(0, [0; MAX_VARS], c)];
        for v in 0..n {
            let e = m.exponent(v);
            if e == 0 {
                continue;
            }
            let mut next = Vec::with_capacity(partial.len() * (e as usize + 1));
            for k in 0..=e {
                let b = binomial_mod_p(e as u64, k as u64, p);
                if b == 0 {
                    continue;
                }
                let b = field.from_int(b as i64);
                for &(t, exps, coeff) in &partial {
                    let mut exps = exps;
                    exps[v] = e - k + q * k;
                    next.push((t + k as usize, exps, field.mul(coeff, b)));
                }
            }
            partial = next;
        }
        for (t, exps, coeff) in partial {
            if acc.len() <= t {
                acc.resize_with(t + 1, FxHashMap::default);
            }
            let slot = acc[t].entry(Monomial::from_exponents(&exps[..n])).or_insert(Felt::ZERO);
            *slot = field.add(*slot, coeff);
        }
    }
    let components = acc.into_iter().map(|m| Poly::from_terms(&ring, m)).collect();
    SteenrodExpansion::trimmed(&ring, components)
}

pub fn steenrod_component(f: &Poly, i: usize) -> Poly {
    steenrod_total(f).component(i)
}
