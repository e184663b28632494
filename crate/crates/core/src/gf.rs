//! Finite fields `F_q`, `q = p^e`, with table-driven arithmetic.
//!
//! An element is stored as its index `rep = c_0 + c_1 p + ... + c_{e-1} p^{e-1}`,
//! where `c_0 + c_1 x + ... + c_{e-1} x^{e-1}` is the element in the polynomial
//! basis over `F_p[x] / (modulus)`. For prime fields the index is the residue
//! itself, and index 0 is always the zero element, index 1 the unit.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported field order.
pub const MAX_ORDER: u32 = 1 << 16;

/// Orders up to this size get a full addition table.
const ADD_TABLE_LIMIT: u32 = 1024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("{0} is not prime")]
    NotPrime(u32),
    #[error("exponent must be positive")]
    ZeroExponent,
    #[error("field order {p}^{e} exceeds the cap of {MAX_ORDER}")]
    TooLarge { p: u32, e: u32 },
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("inversion of zero")]
    InverseOfZero,
}

/// A field element, identified by its index in `[0, q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Felt(pub u16);

impl Felt {
    pub const ZERO: Felt = Felt(0);
    pub const ONE: Felt = Felt(1);

    #[inline]
    pub fn rep(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Felt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The coefficient field `F_q`.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    e: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Felt,
    // exp[k] = g^k for k in [0, 2(q-1)), doubled so products need no reduction
    exp: Vec<u16>,
    log: Vec<u32>,
    neg: Vec<u16>,
    add_table: Option<Vec<u16>>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.e)
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.e == other.e && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

/// `g(x) = x^2 - tau x + delta`, irreducible over the field it was found in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IrreducibleQuadratic {
    pub tau: Felt,
    pub delta: Felt,
}

impl IrreducibleQuadratic {
    /// `g(x)` at `x`.
    pub fn eval(&self, field: &FieldSpec, x: Felt) -> Felt {
        let x2 = field.mul(x, x);
        field.add(field.sub(x2, field.mul(self.tau, x)), self.delta)
    }
}

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^e`, or fails when `q` is not a prime power.
pub fn prime_power(q: u64) -> Result<(u32, u32), GfError> {
    if q < 2 || q > u32::MAX as u64 {
        return Err(GfError::NotPrimePower(q));
    }
    let q32 = q as u32;
    let mut p = 2u32;
    while (p as u64) * (p as u64) <= q && !q32.is_multiple_of(p) {
        p += 1;
    }
    if !q32.is_multiple_of(p) {
        p = q32;
    }
    let mut rest = q32;
    let mut e = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        e += 1;
    }
    if rest != 1 {
        return Err(GfError::NotPrimePower(q));
    }
    Ok((p, e))
}

// Dense polynomials over F_p as coefficient vectors, low degree first.
fn poly_rem(num: &[u32], den: &[u32], p: u32) -> Vec<u32> {
    let mut r = num.to_vec();
    let dd = den.len() - 1;
    let lead_inv = inv_mod(den[dd], p);
    for i in (dd..r.len()).rev() {
        let factor = r[i] * lead_inv % p;
        if factor == 0 {
            continue;
        }
        let shift = i - dd;
        for (j, &c) in den.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - factor * c % p) % p;
        }
    }
    r.truncate(dd.max(1));
    r
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut k = p - 2;
    while k > 0 {
        if k & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        k >>= 1;
    }
    result as u32
}

fn digits(mut rep: u32, p: u32, len: usize) -> Vec<u32> {
    let mut out = vec![0; len];
    for d in out.iter_mut() {
        *d = rep % p;
        rep /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Monic polynomial of degree `deg` whose lower coefficients encode `code` base `p`.
fn monic_from_code(code: u32, p: u32, deg: usize) -> Vec<u32> {
    let mut v = digits(code, p, deg);
    v.push(1);
    v
}

fn is_irreducible(f: &[u32], p: u32) -> bool {
    let deg = f.len() - 1;
    if deg <= 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let g = monic_from_code(code, p, d);
            let r = poly_rem(f, &g, p);
            if r.iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl FieldSpec {
    /// Builds `F_{p^e}` with the smallest irreducible monic modulus of degree `e`
    /// (lower coefficients read as a base-`p` number) and the smallest primitive
    /// element as table generator.
    pub fn new(p: u32, e: u32) -> Result<Self, GfError> {
        if !is_prime(p) {
            return Err(GfError::NotPrime(p));
        }
        if e == 0 {
            return Err(GfError::ZeroExponent);
        }
        let q = (p as u64).checked_pow(e).filter(|&q| q <= MAX_ORDER as u64);
        let q = q.ok_or(GfError::TooLarge { p, e })? as u32;

        let modulus = if e == 1 {
            vec![0, 1]
        } else {
            (0..p.pow(e))
                .map(|code| monic_from_code(code, p, e as usize))
                .find(|f| is_irreducible(f, p))
                .expect("irreducible polynomials exist in every degree")
        };

        let mul_raw = |a: u32, b: u32| -> u32 {
            let da = digits(a, p, e as usize);
            let db = digits(b, p, e as usize);
            let mut prod = vec![0u32; 2 * e as usize];
            for (i, &x) in da.iter().enumerate() {
                for (j, &y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let mut r = poly_rem(&prod, &modulus, p);
            r.resize(e as usize, 0);
            undigits(&r, p)
        };

        let order = q - 1;
        let mut exp = Vec::with_capacity(2 * order as usize);
        let mut generator = Felt::ONE;
        for cand in 1..q {
            exp.clear();
            let mut x = 1u32;
            for _ in 0..order {
                exp.push(x as u16);
                x = mul_raw(x, cand);
                if x == 1 && exp.len() < order as usize {
                    break;
                }
            }
            if exp.len() == order as usize {
                generator = Felt(cand as u16);
                break;
            }
        }
        let first: Vec<u16> = exp.clone();
        exp.extend_from_slice(&first);
        let mut log = vec![0u32; q as usize];
        for (k, &x) in first.iter().enumerate() {
            log[x as usize] = k as u32;
        }

        let add_digits = |a: u32, b: u32| -> u32 {
            let da = digits(a, p, e as usize);
            let db = digits(b, p, e as usize);
            let s: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            undigits(&s, p)
        };
        let neg: Vec<u16> = (0..q)
            .map(|a| {
                let s: Vec<u32> = digits(a, p, e as usize).iter().map(|&x| (p - x) % p).collect();
                undigits(&s, p) as u16
            })
            .collect();
        let add_table = (e > 1 && p != 2 && q <= ADD_TABLE_LIMIT).then(|| {
            let mut t = vec![0u16; (q * q) as usize];
            for a in 0..q {
                for b in 0..q {
                    t[(a * q + b) as usize] = add_digits(a, b) as u16;
                }
            }
            t
        });

        Ok(FieldSpec { p, e, q, modulus, generator, exp, log, neg, add_table })
    }

    /// Builds the field of order `q`.
    pub fn of_order(q: u64) -> Result<Self, GfError> {
        let (p, e) = prime_power(q)?;
        Self::new(p, e)
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.e
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// Coefficients of the modulus, constant term first; monic of degree `e`.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Felt {
        self.generator
    }

    /// `exp_table()[k] = g^k`, enumerating every nonzero element once.
    pub fn exp_table(&self) -> &[u16] {
        &self.exp[..(self.q - 1) as usize]
    }

    pub fn log_table(&self) -> &[u32] {
        &self.log
    }

    /// `"p^e"`, the report form of the field.
    pub fn label(&self) -> String {
        format!("{}^{}", self.p, self.e)
    }

    pub fn elements(&self) -> impl Iterator<Item = Felt> + '_ {
        (0..self.q).map(|r| Felt(r as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Felt> + '_ {
        (1..self.q).map(|r| Felt(r as u16))
    }

    /// The image of the integer `n` under `Z -> F_q`.
    pub fn from_int(&self, n: i64) -> Felt {
        Felt(n.rem_euclid(self.p as i64) as u16)
    }

    #[inline]
    pub fn add(&self, a: Felt, b: Felt) -> Felt {
        if self.e == 1 {
            let s = a.rep() + b.rep();
            Felt(if s >= self.p { s - self.p } else { s } as u16)
        } else if self.p == 2 {
            Felt(a.0 ^ b.0)
        } else if let Some(t) = &self.add_table {
            Felt(t[(a.rep() * self.q + b.rep()) as usize])
        } else {
            let (mut x, mut y) = (a.rep(), b.rep());
            let (mut out, mut place) = (0u32, 1u32);
            while x > 0 || y > 0 {
                out += ((x % self.p + y % self.p) % self.p) * place;
                x /= self.p;
                y /= self.p;
                place *= self.p;
            }
            Felt(out as u16)
        }
    }

    #[inline]
    pub fn neg(&self, a: Felt) -> Felt {
        Felt(self.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Felt, b: Felt) -> Felt {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Felt, b: Felt) -> Felt {
        if a.is_zero() || b.is_zero() {
            return Felt::ZERO;
        }
        if self.e == 1 {
            return Felt((a.rep() * b.rep() % self.p) as u16);
        }
        Felt(self.exp[(self.log[a.0 as usize] + self.log[b.0 as usize]) as usize])
    }

    pub fn inv(&self, a: Felt) -> Result<Felt, GfError> {
        if a.is_zero() {
            return Err(GfError::InverseOfZero);
        }
        let order = self.q - 1;
        let l = self.log[a.0 as usize];
        Ok(Felt(self.exp[((order - l) % order) as usize]))
    }

    pub fn div(&self, a: Felt, b: Felt) -> Result<Felt, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Felt, k: u64) -> Felt {
        if k == 0 {
            return Felt::ONE;
        }
        if a.is_zero() {
            return Felt::ZERO;
        }
        let order = (self.q - 1) as u64;
        let l = self.log[a.0 as usize] as u64 * (k % order) % order;
        Felt(self.exp[l as usize])
    }

    /// `x -> x^p`.
    pub fn frobenius(&self, x: Felt) -> Felt {
        self.pow(x, self.p as u64)
    }

    /// Inverse of [`frobenius`](Self::frobenius): `x -> x^(q/p)`.
    pub fn frobenius_inverse(&self, x: Felt) -> Felt {
        self.pow(x, (self.q / self.p) as u64)
    }

    pub fn is_square(&self, x: Felt) -> bool {
        x.is_zero() || self.p == 2 || self.log[x.0 as usize].is_multiple_of(2)
    }

    /// Smallest-index `r` with `r^2 = x`, if `x` is a square.
    pub fn sqrt(&self, x: Felt) -> Option<Felt> {
        if !self.is_square(x) {
            return None;
        }
        self.elements().find(|&r| self.mul(r, r) == x)
    }

    /// The irreducible quadratic used throughout: `x^2 + delta` with the
    /// smallest workable `delta` in odd characteristic, `x^2 - x + delta` in
    /// characteristic two.
    pub fn irreducible_quadratic(&self) -> IrreducibleQuadratic {
        let tau = if self.p == 2 { Felt::ONE } else { Felt::ZERO };
        let delta = self
            .nonzero_elements()
            .find(|&delta| {
                let g = IrreducibleQuadratic { tau, delta };
                self.elements().all(|a| !g.eval(self, a).is_zero())
            })
            .expect("an irreducible quadratic exists over every finite field");
        IrreducibleQuadratic { tau, delta }
    }

    /// All irreducible quadratics `x^2 - tau x + delta`, ordered by `(tau, delta)`.
    pub fn all_irreducible_quadratics(&self) -> Vec<IrreducibleQuadratic> {
        let mut out = Vec::new();
        for tau in self.elements() {
            for delta in self.nonzero_elements() {
                let g = IrreducibleQuadratic { tau, delta };
                if self.elements().all(|a| !g.eval(self, a).is_zero()) {
                    out.push(g);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn has_root_mod_p(coeffs: &[u32], p: u32) -> bool {
        (0..p).any(|x| {
            coeffs.iter().rev().fold(0u32, |acc, &c| (acc * x + c) % p) == 0
        })
    }

    #[test]
    fn prime_field_two() {
        let f = FieldSpec::new(2, 1).unwrap();
        assert_eq!(f.order(), 2);
        assert_eq!(f.modulus(), &[0, 1]);
        assert_eq!(f.exp_table(), &[1]);
    }

    #[test]
    fn f4_modulus_is_the_only_irreducible_quadratic() {
        // Exhaustive oracle: monic quadratics over F_2 without a root.
        let irreducible: Vec<Vec<u32>> = (0..4)
            .map(|code| vec![code % 2, code / 2, 1])
            .filter(|c| !has_root_mod_p(c, 2))
            .collect();
        assert_eq!(irreducible, vec![vec![1, 1, 1]]);
        let f = FieldSpec::new(2, 2).unwrap();
        assert_eq!(f.modulus(), &[1, 1, 1]);
    }

    #[test]
    fn f9_tables() {
        let f = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f.order(), 9);
        // Smallest code with no root mod 3 is x^2 + 1.
        let first = (0..9)
            .map(|code| vec![code % 3, code / 3, 1])
            .find(|c| !has_root_mod_p(c, 3))
            .unwrap();
        assert_eq!(f.modulus(), first.as_slice());
        assert_eq!(f.exp_table().len(), 8);
        let mut seen: Vec<u16> = f.exp_table().to_vec();
        seen.sort();
        assert_eq!(seen, (1..9).collect::<Vec<u16>>());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(FieldSpec::new(4, 1).unwrap_err(), GfError::NotPrime(4));
        assert_eq!(FieldSpec::new(2, 17).unwrap_err(), GfError::TooLarge { p: 2, e: 17 });
        assert!(FieldSpec::new(2, 16).is_ok());
        assert_eq!(FieldSpec::of_order(6).unwrap_err(), GfError::NotPrimePower(6));
        assert_eq!(prime_power(49).unwrap(), (7, 2));
        assert_eq!(prime_power(13).unwrap(), (13, 1));
    }

    #[test]
    fn small_products() {
        let f3 = FieldSpec::new(3, 1).unwrap();
        assert_eq!(f3.mul(Felt(2), Felt(2)), Felt(1));
        let f4 = FieldSpec::new(2, 2).unwrap();
        let w = f4.generator();
        let w2 = f4.mul(w, w);
        assert_eq!(f4.mul(w, w2), Felt::ONE);
        assert_eq!(f4.inv(Felt::ZERO), Err(GfError::InverseOfZero));
    }

    #[test]
    fn fermat_identities() {
        for (p, e) in [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (2, 3), (3, 2), (2, 4), (13, 1), (5, 2), (2, 9), (3, 4)] {
            let f = FieldSpec::new(p, e).unwrap();
            let q = f.order() as u64;
            for x in f.elements() {
                assert_eq!(f.pow(x, q), x);
                if !x.is_zero() {
                    assert_eq!(f.pow(x, q - 1), Felt::ONE);
                    assert_eq!(f.mul(x, f.inv(x).unwrap()), Felt::ONE);
                }
                assert_eq!(f.add(x, f.neg(x)), Felt::ZERO);
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive_small() {
        for (p, e) in [(2, 2), (3, 2), (5, 1), (2, 3)] {
            let f = FieldSpec::new(p, e).unwrap();
            for x in f.elements() {
                for y in f.elements() {
                    assert_eq!(f.add(x, y), f.add(y, x));
                    assert_eq!(f.mul(x, y), f.mul(y, x));
                    for z in f.elements() {
                        assert_eq!(f.mul(x, f.add(y, z)), f.add(f.mul(x, y), f.mul(x, z)));
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_behaviour() {
        let f2 = FieldSpec::new(2, 1).unwrap();
        assert!(f2.elements().all(|x| f2.frobenius(x) == x));
        let f4 = FieldSpec::new(2, 2).unwrap();
        let w = f4.generator();
        assert_eq!(f4.frobenius(w), f4.mul(w, w));
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert!(f9.elements().all(|x| f9.frobenius_inverse(f9.frobenius(x)) == x));
        for (p, e) in [(2, 2), (2, 4), (3, 2)] {
            let f = FieldSpec::new(p, e).unwrap();
            for x in f.elements() {
                for y in f.elements() {
                    assert_eq!(f.frobenius(f.add(x, y)), f.add(f.frobenius(x), f.frobenius(y)));
                    assert_eq!(f.frobenius(f.mul(x, y)), f.mul(f.frobenius(x), f.frobenius(y)));
                }
            }
        }
    }

    #[test]
    fn irreducible_quadratic_choices() {
        let g3 = FieldSpec::new(3, 1).unwrap().irreducible_quadratic();
        assert_eq!((g3.tau, g3.delta), (Felt(0), Felt(1)));
        let g2 = FieldSpec::new(2, 1).unwrap().irreducible_quadratic();
        assert_eq!((g2.tau, g2.delta), (Felt(1), Felt(1)));
        let g5 = FieldSpec::new(5, 1).unwrap().irreducible_quadratic();
        assert_eq!((g5.tau, g5.delta), (Felt(0), Felt(2)));
        for q in [2u64, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 32, 49, 81, 125, 243, 256, 343, 512] {
            let f = FieldSpec::of_order(q).unwrap();
            let g = f.irreducible_quadratic();
            assert!(f.elements().all(|a| !g.eval(&f, a).is_zero()), "q = {q}");
        }
    }

    #[test]
    fn square_roots() {
        let f9 = FieldSpec::new(3, 2).unwrap();
        assert_eq!(f9.sqrt(Felt::ONE), Some(Felt::ONE));
        let squares: Vec<Felt> = f9.elements().map(|x| f9.mul(x, x)).collect();
        for x in f9.elements() {
            assert_eq!(f9.sqrt(x).is_some(), squares.contains(&x));
        }
        let f5 = FieldSpec::new(5, 1).unwrap();
        assert_eq!(f5.sqrt(Felt(4)), Some(Felt(2)));
        assert_eq!(f5.sqrt(Felt(2)), None);
        let f4 = FieldSpec::new(2, 2).unwrap();
        for x in f4.elements() {
            assert_eq!(f4.sqrt(x), Some(f4.pow(x, 2)));
        }
    }
}
