//! Sparse multivariate polynomials over `F_q`.
//!
//! Terms are kept sorted by monomial in ascending lex order (first variable
//! most significant), with no zero coefficients, so structural equality is
//! polynomial equality.

mod calculus;
pub mod graded;
mod subst;
mod text;

pub use graded::MonomialBasis;
pub use subst::LinearSubstitution;

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::gf::{FieldSpec, Felt};

/// At most this many variables per ring; exponents are packed into a `u64`.
pub const MAX_VARS: usize = 4;
const SLOT_BITS: u32 = 16;
const SLOT_MASK: u64 = 0x7fff;
const GUARD: u64 = 0x8000_8000_8000_8000;
pub const MAX_EXPONENT: u32 = 0x7fff;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("polynomials live in different rings")]
    RingMismatch,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("expected {expected} entries, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("the zero polynomial has no leading monomial")]
    ZeroPolynomial,
    #[error("polynomial is not a square")]
    NotSquare,
    #[error("square roots of polynomials need characteristic two")]
    NotCharacteristicTwo,
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("substitution image is not a homogeneous linear form")]
    NotLinear,
    #[error("malformed assignment: {0}")]
    MalformedAssignment(String),
    #[error("bad ring: {0}")]
    BadRing(String),
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },
}

/// Coefficient field plus an ordered list of variable names; the order
/// defines lex (`a > b > c > d`).
#[derive(Debug)]
pub struct RingSpec {
    field: Arc<FieldSpec>,
    vars: Vec<String>,
}

pub type Ring = Arc<RingSpec>;

impl PartialEq for RingSpec {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && *self.field == *other.field
    }
}

impl Eq for RingSpec {}

impl RingSpec {
    pub fn new(field: Arc<FieldSpec>, vars: &[&str]) -> Result<Ring, PolyError> {
        if vars.len() > MAX_VARS {
            return Err(PolyError::BadRing(format!("at most {MAX_VARS} variables")));
        }
        for (i, v) in vars.iter().enumerate() {
            let ok = !v.is_empty() && v.chars().all(|c| c.is_ascii_alphabetic() || c == '_');
            if !ok {
                return Err(PolyError::BadRing(format!("invalid variable name `{v}`")));
            }
            if vars[..i].contains(v) {
                return Err(PolyError::BadRing(format!("duplicate variable `{v}`")));
            }
        }
        Ok(Arc::new(RingSpec { field, vars: vars.iter().map(|s| s.to_string()).collect() }))
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Result<usize, PolyError> {
        self.vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))
    }
}

/// Exponent vector packed four 15-bit slots to a word; comparing the packed
/// words is lex comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    #[inline]
    fn shift(i: usize) -> u32 {
        SLOT_BITS * (MAX_VARS - 1 - i) as u32
    }

    pub fn from_exponents(exps: &[u32]) -> Monomial {
        assert!(exps.len() <= MAX_VARS, "too many exponents");
        let mut packed = 0u64;
        for (i, &e) in exps.iter().enumerate() {
            assert!(e <= MAX_EXPONENT, "exponent {e} out of range");
            packed |= (e as u64) << Self::shift(i);
        }
        Monomial(packed)
    }

    pub fn var(i: usize) -> Monomial {
        Monomial(1 << Self::shift(i))
    }

    #[inline]
    pub fn exponent(self, i: usize) -> u32 {
        ((self.0 >> Self::shift(i)) & SLOT_MASK) as u32
    }

    pub fn exponents(self, arity: usize) -> Vec<u32> {
        (0..arity).map(|i| self.exponent(i)).collect()
    }

    pub fn degree(self) -> u32 {
        (0..MAX_VARS).map(|i| self.exponent(i)).sum()
    }

    #[inline]
    pub fn mul(self, other: Monomial) -> Monomial {
        let s = self.0 + other.0;
        assert!(s & GUARD == 0, "monomial exponent overflow");
        Monomial(s)
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(self, other: Monomial) -> Option<Monomial> {
        (0..MAX_VARS)
            .all(|i| self.exponent(i) >= other.exponent(i))
            .then(|| Monomial(self.0 - other.0))
    }

    pub fn pow(self, k: u32) -> Monomial {
        let exps: Vec<u32> = (0..MAX_VARS).map(|i| self.exponent(i) * k).collect();
        Monomial::from_exponents(&exps)
    }

    pub fn packed(self) -> u64 {
        self.0
    }
}

#[derive(Clone)]
pub struct Poly {
    ring: Ring,
    terms: Vec<(Monomial, Felt)>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.ring == other.ring
    }
}

impl Eq for Poly {}

impl Hash for Poly {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.terms.hash(state);
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

/// Sums duplicate monomials and drops zeros.
fn accumulate(field: &FieldSpec, items: impl Iterator<Item = (Monomial, Felt)>) -> Vec<(Monomial, Felt)> {
    let mut acc: FxHashMap<Monomial, Felt> = FxHashMap::default();
    for (m, c) in items {
        let slot = acc.entry(m).or_insert(Felt::ZERO);
        *slot = field.add(*slot, c);
    }
    let mut out: Vec<_> = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
    out.sort_unstable_by_key(|t| t.0);
    out
}

impl Poly {
    pub fn zero(ring: &Ring) -> Poly {
        Poly { ring: ring.clone(), terms: Vec::new() }
    }

    pub fn constant(ring: &Ring, c: Felt) -> Poly {
        let terms = if c.is_zero() { Vec::new() } else { vec![(Monomial::ONE, c)] };
        Poly { ring: ring.clone(), terms }
    }

    pub fn one(ring: &Ring) -> Poly {
        Self::constant(ring, Felt::ONE)
    }

    pub fn var(ring: &Ring, name: &str) -> Result<Poly, PolyError> {
        let i = ring.var_index(name)?;
        Ok(Self::var_at(ring, i))
    }

    pub fn var_at(ring: &Ring, i: usize) -> Poly {
        assert!(i < ring.arity());
        Poly { ring: ring.clone(), terms: vec![(Monomial::var(i), Felt::ONE)] }
    }

    pub fn monomial(ring: &Ring, m: Monomial, c: Felt) -> Poly {
        let terms = if c.is_zero() { Vec::new() } else { vec![(m, c)] };
        Poly { ring: ring.clone(), terms }
    }

    /// Builds a polynomial from arbitrary (possibly repeated) terms.
    pub fn from_terms(ring: &Ring, terms: impl IntoIterator<Item = (Monomial, Felt)>) -> Poly {
        let terms = accumulate(ring.field(), terms.into_iter());
        Poly { ring: ring.clone(), terms }
    }

    /// `sum coeffs[i] * vars[i]`.
    pub fn linear_form(ring: &Ring, coeffs: &[Felt]) -> Result<Poly, PolyError> {
        if coeffs.len() != ring.arity() {
            return Err(PolyError::ArityMismatch { expected: ring.arity(), got: coeffs.len() });
        }
        Ok(Self::from_terms(ring, coeffs.iter().enumerate().map(|(i, &c)| (Monomial::var(i), c))))
    }

    pub(crate) fn from_sorted_terms(ring: &Ring, terms: Vec<(Monomial, Felt)>) -> Poly {
        debug_assert!(terms.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(terms.iter().all(|t| !t.1.is_zero()));
        Poly { ring: ring.clone(), terms }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn field(&self) -> &FieldSpec {
        self.ring.field()
    }

    /// Terms in ascending lex order.
    pub fn terms(&self) -> &[(Monomial, Felt)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: Monomial) -> Felt {
        self.terms
            .binary_search_by_key(&m, |t| t.0)
            .map(|i| self.terms[i].1)
            .unwrap_or(Felt::ZERO)
    }

    /// Largest total degree, `None` for zero.
    pub fn degree(&self) -> Option<u32> {
        self.terms.iter().map(|t| t.0.degree()).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        match self.terms.first() {
            None => true,
            Some(&(m, _)) => {
                let d = m.degree();
                self.terms.iter().all(|t| t.0.degree() == d)
            }
        }
    }

    /// Degree of a nonzero homogeneous polynomial.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        if self.is_zero() || !self.is_homogeneous() {
            None
        } else {
            self.degree()
        }
    }

    pub fn homogeneous_component(&self, d: u32) -> Poly {
        let terms = self.terms.iter().filter(|t| t.0.degree() == d).copied().collect();
        Poly { ring: self.ring.clone(), terms }
    }

    fn check_ring(&self, other: &Poly) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.ring, &other.ring) || self.ring == other.ring {
            Ok(())
        } else {
            Err(PolyError::RingMismatch)
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_ring(other)?;
        let f = self.field();
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let c = f.add(a[i].1, b[j].1);
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Poly { ring: self.ring.clone(), terms: out })
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.try_add(&other.neg_ref())
    }

    fn neg_ref(&self) -> Poly {
        let f = self.field();
        Poly { ring: self.ring.clone(), terms: self.terms.iter().map(|&(m, c)| (m, f.neg(c))).collect() }
    }

    pub fn scale(&self, c: Felt) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.ring);
        }
        let f = self.field();
        Poly { ring: self.ring.clone(), terms: self.terms.iter().map(|&(m, x)| (m, f.mul(c, x))).collect() }
    }

    /// Multiplies every monomial by `m`.
    pub fn shift(&self, m: Monomial) -> Poly {
        Poly { ring: self.ring.clone(), terms: self.terms.iter().map(|&(t, c)| (t.mul(m), c)).collect() }
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_ring(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero(&self.ring));
        }
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        if small.len() == 1 {
            let (m, c) = small.terms[0];
            return Ok(large.shift(m).scale(c));
        }
        let f = self.field();
        let terms = if f.degree() == 1 {
            // Prime field: accumulate raw products, reduce once.
            let p = f.characteristic() as u64;
            let mut acc: FxHashMap<Monomial, u64> = FxHashMap::default();
            acc.reserve(large.len() * 2);
            for &(ma, ca) in &small.terms {
                let ca = ca.rep() as u64;
                for &(mb, cb) in &large.terms {
                    let slot = acc.entry(ma.mul(mb)).or_insert(0);
                    *slot += ca * cb.rep() as u64;
                    if *slot >= 1 << 62 {
                        *slot %= p;
                    }
                }
            }
            let mut out: Vec<(Monomial, Felt)> = acc
                .into_iter()
                .filter_map(|(m, s)| {
                    let r = (s % p) as u16;
                    (r != 0).then_some((m, Felt(r)))
                })
                .collect();
            out.sort_unstable_by_key(|t| t.0);
            out
        } else {
            accumulate(
                f,
                small
                    .terms
                    .iter()
                    .flat_map(|&(ma, ca)| large.terms.iter().map(move |&(mb, cb)| (ma.mul(mb), f.mul(ca, cb)))),
            )
        };
        Ok(Poly { ring: self.ring.clone(), terms })
    }

    /// `f^p`, computed term-wise (Frobenius is additive in characteristic `p`).
    pub fn frobenius_power(&self) -> Poly {
        let f = self.field();
        let p = f.characteristic();
        let terms = self.terms.iter().map(|&(m, c)| (m.pow(p), f.frobenius(c))).collect();
        Poly { ring: self.ring.clone(), terms }
    }

    pub fn pow(&self, k: u32) -> Poly {
        if k == 0 {
            return Poly::one(&self.ring);
        }
        let p = self.field().characteristic();
        if k.is_multiple_of(p) {
            return self.pow(k / p).frobenius_power();
        }
        let mut result = self.clone();
        for _ in 1..k {
            result = &result * self;
        }
        result
    }

    /// Product of a sequence, multiplied in order.
    pub fn product<'a>(ring: &Ring, factors: impl IntoIterator<Item = &'a Poly>) -> Poly {
        factors.into_iter().fold(Poly::one(ring), |acc, f| &acc * f)
    }

    /// Lex-largest monomial under the ring's variable order.
    pub fn leading_monomial_lex(&self) -> Result<Monomial, PolyError> {
        self.terms.last().map(|t| t.0).ok_or(PolyError::ZeroPolynomial)
    }

    pub fn leading_coefficient(&self) -> Option<Felt> {
        self.terms.last().map(|t| t.1)
    }

    /// Scales so the lex-leading coefficient is one; zero stays zero.
    pub fn monic(&self) -> Poly {
        match self.leading_coefficient() {
            None => self.clone(),
            Some(c) => self.scale(self.field().inv(c).expect("leading coefficient is nonzero")),
        }
    }

    pub fn evaluate(&self, point: &[Felt]) -> Result<Felt, PolyError> {
        let n = self.ring.arity();
        if point.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: point.len() });
        }
        let f = self.field();
        Ok(self.terms.iter().fold(Felt::ZERO, |acc, &(m, c)| {
            let v = (0..n).fold(c, |v, i| f.mul(v, f.pow(point[i], m.exponent(i) as u64)));
            f.add(acc, v)
        }))
    }

    /// Same polynomial viewed in an equal ring (used when two rings were built
    /// separately with identical specs).
    pub fn with_ring(&self, ring: &Ring) -> Result<Poly, PolyError> {
        if *self.ring != **ring {
            return Err(PolyError::RingMismatch);
        }
        Ok(Poly { ring: ring.clone(), terms: self.terms.clone() })
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;

    /// Panics on ring mismatch; see [`Poly::try_add`].
    fn add(self, rhs: &'a Poly) -> Poly {
        self.try_add(rhs).expect("ring mismatch in polynomial addition")
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;

    fn sub(self, rhs: &'a Poly) -> Poly {
        self.try_sub(rhs).expect("ring mismatch in polynomial subtraction")
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;

    fn mul(self, rhs: &'a Poly) -> Poly {
        self.try_mul(rhs).expect("ring mismatch in polynomial multiplication")
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        self.neg_ref()
    }
}
