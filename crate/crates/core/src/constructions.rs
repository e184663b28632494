//! The named invariants of each (group, space, q) case.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldSpec, Felt, IrreducibleQuadratic};
use crate::groups::{self, ActionSpace, GroupAction, GroupError, GroupId, GroupKind};
use crate::mpoly::{Poly, PolyError, Ring};
use crate::steenrod::steenrod_component;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error("no description for {group} acting on {space}")]
    UnknownCase { group: GroupKind, space: ActionSpace },
    #[error("the half-orbit construction needs odd q")]
    EvenCharacteristic,
    #[error("Jacobian of the primaries vanishes")]
    DegenerateJacobian,
    #[error("suite `{0}` cannot be projected")]
    NotProjectable(String),
    #[error("half-orbit square is not a scalar multiple of f4")]
    HalfRootMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// One row of the case table.
#[derive(Clone, Debug)]
pub struct CaseSpec {
    pub group: GroupKind,
    pub space: ActionSpace,
    pub field: Arc<FieldSpec>,
}

/// Serialized form of a [`CaseSpec`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseLabel {
    pub group: GroupKind,
    pub space: ActionSpace,
    pub q: u32,
    pub field: String,
}

impl CaseSpec {
    pub fn new(group: GroupKind, space: ActionSpace, field: Arc<FieldSpec>) -> Result<CaseSpec, ConstructionError> {
        if group == GroupKind::P || !group.acts_on(space) {
            return Err(ConstructionError::UnknownCase { group, space });
        }
        Ok(CaseSpec { group, space, field })
    }

    /// Every case of the table, for one field.
    pub fn all(field: &Arc<FieldSpec>) -> Vec<CaseSpec> {
        use ActionSpace as S;
        use GroupKind as G;
        [(G::Gl2, S::Gl2), (G::Gl2, S::Sl2), (G::Sl2, S::Gl2), (G::Sl2, S::Sl2), (G::O2, S::Gl2), (G::O2, S::Symmetric), (G::O2, S::Alternating)]
            .into_iter()
            .map(|(group, space)| CaseSpec { group, space, field: field.clone() })
            .collect()
    }

    pub fn q(&self) -> u64 {
        self.field.order() as u64
    }

    pub fn odd(&self) -> bool {
        self.field.characteristic() != 2
    }

    pub fn label(&self) -> CaseLabel {
        CaseLabel { group: self.group, space: self.space, q: self.field.order(), field: self.field.label() }
    }

    pub fn action(&self) -> Result<GroupAction, GroupError> {
        groups::conjugation_action(GroupId::plain(self.group), self.space, self.field.clone())
    }

    pub fn ring(&self) -> Ring {
        self.space.ring(self.field.clone())
    }

    /// `SL_2` in characteristic two has the same image as `GL_2`.
    pub fn same_as_gl2(&self) -> bool {
        self.group == GroupKind::Sl2 && !self.odd()
    }
}

impl fmt::Display for CaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} q={}", self.group, self.space, self.field.order())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingType {
    Polynomial,
    Hypersurface,
}

/// `sum_{e in numerator} z^e / prod_{d in denominator} (1 - z^d)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub numerator: Vec<u32>,
    pub denominator: Vec<u32>,
}

impl ClosedForm {
    /// Degree as a rational function.
    pub fn a_invariant(&self) -> i64 {
        let num = self.numerator.iter().copied().max().unwrap_or(0) as i64;
        num - self.denominator.iter().map(|&d| d as i64).sum::<i64>()
    }

    /// Power-series coefficients through degree `max_degree`.
    pub fn expand(&self, max_degree: u32) -> Vec<u64> {
        let n = max_degree as usize + 1;
        let mut out = vec![0u64; n];
        for &e in &self.numerator {
            if (e as usize) < n {
                out[e as usize] += 1;
            }
        }
        for &d in &self.denominator {
            let d = d as usize;
            for i in d..n {
                out[i] += out[i - d];
            }
        }
        out
    }
}

fn binom2(n: u64) -> u32 {
    (n * (n.saturating_sub(1)) / 2) as u32
}

/// The Hilbert series the case's description predicts.
pub fn closed_form(case: &CaseSpec) -> ClosedForm {
    let q = case.q();
    let odd = case.odd();
    let q1 = (q + 1) as u32;
    let cf = |numerator: Vec<u32>, denominator: Vec<u32>| ClosedForm { numerator, denominator };
    use ActionSpace as S;
    use GroupKind as G;
    match (case.group, case.space) {
        (G::Gl2, S::Gl2) | (G::Sl2, S::Gl2) if case.group == G::Gl2 || !odd => {
            cf(vec![0, (q * q) as u32], vec![1, 2, q1, (q * q - q) as u32])
        }
        (G::Sl2, S::Gl2) => cf(vec![0, binom2(q + 1)], vec![1, 2, q1, binom2(q)]),
        (G::Gl2, S::Sl2) | (G::Sl2, S::Sl2) if !odd => cf(vec![0], vec![2, q1, binom2(q)]),
        (G::Gl2, S::Sl2) => cf(vec![0, (q * q) as u32], vec![2, q1, (q * q - q) as u32]),
        (G::Sl2, S::Sl2) => cf(vec![0, binom2(q + 1)], vec![2, q1, binom2(q)]),
        (G::O2, S::Gl2) => {
            let d3 = if odd { 2 } else { 1 };
            let d4 = o2_orbit_degree(q);
            cf(vec![0, 1 + 2 + d3 + d4 - 4], vec![1, 2, d3, d4])
        }
        (G::O2, S::Symmetric) => {
            let d3 = if odd { o2_orbit_degree(q) } else { (q / 2) as u32 };
            cf(vec![0], vec![1, 2, d3])
        }
        (G::O2, S::Alternating) => cf(vec![0], vec![if odd { 2 } else { 1 }]),
        _ => unreachable!("CaseSpec::new rejects other pairings"),
    }
}

/// Size of the orbit of `a` under `O_2`: `|G|` for even q, `|G|/4` for odd q.
pub fn o2_orbit_degree(q: u64) -> u32 {
    let g = GroupKind::O2.order(q);
    (if q.is_multiple_of(2) { g } else { g / 4 }) as u32
}

/// A polynomial with its slot name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPoly {
    pub name: String,
    pub poly: Poly,
}

impl NamedPoly {
    pub fn new(name: &str, poly: Poly) -> NamedPoly {
        NamedPoly { name: name.to_string(), poly }
    }

    pub fn degree(&self) -> u32 {
        self.poly.degree().unwrap_or(0)
    }
}

#[derive(Clone, Debug)]
pub struct InvariantSuite {
    pub primaries: Vec<NamedPoly>,
    /// The module generator over the primaries, when one is known in closed
    /// form; the even-q searches leave this empty.
    pub secondary: Option<NamedPoly>,
    pub expected_secondary_degree: Option<u32>,
    pub expected_type: RingType,
    /// Further named polynomials of the construction (squares, projections,
    /// Jacobians that land in the primary subring).
    pub auxiliary: Vec<NamedPoly>,
    /// Linear factors of large orbit products, keyed by slot name.
    pub factored: Vec<(String, Vec<Poly>)>,
}

impl InvariantSuite {
    pub fn primary_polys(&self) -> Vec<Poly> {
        self.primaries.iter().map(|p| p.poly.clone()).collect()
    }

    pub fn primary_degrees(&self) -> Vec<u32> {
        self.primaries.iter().map(NamedPoly::degree).collect()
    }

    pub fn get(&self, name: &str) -> Option<&Poly> {
        self.primaries
            .iter()
            .chain(self.secondary.iter())
            .chain(self.auxiliary.iter())
            .find(|p| p.name == name)
            .map(|p| &p.poly)
    }

    pub fn factors_of(&self, name: &str) -> Option<&[Poly]> {
        self.factored.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Every named slot, primaries first.
    pub fn named(&self) -> Vec<&NamedPoly> {
        self.primaries.iter().chain(self.secondary.iter()).chain(self.auxiliary.iter()).collect()
    }
}

fn var(ring: &Ring, name: &str) -> Poly {
    Poly::var(ring, name).expect("variable of the coordinate ring")
}

/// `f_3 = a^q d + a d^q - b^q c - b c^q`.
pub fn f3_formula(ring: &Ring) -> Poly {
    let q = ring.field().order();
    let (a, b, c, d) = (var(ring, "a"), var(ring, "b"), var(ring, "c"), var(ring, "d"));
    let pos = &(&a.pow(q) * &d) + &(&a * &d.pow(q));
    let neg = &(&b.pow(q) * &c) + &(&b * &c.pow(q));
    &pos - &neg
}

/// The linear forms `A a + B b - (g(A)/B) c + (tau - A) d` for `A` in `K`,
/// `B` in `K^x`, in ascending `(A, B)` order.
pub fn omega_forms(ring: &Ring, g: &IrreducibleQuadratic) -> Vec<Poly> {
    let f = ring.field();
    let mut out = Vec::new();
    for a in f.elements() {
        for b in f.nonzero_elements() {
            out.push(omega_form(ring, g, a, b));
        }
    }
    out
}

pub fn omega_form(ring: &Ring, g: &IrreducibleQuadratic, a: Felt, b: Felt) -> Poly {
    let f = ring.field();
    let c = f.neg(f.div(g.eval(f, a), b).expect("b is nonzero"));
    let d = f.sub(g.tau, a);
    Poly::linear_form(ring, &[a, b, c, d]).expect("four coordinates")
}

/// `f_1, ..., f_4` for `GL_2` on gl2, with the factors of `f_4`.
pub fn gl2_primaries(field: &Arc<FieldSpec>, g: &IrreducibleQuadratic) -> InvariantSuite {
    let ring = ActionSpace::Gl2.ring(field.clone());
    let (a, b, c, d) = (var(&ring, "a"), var(&ring, "b"), var(&ring, "c"), var(&ring, "d"));
    let f1 = &a + &d;
    let f2 = &(&a * &d) - &(&b * &c);
    let f3 = f3_formula(&ring);
    let factors = omega_forms(&ring, g);
    let f4 = Poly::product(&ring, factors.iter());
    InvariantSuite {
        primaries: vec![NamedPoly::new("f1", f1), NamedPoly::new("f2", f2), NamedPoly::new("f3", f3), NamedPoly::new("f4", f4)],
        secondary: None,
        expected_secondary_degree: Some(field.order() * field.order()),
        expected_type: RingType::Hypersurface,
        auxiliary: Vec::new(),
        factored: vec![("f4".to_string(), factors)],
    }
}

/// `Jac` of the primaries; nonzero of degree `sum(deg f_i) - arity`.
pub fn jacobian_secondary(suite: &InvariantSuite) -> Result<Poly, ConstructionError> {
    let h = Poly::jacobian_det(&suite.primary_polys())?;
    if h.is_zero() {
        return Err(ConstructionError::DegenerateJacobian);
    }
    Ok(h)
}

/// `f_4 = -prod lambda(A, B)` over all `(A, B)` and its half-orbit root
/// `f` (product over `B` in a half system of `K^x`, rescaled) with
/// `f^2 = f_4`. Returns `(f_4, f, factors of f)`.
pub fn sl2_f4_and_halfroot(field: &Arc<FieldSpec>, delta: Felt) -> Result<(Poly, Poly, Vec<Poly>), ConstructionError> {
    if field.characteristic() == 2 {
        return Err(ConstructionError::EvenCharacteristic);
    }
    let f = field.as_ref();
    let g = IrreducibleQuadratic { tau: Felt::ZERO, delta };
    let ring = ActionSpace::Gl2.ring(field.clone());
    let full: Vec<Poly> = omega_forms(&ring, &g);
    let f4 = Poly::product(&ring, full.iter()).scale(f.neg(Felt::ONE));
    let mut half = Vec::new();
    for a in f.elements() {
        for b in f.nonzero_elements() {
            if b < f.neg(b) {
                half.push(omega_form(&ring, &g, a, b));
            }
        }
    }
    let root = Poly::product(&ring, half.iter());
    let sq = &root * &root;
    // f^2 and f_4 agree up to a scalar; fold its square root into f.
    let kappa = f
        .div(f4.leading_coefficient().expect("f4 is nonzero"), sq.leading_coefficient().expect("f is nonzero"))
        .expect("nonzero leading coefficient");
    let s = f.sqrt(kappa).ok_or(ConstructionError::HalfRootMismatch)?;
    let root = root.scale(s);
    if &root * &root != f4 {
        return Err(ConstructionError::HalfRootMismatch);
    }
    if s != Felt::ONE {
        if let Some(first) = half.first_mut() {
            *first = first.scale(s);
        }
    }
    Ok((f4, root, half))
}

/// `f_1, ..., f_4` for `SL_2` on gl2 with odd q; `f_4` here is the half root.
fn sl2_gl2_suite(field: &Arc<FieldSpec>, g: &IrreducibleQuadratic) -> Result<InvariantSuite, ConstructionError> {
    let base = gl2_primaries(field, g);
    let (f4, root, half) = sl2_f4_and_halfroot(field, g.delta)?;
    let mut primaries = base.primaries[..3].to_vec();
    primaries.push(NamedPoly::new("f", root));
    let mut suite = InvariantSuite {
        primaries,
        secondary: None,
        expected_secondary_degree: Some(binom2(field.order() as u64 + 1)),
        expected_type: RingType::Hypersurface,
        auxiliary: vec![NamedPoly::new("f4", f4)],
        factored: vec![("f".to_string(), half)],
    };
    suite.secondary = Some(NamedPoly::new("h", jacobian_secondary(&suite)?));
    Ok(suite)
}

/// The projection `d -> -a` from gl2 coordinates to sl2 coordinates.
pub fn traceless_projection(f: &Poly, target: &Ring) -> Result<Poly, PolyError> {
    let a = var(target, "a");
    let images = [a.clone(), var(target, "b"), var(target, "c"), -&a];
    f.project(target, &images)
}

/// The symmetric projection `c -> b`.
pub fn symmetric_projection(f: &Poly, target: &Ring) -> Result<Poly, PolyError> {
    let b = var(target, "b");
    let images = [var(target, "a"), b.clone(), b, var(target, "d")];
    f.project(target, &images)
}

/// Traceless descriptions derived from a gl2 suite: `det`, `P^1(det)` and
/// the projected (or square-rooted) top invariant.
pub fn traceless_suites(base: &InvariantSuite, group: GroupKind) -> Result<InvariantSuite, ConstructionError> {
    let field = base.primaries[0].poly.ring().field_arc().clone();
    if base.primaries.len() != 4 || base.primaries[0].poly.ring().arity() != 4 {
        return Err(ConstructionError::NotProjectable(format!("{} primaries", base.primaries.len())));
    }
    let t = ActionSpace::Sl2.ring(field.clone());
    let odd = field.characteristic() != 2;
    let det = traceless_projection(&base.primaries[1].poly, &t)?;
    let p1 = steenrod_component(&det, 1);
    let top_name = &base.primaries[3].name;
    let top = traceless_projection(&base.primaries[3].poly, &t)?;
    let project_all = |fs: &[Poly]| fs.iter().map(|l| traceless_projection(l, &t)).collect::<Result<Vec<_>, _>>();
    let mut auxiliary = vec![NamedPoly::new("pi_f3", traceless_projection(&base.primaries[2].poly, &t)?)];
    let mut factored = Vec::new();
    let q = field.order() as u64;
    if !odd {
        let root = top.sqrt_char2()?;
        auxiliary.push(NamedPoly::new("pi_f4", top));
        return Ok(InvariantSuite {
            primaries: vec![NamedPoly::new("det", det), NamedPoly::new("p1_det", p1), NamedPoly::new("sqrt_pi_f4", root)],
            secondary: None,
            expected_secondary_degree: None,
            expected_type: RingType::Polynomial,
            auxiliary,
            factored,
        });
    }
    let (name, expected) = if group == GroupKind::Sl2 && top_name == "f" {
        ("pi_f", binom2(q + 1))
    } else {
        ("pi_f4", (q * q) as u32)
    };
    if let Some(fs) = base.factors_of(top_name) {
        factored.push((name.to_string(), project_all(fs)?));
    }
    let mut suite = InvariantSuite {
        primaries: vec![NamedPoly::new("det", det), NamedPoly::new("p1_det", p1), NamedPoly::new(name, top)],
        secondary: None,
        expected_secondary_degree: Some(expected),
        expected_type: RingType::Hypersurface,
        auxiliary,
        factored,
    };
    suite.secondary = Some(NamedPoly::new("h", jacobian_secondary(&suite)?));
    Ok(suite)
}

/// `f_1, ..., f_4` for `O_2` on gl2: `f_3 = b - c` or `(b - c)^2`, `f_4 = N(a)`.
pub fn o2_primaries(field: &Arc<FieldSpec>) -> Result<InvariantSuite, ConstructionError> {
    let action = groups::conjugation_action(GroupId::plain(GroupKind::O2), ActionSpace::Gl2, field.clone())?;
    let ring = action.ring().clone();
    let (a, b, c, d) = (var(&ring, "a"), var(&ring, "b"), var(&ring, "c"), var(&ring, "d"));
    let odd = field.characteristic() != 2;
    let bc = &b - &c;
    let f3 = if odd { &bc * &bc } else { bc };
    let orbit = groups::orbit(&a, &action)?;
    let f4 = Poly::product(&ring, orbit.iter());
    let mut suite = InvariantSuite {
        primaries: vec![
            NamedPoly::new("f1", &a + &d),
            NamedPoly::new("f2", &(&a * &d) - &(&b * &c)),
            NamedPoly::new("f3", f3),
            NamedPoly::new("f4", f4),
        ],
        secondary: None,
        expected_secondary_degree: None,
        expected_type: RingType::Hypersurface,
        auxiliary: Vec::new(),
        factored: vec![("f4".to_string(), orbit)],
    };
    suite.expected_secondary_degree = Some(suite.primary_degrees().iter().sum::<u32>() - 4);
    if odd {
        suite.secondary = Some(NamedPoly::new("h", jacobian_secondary(&suite)?));
    }
    Ok(suite)
}

/// The third generator for `O_2` on symmetric matrices.
pub fn symmetric_f3(field: &Arc<FieldSpec>) -> Result<Poly, ConstructionError> {
    let ring = ActionSpace::Symmetric.ring(field.clone());
    let (a, b, d) = (var(&ring, "a"), var(&ring, "b"), var(&ring, "d"));
    if field.characteristic() != 2 {
        let action = groups::conjugation_action(GroupId::plain(GroupKind::O2), ActionSpace::Symmetric, field.clone())?;
        return Ok(groups::orbit_product(&a, &action)?);
    }
    // q = 2^(e+1): sum_{k=0}^{e} b^(2^k) (a + d)^(2^e - 2^k)
    let half = field.order() / 2;
    let tr = &a + &d;
    let mut out = Poly::zero(&ring);
    let mut k = 1u32;
    while k <= half {
        out = &out + &(&b.pow(k) * &tr.pow(half - k));
        k *= 2;
    }
    Ok(out)
}

fn symmetric_suite(field: &Arc<FieldSpec>) -> Result<InvariantSuite, ConstructionError> {
    let ring = ActionSpace::Symmetric.ring(field.clone());
    let (a, b, d) = (var(&ring, "a"), var(&ring, "b"), var(&ring, "d"));
    Ok(InvariantSuite {
        primaries: vec![
            NamedPoly::new("f1", &a + &d),
            NamedPoly::new("f2", &(&a * &d) - &(&b * &b)),
            NamedPoly::new("f3", symmetric_f3(field)?),
        ],
        secondary: None,
        expected_secondary_degree: None,
        expected_type: RingType::Polynomial,
        auxiliary: Vec::new(),
        factored: Vec::new(),
    })
}

/// `b^2` (odd q) or `b` (even q) on alternating matrices.
pub fn adjoint_o2_invariants(field: &Arc<FieldSpec>) -> InvariantSuite {
    let ring = ActionSpace::Alternating.ring(field.clone());
    let b = var(&ring, "b");
    let gen = if field.characteristic() == 2 { b } else { &b * &b };
    InvariantSuite {
        primaries: vec![NamedPoly::new("f1", gen)],
        secondary: None,
        expected_secondary_degree: None,
        expected_type: RingType::Polynomial,
        auxiliary: Vec::new(),
        factored: Vec::new(),
    }
}

/// The full suite of a case, built with the irreducible quadratic `g`.
pub fn build_suite(case: &CaseSpec, g: &IrreducibleQuadratic) -> Result<InvariantSuite, ConstructionError> {
    use ActionSpace as S;
    use GroupKind as G;
    let field = &case.field;
    let gl2 = || {
        let mut s = gl2_primaries(field, g);
        if case.odd() {
            s.secondary = Some(NamedPoly::new("h", jacobian_secondary(&s)?));
        } else {
            s.auxiliary.push(NamedPoly::new("h", jacobian_secondary(&s)?));
        }
        Ok::<_, ConstructionError>(s)
    };
    match (case.group, case.space) {
        (G::Gl2, S::Gl2) => gl2(),
        (G::Sl2, S::Gl2) if !case.odd() => gl2(),
        (G::Sl2, S::Gl2) => sl2_gl2_suite(field, g),
        (G::Gl2, S::Sl2) => traceless_suites(&gl2_primaries(field, g), G::Gl2),
        (G::Sl2, S::Sl2) if !case.odd() => traceless_suites(&gl2_primaries(field, g), G::Gl2),
        (G::Sl2, S::Sl2) => {
            let base = sl2_gl2_suite(field, g)?;
            traceless_suites(&base, G::Sl2)
        }
        (G::O2, S::Gl2) => o2_primaries(field),
        (G::O2, S::Symmetric) => symmetric_suite(field),
        (G::O2, S::Alternating) => Ok(adjoint_o2_invariants(field)),
        (group, space) => Err(ConstructionError::UnknownCase { group, space }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::of_order(q).unwrap())
    }

    fn case(group: GroupKind, space: ActionSpace, q: u64) -> CaseSpec {
        CaseSpec::new(group, space, field(q)).unwrap()
    }

    #[test]
    fn gl2_degrees_and_steenrod() {
        for q in [2u64, 3, 4, 5] {
            let f = field(q);
            let s = gl2_primaries(&f, &f.irreducible_quadratic());
            let q = q as u32;
            assert_eq!(s.primary_degrees(), vec![1, 2, q + 1, q * q - q]);
            assert_eq!(steenrod_component(&s.primaries[1].poly, 1), s.primaries[2].poly);
            assert_eq!(s.factors_of("f4").unwrap().len() as u32, q * (q - 1));
        }
    }

    #[test]
    fn f3_text_for_q2() {
        let f = field(2);
        let s = gl2_primaries(&f, &f.irreducible_quadratic());
        assert_eq!(s.primaries[2].poly.to_string(), "a^2*d + a*d^2 + b^2*c + b*c^2");
    }

    #[test]
    fn jacobian_degrees() {
        let s = build_suite(&case(GroupKind::Gl2, ActionSpace::Gl2, 3), &field(3).irreducible_quadratic()).unwrap();
        assert_eq!(s.secondary.as_ref().unwrap().degree(), 9);
        let s = build_suite(&case(GroupKind::Sl2, ActionSpace::Sl2, 3), &field(3).irreducible_quadratic()).unwrap();
        assert_eq!(s.primary_degrees(), vec![2, 4, 3]);
        assert_eq!(s.secondary.as_ref().unwrap().degree(), 6);
        let s = build_suite(&case(GroupKind::Gl2, ActionSpace::Gl2, 2), &field(2).irreducible_quadratic()).unwrap();
        assert!(!s.get("h").unwrap().is_zero());
    }

    #[test]
    fn half_roots() {
        for q in [3u64, 5] {
            let f = field(q);
            let (f4, root, half) = sl2_f4_and_halfroot(&f, f.irreducible_quadratic().delta).unwrap();
            assert_eq!(&root * &root, f4);
            assert_eq!(Poly::product(root.ring(), half.iter()), root);
            assert_eq!(root.degree(), Some(binom2(q)));
        }
        assert_eq!(sl2_f4_and_halfroot(&field(4), Felt(1)), Err(ConstructionError::EvenCharacteristic).map(|x: (Poly, Poly, Vec<Poly>)| x));
    }

    #[test]
    fn traceless_degrees() {
        let s = build_suite(&case(GroupKind::Gl2, ActionSpace::Sl2, 2), &field(2).irreducible_quadratic()).unwrap();
        assert_eq!(s.primary_degrees(), vec![2, 3, 1]);
        assert_eq!(s.expected_type, RingType::Polynomial);
        let s = build_suite(&case(GroupKind::Gl2, ActionSpace::Sl2, 3), &field(3).irreducible_quadratic()).unwrap();
        assert_eq!(s.expected_secondary_degree, Some(9));
        assert_eq!(s.secondary.as_ref().unwrap().degree(), 9);
        let det = &s.primaries[0].poly;
        assert_eq!(det.to_string(), "2*a^2 + 2*b*c");
        assert_eq!(s.get("pi_f3"), Some(&s.primaries[1].poly));
    }

    #[test]
    fn o2_degrees() {
        for (q, degs, dh) in [(2u64, vec![1, 2, 1, 2], 2), (3, vec![1, 2, 2, 2], 3), (5, vec![1, 2, 2, 2], 3), (4, vec![1, 2, 1, 4], 4)] {
            let s = o2_primaries(&field(q)).unwrap();
            assert_eq!(s.primary_degrees(), degs, "q={q}");
            assert_eq!(s.expected_secondary_degree, Some(dh));
            if q % 2 == 1 {
                assert_eq!(s.secondary.as_ref().unwrap().degree(), dh);
            }
        }
    }

    #[test]
    fn symmetric_and_alternating() {
        let r4 = ActionSpace::Symmetric.ring(field(4));
        assert_eq!(symmetric_f3(&field(2)).unwrap().to_string(), "b");
        assert_eq!(symmetric_f3(&field(4)).unwrap(), Poly::parse(&r4, "a*b + b*d + b^2").unwrap());
        assert_eq!(symmetric_f3(&field(3)).unwrap().degree(), Some(2));
        assert_eq!(adjoint_o2_invariants(&field(3)).primaries[0].poly.to_string(), "b^2");
        assert_eq!(adjoint_o2_invariants(&field(2)).primaries[0].poly.to_string(), "b");
    }

    #[test]
    fn projections() {
        let f = field(3);
        let t = ActionSpace::Sl2.ring(f.clone());
        let s = ActionSpace::Symmetric.ring(f.clone());
        let g = ActionSpace::Gl2.ring(f);
        let tr = Poly::parse(&g, "a + d").unwrap();
        assert!(traceless_projection(&tr, &t).unwrap().is_zero());
        let det = Poly::parse(&g, "a*d + 2*b*c").unwrap();
        assert_eq!(traceless_projection(&det, &t).unwrap(), Poly::parse(&t, "2*a^2 + 2*b*c").unwrap());
        assert_eq!(symmetric_projection(&det, &s).unwrap(), Poly::parse(&s, "a*d + 2*b^2").unwrap());
    }

    #[test]
    fn closed_forms() {
        let cf = closed_form(&case(GroupKind::Gl2, ActionSpace::Gl2, 3));
        assert_eq!(cf.expand(4), vec![1, 1, 2, 2, 4]);
        assert_eq!(cf.a_invariant(), -4);
        let cf = closed_form(&case(GroupKind::Gl2, ActionSpace::Gl2, 2));
        assert_eq!(cf.expand(6), vec![1, 1, 3, 4, 8, 10, 17]);
        let cf = closed_form(&case(GroupKind::O2, ActionSpace::Gl2, 3));
        assert_eq!(cf.expand(3), vec![1, 1, 4, 5]);
        assert_eq!(cf.a_invariant(), -4);
        let cf = closed_form(&case(GroupKind::Gl2, ActionSpace::Sl2, 2));
        assert_eq!(cf.a_invariant(), -(3 + 2 + 1));
        for q in [3u64, 5] {
            assert_eq!(closed_form(&case(GroupKind::Sl2, ActionSpace::Sl2, q)).a_invariant(), -3);
            assert_eq!(closed_form(&case(GroupKind::Gl2, ActionSpace::Sl2, q)).a_invariant(), -3);
        }
        assert_eq!(closed_form(&case(GroupKind::O2, ActionSpace::Alternating, 3)).expand(4), vec![1, 0, 1, 0, 1]);
    }

    #[test]
    fn unknown_cases() {
        assert!(CaseSpec::new(GroupKind::Gl2, ActionSpace::Symmetric, field(3)).is_err());
        assert!(CaseSpec::new(GroupKind::P, ActionSpace::Gl2, field(3)).is_err());
    }
}
