//! Verification engine: graded invariant bases, Hilbert functions, system of
//! parameters checks, subring membership and per-case reports.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::{self, CaseLabel, CaseSpec, ClosedForm, ConstructionError, InvariantSuite, NamedPoly, RingType};
use crate::gf::{Felt, IrreducibleQuadratic};
use crate::groups::{self, ActionSpace, GroupAction, GroupError, GroupId, GroupKind};
use crate::linalg::{self, SemiEchelon};
use crate::mpoly::graded::count_monomials;
use crate::mpoly::{LinearSubstitution, Monomial, MonomialBasis, Poly, PolyError, Ring, RingSpec};
use crate::steenrod::steenrod_component;

/// Largest graded piece handed to the dense linear algebra.
pub const MAX_PIECE_DIM: u64 = 30_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LabError {
    #[error("degree {degree} piece has {dim} monomials, above the cap of {cap}")]
    SizeCap { degree: u32, dim: u64, cap: u64 },
    #[error("expected {expected} polynomials, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("input is not homogeneous")]
    NotHomogeneous,
    #[error("no invariant of degree {0} outside the subring")]
    NoSecondary(u32),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn check_piece(nvars: usize, degree: u32) -> Result<(), LabError> {
    let dim = count_monomials(nvars, degree);
    if dim > MAX_PIECE_DIM {
        return Err(LabError::SizeCap { degree, dim, cap: MAX_PIECE_DIM });
    }
    Ok(())
}

/// Which substitutions define the invariant condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BasisMode {
    /// The action's generators plus its monomial elements.
    #[default]
    Generators,
    /// Every element of the faithful image.
    AllElements,
}

/// Variable images of a monomial substitution: `x_i -> c_i x_{pi(i)}`.
fn monomial_images(s: &LinearSubstitution) -> Option<Vec<(usize, Felt)>> {
    (0..s.arity())
        .map(|i| {
            let row = s.row(i);
            let mut nz = row.iter().enumerate().filter(|(_, c)| !c.is_zero());
            let (j, &c) = nz.next()?;
            nz.next().is_none().then_some((j, c))
        })
        .collect()
}

fn apply_monomial(f: &crate::gf::FieldSpec, m: Monomial, n: usize, images: &[(usize, Felt)]) -> (Monomial, Felt) {
    let mut exps = [0u32; 4];
    let mut c = Felt::ONE;
    for (i, &(j, ci)) in images.iter().enumerate().take(n) {
        let e = m.exponent(i);
        exps[j] += e;
        c = f.mul(c, f.pow(ci, e as u64));
    }
    (Monomial::from_exponents(&exps[..n]), c)
}

/// Invariants of a group of monomial substitutions: one vector per orbit of
/// monomials whose scalars are consistent.
fn monomial_fixed_space(basis: &MonomialBasis, ring: &Ring, subs: &[Vec<(usize, Felt)>]) -> Vec<Poly> {
    let f = ring.field();
    let n = ring.arity();
    let mut value: Vec<Option<Felt>> = vec![None; basis.len()];
    let mut out = Vec::new();
    for start in 0..basis.len() {
        if value[start].is_some() {
            continue;
        }
        value[start] = Some(Felt::ONE);
        let mut orbit = vec![start];
        let mut consistent = true;
        let mut k = 0;
        while k < orbit.len() {
            let i = orbit[k];
            k += 1;
            let vi = value[i].expect("assigned when queued");
            for s in subs {
                let (m2, c) = apply_monomial(f, basis.monomials()[i], n, s);
                let j = basis.index_of(m2).expect("degree is preserved");
                let want = f.mul(vi, c);
                match value[j] {
                    None => {
                        value[j] = Some(want);
                        orbit.push(j);
                    }
                    Some(v) if v != want => consistent = false,
                    Some(_) => {}
                }
            }
        }
        if consistent {
            let terms = orbit.iter().map(|&i| (basis.monomials()[i], value[i].expect("assigned")));
            out.push(Poly::from_terms(ring, terms));
        }
    }
    out
}

/// Common kernel of `s - 1` restricted to the span of `current`.
fn restrict_kernel(basis: &MonomialBasis, current: &[Poly], s: &LinearSubstitution) -> Result<Vec<Poly>, LabError> {
    let ring = s.ring();
    let f = ring.field();
    let rows: Vec<Vec<Felt>> = current
        .par_iter()
        .map(|b| {
            let diff = b.apply_substitution(s)?.try_sub(b)?;
            Ok(basis.to_dense(&diff)?)
        })
        .collect::<Result<_, LabError>>()?;
    let kernel = linalg::left_kernel(f, &rows, basis.len());
    Ok(kernel
        .iter()
        .map(|lambda| {
            let mut acc = vec![Felt::ZERO; basis.len()];
            for (c, b) in lambda.iter().zip(current) {
                if c.is_zero() {
                    continue;
                }
                for &(m, x) in b.terms() {
                    let i = basis.index_of(m).expect("homogeneous of this degree");
                    acc[i] = f.add(acc[i], f.mul(*c, x));
                }
            }
            basis.to_poly(ring, &acc)
        })
        .collect())
}

/// A basis of the degree-`d` invariants, in reduced echelon form with respect
/// to descending lex order of monomials.
pub fn invariant_basis(action: &GroupAction, d: u32, mode: BasisMode) -> Result<Vec<Poly>, LabError> {
    let ring = action.ring();
    let n = ring.arity();
    check_piece(n, d)?;
    let basis = MonomialBasis::new(n, d);
    let pool: Vec<&LinearSubstitution> = match mode {
        BasisMode::Generators => action.generators().iter().collect(),
        BasisMode::AllElements => action.substitutions().iter().filter(|s| !s.is_identity()).collect(),
    };
    let mut monomial: Vec<Vec<(usize, Felt)>> = pool.iter().filter_map(|s| monomial_images(s)).collect();
    if mode == BasisMode::Generators {
        // Monomial elements of the image are handled combinatorially.
        monomial.extend(action.substitutions().iter().filter(|s| !s.is_identity()).filter_map(monomial_images));
    }
    let mut general: Vec<&LinearSubstitution> = pool.into_iter().filter(|s| monomial_images(s).is_none()).collect();
    general.sort_by_key(|s| s.matrix().iter().filter(|c| !c.is_zero()).count());
    let mut current = monomial_fixed_space(&basis, ring, &monomial);
    for s in general {
        if current.is_empty() {
            break;
        }
        current = restrict_kernel(&basis, &current, s)?;
    }
    let rows: Vec<Vec<Felt>> = current.iter().map(|p| basis.to_dense(p)).collect::<Result<_, _>>()?;
    Ok(linalg::row_space(ring.field(), &rows, basis.len()).iter().map(|v| basis.to_poly(ring, v)).collect())
}

/// Computed against expected invariant dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertData {
    pub dims: Vec<u64>,
    pub expected: Vec<u64>,
    pub a_invariant_expected: i64,
}

impl HilbertData {
    pub fn matches(&self) -> bool {
        self.dims == self.expected
    }
}

/// `dim` of the invariants in degrees `0..=max_degree`, each degree computed
/// independently.
pub fn invariant_dims(action: &GroupAction, max_degree: u32, mode: BasisMode) -> Result<Vec<u64>, LabError> {
    (0..=max_degree)
        .into_par_iter()
        .map(|d| invariant_basis(action, d, mode).map(|b| b.len() as u64))
        .collect()
}

pub fn expected_series(case: &CaseSpec, max_degree: u32) -> Vec<u64> {
    constructions::closed_form(case).expand(max_degree)
}

pub fn hilbert_function(case: &CaseSpec, action: &GroupAction, max_degree: u32) -> Result<HilbertData, LabError> {
    let form = constructions::closed_form(case);
    Ok(HilbertData {
        dims: invariant_dims(action, max_degree, BasisMode::Generators)?,
        expected: form.expand(max_degree),
        a_invariant_expected: form.a_invariant(),
    })
}

/// Dense coordinates of `m * f` for every monomial `m` of degree
/// `target - deg f`.
fn multiples(basis: &MonomialBasis, f: &Poly, fdeg: u32) -> Vec<Vec<Felt>> {
    let n = basis.nvars();
    if basis.degree() < fdeg || f.is_zero() {
        return Vec::new();
    }
    let shifts = MonomialBasis::new(n, basis.degree() - fdeg);
    shifts
        .monomials()
        .iter()
        .map(|&m| {
            let mut v = vec![Felt::ZERO; basis.len()];
            for &(t, c) in f.terms() {
                v[basis.index_of(t.mul(m)).expect("degree matches")] = c;
            }
            v
        })
        .collect()
}

/// Coefficients of `prod (1 - z^{d_i}) / (1 - z)^n` through `max`.
fn complete_intersection(degrees: &[u32], n: usize, max: u32) -> Vec<i64> {
    let len = max as usize + 1;
    let mut out = vec![0i64; len];
    out[0] = 1;
    for &d in degrees {
        for i in (d as usize..len).rev() {
            out[i] -= out[i - d as usize];
        }
    }
    for _ in 0..n {
        for i in 1..len {
            out[i] += out[i - 1];
        }
    }
    out
}

/// Outcome of [`hsop_check`], with the graded quotient dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HsopOutcome {
    pub pass: bool,
    pub quotient_dims: Vec<i64>,
    pub predicted: Vec<i64>,
    pub detail: String,
}

/// Whether homogeneous `fs` form a system of parameters: linear members are
/// eliminated by substitution, then the graded quotient must match the
/// complete-intersection series, which vanishes above `sum(d_i - 1)`.
pub fn hsop_check(fs: &[Poly]) -> Result<HsopOutcome, LabError> {
    let ring = fs.first().ok_or(LabError::Arity { expected: 1, got: 0 })?.ring().clone();
    if fs.len() != ring.arity() {
        return Err(LabError::Arity { expected: ring.arity(), got: fs.len() });
    }
    let mut degrees = Vec::with_capacity(fs.len());
    for f in fs {
        degrees.push(f.homogeneous_degree().ok_or(LabError::NotHomogeneous)?);
    }
    let mut ring = ring;
    let mut work: Vec<(Poly, u32)> = fs.iter().cloned().zip(degrees.iter().copied()).collect();
    while let Some(pos) = work.iter().position(|(_, d)| *d == 1) {
        let (lin, _) = work.remove(pos);
        if lin.is_zero() {
            return Ok(HsopOutcome {
                pass: false,
                quotient_dims: Vec::new(),
                predicted: Vec::new(),
                detail: "a linear member vanishes modulo the others".into(),
            });
        }
        let (next, images) = eliminate_linear(&ring, &lin)?;
        work = work.into_iter().map(|(f, d)| Ok((f.project(&next, &images)?, d))).collect::<Result<_, PolyError>>()?;
        ring = next;
    }
    let n = ring.arity();
    if n == 0 {
        return Ok(HsopOutcome { pass: true, quotient_dims: vec![1], predicted: vec![1], detail: "all members linear".into() });
    }
    let rest: Vec<u32> = work.iter().map(|(_, d)| *d).collect();
    let top = rest.iter().map(|d| d - 1).sum::<u32>() + 2;
    check_piece(n, top)?;
    let predicted = complete_intersection(&rest, n, top);
    let field = ring.field_arc().clone();
    let quotient_dims: Vec<i64> = (0..=top)
        .into_par_iter()
        .map(|t| {
            let basis = MonomialBasis::new(n, t);
            let mut e = SemiEchelon::new(&field, basis.len());
            'outer: for (f, d) in &work {
                for row in multiples(&basis, f, *d) {
                    if e.is_full() {
                        break 'outer;
                    }
                    e.insert(row);
                }
            }
            basis.len() as i64 - e.rank() as i64
        })
        .collect();
    let pass = quotient_dims == predicted;
    let detail = if pass {
        format!("quotient vanishes above degree {}", top - 2)
    } else {
        let bad = quotient_dims.iter().zip(&predicted).position(|(a, b)| a != b).unwrap_or(0);
        format!("degree {bad}: quotient {} vs predicted {}", quotient_dims[bad], predicted[bad])
    };
    Ok(HsopOutcome { pass, quotient_dims, predicted, detail })
}

/// Drops the last variable with a nonzero coefficient in `lin`, returning
/// the smaller ring and the images of the old variables.
fn eliminate_linear(ring: &Ring, lin: &Poly) -> Result<(Ring, Vec<Poly>), LabError> {
    let f = ring.field();
    let n = ring.arity();
    let coeffs: Vec<Felt> = (0..n).map(|i| lin.coefficient(Monomial::var(i))).collect();
    let k = (0..n).rev().find(|&i| !coeffs[i].is_zero()).ok_or(LabError::NotHomogeneous)?;
    let names: Vec<&str> = ring.vars().iter().enumerate().filter(|&(i, _)| i != k).map(|(_, v)| v.as_str()).collect();
    let next = RingSpec::new(ring.field_arc().clone(), &names)?;
    let ck = f.inv(coeffs[k]).expect("nonzero coefficient");
    let mut solved = vec![Felt::ZERO; n - 1];
    let mut images = Vec::with_capacity(n);
    let mut j = 0;
    for i in 0..n {
        if i == k {
            continue;
        }
        solved[j] = f.neg(f.mul(coeffs[i], ck));
        j += 1;
    }
    j = 0;
    for i in 0..n {
        if i == k {
            images.push(Poly::linear_form(&next, &solved)?);
        } else {
            images.push(Poly::var_at(&next, j));
            j += 1;
        }
    }
    Ok((next, images))
}

/// All products `prod g_i^{e_i}` of total degree `d`.
pub fn products_of_degree(gens: &[Poly], d: u32) -> Result<Vec<Poly>, LabError> {
    let ring = gens.first().ok_or(LabError::Arity { expected: 1, got: 0 })?.ring().clone();
    let mut degs = Vec::with_capacity(gens.len());
    for g in gens {
        degs.push(g.homogeneous_degree().ok_or(LabError::NotHomogeneous)?);
    }
    // Exponent tuples by bounded composition search, largest degrees first.
    let mut order: Vec<usize> = (0..gens.len()).filter(|&i| degs[i] > 0 && !gens[i].is_zero()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(degs[i]));
    let mut tuples: Vec<Vec<(usize, u32)>> = Vec::new();
    fn search(order: &[usize], degs: &[u32], left: u32, acc: &mut Vec<(usize, u32)>, out: &mut Vec<Vec<(usize, u32)>>) {
        let Some((&i, rest)) = order.split_first() else {
            if left == 0 {
                out.push(acc.clone());
            }
            return;
        };
        for e in (0..=left / degs[i]).rev() {
            acc.push((i, e));
            search(rest, degs, left - e * degs[i], acc, out);
            acc.pop();
        }
    }
    search(&order, &degs, d, &mut Vec::new(), &mut tuples);
    let mut powers: HashMap<(usize, u32), Poly> = HashMap::new();
    for t in &tuples {
        for &(i, e) in t {
            powers.entry((i, e)).or_insert_with(|| gens[i].pow(e));
        }
    }
    Ok(tuples
        .par_iter()
        .map(|t| {
            let mut p = Poly::one(&ring);
            for &(i, e) in t {
                if e > 0 {
                    p = &p * &powers[&(i, e)];
                }
            }
            p
        })
        .collect())
}

/// Echelon form of the degree-`d` part of the subring generated by `gens`.
fn subring_piece<'f>(field: &'f crate::gf::FieldSpec, basis: &MonomialBasis, gens: &[Poly]) -> Result<SemiEchelon<'f>, LabError> {
    let mut e = SemiEchelon::new(field, basis.len());
    if gens.is_empty() {
        if basis.degree() == 0 {
            e.insert(vec![Felt::ONE]);
        }
        return Ok(e);
    }
    for p in products_of_degree(gens, basis.degree())? {
        if e.is_full() {
            break;
        }
        e.insert(basis.to_dense(&p)?);
    }
    Ok(e)
}

/// Whether homogeneous `f` lies in the subring generated by `gens`.
pub fn subring_membership(f: &Poly, gens: &[Poly]) -> Result<bool, LabError> {
    if f.is_zero() {
        return Ok(true);
    }
    let d = f.homogeneous_degree().ok_or(LabError::NotHomogeneous)?;
    let n = f.ring().arity();
    check_piece(n, d)?;
    let basis = MonomialBasis::new(n, d);
    let e = subring_piece(f.field(), &basis, gens)?;
    Ok(e.contains(&basis.to_dense(f)?))
}

/// The first degree-`d` invariant (in echelon order) outside the subring
/// generated by `gens`.
pub fn find_secondary(action: &GroupAction, gens: &[Poly], d: u32) -> Result<Poly, LabError> {
    let ring = action.ring();
    let basis = MonomialBasis::new(ring.arity(), d);
    let inv = invariant_basis(action, d, BasisMode::Generators)?;
    let e = subring_piece(ring.field(), &basis, gens)?;
    for p in inv {
        if !e.contains(&basis.to_dense(&p)?) {
            return Ok(p);
        }
    }
    Err(LabError::NoSecondary(d))
}

/// `dim` of `R_d + eta R_{d - deg eta}` in each degree through `max_degree`.
pub fn module_span_dims(gens: &[Poly], eta: &Poly, max_degree: u32) -> Result<Vec<u64>, LabError> {
    let ring = eta.ring().clone();
    let k = eta.homogeneous_degree().ok_or(LabError::NotHomogeneous)?;
    let n = ring.arity();
    check_piece(n, max_degree)?;
    (0..=max_degree)
        .into_par_iter()
        .map(|d| {
            let basis = MonomialBasis::new(n, d);
            let mut e = subring_piece(ring.field(), &basis, gens)?;
            if d >= k {
                let lower: Vec<Poly> =
                    if d == k { vec![Poly::one(&ring)] } else { products_of_degree(gens, d - k)? };
                for p in lower {
                    if e.is_full() {
                        break;
                    }
                    e.insert(basis.to_dense(&(&p * eta))?);
                }
            }
            Ok(e.rank() as u64)
        })
        .collect()
}

/// One line of a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub case: CaseLabel,
    pub checks: Vec<Check>,
    pub dims: Vec<u64>,
    pub expected_dims: Vec<u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `degree,computed,expected` rows.
    pub fn dims_csv(&self) -> String {
        let mut out = String::from("degree,computed,expected\n");
        for (d, (c, e)) in self.dims.iter().zip(&self.expected_dims).enumerate() {
            out.push_str(&format!("{d},{c},{e}\n"));
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}/{} q={} ({})\n", self.case.group, self.case.space, self.case.q, self.case.field);
        for c in &self.checks {
            let mark = if c.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("  [{mark}] {}: expected {}, observed {}\n", c.name, c.expected, c.observed));
        }
        out
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub max_degree: Option<u32>,
    pub quadratic: Option<IrreducibleQuadratic>,
}

/// Default top degree for the Hilbert comparison: `max(q^2 + 2, 12)`, lowered
/// until the top piece fits under the size cap.
pub fn default_max_degree(case: &CaseSpec) -> u32 {
    let q = case.q() as u32;
    let n = case.space.vars().len();
    let mut d = (q * q + 2).max(12);
    while d > 12 && count_monomials(n, d) > 10_000 {
        d -= 1;
    }
    d
}

/// `|G-hat|` for the case.
pub fn expected_image_order(case: &CaseSpec) -> u64 {
    let q = case.q();
    let odd = case.odd();
    let pgl = q * (q * q - 1);
    match (case.group, case.space) {
        (GroupKind::Gl2, _) | (GroupKind::P, _) => pgl,
        (GroupKind::Sl2, _) => {
            if odd {
                pgl / 2
            } else {
                pgl
            }
        }
        (GroupKind::O2, ActionSpace::Alternating) => {
            if odd {
                2
            } else {
                1
            }
        }
        (GroupKind::O2, _) => {
            let g = GroupKind::O2.order(q);
            if odd {
                g / 2
            } else {
                g
            }
        }
    }
}

/// Whether the case's ring is a UFD according to the case table.
pub fn expected_ufd(case: &CaseSpec) -> bool {
    match (case.group, case.space) {
        (GroupKind::Gl2, ActionSpace::Gl2 | ActionSpace::Sl2) | (GroupKind::O2, ActionSpace::Gl2) => !case.odd(),
        _ => true,
    }
}

struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    fn record(&mut self, name: &str, expected: impl ToString, observed: impl ToString, pass: bool, start: Instant) {
        self.checks.push(Check {
            name: name.to_string(),
            expected: expected.to_string(),
            observed: observed.to_string(),
            pass,
            seconds: start.elapsed().as_secs_f64(),
        });
    }

    fn equal<T: PartialEq + std::fmt::Debug>(&mut self, name: &str, expected: T, observed: T, start: Instant) {
        let pass = expected == observed;
        self.record(name, format!("{expected:?}"), format!("{observed:?}"), pass, start);
    }

    fn error(&mut self, name: &str, expected: impl ToString, err: impl std::fmt::Display, start: Instant) {
        self.record(name, expected, format!("error: {err}"), false, start);
    }

    fn result<T: PartialEq + std::fmt::Debug, E: std::fmt::Display>(
        &mut self,
        name: &str,
        expected: T,
        observed: Result<T, E>,
        start: Instant,
    ) {
        match observed {
            Ok(v) => self.equal(name, expected, v, start),
            Err(e) => self.error(name, format!("{expected:?}"), e, start),
        }
    }
}

/// Whether `s` sends the product of `factors` to itself: the images must
/// permute the factors up to scalars whose product is one.
pub fn factored_fixed(factors: &[Poly], s: &LinearSubstitution) -> Result<bool, PolyError> {
    let Some(first) = factors.first() else {
        return Ok(true);
    };
    let f = first.field();
    let mut pool: FxHashMap<Poly, usize> = FxHashMap::default();
    let mut lc = Felt::ONE;
    for l in factors {
        *pool.entry(l.monic()).or_default() += 1;
        lc = f.mul(lc, l.leading_coefficient().unwrap_or(Felt::ZERO));
    }
    let mut image_lc = Felt::ONE;
    for l in factors {
        let img = l.apply_substitution(s)?;
        image_lc = f.mul(image_lc, img.leading_coefficient().unwrap_or(Felt::ZERO));
        match pool.get_mut(&img.monic()) {
            Some(k) if *k > 0 => *k -= 1,
            _ => return Ok(false),
        }
    }
    Ok(image_lc == lc)
}

/// Substitutions above this many terms per polynomial use factored checks
/// when factors are known.
const DIRECT_CHECK_TERMS: usize = 20_000;

fn invariance_observed(action: &GroupAction, p: &Poly, factors: Option<&[Poly]>, exhaustive: bool) -> Result<String, PolyError> {
    let subs: Vec<&LinearSubstitution> =
        if exhaustive { action.substitutions().iter().collect() } else { action.generators().iter().collect() };
    let scope = if exhaustive { "all" } else { "generators" };
    if let Some(fs) = factors.filter(|_| p.len() > DIRECT_CHECK_TERMS || action.field().order() >= 7) {
        let product = Poly::product(p.ring(), fs.iter());
        if product != *p {
            return Ok("factors do not multiply out".into());
        }
        for s in &subs {
            if !factored_fixed(fs, s)? {
                return Ok(format!("moved ({scope}, factored)"));
            }
        }
        return Ok(format!("fixed ({scope}, factored)"));
    }
    let moved = subs.par_iter().map(|s| p.apply_substitution(s).map(|img| img != *p)).collect::<Result<Vec<bool>, _>>()?;
    Ok(if moved.iter().any(|&m| m) { format!("moved ({scope})") } else { format!("fixed ({scope})") })
}

/// Runs every applicable check for one case.
pub fn verify_case(case: &CaseSpec, opts: &VerifyOptions) -> VerificationReport {
    let mut rec = Recorder { checks: Vec::new() };
    let q = case.q();
    let max_degree = opts.max_degree.unwrap_or_else(|| default_max_degree(case));
    let form: ClosedForm = constructions::closed_form(case);
    let expected_dims = form.expand(max_degree);
    let mut dims = Vec::new();
    let exhaustive = q <= 4;

    let t = Instant::now();
    let action = match case.action() {
        Ok(a) => a,
        Err(e) => {
            rec.error("group_action", "constructed", e, t);
            return VerificationReport { case: case.label(), checks: rec.checks, dims, expected_dims };
        }
    };
    rec.equal("group_order", case.group.order(q), action.source_order() as u64, t);
    let t = Instant::now();
    rec.equal("image_order", expected_image_order(case), action.image_order() as u64, t);

    let t = Instant::now();
    let g = opts.quadratic.unwrap_or_else(|| case.field.irreducible_quadratic());
    let mut suite = match constructions::build_suite(case, &g) {
        Ok(s) => s,
        Err(e) => {
            rec.error("suite", "constructed", e, t);
            return VerificationReport { case: case.label(), checks: rec.checks, dims, expected_dims };
        }
    };
    rec.equal("primary_degrees", form.denominator.clone(), suite.primary_degrees(), t);

    for np in suite.primaries.clone().iter().chain(suite.secondary.clone().iter()) {
        let t = Instant::now();
        let name = format!("invariance:{}", np.name);
        match invariance_observed(&action, &np.poly, suite.factors_of(&np.name), exhaustive) {
            Ok(obs) => rec.record(&name, "fixed", &obs, obs.starts_with("fixed"), t),
            Err(e) => rec.error(&name, "fixed", e, t),
        }
    }

    let t = Instant::now();
    let kind = if suite.expected_type == RingType::Hypersurface { 2 } else { 1 };
    let product: u64 = suite.primary_degrees().iter().map(|&d| d as u64).product();
    rec.equal("degree_product", kind * action.image_order() as u64, product, t);

    let t = Instant::now();
    match hsop_check(&suite.primary_polys()) {
        Ok(o) => rec.record("hsop", "system of parameters", &o.detail, o.pass, t),
        Err(e) => rec.error("hsop", "system of parameters", e, t),
    }

    steenrod_checks(case, &suite, &mut rec);

    let t = Instant::now();
    let expected_a = match (suite.expected_type, case.space.vars().len()) {
        (RingType::Hypersurface, n) => -(n as i64),
        (RingType::Polynomial, _) => -(suite.primary_degrees().iter().map(|&d| d as i64).sum::<i64>()),
    };
    rec.equal("a_invariant", expected_a, form.a_invariant(), t);

    let t = Instant::now();
    match invariant_dims(&action, max_degree, BasisMode::Generators) {
        Ok(d) => {
            dims = d;
            rec.record("hilbert", format!("{expected_dims:?}"), format!("{dims:?}"), dims == expected_dims, t);
        }
        Err(e) => rec.error("hilbert", format!("{expected_dims:?}"), e, t),
    }

    if suite.expected_type == RingType::Hypersurface {
        secondary_checks(case, &action, &mut suite, max_degree, &dims, &mut rec);
    }

    group_checks(case, &action, &g, &mut rec);

    VerificationReport { case: case.label(), checks: rec.checks, dims, expected_dims }
}

fn steenrod_checks(case: &CaseSpec, suite: &InvariantSuite, rec: &mut Recorder) {
    let t = Instant::now();
    match case.space {
        ActionSpace::Gl2 if case.group != GroupKind::O2 => {
            let p1 = steenrod_component(&suite.primaries[1].poly, 1);
            let formula = constructions::f3_formula(suite.primaries[1].poly.ring());
            rec.record("steenrod:f3", "P1(f2) = f3", if p1 == formula { "equal" } else { "differs" }, p1 == formula, t);
        }
        ActionSpace::Sl2 => {
            let ok = suite.get("pi_f3") == Some(&suite.primaries[1].poly);
            rec.record("steenrod:pi_f3", "P1(det) = pi(f3)", if ok { "equal" } else { "differs" }, ok, t);
        }
        _ => {}
    }
}

fn membership(rec: &mut Recorder, name: &str, f: &Poly, gens: &[Poly], expected: bool) {
    let t = Instant::now();
    let say = |b: bool| if b { "member" } else { "not a member" };
    match subring_membership(f, gens) {
        Ok(m) => rec.record(name, say(expected), say(m), m == expected, t),
        Err(e) => rec.error(name, say(expected), e, t),
    }
}

fn secondary_checks(
    case: &CaseSpec,
    action: &GroupAction,
    suite: &mut InvariantSuite,
    max_degree: u32,
    dims: &[u64],
    rec: &mut Recorder,
) {
    let gens = suite.primary_polys();
    let expected_deg = suite.expected_secondary_degree.unwrap_or(0);
    // Jacobians that land in R are checked as such; the module generator
    // is then searched for.
    if let Some(h) = suite.get("h").cloned().filter(|_| suite.secondary.is_none()) {
        membership(rec, "h_in_R", &h, &gens, true);
    }
    if suite.secondary.is_none() {
        let t = Instant::now();
        match find_secondary(action, &gens, expected_deg) {
            Ok(eta) => {
                rec.record("find_secondary", format!("degree {expected_deg}"), format!("found, {} terms", eta.len()), true, t);
                suite.secondary = Some(NamedPoly::new("eta", eta));
            }
            Err(e) => rec.error("find_secondary", format!("degree {expected_deg}"), e, t),
        }
    }
    let Some(sec) = suite.secondary.clone() else {
        return;
    };
    let t = Instant::now();
    rec.equal("secondary_degree", Some(expected_deg), sec.poly.homogeneous_degree(), t);
    if sec.name == "h" {
        membership(rec, "h_not_in_R", &sec.poly, &gens, false);
        let sq = &sec.poly * &sec.poly;
        membership(rec, "h_squared_in_R", &sq, &gens, true);
    }
    if case.group == GroupKind::Gl2 && case.space == ActionSpace::Gl2 {
        if let Some(h) = suite.get("h") {
            let t = Instant::now();
            let tau = groups::tau_ad_substitution(action.ring()).expect("gl2 ring");
            match h.apply_substitution(&tau) {
                Ok(img) => {
                    let ok = img == -h;
                    rec.record("tau_ad_sign", "tau(h) = -h", if ok { "tau(h) = -h" } else { "other" }, ok, t);
                }
                Err(e) => rec.error("tau_ad_sign", "tau(h) = -h", e, t),
            }
        }
    }
    let t = Instant::now();
    match module_span_dims(&gens, &sec.poly, max_degree) {
        Ok(span) => {
            let pass = span.as_slice() == dims;
            rec.record("decomposition", format!("R + R*{} spans {dims:?}", sec.name), format!("{span:?}"), pass, t);
        }
        Err(e) => rec.error("decomposition", "R + R*eta spans the invariants", e, t),
    }
}

fn group_checks(case: &CaseSpec, action: &GroupAction, g: &IrreducibleQuadratic, rec: &mut Recorder) {
    let q = case.q();
    let odd = case.odd();
    let t = Instant::now();
    let refl = groups::pseudoreflection_scan(action);
    match case.space {
        ActionSpace::Gl2 => rec.equal("pseudoreflections", 0, refl, t),
        ActionSpace::Sl2 => rec.record("pseudoreflections", if odd { "0" } else { ">= 1" }, refl, (refl > 0) == !odd, t),
        _ => {}
    }
    if case.space == ActionSpace::Gl2 {
        let t = Instant::now();
        let dets: Vec<u16> = groups::representation_dets(action).iter().map(|f| f.0).collect();
        rec.equal("representation_dets", vec![1u16], dets, t);
    }
    if matches!(case.group, GroupKind::Gl2 | GroupKind::Sl2) {
        let t = Instant::now();
        let expected = if case.space == ActionSpace::Gl2 || !odd { 2 } else { 1 };
        match groups::enumerate_group(GroupKind::P, &case.field) {
            Ok(p) => rec.result("fixed_subspace_P", expected, groups::fixed_subspace_dim(action, &p), t),
            Err(e) => rec.error("fixed_subspace_P", expected, e, t),
        }
    }
    if case.group == GroupKind::Gl2 && case.space == ActionSpace::Gl2 {
        let t = Instant::now();
        let ring = action.ring();
        let forms = constructions::omega_forms(ring, g);
        let seed = forms[0].clone();
        match groups::orbit(&seed, action) {
            Ok(mut orb) => {
                let mut want = forms.clone();
                orb.sort_by_key(|p| p.to_string());
                want.sort_by_key(|p| p.to_string());
                let pass = orb == want;
                rec.record("omega_orbit", format!("{} forms", q * q - q), format!("{} forms", orb.len()), pass, t);
            }
            Err(e) => rec.error("omega_orbit", q * q - q, e, t),
        }
        if q <= 5 {
            let t = Instant::now();
            match groups::extend_gamma(action) {
                Ok(gamma) => rec.equal("gamma_order", 2 * action.image_order(), gamma.image_order(), t),
                Err(e) => rec.error("gamma_order", 2 * action.image_order(), e, t),
            }
        }
    }
    if case.group == GroupKind::O2 && case.space == ActionSpace::Gl2 {
        let t = Instant::now();
        let a = Poly::var(action.ring(), "a").expect("gl2 ring");
        let g_order = GroupKind::O2.order(q) as usize;
        let expected = if odd { g_order / 4 } else { g_order };
        rec.result("orbit_of_a", expected, groups::orbit(&a, action).map(|o| o.len()), t);
    }
    let t = Instant::now();
    let ufd = expected_ufd(case);
    if matches!(case.space, ActionSpace::Gl2 | ActionSpace::Sl2) && (case.space == ActionSpace::Gl2 || odd) {
        // Class group is Hom(G-hat, K^x) when there are no pseudoreflections.
        let expected = if ufd {
            1
        } else if case.group == GroupKind::O2 {
            4
        } else {
            2
        };
        rec.result("class_group_order", expected, groups::class_group_order(action), t);
    } else {
        rec.record("class_group_order", "1 (polynomial ring)", "polynomial ring", true, t);
    }
}

/// Builds the degree-`d` invariant basis and checks each element against
/// the full image.
pub fn check_basis_exhaustively(action: &GroupAction, basis: &[Poly]) -> bool {
    basis.iter().all(|p| action.fixes_all(p))
}

/// Gamma action over the same field, for convenience.
pub fn gamma_action(case: &CaseSpec) -> Result<GroupAction, GroupError> {
    groups::conjugation_action(GroupId { kind: case.group, extend_tau_ad: true }, case.space, case.field.clone())
}
