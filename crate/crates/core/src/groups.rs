//! Finite matrix groups acting on 2x2 matrix spaces by conjugation, realized
//! as linear substitutions on coordinate functions.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldSpec, Felt};
use crate::linalg;
use crate::mpoly::{LinearSubstitution, Poly, Ring, RingSpec};

/// Largest group (source or image) handled by full enumeration.
pub const MAX_GROUP_ORDER: usize = 100_000;
/// Largest group handed to [`abelianization`].
pub const MAX_ABELIANIZATION_ORDER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group of order {0} exceeds the enumeration cap")]
    CapExceeded(usize),
    #[error("{group} does not act on {space}")]
    UnsupportedPairing { group: GroupKind, space: ActionSpace },
    #[error("operation needs the gl2 space, got {0}")]
    WrongSpace(ActionSpace),
    #[error("conjugation leaves the {0} space")]
    UnstableSpace(ActionSpace),
    #[error("matrix is singular")]
    Singular,
}

/// Row-major 2x2 matrix over `F_q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat2(pub [Felt; 4]);

impl Mat2 {
    pub fn new(a: Felt, b: Felt, c: Felt, d: Felt) -> Mat2 {
        Mat2([a, b, c, d])
    }

    pub fn identity() -> Mat2 {
        Mat2([Felt::ONE, Felt::ZERO, Felt::ZERO, Felt::ONE])
    }

    pub fn diag(x: Felt, y: Felt) -> Mat2 {
        Mat2([x, Felt::ZERO, Felt::ZERO, y])
    }

    pub fn entry(&self, i: usize, j: usize) -> Felt {
        self.0[2 * i + j]
    }

    pub fn mul(&self, f: &FieldSpec, o: &Mat2) -> Mat2 {
        let e = |i: usize, j: usize| f.add(f.mul(self.entry(i, 0), o.entry(0, j)), f.mul(self.entry(i, 1), o.entry(1, j)));
        Mat2([e(0, 0), e(0, 1), e(1, 0), e(1, 1)])
    }

    pub fn det(&self, f: &FieldSpec) -> Felt {
        f.sub(f.mul(self.0[0], self.0[3]), f.mul(self.0[1], self.0[2]))
    }

    pub fn inverse(&self, f: &FieldSpec) -> Result<Mat2, GroupError> {
        let di = f.inv(self.det(f)).map_err(|_| GroupError::Singular)?;
        let [a, b, c, d] = self.0;
        Ok(Mat2([f.mul(d, di), f.neg(f.mul(b, di)), f.neg(f.mul(c, di)), f.mul(a, di)]))
    }

    pub fn transpose(&self) -> Mat2 {
        let [a, b, c, d] = self.0;
        Mat2([a, c, b, d])
    }

    pub fn is_scalar(&self) -> bool {
        self.0[1].is_zero() && self.0[2].is_zero() && self.0[0] == self.0[3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupKind {
    Gl2,
    Sl2,
    O2,
    /// The unipotent upper triangular group `[1 K; 0 1]`.
    P,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupId {
    pub kind: GroupKind,
    /// Adjoin the swap `a <-> d` to the image.
    pub extend_tau_ad: bool,
}

impl GroupId {
    pub fn plain(kind: GroupKind) -> GroupId {
        GroupId { kind, extend_tau_ad: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionSpace {
    /// All matrices `[a b; c d]`.
    Gl2,
    /// Traceless matrices `[a b; c -a]`.
    Sl2,
    /// Symmetric matrices `[a b; b d]`.
    Symmetric,
    /// Alternating matrices `[0 b; -b 0]`.
    Alternating,
}

impl ActionSpace {
    pub const ALL: [ActionSpace; 4] = [ActionSpace::Gl2, ActionSpace::Sl2, ActionSpace::Symmetric, ActionSpace::Alternating];

    pub fn name(self) -> &'static str {
        match self {
            ActionSpace::Gl2 => "gl2",
            ActionSpace::Sl2 => "sl2",
            ActionSpace::Symmetric => "symmetric",
            ActionSpace::Alternating => "alternating",
        }
    }

    pub fn vars(self) -> &'static [&'static str] {
        match self {
            ActionSpace::Gl2 => &["a", "b", "c", "d"],
            ActionSpace::Sl2 => &["a", "b", "c"],
            ActionSpace::Symmetric => &["a", "b", "d"],
            ActionSpace::Alternating => &["b"],
        }
    }

    pub fn ring(self, field: Arc<FieldSpec>) -> Ring {
        RingSpec::new(field, self.vars()).expect("fixed variable names are valid")
    }

    /// The generic matrix of the space, entries as coefficient vectors over
    /// the coordinates.
    fn generic(self, f: &FieldSpec) -> [Vec<Felt>; 4] {
        let n = self.vars().len();
        let unit = |i: usize, c: Felt| {
            let mut v = vec![Felt::ZERO; n];
            v[i] = c;
            v
        };
        let zero = vec![Felt::ZERO; n];
        let m1 = f.neg(Felt::ONE);
        match self {
            ActionSpace::Gl2 => [unit(0, Felt::ONE), unit(1, Felt::ONE), unit(2, Felt::ONE), unit(3, Felt::ONE)],
            ActionSpace::Sl2 => [unit(0, Felt::ONE), unit(1, Felt::ONE), unit(2, Felt::ONE), unit(0, m1)],
            ActionSpace::Symmetric => [unit(0, Felt::ONE), unit(1, Felt::ONE), unit(1, Felt::ONE), unit(2, Felt::ONE)],
            ActionSpace::Alternating => [zero.clone(), unit(0, Felt::ONE), unit(0, m1), zero],
        }
    }

    /// Coordinates of a matrix of linear forms, or `None` when the matrix is
    /// not in the space.
    fn coordinates(self, f: &FieldSpec, y: &[Vec<Felt>; 4]) -> Option<Vec<Vec<Felt>>> {
        let neg = |v: &Vec<Felt>| v.iter().map(|&x| f.neg(x)).collect::<Vec<_>>();
        let zero = |v: &Vec<Felt>| v.iter().all(|x| x.is_zero());
        match self {
            ActionSpace::Gl2 => Some(y.to_vec()),
            ActionSpace::Sl2 => (y[3] == neg(&y[0])).then(|| vec![y[0].clone(), y[1].clone(), y[2].clone()]),
            ActionSpace::Symmetric => (y[1] == y[2]).then(|| vec![y[0].clone(), y[1].clone(), y[3].clone()]),
            ActionSpace::Alternating => {
                (zero(&y[0]) && zero(&y[3]) && y[2] == neg(&y[1])).then(|| vec![y[1].clone()])
            }
        }
    }
}

impl fmt::Display for ActionSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActionSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActionSpace::ALL
            .into_iter()
            .find(|sp| sp.name() == s)
            .ok_or_else(|| format!("unknown space `{s}` (expected gl2, sl2, symmetric or alternating)"))
    }
}

impl GroupKind {
    pub fn name(self) -> &'static str {
        match self {
            GroupKind::Gl2 => "gl2",
            GroupKind::Sl2 => "sl2",
            GroupKind::O2 => "o2",
            GroupKind::P => "p",
        }
    }

    pub fn acts_on(self, space: ActionSpace) -> bool {
        use ActionSpace as S;
        match self {
            GroupKind::Gl2 | GroupKind::Sl2 | GroupKind::P => matches!(space, S::Gl2 | S::Sl2),
            GroupKind::O2 => matches!(space, S::Gl2 | S::Symmetric | S::Alternating),
        }
    }

    /// Expected `|G|` over `F_q`.
    pub fn order(self, q: u64) -> u64 {
        match self {
            GroupKind::Gl2 => (q * q - 1) * (q * q - q),
            GroupKind::Sl2 => (q * q - 1) * q,
            GroupKind::P => q,
            GroupKind::O2 if q.is_multiple_of(2) => q,
            GroupKind::O2 if q % 4 == 1 => 2 * (q - 1),
            GroupKind::O2 => 2 * (q + 1),
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gl2" => Ok(GroupKind::Gl2),
            "sl2" => Ok(GroupKind::Sl2),
            "o2" => Ok(GroupKind::O2),
            "p" => Ok(GroupKind::P),
            _ => Err(format!("unknown group `{s}` (expected gl2, sl2, o2 or p)")),
        }
    }
}

/// All elements of the group, in a deterministic order.
pub fn enumerate_group(kind: GroupKind, f: &FieldSpec) -> Result<Vec<Mat2>, GroupError> {
    let q = f.order() as u64;
    let order = kind.order(q) as usize;
    if order > MAX_GROUP_ORDER {
        return Err(GroupError::CapExceeded(order));
    }
    let mut out = Vec::with_capacity(order);
    match kind {
        GroupKind::Gl2 | GroupKind::Sl2 => {
            for a in f.elements() {
                for b in f.elements() {
                    for c in f.elements() {
                        for d in f.elements() {
                            let m = Mat2::new(a, b, c, d);
                            let det = m.det(f);
                            if (kind == GroupKind::Gl2 && !det.is_zero()) || det == Felt::ONE {
                                out.push(m);
                            }
                        }
                    }
                }
            }
        }
        GroupKind::P => out.extend(f.elements().map(|t| Mat2::new(Felt::ONE, t, Felt::ZERO, Felt::ONE))),
        GroupKind::O2 => {
            let m1 = f.neg(Felt::ONE);
            let signs: Vec<Felt> = if f.characteristic() == 2 { vec![Felt::ONE] } else { vec![Felt::ONE, m1] };
            for s in f.elements() {
                for t in f.elements() {
                    if f.add(f.mul(s, s), f.mul(t, t)) != Felt::ONE {
                        continue;
                    }
                    for &eps in &signs {
                        out.push(Mat2::new(s, t, f.neg(f.mul(eps, t)), f.mul(eps, s)));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Closure of `gens` under multiplication.
pub fn matrix_closure(f: &FieldSpec, gens: &[Mat2]) -> Result<Vec<Mat2>, GroupError> {
    let mut seen: FxHashSet<Mat2> = FxHashSet::default();
    let mut out = vec![Mat2::identity()];
    seen.insert(Mat2::identity());
    let mut queue = VecDeque::from([Mat2::identity()]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.mul(f, g);
            if seen.insert(y) {
                if out.len() >= MAX_GROUP_ORDER {
                    return Err(GroupError::CapExceeded(out.len()));
                }
                out.push(y);
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// Generating matrices: fixed choices for `GL_2` and `SL_2`, a greedy
/// selection from the enumeration otherwise.
pub fn group_generators(kind: GroupKind, f: &FieldSpec, elements: &[Mat2]) -> Result<Vec<Mat2>, GroupError> {
    let (o, z) = (Felt::ONE, Felt::ZERO);
    let g = f.generator();
    let upper = Mat2::new(o, o, z, o);
    match kind {
        GroupKind::Gl2 => Ok(vec![Mat2::diag(g, o), upper, Mat2::new(z, o, o, z)]),
        GroupKind::Sl2 => {
            let gi = f.inv(g).expect("generator is nonzero");
            Ok(vec![upper, Mat2::new(o, z, o, o), Mat2::diag(g, gi)])
        }
        GroupKind::O2 | GroupKind::P => {
            let mut gens = Vec::new();
            let mut span: FxHashSet<Mat2> = [Mat2::identity()].into_iter().collect();
            for &m in elements {
                if !span.contains(&m) {
                    gens.push(m);
                    span = matrix_closure(f, &gens)?.into_iter().collect();
                }
            }
            Ok(gens)
        }
    }
}

/// The substitution induced by `sigma`: each coordinate function goes to the
/// matching entry of `sigma^-1 X sigma`.
pub fn conjugation_substitution(space: ActionSpace, ring: &Ring, sigma: &Mat2) -> Result<LinearSubstitution, GroupError> {
    let f = ring.field();
    let inv = sigma.inverse(f)?;
    let x = space.generic(f);
    let n = ring.arity();
    let lin = |terms: [(Felt, usize); 4]| {
        let mut v = vec![Felt::ZERO; n];
        for (c, k) in terms {
            for (vi, &xi) in v.iter_mut().zip(&x[k]) {
                *vi = f.add(*vi, f.mul(c, xi));
            }
        }
        v
    };
    // (inv X sigma)_{ij} = sum_{k,l} inv_{ik} X_{kl} sigma_{lj}
    let entry = |i: usize, j: usize| {
        lin([
            (f.mul(inv.entry(i, 0), sigma.entry(0, j)), 0),
            (f.mul(inv.entry(i, 0), sigma.entry(1, j)), 1),
            (f.mul(inv.entry(i, 1), sigma.entry(0, j)), 2),
            (f.mul(inv.entry(i, 1), sigma.entry(1, j)), 3),
        ])
    };
    let y = [entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)];
    let rows = space.coordinates(f, &y).ok_or(GroupError::UnstableSpace(space))?;
    Ok(LinearSubstitution::new(ring, rows.concat()).expect("square matrix of the ring's arity"))
}

/// The swap `a <-> d` on the gl2 coordinates.
pub fn tau_ad_substitution(ring: &Ring) -> Result<LinearSubstitution, GroupError> {
    if ring.vars() != ActionSpace::Gl2.vars() {
        return Err(GroupError::WrongSpace(ActionSpace::Sl2));
    }
    let (o, z) = (Felt::ONE, Felt::ZERO);
    let m = vec![z, z, z, o, z, o, z, z, z, z, o, z, o, z, z, z];
    Ok(LinearSubstitution::new(ring, m).expect("4x4 matrix"))
}

/// Closure of a set of substitutions under composition.
pub fn substitution_closure(ring: &Ring, gens: &[LinearSubstitution]) -> Result<Vec<LinearSubstitution>, GroupError> {
    let id = LinearSubstitution::identity(ring);
    let mut seen: FxHashSet<Vec<Felt>> = FxHashSet::default();
    seen.insert(id.matrix().to_vec());
    let mut out = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.matrix().to_vec()) {
                if out.len() >= MAX_GROUP_ORDER {
                    return Err(GroupError::CapExceeded(out.len()));
                }
                out.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    Ok(out)
}

/// A group acting on one coordinate space, with its faithful image.
#[derive(Clone, Debug)]
pub struct GroupAction {
    id: GroupId,
    space: ActionSpace,
    ring: Ring,
    elements: Vec<Mat2>,
    substitutions: Vec<LinearSubstitution>,
    generators: Vec<LinearSubstitution>,
    source_order: usize,
}

/// Serialized summary of an action.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub id: GroupId,
    pub q: u32,
    pub source_order: usize,
    pub image_order: usize,
}

pub fn conjugation_action(id: GroupId, space: ActionSpace, field: Arc<FieldSpec>) -> Result<GroupAction, GroupError> {
    if !id.kind.acts_on(space) {
        return Err(GroupError::UnsupportedPairing { group: id.kind, space });
    }
    let ring = space.ring(field);
    let f = ring.field();
    let elements = enumerate_group(id.kind, f)?;
    let mut seen: FxHashSet<Vec<Felt>> = FxHashSet::default();
    let id_sub = LinearSubstitution::identity(&ring);
    seen.insert(id_sub.matrix().to_vec());
    let mut substitutions = vec![id_sub];
    for m in &elements {
        let s = conjugation_substitution(space, &ring, m)?;
        if seen.insert(s.matrix().to_vec()) {
            substitutions.push(s);
        }
    }
    let mut generators = Vec::new();
    let mut gen_seen: FxHashSet<Vec<Felt>> = FxHashSet::default();
    for m in group_generators(id.kind, f, &elements)? {
        let s = conjugation_substitution(space, &ring, &m)?;
        if !s.is_identity() && gen_seen.insert(s.matrix().to_vec()) {
            generators.push(s);
        }
    }
    let action = GroupAction { id: GroupId::plain(id.kind), space, ring, source_order: elements.len(), elements, substitutions, generators };
    if id.extend_tau_ad {
        extend_gamma(&action)
    } else {
        Ok(action)
    }
}

/// `Gamma`: the image extended by the swap `a <-> d`.
pub fn extend_gamma(action: &GroupAction) -> Result<GroupAction, GroupError> {
    if action.space != ActionSpace::Gl2 {
        return Err(GroupError::WrongSpace(action.space));
    }
    let tau = tau_ad_substitution(&action.ring)?;
    let mut gens = action.generators.clone();
    gens.push(tau);
    let substitutions = substitution_closure(&action.ring, &gens)?;
    Ok(GroupAction {
        id: GroupId { kind: action.id.kind, extend_tau_ad: true },
        space: action.space,
        ring: action.ring.clone(),
        elements: action.elements.clone(),
        substitutions,
        generators: gens,
        source_order: 2 * action.source_order,
    })
}

impl GroupAction {
    pub fn id(&self) -> GroupId {
        self.id
    }

    pub fn space(&self) -> ActionSpace {
        self.space
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn field(&self) -> &FieldSpec {
        self.ring.field()
    }

    /// Source matrices; for `Gamma` these are the matrices of the base group.
    pub fn elements(&self) -> &[Mat2] {
        &self.elements
    }

    /// The faithful image, identity first.
    pub fn substitutions(&self) -> &[LinearSubstitution] {
        &self.substitutions
    }

    pub fn generators(&self) -> &[LinearSubstitution] {
        &self.generators
    }

    pub fn source_order(&self) -> usize {
        self.source_order
    }

    pub fn image_order(&self) -> usize {
        self.substitutions.len()
    }

    pub fn substitution_of(&self, m: &Mat2) -> Result<LinearSubstitution, GroupError> {
        conjugation_substitution(self.space, &self.ring, m)
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            id: self.id,
            q: self.field().order(),
            source_order: self.source_order,
            image_order: self.image_order(),
        }
    }

    /// Whether `f` is fixed by every generator.
    pub fn fixes(&self, f: &Poly) -> bool {
        self.generators.iter().all(|s| f.apply_substitution(s).as_ref() == Ok(f))
    }

    /// Whether `f` is fixed by every element of the image.
    pub fn fixes_all(&self, f: &Poly) -> bool {
        self.substitutions.iter().all(|s| f.apply_substitution(s).as_ref() == Ok(f))
    }
}

/// `dim` of the subspace of the space fixed by every matrix in `subgroup`.
pub fn fixed_subspace_dim(action: &GroupAction, subgroup: &[Mat2]) -> Result<usize, GroupError> {
    let f = action.field();
    let n = action.ring.arity();
    let mut rows = Vec::new();
    for m in subgroup {
        let s = action.substitution_of(m)?;
        for i in 0..n {
            let mut r = s.row(i).to_vec();
            r[i] = f.sub(r[i], Felt::ONE);
            rows.push(r);
        }
    }
    Ok(n - linalg::rank(f, &rows))
}

/// Number of image elements `s` with `rank(s - 1) = 1`.
pub fn pseudoreflection_scan(action: &GroupAction) -> usize {
    action.substitutions.iter().filter(|s| s.rank_minus_identity() == 1).count()
}

pub fn representation_dets(action: &GroupAction) -> BTreeSet<Felt> {
    action.substitutions.iter().map(|s| s.determinant()).collect()
}

/// Structure of `G / [G, G]` as invariant factors `d_1 | d_2 | ...`, all
/// greater than one; empty for a perfect group.
pub fn abelianization(elements: &[LinearSubstitution], generators: &[LinearSubstitution]) -> Result<Vec<u64>, GroupError> {
    if elements.len() > MAX_ABELIANIZATION_ORDER {
        return Err(GroupError::CapExceeded(elements.len()));
    }
    let Some(first) = elements.first() else {
        return Ok(Vec::new());
    };
    let ring = first.ring().clone();
    let key = |s: &LinearSubstitution| s.matrix().to_vec();
    let inv = |s: &LinearSubstitution| s.inverse().expect("group elements are invertible");
    // Commutator subgroup: normal closure of the generator commutators.
    let mut seeds = Vec::new();
    for x in generators {
        for y in generators {
            let c = inv(x).then(&inv(y)).then(x).then(y);
            if !c.is_identity() {
                seeds.push(c);
            }
        }
    }
    let mut h: FxHashSet<Vec<Felt>> = FxHashSet::default();
    let id = LinearSubstitution::identity(&ring);
    h.insert(key(&id));
    let mut members = vec![id];
    let mut queue: VecDeque<LinearSubstitution> = seeds.into_iter().collect();
    while let Some(c) = queue.pop_front() {
        if h.contains(&key(&c)) {
            continue;
        }
        // Adjoin c, then close under products and conjugation by generators.
        let mut frontier = vec![c];
        while let Some(x) = frontier.pop() {
            if !h.insert(key(&x)) {
                continue;
            }
            members.push(x.clone());
            for m in members.clone() {
                for y in [m.then(&x), x.then(&m)] {
                    if !h.contains(&key(&y)) {
                        frontier.push(y);
                    }
                }
            }
            for g in generators {
                let y = inv(g).then(&x).then(g);
                if !h.contains(&key(&y)) {
                    frontier.push(y);
                }
            }
        }
    }
    // Cosets of H and the orders of their classes.
    let mut coset_of: FxHashMap<Vec<Felt>, usize> = FxHashMap::default();
    let mut reps: Vec<&LinearSubstitution> = Vec::new();
    for x in elements {
        if coset_of.contains_key(&key(x)) {
            continue;
        }
        let id = reps.len();
        reps.push(x);
        for m in &members {
            coset_of.insert(key(&x.then(m)), id);
        }
    }
    let mut order_counts: BTreeMap<u64, u64> = BTreeMap::new();
    for x in &reps {
        let mut y = (*x).clone();
        let mut k = 1u64;
        while !h.contains(&key(&y)) {
            y = y.then(x);
            k += 1;
        }
        *order_counts.entry(k).or_default() += 1;
    }
    Ok(invariant_factors(reps.len() as u64, &order_counts))
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Invariant factors of a finite abelian group from its element-order counts.
fn invariant_factors(order: u64, counts: &BTreeMap<u64, u64>) -> Vec<u64> {
    let mut factors: Vec<u64> = Vec::new();
    for l in prime_factors(order) {
        // ilog_l #{x : x^(l^j) = 1} = sum_i min(j, e_i).
        let log_count = |j: u32| -> u32 {
            let lj = l.pow(j);
            let c: u64 = counts.iter().filter(|(k, _)| lj % **k == 0).map(|(_, c)| c).sum();
            c.ilog(l)
        };
        let mut exps: Vec<u32> = Vec::new();
        let mut j = 1;
        let mut prev = 0;
        loop {
            let cur = log_count(j);
            let at_least = cur - prev;
            if at_least == 0 {
                break;
            }
            // at_least = #{i : e_i >= j}
            if exps.len() < at_least as usize {
                exps.resize(at_least as usize, 0);
            }
            for e in exps.iter_mut().take(at_least as usize) {
                *e = j;
            }
            prev = cur;
            j += 1;
        }
        // Largest exponents go to the last invariant factors.
        exps.sort_unstable();
        let k = exps.len();
        if factors.len() < k {
            let pad = k - factors.len();
            let mut grown = vec![1u64; pad];
            grown.extend_from_slice(&factors);
            factors = grown;
        }
        let offset = factors.len() - k;
        for (i, e) in exps.into_iter().enumerate() {
            factors[offset + i] *= l.pow(e);
        }
    }
    factors
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `|Hom(G_ab, K^x)| = prod gcd(d_i, q - 1)`.
pub fn class_group_order(action: &GroupAction) -> Result<u64, GroupError> {
    let q = action.field().order() as u64;
    let factors = abelianization(action.substitutions(), action.generators())?;
    Ok(factors.iter().map(|&d| gcd(d, q - 1)).product())
}

/// The distinct images of `f`, in order of first appearance.
pub fn orbit(f: &Poly, action: &GroupAction) -> Result<Vec<Poly>, GroupError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in action.substitutions() {
        let g = f.apply_substitution(s).map_err(|_| GroupError::WrongSpace(action.space))?;
        if seen.insert(g.clone()) {
            out.push(g);
        }
    }
    Ok(out)
}

pub fn orbit_product(f: &Poly, action: &GroupAction) -> Result<Poly, GroupError> {
    let orbit = orbit(f, action)?;
    Ok(Poly::product(action.ring(), orbit.iter()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u64) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::of_order(q).unwrap())
    }

    fn action(kind: GroupKind, space: ActionSpace, q: u64) -> GroupAction {
        conjugation_action(GroupId::plain(kind), space, field(q)).unwrap()
    }

    #[test]
    fn group_orders() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = field(q);
            for kind in [GroupKind::Gl2, GroupKind::Sl2, GroupKind::O2, GroupKind::P] {
                let els = enumerate_group(kind, &f).unwrap();
                assert_eq!(els.len() as u64, kind.order(q), "{kind} q={q}");
                let set: HashSet<Mat2> = els.iter().copied().collect();
                assert_eq!(set.len(), els.len());
                if q <= 4 {
                    for x in &els {
                        for y in &els {
                            assert!(set.contains(&x.mul(&f, y)));
                        }
                    }
                }
            }
        }
        let o2: HashSet<Mat2> = enumerate_group(GroupKind::O2, &field(2)).unwrap().into_iter().collect();
        assert_eq!(o2, [Mat2::identity(), Mat2::new(Felt(0), Felt(1), Felt(1), Felt(0))].into_iter().collect());
    }

    #[test]
    fn o2_elements_are_orthogonal() {
        for q in [3u64, 4, 5, 9] {
            let f = field(q);
            for m in enumerate_group(GroupKind::O2, &f).unwrap() {
                assert_eq!(m.transpose().mul(&f, &m), Mat2::identity());
            }
        }
    }

    #[test]
    fn generators_generate() {
        for q in [2u64, 3, 4, 5, 7, 8, 9] {
            let f = field(q);
            for kind in [GroupKind::Gl2, GroupKind::Sl2, GroupKind::O2, GroupKind::P] {
                let els = enumerate_group(kind, &f).unwrap();
                let gens = group_generators(kind, &f, &els).unwrap();
                let closure: HashSet<Mat2> = matrix_closure(&f, &gens).unwrap().into_iter().collect();
                let full: HashSet<Mat2> = els.into_iter().collect();
                assert_eq!(closure, full, "{kind} q={q}");
            }
        }
    }

    #[test]
    fn image_orders() {
        for q in [2u64, 3, 4, 5] {
            let a = action(GroupKind::Gl2, ActionSpace::Gl2, q);
            assert_eq!(a.image_order() as u64, q * (q * q - 1));
            assert_eq!(a.image_order() as u64 * (q - 1), a.source_order() as u64);
            let o = action(GroupKind::O2, ActionSpace::Gl2, q);
            let expect = if q % 2 == 0 { o.source_order() } else { o.source_order() / 2 };
            assert_eq!(o.image_order(), expect);
        }
        assert_eq!(action(GroupKind::O2, ActionSpace::Gl2, 3).image_order(), 4);
        assert_eq!(action(GroupKind::Gl2, ActionSpace::Sl2, 4).image_order(), 4 * 3 * 5);
    }

    #[test]
    fn unsupported_pairings() {
        let err = conjugation_action(GroupId::plain(GroupKind::Gl2), ActionSpace::Symmetric, field(3));
        assert!(matches!(err, Err(GroupError::UnsupportedPairing { .. })));
        let err = conjugation_action(GroupId::plain(GroupKind::O2), ActionSpace::Sl2, field(3));
        assert!(matches!(err, Err(GroupError::UnsupportedPairing { .. })));
    }

    #[test]
    fn action_is_a_homomorphism_and_dual_compatible() {
        for (kind, space, q) in [
            (GroupKind::Gl2, ActionSpace::Gl2, 3u64),
            (GroupKind::Gl2, ActionSpace::Sl2, 2),
            (GroupKind::Sl2, ActionSpace::Sl2, 3),
            (GroupKind::O2, ActionSpace::Symmetric, 3),
            (GroupKind::O2, ActionSpace::Alternating, 5),
            (GroupKind::O2, ActionSpace::Gl2, 4),
        ] {
            let a = action(kind, space, q);
            let f = a.field();
            let els = a.elements();
            for (i, x) in els.iter().enumerate().step_by(3) {
                let sx = a.substitution_of(x).unwrap();
                for y in els.iter().skip(i % 5).step_by(7) {
                    let sy = a.substitution_of(y).unwrap();
                    let sxy = a.substitution_of(&x.mul(f, y)).unwrap();
                    assert_eq!(sxy, sy.then(&sx));
                }
                if space == ActionSpace::Gl2 {
                    assert_eq!(sx.transpose(), a.substitution_of(&x.transpose()).unwrap());
                }
            }
        }
    }

    #[test]
    fn o2_moves_b_minus_c_by_sign() {
        let a = action(GroupKind::O2, ActionSpace::Gl2, 5);
        let f = a.field();
        let bc = Poly::parse(a.ring(), "b + 4*c").unwrap();
        for m in a.elements() {
            let eps = f.mul(m.entry(1, 1), f.inv(m.entry(0, 0)).unwrap_or(Felt::ONE));
            let img = bc.apply_substitution(&a.substitution_of(m).unwrap()).unwrap();
            if !m.entry(0, 0).is_zero() {
                assert_eq!(img, bc.scale(eps));
            } else {
                assert!(img == bc || img == -&bc);
            }
        }
    }

    #[test]
    fn gamma_doubles_the_image() {
        for q in [2u64, 3] {
            let g = conjugation_action(GroupId { kind: GroupKind::Gl2, extend_tau_ad: true }, ActionSpace::Gl2, field(q)).unwrap();
            let base = action(GroupKind::Gl2, ActionSpace::Gl2, q);
            assert_eq!(g.image_order(), 2 * base.image_order());
            let tau = tau_ad_substitution(g.ring()).unwrap();
            assert!(tau.then(&tau).is_identity());
            assert!(pseudoreflection_scan(&g) > 0);
            let dets = representation_dets(&g);
            if q % 2 == 1 {
                assert_eq!(dets, [Felt::ONE, Felt(2)].into_iter().collect());
            }
        }
        assert_eq!(conjugation_action(GroupId { kind: GroupKind::Gl2, extend_tau_ad: true }, ActionSpace::Gl2, field(2)).unwrap().image_order(), 12);
    }

    #[test]
    fn group_lemmas() {
        for q in [2u64, 3, 4] {
            let a = action(GroupKind::Gl2, ActionSpace::Gl2, q);
            assert_eq!(representation_dets(&a), [Felt::ONE].into_iter().collect());
            assert_eq!(pseudoreflection_scan(&a), 0);
            let p = enumerate_group(GroupKind::P, a.field()).unwrap();
            assert_eq!(fixed_subspace_dim(&a, &p).unwrap(), 2);
            let s = action(GroupKind::Gl2, ActionSpace::Sl2, q);
            // [a b; 0 a] is traceless only in characteristic two.
            let expect = if q % 2 == 0 { 2 } else { 1 };
            assert_eq!(fixed_subspace_dim(&s, &p).unwrap(), expect);
            assert_eq!(fixed_subspace_dim(&a, &[Mat2::identity()]).unwrap(), 4);
            assert_eq!(pseudoreflection_scan(&s) > 0, q % 2 == 0);
        }
    }

    #[test]
    fn abelianizations() {
        assert_eq!(invariant_factors(4, &[(1, 1), (2, 3)].into_iter().collect()), vec![2, 2]);
        assert_eq!(invariant_factors(4, &[(1, 1), (2, 1), (4, 2)].into_iter().collect()), vec![4]);
        assert_eq!(invariant_factors(12, &[(1, 1), (2, 3), (3, 2), (6, 6)].into_iter().collect()), vec![2, 6]);
        let a = action(GroupKind::Gl2, ActionSpace::Gl2, 3);
        assert_eq!(abelianization(a.substitutions(), a.generators()).unwrap(), vec![2]);
        assert_eq!(class_group_order(&a).unwrap(), 2);
        let a = action(GroupKind::Gl2, ActionSpace::Gl2, 4);
        assert!(abelianization(a.substitutions(), a.generators()).unwrap().is_empty());
        assert_eq!(class_group_order(&a).unwrap(), 1);
        let o = action(GroupKind::O2, ActionSpace::Gl2, 5);
        assert_eq!(abelianization(o.substitutions(), o.generators()).unwrap(), vec![2, 2]);
        assert_eq!(class_group_order(&o).unwrap(), 4);
    }

    #[test]
    fn orbits() {
        let a = action(GroupKind::O2, ActionSpace::Gl2, 3);
        let x = Poly::parse(a.ring(), "a").unwrap();
        assert_eq!(orbit(&x, &a).unwrap().len(), 2);
        let g = action(GroupKind::Gl2, ActionSpace::Gl2, 3);
        let tr = Poly::parse(g.ring(), "a + d").unwrap();
        assert_eq!(orbit(&tr, &g).unwrap(), vec![tr.clone()]);
        assert_eq!(orbit_product(&tr, &g).unwrap(), tr);
    }
}
