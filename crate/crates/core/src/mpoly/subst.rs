use std::fmt;

use super::{Monomial, Poly, PolyError, Ring};
use crate::gf::Felt;
use crate::linalg;

/// A linear change of variables `x_i -> sum_j m[i][j] x_j`, stored as the
/// row-major coefficient matrix (row `i` is the image of variable `i`).
#[derive(Clone, PartialEq, Eq)]
pub struct LinearSubstitution {
    ring: Ring,
    matrix: Vec<Felt>,
}

impl fmt::Debug for LinearSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.arity();
        let rows: Vec<Vec<u16>> = (0..n).map(|i| self.row(i).iter().map(|c| c.0).collect()).collect();
        write!(f, "LinearSubstitution({rows:?})")
    }
}

impl LinearSubstitution {
    pub fn new(ring: &Ring, matrix: Vec<Felt>) -> Result<Self, PolyError> {
        let n = ring.arity();
        if matrix.len() != n * n {
            return Err(PolyError::ArityMismatch { expected: n * n, got: matrix.len() });
        }
        Ok(LinearSubstitution { ring: ring.clone(), matrix })
    }

    pub fn identity(ring: &Ring) -> Self {
        let n = ring.arity();
        let mut matrix = vec![Felt::ZERO; n * n];
        for i in 0..n {
            matrix[i * n + i] = Felt::ONE;
        }
        LinearSubstitution { ring: ring.clone(), matrix }
    }

    /// From one homogeneous linear image per variable.
    pub fn from_images(ring: &Ring, images: &[Poly]) -> Result<Self, PolyError> {
        let n = ring.arity();
        if images.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: images.len() });
        }
        let mut matrix = vec![Felt::ZERO; n * n];
        for (i, img) in images.iter().enumerate() {
            if **img.ring() != **ring {
                return Err(PolyError::RingMismatch);
            }
            for &(m, c) in img.terms() {
                let j = (0..n).find(|&j| m == Monomial::var(j)).ok_or(PolyError::NotLinear)?;
                matrix[i * n + j] = c;
            }
        }
        Ok(LinearSubstitution { ring: ring.clone(), matrix })
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn arity(&self) -> usize {
        self.ring.arity()
    }

    pub fn matrix(&self) -> &[Felt] {
        &self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Felt {
        self.matrix[i * self.arity() + j]
    }

    pub fn row(&self, i: usize) -> &[Felt] {
        let n = self.arity();
        &self.matrix[i * n..(i + 1) * n]
    }

    pub fn image(&self, i: usize) -> Poly {
        Poly::linear_form(&self.ring, self.row(i)).expect("row has ring arity")
    }

    pub fn images(&self) -> Vec<Poly> {
        (0..self.arity()).map(|i| self.image(i)).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(&self.ring)
    }

    /// Substitution equal to applying `self` and then `next`.
    pub fn then(&self, next: &LinearSubstitution) -> LinearSubstitution {
        let n = self.arity();
        let f = self.ring.field();
        let mut matrix = vec![Felt::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Felt::ZERO;
                for k in 0..n {
                    s = f.add(s, f.mul(self.entry(i, k), next.entry(k, j)));
                }
                matrix[i * n + j] = s;
            }
        }
        LinearSubstitution { ring: self.ring.clone(), matrix }
    }

    pub fn determinant(&self) -> Felt {
        linalg::determinant(self.ring.field(), self.arity(), &self.matrix)
    }

    pub fn inverse(&self) -> Option<LinearSubstitution> {
        linalg::inverse(self.ring.field(), self.arity(), &self.matrix)
            .map(|matrix| LinearSubstitution { ring: self.ring.clone(), matrix })
    }

    /// `rank(M - I)`; a pseudoreflection has rank one.
    pub fn rank_minus_identity(&self) -> usize {
        let n = self.arity();
        let f = self.ring.field();
        let rows: Vec<Vec<Felt>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { f.sub(self.entry(i, j), Felt::ONE) } else { self.entry(i, j) })
                    .collect()
            })
            .collect();
        linalg::rank(f, &rows)
    }

    pub fn transpose(&self) -> LinearSubstitution {
        let n = self.arity();
        let matrix = (0..n * n).map(|k| self.entry(k % n, k / n)).collect();
        LinearSubstitution { ring: self.ring.clone(), matrix }
    }

    pub fn apply(&self, f: &Poly) -> Result<Poly, PolyError> {
        if **f.ring() != *self.ring {
            return Err(PolyError::RingMismatch);
        }
        Ok(substitute(f, &self.images(), &self.ring))
    }
}

/// `f(x_0 -> images[0], ...)` with the images living in `target`. Evaluated by
/// nested Horner schemes, one variable at a time.
pub(crate) fn substitute(f: &Poly, images: &[Poly], target: &Ring) -> Poly {
    if f.is_zero() {
        return Poly::zero(target);
    }
    horner(f.terms(), 0, images, target)
}

fn horner(terms: &[(Monomial, Felt)], var: usize, images: &[Poly], target: &Ring) -> Poly {
    if var == images.len() {
        debug_assert_eq!(terms.len(), 1);
        return Poly::constant(target, terms[0].1);
    }
    // Ascending lex order groups the slice by this variable's exponent.
    let mut groups: Vec<(u32, &[(Monomial, Felt)])> = Vec::new();
    let mut start = 0;
    for k in 1..=terms.len() {
        if k == terms.len() || terms[k].0.exponent(var) != terms[start].0.exponent(var) {
            groups.push((terms[start].0.exponent(var), &terms[start..k]));
            start = k;
        }
    }
    let image = &images[var];
    let mut acc: Option<Poly> = None;
    let mut prev_exp = 0;
    for &(e, group) in groups.iter().rev() {
        let inner = horner(group, var + 1, images, target);
        acc = Some(match acc {
            None => inner,
            Some(mut a) => {
                for _ in e..prev_exp {
                    a = &a * image;
                }
                &a + &inner
            }
        });
        prev_exp = e;
    }
    let mut a = acc.expect("nonempty slice");
    for _ in 0..prev_exp {
        a = &a * image;
    }
    a
}

impl Poly {
    pub fn apply_substitution(&self, s: &LinearSubstitution) -> Result<Poly, PolyError> {
        s.apply(self)
    }

    /// Ring map into `target` sending each variable to a homogeneous linear
    /// form of `target`.
    pub fn project(&self, target: &Ring, assignment: &[Poly]) -> Result<Poly, PolyError> {
        let n = self.ring().arity();
        if assignment.len() != n {
            return Err(PolyError::ArityMismatch { expected: n, got: assignment.len() });
        }
        for (i, img) in assignment.iter().enumerate() {
            let name = &self.ring().vars()[i];
            if **img.ring() != **target {
                return Err(PolyError::MalformedAssignment(format!("image of `{name}` is not in the target ring")));
            }
            if !img.is_zero() && img.homogeneous_degree() != Some(1) {
                return Err(PolyError::MalformedAssignment(format!("image of `{name}` is not linear")));
            }
        }
        if self.ring().field() != target.field() {
            return Err(PolyError::MalformedAssignment("coefficient fields differ".into()));
        }
        Ok(substitute(self, assignment, target))
    }
}
