//! Exact linear algebra over `F_q`: incremental echelon forms, ranks,
//! kernels, determinants and inverses.

use crate::gf::{FieldSpec, Felt};

const NO_PIVOT: u32 = u32::MAX;

/// Row space in semi-echelon form. Pivot rows are stored sparsely with a
/// leading coefficient of one; every stored row vanishes at the pivot columns
/// of the rows inserted before it.
#[derive(Clone, Debug)]
pub struct SemiEchelon<'f> {
    field: &'f FieldSpec,
    ncols: usize,
    rows: Vec<Vec<(u32, Felt)>>,
    pivot_row: Vec<u32>,
}

impl<'f> SemiEchelon<'f> {
    pub fn new(field: &'f FieldSpec, ncols: usize) -> Self {
        SemiEchelon { field, ncols, rows: Vec::new(), pivot_row: vec![NO_PIVOT; ncols] }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Pivot columns in insertion order.
    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r[0].0 as usize).collect()
    }

    /// Reduces `v` in place against the stored rows, scanning columns from
    /// the left. Afterwards `v` is zero at every pivot column.
    pub fn reduce(&self, v: &mut [Felt]) {
        let f = self.field;
        for col in 0..self.ncols {
            let c = v[col];
            if c.is_zero() {
                continue;
            }
            let r = self.pivot_row[col];
            if r == NO_PIVOT {
                continue;
            }
            let c = f.neg(c);
            for &(j, x) in &self.rows[r as usize] {
                let j = j as usize;
                v[j] = f.add(v[j], f.mul(c, x));
            }
        }
    }

    /// Inserts `v` and reports whether it enlarged the row space.
    pub fn insert(&mut self, mut v: Vec<Felt>) -> bool {
        self.reduce(&mut v);
        self.insert_reduced(&v)
    }

    /// Inserts a vector already reduced against this echelon form.
    pub fn insert_reduced(&mut self, v: &[Felt]) -> bool {
        let Some(lead) = v.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let f = self.field;
        let s = f.inv(v[lead]).expect("lead is nonzero");
        let row: Vec<(u32, Felt)> =
            v.iter().enumerate().skip(lead).filter(|(_, c)| !c.is_zero()).map(|(j, &c)| (j as u32, f.mul(s, c))).collect();
        self.pivot_row[lead] = self.rows.len() as u32;
        self.rows.push(row);
        true
    }

    pub fn contains(&self, v: &[Felt]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w);
        w.iter().all(|c| c.is_zero())
    }

    /// The unique reduced row echelon basis, rows ordered by pivot column.
    pub fn rref(&self) -> Vec<Vec<Felt>> {
        let f = self.field;
        let mut order: Vec<usize> = (0..self.rows.len()).collect();
        order.sort_by_key(|&i| self.rows[i][0].0);
        let mut done: Vec<Option<Vec<Felt>>> = vec![None; self.ncols];
        for &i in order.iter().rev() {
            let mut v = vec![Felt::ZERO; self.ncols];
            for &(j, x) in &self.rows[i] {
                v[j as usize] = x;
            }
            let p = self.rows[i][0].0 as usize;
            for col in p + 1..self.ncols {
                let c = v[col];
                if c.is_zero() {
                    continue;
                }
                if let Some(other) = &done[col] {
                    let c = f.neg(c);
                    for (vj, &oj) in v.iter_mut().zip(other).skip(col) {
                        if !oj.is_zero() {
                            *vj = f.add(*vj, f.mul(c, oj));
                        }
                    }
                }
            }
            done[p] = Some(v);
        }
        order.iter().map(|&i| done[self.rows[i][0].0 as usize].take().expect("row was finalized")).collect()
    }
}

pub fn rank(field: &FieldSpec, rows: &[Vec<Felt>]) -> usize {
    let Some(first) = rows.first() else {
        return 0;
    };
    let mut e = SemiEchelon::new(field, first.len());
    for r in rows {
        if e.is_full() {
            break;
        }
        e.insert(r.clone());
    }
    e.rank()
}

/// Basis of `{x : sum_i x_i rows[i] = 0}`, in reduced echelon form.
pub fn left_kernel(field: &FieldSpec, rows: &[Vec<Felt>], ncols: usize) -> Vec<Vec<Felt>> {
    let k = rows.len();
    let mut e = SemiEchelon::new(field, ncols + k);
    let mut kernel = SemiEchelon::new(field, k);
    for (i, r) in rows.iter().enumerate() {
        let mut v = Vec::with_capacity(ncols + k);
        v.extend_from_slice(r);
        v.resize(ncols + k, Felt::ZERO);
        v[ncols + i] = Felt::ONE;
        e.reduce(&mut v);
        if v[..ncols].iter().all(|c| c.is_zero()) {
            kernel.insert(v[ncols..].to_vec());
        } else {
            e.insert_reduced(&v);
        }
    }
    kernel.rref()
}

/// Reduced echelon basis of the span of `rows`.
pub fn row_space(field: &FieldSpec, rows: &[Vec<Felt>], ncols: usize) -> Vec<Vec<Felt>> {
    let mut e = SemiEchelon::new(field, ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.rref()
}

/// Determinant of a row-major `n x n` matrix.
pub fn determinant(field: &FieldSpec, n: usize, matrix: &[Felt]) -> Felt {
    let mut m = matrix.to_vec();
    let mut det = Felt::ONE;
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !m[r * n + col].is_zero()) else {
            return Felt::ZERO;
        };
        if p != col {
            for j in 0..n {
                m.swap(p * n + j, col * n + j);
            }
            det = field.neg(det);
        }
        let pv = m[col * n + col];
        det = field.mul(det, pv);
        let inv = field.inv(pv).expect("pivot is nonzero");
        for r in col + 1..n {
            let c = field.mul(m[r * n + col], inv);
            if c.is_zero() {
                continue;
            }
            for j in col..n {
                m[r * n + j] = field.sub(m[r * n + j], field.mul(c, m[col * n + j]));
            }
        }
    }
    det
}

/// Inverse of a row-major `n x n` matrix, if it is invertible.
pub fn inverse(field: &FieldSpec, n: usize, matrix: &[Felt]) -> Option<Vec<Felt>> {
    let w = 2 * n;
    let mut m = vec![Felt::ZERO; n * w];
    for i in 0..n {
        m[i * w..i * w + n].copy_from_slice(&matrix[i * n..i * n + n]);
        m[i * w + n + i] = Felt::ONE;
    }
    for col in 0..n {
        let p = (col..n).find(|&r| !m[r * w + col].is_zero())?;
        for j in 0..w {
            m.swap(p * w + j, col * w + j);
        }
        let inv = field.inv(m[col * w + col]).expect("pivot is nonzero");
        for j in 0..w {
            m[col * w + j] = field.mul(m[col * w + j], inv);
        }
        for r in 0..n {
            let c = m[r * w + col];
            if r == col || c.is_zero() {
                continue;
            }
            for j in 0..w {
                m[r * w + j] = field.sub(m[r * w + j], field.mul(c, m[col * w + j]));
            }
        }
    }
    Some((0..n).flat_map(|i| m[i * w + n..i * w + w].to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn felts(v: &[u16]) -> Vec<Felt> {
        v.iter().map(|&x| Felt(x)).collect()
    }

    fn mat_mul(f: &FieldSpec, n: usize, a: &[Felt], b: &[Felt]) -> Vec<Felt> {
        let mut out = vec![Felt::ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out[i * n + j] = f.add(out[i * n + j], f.mul(a[i * n + k], b[k * n + j]));
                }
            }
        }
        out
    }

    #[test]
    fn small_examples() {
        let f = FieldSpec::of_order(3).unwrap();
        let m = felts(&[1, 2, 2, 1]);
        assert_eq!(determinant(&f, 2, &m), Felt(0));
        assert!(inverse(&f, 2, &m).is_none());
        assert_eq!(rank(&f, &[felts(&[1, 2]), felts(&[2, 1])]), 1);
        let m = felts(&[0, 1, 1, 0]);
        assert_eq!(determinant(&f, 2, &m), Felt(2));
        assert_eq!(inverse(&f, 2, &m).unwrap(), m);
    }

    #[test]
    fn rref_is_canonical() {
        let f = FieldSpec::of_order(5).unwrap();
        let rows = vec![felts(&[0, 2, 4, 1]), felts(&[3, 1, 0, 0]), felts(&[3, 3, 4, 1])];
        let a = row_space(&f, &rows, 4);
        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(a, row_space(&f, &rev, 4));
        assert_eq!(a.len(), 2);
        assert_eq!(a[0][0], Felt::ONE);
        assert_eq!(a[1][0], Felt::ZERO);
        assert_eq!(a[0][1], Felt::ZERO);
    }

    #[test]
    fn kernel_of_dependent_rows() {
        let f = FieldSpec::of_order(7).unwrap();
        let rows = vec![felts(&[1, 2, 3]), felts(&[2, 4, 6]), felts(&[0, 1, 1])];
        let k = left_kernel(&f, &rows, 3);
        assert_eq!(k, vec![felts(&[1, 3, 0])]);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Vec<u16>> {
        prop::collection::vec(0u16..16, n * n)
    }

    proptest! {
        #[test]
        fn determinant_is_multiplicative(q in prop::sample::select(vec![2u64, 3, 4, 5, 7, 9, 16]), a in arb_matrix(4), b in arb_matrix(4)) {
            let f = FieldSpec::of_order(q).unwrap();
            let a: Vec<Felt> = a.iter().map(|&x| Felt(x % q as u16)).collect();
            let b: Vec<Felt> = b.iter().map(|&x| Felt(x % q as u16)).collect();
            let ab = mat_mul(&f, 4, &a, &b);
            prop_assert_eq!(determinant(&f, 4, &ab), f.mul(determinant(&f, 4, &a), determinant(&f, 4, &b)));
            match inverse(&f, 4, &a) {
                Some(inv) => {
                    let id: Vec<Felt> = (0..16).map(|i| if i % 5 == 0 { Felt::ONE } else { Felt::ZERO }).collect();
                    prop_assert_eq!(mat_mul(&f, 4, &a, &inv), id);
                }
                None => prop_assert!(determinant(&f, 4, &a).is_zero()),
            }
            let rows: Vec<Vec<Felt>> = a.chunks(4).map(|r| r.to_vec()).collect();
            prop_assert_eq!(rank(&f, &rows) == 4, !determinant(&f, 4, &a).is_zero());
        }

        #[test]
        fn kernel_vectors_annihilate(q in prop::sample::select(vec![2u64, 3, 5, 9]), raw in prop::collection::vec(prop::collection::vec(0u16..9, 5), 1..8)) {
            let f = FieldSpec::of_order(q).unwrap();
            let rows: Vec<Vec<Felt>> = raw.iter().map(|r| r.iter().map(|&x| Felt(x % q as u16)).collect()).collect();
            let k = left_kernel(&f, &rows, 5);
            prop_assert_eq!(k.len() + rank(&f, &rows), rows.len());
            for x in &k {
                let mut acc = [Felt::ZERO; 5];
                for (c, r) in x.iter().zip(&rows) {
                    for (a, &v) in acc.iter_mut().zip(r) {
                        *a = f.add(*a, f.mul(*c, v));
                    }
                }
                prop_assert!(acc.iter().all(|c| c.is_zero()));
            }
        }
    }
}
