//! Linear forms, subspaces of the space of linear forms, and invertible
//! coordinate changes. Everything is exact Gaussian elimination.

use std::fmt;

use crate::error::{precondition, Result};
use crate::field::{FieldSpec, Scalar};

pub type Matrix = Vec<Vec<Scalar>>;

/// A linear form, stored as its coefficient vector over `x_1..x_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FormVec(pub Vec<Scalar>);

impl FormVec {
    pub fn zero(field: FieldSpec, n: usize) -> Self {
        FormVec(vec![field.zero(); n])
    }

    pub fn unit(field: FieldSpec, n: usize, i: usize) -> Self {
        let mut v = Self::zero(field, n);
        v.0[i] = field.one();
        v
    }

    pub fn from_ints(field: FieldSpec, c: &[i64]) -> Self {
        FormVec(c.iter().map(|&x| field.int(x)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Scalar::is_zero)
    }

    /// Index of the first nonzero coefficient.
    pub fn lead(&self) -> Option<usize> {
        self.0.iter().position(|c| !c.is_zero())
    }

    /// Index of the last nonzero coefficient.
    pub fn last(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    /// Scaled so that the first nonzero coefficient is one.
    pub fn normalized(&self) -> FormVec {
        match self.lead() {
            None => self.clone(),
            Some(i) => {
                let inv = self.0[i].inv().expect("nonzero");
                self.scale(&inv)
            }
        }
    }

    /// The first nonzero coefficient; `self = lead_coeff * normalized()`.
    pub fn lead_coeff(&self) -> Option<&Scalar> {
        self.lead().map(|i| &self.0[i])
    }

    pub fn scale(&self, c: &Scalar) -> FormVec {
        FormVec(self.0.iter().map(|x| x * c).collect())
    }

    pub fn add(&self, o: &FormVec) -> FormVec {
        FormVec(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &FormVec) -> FormVec {
        FormVec(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    /// `self + c * o`.
    pub fn axpy(&self, c: &Scalar, o: &FormVec) -> FormVec {
        FormVec(self.0.iter().zip(&o.0).map(|(a, b)| a + &(c * b)).collect())
    }

    pub fn dot(&self, point: &[Scalar]) -> Scalar {
        let mut acc = point
            .first()
            .map(|p| p.field().zero())
            .unwrap_or_else(|| self.0[0].field().zero());
        for (a, b) in self.0.iter().zip(point) {
            if !a.is_zero() {
                acc += &(a * b);
            }
        }
        acc
    }

    /// True when `self` is a nonzero multiple of `o`.
    pub fn similar(&self, o: &FormVec) -> bool {
        !self.is_zero() && self.normalized() == o.normalized()
    }
}

impl fmt::Display for FormVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
/// Zero rows are dropped.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == m.len() {
            break;
        }
        let Some(sel) = (row..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, sel);
        let inv = m[row][col].inv().expect("nonzero pivot");
        if !inv.is_one() {
            for x in m[row].iter_mut() {
                *x *= &inv;
            }
        }
        let prow = m[row].clone();
        #[allow(clippy::needless_range_loop)]
        for r in 0..m.len() {
            if r == row || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for (x, p) in m[r].iter_mut().zip(&prow).skip(col) {
                if !p.is_zero() {
                    *x -= &(&f * p);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    m.truncate(row);
    pivots
}

pub fn matrix_rank(m: &Matrix) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

/// Basis of `{x : A x = 0}`; one vector per free column with that entry 1.
pub fn nullspace(a: &Matrix, ncols: usize, field: FieldSpec) -> Vec<Vec<Scalar>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![field.zero(); ncols];
        v[free] = field.one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[r][free];
        }
        basis.push(v);
    }
    basis
}

/// One solution of `A x = b`, free variables set to zero.
pub fn solve(a: &Matrix, b: &[Scalar], ncols: usize, field: FieldSpec) -> Option<Vec<Scalar>> {
    let mut m: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    if m.is_empty() {
        return Some(vec![field.zero(); ncols]);
    }
    let pivots = rref(&mut m);
    if pivots.last() == Some(&ncols) {
        return None;
    }
    let mut x = vec![field.zero(); ncols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = m[r][ncols].clone();
    }
    Some(x)
}

pub fn invert(a: &Matrix, field: FieldSpec) -> Option<Matrix> {
    let n = a.len();
    let mut m: Matrix = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { field.one() } else { field.zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.len() != n || pivots.iter().enumerate().any(|(i, &p)| p != i) {
        return None;
    }
    Some(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul(a: &Matrix, b: &Matrix, field: FieldSpec) -> Matrix {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut acc = field.zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            acc += &(&row[k] * &b[k][j]);
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

fn identity(field: FieldSpec, n: usize) -> Matrix {
    (0..n).map(|i| FormVec::unit(field, n, i).0).collect()
}

/// A subspace of linear forms held as a reduced echelon basis, so equal
/// subspaces compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    field: FieldSpec,
    n: usize,
    basis: Vec<FormVec>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Subspace {
            field,
            n,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: FieldSpec, n: usize) -> Self {
        Self::span(field, n, (0..n).map(|i| FormVec::unit(field, n, i)))
    }

    pub fn span<I: IntoIterator<Item = FormVec>>(field: FieldSpec, n: usize, vecs: I) -> Self {
        let mut m: Matrix = vecs.into_iter().map(|v| v.0).collect();
        debug_assert!(m.iter().all(|r| r.len() == n));
        let pivots = rref(&mut m);
        Subspace {
            field,
            n,
            basis: m.into_iter().map(FormVec).collect(),
            pivots,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[FormVec] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Canonical coset representative: the pivot coordinates are cleared.
    pub fn reduce(&self, v: &FormVec) -> FormVec {
        let mut r = v.clone();
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            if !r.0[p].is_zero() {
                let c = -&r.0[p];
                r = r.axpy(&c, b);
            }
        }
        r
    }

    pub fn contains(&self, v: &FormVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Coordinates over [`Subspace::basis`], when `v` lies in the span.
    pub fn coordinates(&self, v: &FormVec) -> Option<Vec<Scalar>> {
        let coords: Vec<Scalar> = self.pivots.iter().map(|&p| v.0[p].clone()).collect();
        let mut acc = FormVec::zero(self.field, self.n);
        for (c, b) in coords.iter().zip(&self.basis) {
            acc = acc.axpy(c, b);
        }
        (acc == *v).then_some(coords)
    }

    /// Key of the class `F* v + S`; `None` when `v` lies in `S`.
    pub fn class_key(&self, v: &FormVec) -> Option<FormVec> {
        let r = self.reduce(v);
        (!r.is_zero()).then(|| r.normalized())
    }

    pub fn join(&self, other: &Subspace) -> Subspace {
        Self::span(self.field, self.n, self.basis.iter().chain(&other.basis).cloned())
    }

    pub fn with<I: IntoIterator<Item = FormVec>>(&self, extra: I) -> Subspace {
        Self::span(self.field, self.n, self.basis.iter().cloned().chain(extra))
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|b| other.contains(b))
    }

    /// `dim(self ∩ other)`.
    pub fn intersection_rank(&self, other: &Subspace) -> usize {
        self.rank() + other.rank() - self.join(other).rank()
    }
}

pub fn rank_of(field: FieldSpec, n: usize, vecs: &[FormVec]) -> usize {
    Subspace::span(field, n, vecs.iter().cloned()).rank()
}

/// Coordinates of `v` over the echelon basis of `sp(s)`.
pub fn in_span(field: FieldSpec, v: &FormVec, s: &[FormVec]) -> Option<Vec<Scalar>> {
    Subspace::span(field, v.len(), s.iter().cloned()).coordinates(v)
}

/// `dim((sp(s) + K) / K)`.
pub fn quotient_rank(s: &[FormVec], k: &Subspace) -> usize {
    k.with(s.iter().cloned()).rank() - k.rank()
}

/// Invertible linear substitution acting on linear forms by `v -> v M`.
///
/// As a ring map this is `x_j -> sum_i M[j][i] x_i`, so ideal membership
/// and linear (in)dependence are preserved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transform {
    field: FieldSpec,
    matrix: Matrix,
    inverse: Matrix,
}

impl Transform {
    pub fn new(field: FieldSpec, matrix: Matrix) -> Result<Self> {
        match invert(&matrix, field) {
            Some(inverse) => Ok(Transform { field, matrix, inverse }),
            None => precondition("transform matrix is singular"),
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let m = identity(field, n);
        Transform {
            field,
            matrix: m.clone(),
            inverse: m,
        }
    }

    pub fn n(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, v: &FormVec) -> FormVec {
        FormVec(mul_row(&v.0, &self.matrix, self.field))
    }

    pub fn apply_inverse(&self, v: &FormVec) -> FormVec {
        FormVec(mul_row(&v.0, &self.inverse, self.field))
    }

    pub fn inverse(&self) -> Transform {
        Transform {
            field: self.field,
            matrix: self.inverse.clone(),
            inverse: self.matrix.clone(),
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transform) -> Transform {
        Transform {
            field: self.field,
            matrix: mat_mul(&self.matrix, &next.matrix, self.field),
            inverse: mat_mul(&next.inverse, &self.inverse, self.field),
        }
    }

    /// Image of `x_j`, i.e. the form substituted for variable `j`.
    pub fn image_of_var(&self, j: usize) -> FormVec {
        FormVec(self.matrix[j].clone())
    }
}

fn mul_row(v: &[Scalar], m: &Matrix, field: FieldSpec) -> Vec<Scalar> {
    let n = m.first().map_or(0, Vec::len);
    let mut out = vec![field.zero(); n];
    for (c, row) in v.iter().zip(m) {
        if c.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            if !x.is_zero() {
                *o += &(c * x);
            }
        }
    }
    out
}

/// Standard basis vectors completing `rows` to a basis, in index order.
fn completion(field: FieldSpec, n: usize, rows: &[FormVec]) -> Vec<FormVec> {
    let mut span = Subspace::span(field, n, rows.iter().cloned());
    let mut out = Vec::new();
    for i in 0..n {
        let e = FormVec::unit(field, n, i);
        if !span.contains(&e) {
            span = span.with([e.clone()]);
            out.push(e);
        }
    }
    out
}

/// A transform sending the echelon basis of `s` to `x_1..x_r` and, when
/// given, `extra` to `x_n`.
pub fn coordinate_transform(s: &Subspace, extra: Option<&FormVec>) -> Result<Transform> {
    let (field, n) = (s.field(), s.ambient());
    if let Some(e) = extra {
        if s.contains(e) {
            return precondition("extra form lies in the subspace");
        }
    }
    let mut rows: Vec<FormVec> = s.basis().to_vec();
    let mut anchored = rows.clone();
    anchored.extend(extra.cloned());
    rows.extend(completion(field, n, &anchored));
    rows.extend(extra.cloned());
    let q: Matrix = rows.into_iter().map(|r| r.0).collect();
    let m = invert(&q, field).expect("completed basis is invertible");
    Transform::new(field, m)
}

/// Unique `(alpha, u, v)` with `l = alpha y0 + u + v`, `u` in `sp(u_basis)`
/// and `v` in `K`.
pub fn orthogonal_decompose(
    l: &FormVec,
    y0: &FormVec,
    u_basis: &[FormVec],
    k: &Subspace,
) -> Result<(Scalar, FormVec, FormVec)> {
    let (field, n) = (k.field(), k.ambient());
    let u = Subspace::span(field, n, u_basis.iter().cloned());
    if u.intersection_rank(k) != 0 {
        return precondition("U and K intersect nontrivially");
    }
    if u.join(k).contains(y0) {
        return precondition("y0 lies in U + K");
    }
    let mut rows: Vec<FormVec> = vec![y0.clone()];
    rows.extend(u.basis().iter().cloned());
    rows.extend(k.basis().iter().cloned());
    // Solve sum c_i rows_i = l, i.e. rows^T c = l.
    let m = rows.len();
    let a: Matrix = (0..n).map(|j| rows.iter().map(|r| r.0[j].clone()).collect()).collect();
    let Some(c) = solve(&a, &l.0, m, field) else {
        return precondition("form lies outside F y0 + U + K");
    };
    let mut uu = FormVec::zero(field, n);
    let mut vv = FormVec::zero(field, n);
    for (i, ci) in c.iter().enumerate().skip(1) {
        if i <= u.rank() {
            uu = uu.axpy(ci, &rows[i]);
        } else {
            vv = vv.axpy(ci, &rows[i]);
        }
    }
    Ok((c[0].clone(), uu, vv))
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rational;

    fn f(c: &[i64]) -> FormVec {
        FormVec::from_ints(Q, c)
    }

    fn skew() -> Vec<FormVec> {
        [
            [1, 1, 0, 0],
            [1, 1, 1, 0],
            [1, 1, 2, 0],
            [1, 0, 1, 0],
            [1, 0, 1, 1],
            [1, 0, 1, 2],
        ]
        .iter()
        .map(|r| f(r))
        .collect()
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_of(Q, 2, &[]), 0);
        assert_eq!(rank_of(Q, 2, &[f(&[1, 0]), f(&[0, 1]), f(&[1, 1])]), 2);
        assert_eq!(rank_of(Q, 4, &skew()), 4);
    }

    #[test]
    fn span_membership() {
        let e = [f(&[1, 0]), f(&[0, 1])];
        let one = Q.one();
        assert_eq!(in_span(Q, &f(&[1, 1]), &e), Some(vec![one.clone(), one]));
        assert_eq!(in_span(Q, &f(&[0, 0]), &[]), Some(vec![]));
        assert_eq!(in_span(Q, &f(&[1, 2, 3]), &[f(&[1, 0, 0]), f(&[0, 1, 0])]), None);
    }

    #[test]
    fn quotients() {
        let k = Subspace::span(Q, 4, [f(&[1, 1, 0, 0])]);
        assert_eq!(quotient_rank(&skew(), &k), 3);
        let s = [f(&[1, 0])];
        assert_eq!(quotient_rank(&s, &Subspace::span(Q, 2, s.clone())), 0);
        assert_eq!(quotient_rank(&s, &Subspace::zero(Q, 2)), 1);
    }

    #[test]
    fn coordinate_transforms() {
        let s = Subspace::span(Q, 2, [f(&[1, 1])]);
        let t = coordinate_transform(&s, None).unwrap();
        assert_eq!(t.apply(&f(&[1, 1])), f(&[1, 0]));

        let s = Subspace::span(Q, 2, [f(&[1, 0])]);
        let t = coordinate_transform(&s, Some(&f(&[0, 1]))).unwrap();
        assert_eq!(t.apply(&f(&[1, 0])), f(&[1, 0]));
        assert_eq!(t.apply(&f(&[0, 1])), f(&[0, 1]));

        let t = coordinate_transform(&Subspace::zero(Q, 3), None).unwrap();
        assert_eq!(t, Transform::identity(Q, 3));
        assert!(coordinate_transform(&s, Some(&f(&[2, 0]))).is_err());
    }

    #[test]
    fn transform_maps_subspace_to_head() {
        let s = Subspace::span(Q, 4, [f(&[1, 2, 0, 1]), f(&[0, 1, 1, 1])]);
        let extra = f(&[0, 0, 1, 5]);
        let t = coordinate_transform(&s, Some(&extra)).unwrap();
        for b in s.basis() {
            let img = t.apply(b);
            assert!(img.0[2..].iter().all(Scalar::is_zero));
        }
        assert_eq!(t.apply(&extra), f(&[0, 0, 0, 1]));
        let v = f(&[3, -1, 4, 1]);
        assert_eq!(t.apply_inverse(&t.apply(&v)), v);
    }

    #[test]
    fn decompositions() {
        // y0 = x1, U = sp{x2}, K = sp{x3}
        let y0 = f(&[1, 0, 0]);
        let u = [f(&[0, 1, 0])];
        let k = Subspace::span(Q, 3, [f(&[0, 0, 1])]);
        let (a, uu, vv) = orthogonal_decompose(&f(&[2, 4, 3]), &y0, &u, &k).unwrap();
        assert_eq!(a, Q.int(2));
        assert_eq!(uu, f(&[0, 4, 0]));
        assert_eq!(vv, f(&[0, 0, 3]));
        let (a, _, _) = orthogonal_decompose(&f(&[0, 1, 0]), &y0, &u, &k).unwrap();
        assert!(a.is_zero());
        assert!(orthogonal_decompose(&f(&[1, 0, 0]), &f(&[0, 1, 1]), &u, &k).is_err());
        assert!(orthogonal_decompose(&f(&[1, 0, 0]), &y0, &[f(&[0, 0, 1])], &k).is_err());
    }

    #[test]
    fn nullspace_and_solve() {
        let a: Matrix = vec![vec![Q.int(1), Q.int(1), Q.int(1)], vec![Q.int(0), Q.int(1), Q.int(2)]];
        let ns = nullspace(&a, 3, Q);
        assert_eq!(ns, vec![vec![Q.int(1), Q.int(-2), Q.int(1)]]);
        let x = solve(&a, &[Q.int(3), Q.int(3)], 3, Q).unwrap();
        assert_eq!(x, vec![Q.int(0), Q.int(3), Q.int(0)]);
        assert!(solve(&vec![vec![Q.int(0)]], &[Q.int(1)], 1, Q).is_none());
    }
}
