//! Sparse multivariate polynomials and a sparse echelon reducer.

use std::collections::BTreeMap;
use std::ops::Bound;

use crate::error::{resource, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{FormVec, Transform};

/// Exponent vector. Degrees stay below 256 under every cap in the crate.
pub type Monomial = Vec<u8>;

pub const DEFAULT_MONOMIAL_CAP: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    pub field: FieldSpec,
    pub nvars: usize,
    pub terms: BTreeMap<Monomial, Scalar>,
}

impl Poly {
    pub fn zero(field: FieldSpec, nvars: usize) -> Self {
        Poly {
            field,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Scalar, nvars: usize) -> Self {
        let mut p = Self::zero(c.field(), nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn from_form(l: &FormVec) -> Self {
        let n = l.len();
        let mut p = Self::zero(l.0[0].field(), n);
        for (i, c) in l.0.iter().enumerate() {
            if !c.is_zero() {
                let mut m = vec![0; n];
                m[i] = 1;
                p.terms.insert(m, c.clone());
            }
        }
        p
    }

    /// `c * prod forms`, failing once an intermediate product exceeds `cap`
    /// monomials.
    pub fn product(c: &Scalar, forms: &[FormVec], nvars: usize, cap: usize) -> Result<Self> {
        let mut p = Self::constant(c.clone(), nvars);
        for l in forms {
            p = p.mul_form(l, cap)?;
        }
        Ok(p)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| deg(m)).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut it = self.terms.keys().map(|m| deg(m));
        match it.next() {
            None => true,
            Some(d) => it.all(|e| e == d),
        }
    }

    pub fn add_term(&mut self, m: Monomial, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(x) => {
                *x += c;
                if x.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add_assign(&mut self, o: &Poly) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c);
        }
    }

    /// `self += c * o`.
    pub fn axpy(&mut self, c: &Scalar, o: &Poly) {
        if c.is_zero() {
            return;
        }
        for (m, x) in &o.terms {
            self.add_term(m.clone(), &(c * x));
        }
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        r.axpy(&-self.field.one(), o);
        r
    }

    pub fn scale(&self, c: &Scalar) -> Poly {
        let mut r = Poly::zero(self.field, self.nvars);
        r.axpy(c, self);
        r
    }

    pub fn mul_form(&self, l: &FormVec, cap: usize) -> Result<Poly> {
        let mut out: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m, c) in &self.terms {
            for (i, a) in l.0.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                let mut mm = m.clone();
                mm[i] += 1;
                let v = c * a;
                match out.get_mut(&mm) {
                    Some(x) => *x += &v,
                    None => {
                        out.insert(mm, v);
                        if out.len() > cap {
                            return resource(format!("expansion exceeds {cap} monomials"));
                        }
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(Poly {
            field: self.field,
            nvars: self.nvars,
            terms: out,
        })
    }

    pub fn mul(&self, o: &Poly, cap: usize) -> Result<Poly> {
        let mut r = Poly::zero(self.field, self.nvars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m: Monomial = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                r.add_term(m, &(c1 * c2));
                if r.len() > cap {
                    return resource(format!("product exceeds {cap} monomials"));
                }
            }
        }
        Ok(r)
    }

    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m) {
                if e > 0 {
                    t *= &x.pow(e as u32);
                }
            }
            acc += &t;
        }
        acc
    }

    /// Image under the ring map `x_j -> t.image_of_var(j)`.
    pub fn transform(&self, t: &Transform, cap: usize) -> Result<Poly> {
        let images: Vec<FormVec> = (0..self.nvars).map(|j| t.image_of_var(j)).collect();
        let mut out = Poly::zero(self.field, self.nvars);
        for (m, c) in &self.terms {
            let mut p = Poly::constant(c.clone(), self.nvars);
            for (j, &e) in m.iter().enumerate() {
                for _ in 0..e {
                    p = p.mul_form(&images[j], cap)?;
                }
            }
            out.add_assign(&p);
        }
        Ok(out)
    }

    /// Groups terms by their exponents on `x_{r+1}..x_n`; each value is the
    /// coefficient polynomial in `x_1..x_r`.
    pub fn split_tail(&self, r: usize) -> BTreeMap<Monomial, Poly> {
        let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let head = m[..r].to_vec();
            let tail = m[r..].to_vec();
            out.entry(tail)
                .or_insert_with(|| Poly::zero(self.field, r))
                .terms
                .insert(head, c.clone());
        }
        out
    }

    /// Drops trailing variables; the caller guarantees they do not occur.
    pub fn truncate_vars(&self, r: usize) -> Poly {
        Poly {
            field: self.field,
            nvars: r,
            terms: self.terms.iter().map(|(m, c)| (m[..r].to_vec(), c.clone())).collect(),
        }
    }
}

pub fn deg(m: &[u8]) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

/// All exponent vectors of total degree `d` in `n` variables.
pub fn monomials(n: usize, d: usize) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, left: usize, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        let n = cur.len();
        if i + 1 == n {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in (0..=left).rev() {
            cur[i] = e as u8;
            rec(i + 1, left - e, cur, out);
        }
        cur[i] = 0;
    }
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

/// `C(n + d - 1, d)`, saturating.
pub fn monomial_count(n: usize, d: usize) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    let mut c: u128 = 1;
    for i in 0..d as u128 {
        c = c * (n as u128 + i) / (i + 1);
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

pub type SparseVec<K> = BTreeMap<K, Scalar>;

/// Row echelon basis over sparse vectors. Each row's smallest key is its
/// pivot and is unique; reduction clears every pivot coordinate, so the
/// residue of a vector is a canonical coset representative and the residue
/// map is linear.
#[derive(Clone, Debug)]
pub struct Echelon<K: Ord + Clone> {
    rows: Vec<SparseVec<K>>,
    pivot: BTreeMap<K, usize>,
}

impl<K: Ord + Clone> Default for Echelon<K> {
    fn default() -> Self {
        Echelon {
            rows: Vec::new(),
            pivot: BTreeMap::new(),
        }
    }
}

impl<K: Ord + Clone> Echelon<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn reduce(&self, v: &SparseVec<K>) -> SparseVec<K> {
        let mut acc = v.clone();
        let mut cursor: Option<K> = None;
        loop {
            let next = {
                let range = match &cursor {
                    None => acc.range::<K, (Bound<&K>, Bound<&K>)>((Bound::Unbounded, Bound::Unbounded)),
                    Some(c) => acc.range::<K, (Bound<&K>, Bound<&K>)>((Bound::Excluded(c), Bound::Unbounded)),
                };
                range
                    .filter_map(|(k, c)| self.pivot.get(k).map(|&r| (k.clone(), c.clone(), r)))
                    .next()
            };
            let Some((k, c, r)) = next else { break };
            for (rk, rc) in &self.rows[r] {
                let delta = &c * rc;
                match acc.get_mut(rk) {
                    Some(x) => {
                        *x -= &delta;
                        if x.is_zero() {
                            acc.remove(rk);
                        }
                    }
                    None => {
                        acc.insert(rk.clone(), -delta);
                    }
                }
            }
            cursor = Some(k);
        }
        acc
    }

    /// Adds `v` to the span; returns false when it was already there.
    pub fn insert(&mut self, v: &SparseVec<K>) -> bool {
        let r = self.reduce(v);
        let Some((lead, c)) = r.iter().next() else {
            return false;
        };
        let (lead, inv) = (lead.clone(), c.inv().expect("nonzero"));
        let row: SparseVec<K> = r.into_iter().map(|(k, x)| (k, &x * &inv)).collect();
        self.pivot.insert(lead, self.rows.len());
        self.rows.push(row);
        true
    }

    pub fn contains(&self, v: &SparseVec<K>) -> bool {
        self.reduce(v).is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rational;

    #[test]
    fn monomial_enumeration() {
        assert_eq!(monomials(2, 2), vec![vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(monomials(3, 0), vec![vec![0, 0, 0]]);
        assert_eq!(monomials(0, 0), vec![Vec::<u8>::new()]);
        assert!(monomials(0, 1).is_empty());
        for (n, d) in [(1, 4), (3, 3), (4, 2), (5, 6)] {
            assert_eq!(monomials(n, d).len(), monomial_count(n, d));
        }
    }

    #[test]
    fn expansion() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let l = FormVec::from_ints(Q, &[1, 1]);
        let p = Poly::product(&Q.one(), &[l.clone(), l], 2, 100).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.terms[&vec![1, 1]], Q.int(2));
        assert!(p.is_homogeneous());
        assert_eq!(p.eval(&[Q.int(2), Q.int(3)]), Q.int(25));
    }

    #[test]
    fn expansion_cap() {
        let l = FormVec::from_ints(Q, &[1, 1, 1]);
        let forms = vec![l; 6];
        assert!(Poly::product(&Q.one(), &forms, 3, 10).is_err());
        assert_eq!(Poly::product(&Q.one(), &forms, 3, 28).unwrap().len(), 28);
    }

    #[test]
    fn echelon_residues() {
        let mut e: Echelon<u32> = Echelon::new();
        let v = |xs: &[(u32, i64)]| xs.iter().map(|&(k, c)| (k, Q.int(c))).collect::<SparseVec<u32>>();
        assert!(e.insert(&v(&[(0, 1), (1, 1)])));
        assert!(e.insert(&v(&[(1, 1), (2, 1)])));
        assert!(!e.insert(&v(&[(0, 1), (2, -1)])));
        assert!(e.contains(&v(&[(0, 2), (1, 3), (2, 1)])));
        let r = e.reduce(&v(&[(2, 5)]));
        assert_eq!(r, v(&[(2, 5)]));
        // residue of e0 is e2 after clearing pivots 0 and 1
        assert_eq!(e.reduce(&v(&[(0, 1)])), v(&[(2, 1)]));
    }
}
