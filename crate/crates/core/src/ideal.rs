//! Ideals generated by multiplication terms and exact membership tests.
//!
//! Membership is decided one homogeneous degree at a time: the degree-`e`
//! part of `<f_1..f_m>` is spanned by `{m * f_i : deg m = e - deg f_i}`.
//! [`slice_membership`] does exactly that in all `n` variables. The
//! [`IdealOracle`] first moves the radical span onto the head coordinates
//! `x_1..x_r`, where every generator lives, and then only needs slices in
//! `r` variables: a polynomial is a member iff each of its coefficients
//! with respect to the tail variables is.

use std::cell::RefCell;
use std::collections::BTreeMap;

use crate::circuit::MultTerm;
use crate::error::{precondition, resource, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{coordinate_transform, nullspace, solve, FormVec, Matrix, Subspace, Transform};
use crate::poly::{deg, monomials, Echelon, Monomial, Poly, SparseVec, DEFAULT_MONOMIAL_CAP};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermIdeal {
    field: FieldSpec,
    n: usize,
    gens: Vec<MultTerm>,
    radspan: Subspace,
}

impl TermIdeal {
    pub fn new(field: FieldSpec, n: usize, gens: Vec<MultTerm>) -> Self {
        let radspan = radspan_of(field, n, &gens);
        TermIdeal {
            field,
            n,
            gens,
            radspan,
        }
    }

    pub fn zero(field: FieldSpec, n: usize) -> Self {
        Self::new(field, n, Vec::new())
    }

    pub fn with(&self, extra: &[MultTerm]) -> TermIdeal {
        let mut gens = self.gens.clone();
        gens.extend_from_slice(extra);
        let radspan = self.radspan.with(extra.iter().flat_map(|t| t.forms.iter().cloned()));
        TermIdeal {
            field: self.field,
            n: self.n,
            gens,
            radspan,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn gens(&self) -> &[MultTerm] {
        &self.gens
    }

    pub fn radspan(&self) -> &Subspace {
        &self.radspan
    }

    /// True when some generator is a nonzero constant.
    pub fn is_unit(&self) -> bool {
        self.gens.iter().any(|g| g.forms.is_empty())
    }
}

/// Span of every form occurring in the generators.
pub fn radspan_of(field: FieldSpec, n: usize, gens: &[MultTerm]) -> Subspace {
    Subspace::span(field, n, gens.iter().flat_map(|g| g.forms.iter().cloned()))
}

/// One class of `L(f)` under similarity modulo a subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Node {
    /// First form of the class, normalized; `None` for the class of forms
    /// lying in the subspace (the representative `0`).
    pub rep: Option<FormVec>,
    /// Product of the class, coefficient one, in list order.
    pub term: MultTerm,
    /// Positions of the class members in `L(f)`.
    pub positions: Vec<usize>,
}

/// Nodes of `f` modulo `s`, in order of first occurrence.
pub fn nodes_of(f: &MultTerm, s: &Subspace) -> Vec<Node> {
    let mut keys: Vec<Option<FormVec>> = Vec::new();
    let mut out: Vec<Node> = Vec::new();
    for (pos, l) in f.forms.iter().enumerate() {
        let key = s.class_key(l);
        match keys.iter().position(|k| *k == key) {
            Some(i) => {
                out[i].term.forms.push(l.clone());
                out[i].positions.push(pos);
            }
            None => {
                out.push(Node {
                    rep: key.as_ref().map(|_| l.normalized()),
                    term: MultTerm::monic(f.field(), vec![l.clone()]),
                    positions: vec![pos],
                });
                keys.push(key);
            }
        }
    }
    out
}

/// Brute-force membership: `h` is in the span of all degree-matched
/// multiples of the generators, computed in all `n` variables.
pub fn slice_membership(h: &Poly, ideal: &TermIdeal) -> Result<bool> {
    let n = ideal.nvars();
    let gens: Vec<Poly> = ideal
        .gens()
        .iter()
        .map(|g| g.expand(n, DEFAULT_MONOMIAL_CAP))
        .collect::<Result<_>>()?;
    let mut by_degree: BTreeMap<usize, SparseVec<Monomial>> = BTreeMap::new();
    for (m, c) in &h.terms {
        by_degree.entry(deg(m)).or_default().insert(m.clone(), c.clone());
    }
    for (e, part) in by_degree {
        let mut ech: Echelon<Monomial> = Echelon::new();
        for (g, gt) in gens.iter().zip(ideal.gens()) {
            if gt.degree() > e {
                continue;
            }
            for m in monomials(n, e - gt.degree()) {
                let row: SparseVec<Monomial> = g
                    .terms
                    .iter()
                    .map(|(gm, c)| (gm.iter().zip(&m).map(|(a, b)| a + b).collect(), c.clone()))
                    .collect();
                ech.insert(&row);
            }
        }
        if !ech.contains(&part) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Linear residue of a polynomial modulo an ideal, keyed by
/// `(tail monomial, head monomial)` in the oracle's coordinates.
pub type Residue = SparseVec<(Monomial, Monomial)>;

/// Membership oracle for a fixed ideal.
pub struct IdealOracle {
    field: FieldSpec,
    n: usize,
    r: usize,
    unit: bool,
    transform: Transform,
    head_gens: Vec<(usize, Poly)>,
    slices: RefCell<BTreeMap<usize, Echelon<Monomial>>>,
    cap: usize,
}

impl IdealOracle {
    pub fn new(ideal: &TermIdeal) -> Result<Self> {
        let rs = ideal.radspan();
        let r = rs.rank();
        let transform = coordinate_transform(rs, None)?;
        let mut head_gens = Vec::new();
        for g in ideal.gens() {
            let forms: Vec<FormVec> = g
                .forms
                .iter()
                .map(|l| {
                    let t = transform.apply(l);
                    debug_assert!(t.0[r..].iter().all(Scalar::is_zero));
                    FormVec(t.0[..r].to_vec())
                })
                .collect();
            head_gens.push((g.degree(), Poly::product(&g.coeff, &forms, r, DEFAULT_MONOMIAL_CAP)?));
        }
        Ok(IdealOracle {
            field: ideal.field(),
            n: ideal.nvars(),
            r,
            unit: ideal.is_unit(),
            transform,
            head_gens,
            slices: RefCell::new(BTreeMap::new()),
            cap: DEFAULT_MONOMIAL_CAP,
        })
    }

    pub fn rank(&self) -> usize {
        self.r
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    fn with_slice<T>(&self, e: usize, f: impl FnOnce(&Echelon<Monomial>) -> T) -> Result<T> {
        let mut slices = self.slices.borrow_mut();
        if let std::collections::btree_map::Entry::Vacant(slot) = slices.entry(e) {
            let mut ech = Echelon::new();
            let mut rows = 0usize;
            for (d, g) in &self.head_gens {
                if *d > e {
                    continue;
                }
                for m in monomials(self.r, e - d) {
                    let row: SparseVec<Monomial> = g
                        .terms
                        .iter()
                        .map(|(gm, c)| (gm.iter().zip(&m).map(|(a, b)| a + b).collect(), c.clone()))
                        .collect();
                    ech.insert(&row);
                    rows += 1;
                    if rows > self.cap {
                        return resource(format!("degree-{e} slice exceeds {} rows", self.cap));
                    }
                }
            }
            slot.insert(ech);
        }
        Ok(f(&slices[&e]))
    }

    /// Residue of a polynomial already in head/tail coordinates.
    fn residue_transformed(&self, p: &Poly) -> Result<Residue> {
        let mut out = Residue::new();
        if self.unit {
            return Ok(out);
        }
        for (tail, head) in p.split_tail(self.r) {
            let mut by_degree: BTreeMap<usize, SparseVec<Monomial>> = BTreeMap::new();
            for (m, c) in head.terms {
                by_degree.entry(deg(&m)).or_default().insert(m, c);
            }
            for (e, part) in by_degree {
                let red = self.with_slice(e, |s| s.reduce(&part))?;
                for (m, c) in red {
                    out.insert((tail.clone(), m), c);
                }
            }
        }
        Ok(out)
    }

    pub fn residue_poly(&self, p: &Poly) -> Result<Residue> {
        self.residue_transformed(&p.transform(&self.transform, self.cap)?)
    }

    pub fn residue_term(&self, t: &MultTerm) -> Result<Residue> {
        let p = t.transform(&self.transform).expand(self.n, self.cap)?;
        self.residue_transformed(&p)
    }

    pub fn contains_poly(&self, p: &Poly) -> Result<bool> {
        Ok(self.residue_poly(p)?.is_empty())
    }

    /// Drops every form outside the radical span first; what is left is a
    /// polynomial in the head variables alone.
    pub fn contains_term(&self, t: &MultTerm) -> Result<bool> {
        if self.unit {
            return Ok(true);
        }
        let mut head = Vec::new();
        for l in &t.forms {
            let img = self.transform.apply(l);
            if img.0[self.r..].iter().all(Scalar::is_zero) {
                head.push(FormVec(img.0[..self.r].to_vec()));
            }
        }
        let p = Poly::product(&t.coeff, &head, self.r, self.cap)?;
        let part: SparseVec<Monomial> = p.terms;
        self.with_slice(head.len(), |s| s.contains(&part))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }
}

pub fn term_in_ideal(t: &MultTerm, ideal: &TermIdeal) -> Result<bool> {
    IdealOracle::new(ideal)?.contains_term(t)
}

/// Affine set of coefficient vectors: `witness + span(directions)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSolution {
    pub witness: Vec<Scalar>,
    pub directions: Vec<Vec<Scalar>>,
}

/// Solves `sum_i beta_i a_i = -b` for residue vectors `a_i`, `b`.
pub(crate) fn solve_residues(
    field: FieldSpec,
    cols: &[Residue],
    rhs: &Residue,
) -> Option<(Vec<Scalar>, Vec<Vec<Scalar>>)> {
    let mut keys: BTreeMap<&(Monomial, Monomial), usize> = BTreeMap::new();
    for v in cols.iter().chain(std::iter::once(rhs)) {
        for k in v.keys() {
            let next = keys.len();
            keys.entry(k).or_insert(next);
        }
    }
    let mut a: Matrix = vec![vec![field.zero(); cols.len()]; keys.len()];
    for (j, v) in cols.iter().enumerate() {
        for (k, c) in v {
            a[keys[k]][j] = c.clone();
        }
    }
    let mut b = vec![field.zero(); keys.len()];
    for (k, c) in rhs {
        b[keys[k]] = -c;
    }
    let x = solve(&a, &b, cols.len(), field)?;
    Some((x, nullspace(&a, cols.len(), field)))
}

/// All `beta` with `beta[fixed] = 1` and `sum beta_i T_i` in `ideal`.
pub fn combo_in_ideal(terms: &[MultTerm], fixed: usize, ideal: &TermIdeal) -> Result<Option<AffineSolution>> {
    let oracle = IdealOracle::new(ideal)?;
    combo_with_oracle(terms, fixed, &oracle)
}

pub fn combo_with_oracle(terms: &[MultTerm], fixed: usize, oracle: &IdealOracle) -> Result<Option<AffineSolution>> {
    let field = oracle.field();
    let res: Vec<Residue> = terms.iter().map(|t| oracle.residue_term(t)).collect::<Result<_>>()?;
    let free: Vec<usize> = (0..terms.len()).filter(|&i| i != fixed).collect();
    let cols: Vec<Residue> = free.iter().map(|&i| res[i].clone()).collect();
    let Some((x, ns)) = solve_residues(field, &cols, &res[fixed]) else {
        return Ok(None);
    };
    let embed = |v: &[Scalar], at_fixed: Scalar| {
        let mut out = vec![field.zero(); terms.len()];
        out[fixed] = at_fixed;
        for (&i, c) in free.iter().zip(v) {
            out[i] = c.clone();
        }
        out
    };
    Ok(Some(AffineSolution {
        witness: embed(&x, field.one()),
        directions: ns.iter().map(|v| embed(v, field.zero())).collect(),
    }))
}

/// Outcome of comparing both sides of the Chinese remaindering identity on
/// one probe polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtProbe {
    pub in_product: bool,
    pub in_z: bool,
    pub in_f: bool,
    pub in_g: bool,
}

impl CrtProbe {
    pub fn agrees(&self) -> bool {
        self.in_product == (self.in_z && self.in_f && self.in_g)
    }
}

/// Checks `h in <I, zfg>` against `h in <I,z> ∩ <I,f> ∩ <I,g>` on every
/// probe, after validating the span hypotheses.
pub fn crt_check(
    ideal: &TermIdeal,
    z: &MultTerm,
    f: &MultTerm,
    g: &MultTerm,
    probes: &[Poly],
) -> Result<Vec<CrtProbe>> {
    let rs = ideal.radspan();
    if !z.forms.iter().all(|l| rs.contains(l)) {
        return precondition("L(z) is not contained in radsp(I)");
    }
    if f.forms.iter().any(|l| rs.contains(l)) {
        return precondition("L(f) meets radsp(I)");
    }
    let rsf = rs.with(f.forms.iter().cloned());
    if g.forms.iter().any(|l| rsf.contains(l)) {
        return precondition("L(g) meets radsp(I, f)");
    }
    let mut zfg = z.forms.clone();
    zfg.extend(f.forms.iter().cloned());
    zfg.extend(g.forms.iter().cloned());
    let prod = MultTerm {
        coeff: &(&z.coeff * &f.coeff) * &g.coeff,
        forms: zfg,
    };
    let o_prod = IdealOracle::new(&ideal.with(&[prod]))?;
    let o_z = IdealOracle::new(&ideal.with(std::slice::from_ref(z)))?;
    let o_f = IdealOracle::new(&ideal.with(std::slice::from_ref(f)))?;
    let o_g = IdealOracle::new(&ideal.with(std::slice::from_ref(g)))?;
    probes
        .iter()
        .map(|h| {
            Ok(CrtProbe {
                in_product: o_prod.contains_poly(h)?,
                in_z: o_z.contains_poly(h)?,
                in_f: o_f.contains_poly(h)?,
                in_g: o_g.contains_poly(h)?,
            })
        })
        .collect()
}

/// First node `g` of `f` modulo `I` with `h` outside `<I, g>`; absent
/// exactly when `h` lies in `<I, f>`.
pub fn node_reduction(h: &Poly, ideal: &TermIdeal, f: &MultTerm) -> Result<Option<MultTerm>> {
    for node in nodes_of(f, ideal.radspan()) {
        let o = IdealOracle::new(&ideal.with(std::slice::from_ref(&node.term)))?;
        if !o.contains_poly(h)? {
            return Ok(Some(node.term));
        }
    }
    Ok(None)
}

/// Both sides of the cancellation rule for `l * f` against
/// `<f_1..f_m>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CancelOutcome {
    pub s: usize,
    pub lhs: bool,
    pub rhs: bool,
}

pub fn cancel_check(l: &FormVec, f: &Poly, gens: &[MultTerm], k: &Subspace) -> Result<CancelOutcome> {
    let (field, n) = (k.field(), k.ambient());
    if l.is_zero() {
        return precondition("l must be a nonzero form");
    }
    let mut reps = Vec::new();
    for (i, g) in gens.iter().enumerate() {
        let Some(first) = g.forms.first() else {
            return precondition(format!("generator {i} has no forms"));
        };
        let key = k.class_key(first);
        if key.is_none() || g.forms.iter().any(|x| k.class_key(x) != key) {
            return precondition(format!("generator {i} is not a power of one form modulo K"));
        }
        reps.push(first.clone());
    }
    if k.with(reps.iter().cloned()).rank() != k.rank() + reps.len() {
        return precondition("representative forms are dependent modulo K");
    }
    let s = (0..gens.len())
        .find(|&i| k.with([reps[i].clone()]).contains(l))
        .ok_or_else(|| crate::error::Error::Precondition("l is not in F l_s + K for any s".into()))?;
    let lf = f.mul(&Poly::from_form(l), DEFAULT_MONOMIAL_CAP)?;
    let lhs = IdealOracle::new(&TermIdeal::new(field, n, gens.to_vec()))?.contains_poly(&lf)?;
    let mut reduced = gens.to_vec();
    if let Some(pos) = reduced[s].forms.iter().position(|x| x.similar(l)) {
        let removed = reduced[s].forms.remove(pos);
        let c = removed.lead_coeff().expect("nonzero").clone();
        reduced[s].coeff *= &c;
    }
    let rhs = IdealOracle::new(&TermIdeal::new(field, n, reduced))?.contains_poly(f)?;
    Ok(CancelOutcome { s, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rational;

    fn f(c: &[i64]) -> FormVec {
        FormVec::from_ints(Q, c)
    }

    fn mono(forms: &[&[i64]]) -> MultTerm {
        MultTerm::monic(Q, forms.iter().map(|x| f(x)).collect())
    }

    fn ideal(n: usize, gens: &[MultTerm]) -> TermIdeal {
        TermIdeal::new(Q, n, gens.to_vec())
    }

    #[test]
    fn radical_span() {
        let i = ideal(2, &[mono(&[&[1, 0], &[1, 0]]), mono(&[&[1, 0], &[0, 1]])]);
        assert_eq!(i.radspan(), &Subspace::full(Q, 2));
    }

    #[test]
    fn nodes_example() {
        // x1^2 x2 (x1 + x2) modulo sp{x1}
        let t = mono(&[&[1, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let s = Subspace::span(Q, 2, [f(&[1, 0])]);
        let nodes = nodes_of(&t, &s);
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].rep, None);
        assert_eq!(nodes[0].term, mono(&[&[1, 0], &[1, 0]]));
        assert_eq!(nodes[1].rep, Some(f(&[0, 1])));
        assert_eq!(nodes[1].term, mono(&[&[0, 1], &[1, 1]]));
    }

    #[test]
    fn nodes_modulo_zero_are_coprime_powers() {
        let t = mono(&[&[1, 1], &[2, 2], &[1, 0]]);
        let nodes = nodes_of(&t, &Subspace::zero(Q, 2));
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[0].positions, vec![0, 1]);
        assert_eq!(nodes[0].rep, Some(f(&[1, 1])));
    }

    #[test]
    fn slices() {
        let i = ideal(2, &[mono(&[&[1, 0], &[1, 0]]), mono(&[&[1, 0], &[0, 1]])]);
        let h = mono(&[&[0, 1], &[1, 1]]).expand(2, 100).unwrap();
        assert!(!slice_membership(&h, &i).unwrap());
        let h = mono(&[&[1, 0], &[1, 1]]).expand(2, 100).unwrap();
        assert!(slice_membership(&h, &i).unwrap());
        assert!(IdealOracle::new(&i).unwrap().contains_poly(&h).unwrap());
    }

    #[test]
    fn term_membership() {
        let i = ideal(3, &[mono(&[&[1, 0, 0], &[1, 0, 0]]), mono(&[&[1, 0, 0], &[0, 1, 0]])]);
        assert!(term_in_ideal(&mono(&[&[0, 0, 1], &[1, 0, 0], &[1, 0, 0]]), &i).unwrap());
        assert!(!term_in_ideal(&mono(&[&[0, 1, 0], &[1, 1, 0]]), &i).unwrap());
        let xi = ideal(2, &[mono(&[&[1, 0]])]);
        assert!(term_in_ideal(&mono(&[&[1, 0], &[0, 1]]), &xi).unwrap());
        assert!(!term_in_ideal(&mono(&[&[0, 1]]), &TermIdeal::zero(Q, 2)).unwrap());
        let unit = ideal(2, &[MultTerm::monic(Q, vec![])]);
        assert!(term_in_ideal(&mono(&[&[0, 1]]), &unit).unwrap());
    }

    #[test]
    fn combos() {
        let terms: Vec<MultTerm> = (0..4).map(|a| mono(&[&[1, a], &[1, a]])).collect();
        let sol = combo_in_ideal(&terms, 3, &TermIdeal::zero(Q, 2)).unwrap().unwrap();
        assert_eq!(sol.witness, [-1, 3, -3, 1].map(|x| Q.int(x)));
        assert!(sol.directions.is_empty());
        // modulo <x>: only y^2 survives from each term
        let sol = combo_in_ideal(&terms[1..3], 0, &ideal(2, &[mono(&[&[1, 0]])]))
            .unwrap()
            .unwrap();
        assert_eq!(sol.witness, vec![Q.one(), Q.int(-1) * Q.one() / Q.int(4)]);
        assert!(combo_in_ideal(&terms[..2], 0, &ideal(2, &[mono(&[&[1, 0], &[0, 1]])]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn crt_hypotheses() {
        let i = ideal(3, &[mono(&[&[1, 0, 0]])]);
        let z = mono(&[&[1, 0, 0]]);
        let ff = mono(&[&[0, 1, 0]]);
        let g = mono(&[&[0, 0, 1]]);
        let probes = vec![Poly::from_form(&f(&[1, 0, 0]))];
        let r = crt_check(&i, &z, &ff, &g, &probes).unwrap();
        assert!(r.iter().all(CrtProbe::agrees));
        assert!(r[0].in_product);
        let bad = mono(&[&[1, 1, 0]]);
        match crt_check(&i, &z, &ff, &bad, &probes) {
            Err(crate::Error::Precondition(m)) => assert!(m.contains("L(g)")),
            other => panic!("{other:?}"),
        }
        assert!(crt_check(&i, &ff, &ff, &g, &probes).is_err());
        assert!(crt_check(&i, &z, &z, &g, &probes).is_err());
    }

    #[test]
    fn node_reductions() {
        // h = y z is in <x, y z>; not in <x, y^2 z>. Nodes of y^2 z mod sp{x} are y^2, z.
        let i = ideal(3, &[mono(&[&[1, 0, 0]])]);
        let t = mono(&[&[0, 1, 0], &[0, 1, 0], &[0, 0, 1]]);
        let h = mono(&[&[0, 1, 0], &[0, 0, 1]]).expand(3, 100).unwrap();
        let g = node_reduction(&h, &i, &t).unwrap().unwrap();
        assert_eq!(g, mono(&[&[0, 1, 0], &[0, 1, 0]]));
        let h2 = mono(&[&[0, 1, 0], &[0, 1, 0], &[0, 0, 1]]).expand(3, 100).unwrap();
        assert!(node_reduction(&h2, &i, &t).unwrap().is_none());
    }

    #[test]
    fn cancellation() {
        // K = sp{x}, f_1 = y (y + x), l = y + 2x: l * y in <f_1> iff y in <y + x>
        let k = Subspace::span(Q, 3, [f(&[1, 0, 0])]);
        let gens = vec![mono(&[&[0, 1, 0], &[1, 1, 0]]), mono(&[&[0, 0, 1]])];
        let l = f(&[2, 1, 0]);
        let h = Poly::from_form(&f(&[0, 1, 0]));
        let out = cancel_check(&l, &h, &gens, &k).unwrap();
        assert_eq!(out.s, 0);
        assert_eq!(out.lhs, out.rhs);
        let l = f(&[1, 1, 0]);
        let out = cancel_check(&l, &h, &gens, &k).unwrap();
        assert!(out.lhs && out.rhs);
        assert!(cancel_check(&f(&[0, 1, 1]), &h, &gens, &k).is_err());
    }
}
