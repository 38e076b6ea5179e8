//! Depth-3 circuits: sums of products of linear forms.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{input, precondition, resource, Result};
use crate::field::{FieldSpec, Scalar};
use crate::linalg::{nullspace, rank_of, FormVec, Matrix, Subspace, Transform};
use crate::poly::{Poly, DEFAULT_MONOMIAL_CAP};

/// Desk-scale limits applied by the combinatorial routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    pub max_fanin: usize,
    pub max_degree: usize,
    pub max_vars: usize,
    pub max_monomials: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_fanin: 12,
            max_degree: 24,
            max_vars: 12,
            max_monomials: DEFAULT_MONOMIAL_CAP,
        }
    }
}

/// `coeff * prod forms`; the coefficient and every form are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultTerm {
    pub coeff: Scalar,
    pub forms: Vec<FormVec>,
}

impl MultTerm {
    pub fn new(coeff: Scalar, forms: Vec<FormVec>) -> Result<Self> {
        if coeff.is_zero() {
            return input("term coefficient is zero");
        }
        if forms.iter().any(FormVec::is_zero) {
            return input("term contains the zero form");
        }
        Ok(MultTerm { coeff, forms })
    }

    /// Product with coefficient one.
    pub fn monic(field: FieldSpec, forms: Vec<FormVec>) -> Self {
        MultTerm {
            coeff: field.one(),
            forms,
        }
    }

    pub fn field(&self) -> FieldSpec {
        self.coeff.field()
    }

    pub fn degree(&self) -> usize {
        self.forms.len()
    }

    pub fn expand(&self, nvars: usize, cap: usize) -> Result<Poly> {
        Poly::product(&self.coeff, &self.forms, nvars, cap)
    }

    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        let mut acc = self.coeff.clone();
        for l in &self.forms {
            acc *= &l.dot(point);
            if acc.is_zero() {
                break;
            }
        }
        acc
    }

    pub fn scaled(&self, c: &Scalar) -> MultTerm {
        MultTerm {
            coeff: &self.coeff * c,
            forms: self.forms.clone(),
        }
    }

    pub fn transform(&self, t: &Transform) -> MultTerm {
        MultTerm {
            coeff: self.coeff.clone(),
            forms: self.forms.iter().map(|l| t.apply(l)).collect(),
        }
    }

    /// Sorted normalized forms: equal exactly when the terms agree up to a
    /// nonzero scalar.
    pub fn shape(&self) -> Vec<FormVec> {
        let mut v: Vec<FormVec> = self.forms.iter().map(FormVec::normalized).collect();
        v.sort();
        v
    }

    /// Scalar `c` with `self = c * prod shape()`.
    pub fn content(&self) -> Scalar {
        let mut c = self.coeff.clone();
        for l in &self.forms {
            c *= l.lead_coeff().expect("nonzero form");
        }
        c
    }

    /// Polynomial equality without expanding.
    pub fn same_polynomial(&self, o: &MultTerm) -> bool {
        self.content() == o.content() && self.shape() == o.shape()
    }

    pub fn similar(&self, o: &MultTerm) -> bool {
        self.shape() == o.shape()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    pub field: FieldSpec,
    pub nvars: usize,
    pub terms: Vec<MultTerm>,
}

impl Circuit {
    pub fn new(field: FieldSpec, nvars: usize, terms: Vec<MultTerm>) -> Result<Self> {
        if nvars == 0 {
            return input("a circuit needs at least one variable");
        }
        for t in &terms {
            if t.field() != field {
                return input("term over a different field");
            }
            if t.forms.iter().any(|l| l.len() != nvars) {
                return input(format!("form length differs from nvars = {nvars}"));
            }
            if t.coeff.is_zero() || t.forms.iter().any(FormVec::is_zero) {
                return input("zero coefficient or zero form");
            }
        }
        Ok(Circuit { field, nvars, terms })
    }

    pub fn fanin(&self) -> usize {
        self.terms.len()
    }

    /// Largest term degree.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(MultTerm::degree).max().unwrap_or(0)
    }

    pub fn is_homogeneous(&self) -> bool {
        let d = self.degree();
        self.terms.iter().all(|t| t.degree() == d)
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for t in &self.terms {
            acc += &t.eval(point);
        }
        acc
    }

    pub fn expand(&self, cap: usize) -> Result<Poly> {
        let mut p = Poly::zero(self.field, self.nvars);
        for t in &self.terms {
            p.add_assign(&t.expand(self.nvars, cap)?);
            if p.len() > cap {
                return resource(format!("expansion exceeds {cap} monomials"));
            }
        }
        Ok(p)
    }

    pub fn is_identity(&self) -> Result<bool> {
        Ok(self.expand(DEFAULT_MONOMIAL_CAP)?.is_zero())
    }

    /// Sub-circuit on the given term indices, in the given order.
    pub fn select(&self, idx: &[usize]) -> Circuit {
        Circuit {
            field: self.field,
            nvars: self.nvars,
            terms: idx.iter().map(|&i| self.terms[i].clone()).collect(),
        }
    }

    pub fn transform(&self, t: &Transform) -> Circuit {
        Circuit {
            field: self.field,
            nvars: self.nvars,
            terms: self.terms.iter().map(|x| x.transform(t)).collect(),
        }
    }

    pub fn forms(&self) -> impl Iterator<Item = &FormVec> {
        self.terms.iter().flat_map(|t| t.forms.iter())
    }

    pub fn span(&self) -> Subspace {
        Subspace::span(self.field, self.nvars, self.forms().cloned())
    }

    pub fn check_limits(&self, lim: &Limits) -> Result<()> {
        if self.fanin() > lim.max_fanin {
            return resource(format!("fanin {} exceeds cap {}", self.fanin(), lim.max_fanin));
        }
        if self.degree() > lim.max_degree {
            return resource(format!("degree {} exceeds cap {}", self.degree(), lim.max_degree));
        }
        if self.nvars > lim.max_vars {
            return resource(format!("{} variables exceed cap {}", self.nvars, lim.max_vars));
        }
        Ok(())
    }
}

/// A form with a constant slot, as read from an extended input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineForm {
    pub linear: FormVec,
    pub constant: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineTerm {
    pub coeff: Scalar,
    pub forms: Vec<AffineForm>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineCircuit {
    pub field: FieldSpec,
    pub nvars: usize,
    pub terms: Vec<AffineTerm>,
}

impl AffineCircuit {
    pub fn evaluate(&self, point: &[Scalar]) -> Scalar {
        let mut acc = self.field.zero();
        for t in &self.terms {
            let mut v = t.coeff.clone();
            for f in &t.forms {
                v *= &(&f.linear.dot(point) + &f.constant);
            }
            acc += &v;
        }
        acc
    }

    pub fn has_constants(&self) -> bool {
        self.terms.iter().any(|t| t.forms.iter().any(|f| !f.constant.is_zero()))
    }

    /// Replaces constant slots by a fresh last variable `z`, then pads every
    /// term with powers of `z` up to the largest degree. Already homogeneous
    /// input is returned over the original variables.
    pub fn homogenize(&self) -> Result<Circuit> {
        let d = self.terms.iter().map(|t| t.forms.len()).max().unwrap_or(0);
        let uniform = self.terms.iter().all(|t| t.forms.len() == d);
        if !self.has_constants() {
            let c = Circuit::new(
                self.field,
                self.nvars,
                self.terms
                    .iter()
                    .map(|t| MultTerm::new(t.coeff.clone(), t.forms.iter().map(|f| f.linear.clone()).collect()))
                    .collect::<Result<_>>()?,
            )?;
            return Ok(if uniform { c } else { homogenize(&c) });
        }
        let n = self.nvars + 1;
        let z = FormVec::unit(self.field, n, self.nvars);
        let mut terms = Vec::new();
        for t in &self.terms {
            let mut forms: Vec<FormVec> = t
                .forms
                .iter()
                .map(|f| {
                    let mut v = f.linear.0.clone();
                    v.push(f.constant.clone());
                    FormVec(v)
                })
                .collect();
            forms.extend(std::iter::repeat_n(z.clone(), d - t.forms.len()));
            terms.push(MultTerm::new(t.coeff.clone(), forms)?);
        }
        Circuit::new(self.field, n, terms)
    }
}

/// Pads terms of lower degree with a fresh last variable. Circuits whose
/// terms already share one degree come back unchanged.
pub fn homogenize(c: &Circuit) -> Circuit {
    if c.is_homogeneous() {
        return c.clone();
    }
    let n = c.nvars + 1;
    let d = c.degree();
    let z = FormVec::unit(c.field, n, c.nvars);
    let lift = |l: &FormVec| {
        let mut v = l.0.clone();
        v.push(c.field.zero());
        FormVec(v)
    };
    let terms = c
        .terms
        .iter()
        .map(|t| {
            let mut forms: Vec<FormVec> = t.forms.iter().map(lift).collect();
            forms.extend(std::iter::repeat_n(z.clone(), d - t.degree()));
            MultTerm {
                coeff: t.coeff.clone(),
                forms,
            }
        })
        .collect();
    Circuit {
        field: c.field,
        nvars: n,
        terms,
    }
}

/// Monic common factor and the simple part: `C = gcd * sim(C)`.
///
/// Similarity classes are intersected as multisets. The scalar by which a
/// removed form differs from its class representative moves into the
/// coefficient of the remaining term.
pub fn gcd_and_simple(c: &Circuit) -> (MultTerm, Circuit) {
    let mut common: Option<BTreeMap<FormVec, usize>> = None;
    for t in &c.terms {
        let mut counts: BTreeMap<FormVec, usize> = BTreeMap::new();
        for l in &t.forms {
            *counts.entry(l.normalized()).or_default() += 1;
        }
        common = Some(match common {
            None => counts,
            Some(prev) => prev
                .into_iter()
                .filter_map(|(k, v)| counts.get(&k).map(|&w| (k, v.min(w))))
                .filter(|(_, v)| *v > 0)
                .collect(),
        });
    }
    let common = common.unwrap_or_default();
    let mut gcd_forms = Vec::new();
    for (l, &m) in &common {
        gcd_forms.extend(std::iter::repeat_n(l.clone(), m));
    }
    let gcd = MultTerm::monic(c.field, gcd_forms);
    let terms = c
        .terms
        .iter()
        .map(|t| {
            let mut left = common.clone();
            let mut coeff = t.coeff.clone();
            let mut forms = Vec::new();
            for l in &t.forms {
                let key = l.normalized();
                match left.get_mut(&key) {
                    Some(m) if *m > 0 => {
                        *m -= 1;
                        coeff *= l.lead_coeff().expect("nonzero form");
                    }
                    _ => forms.push(l.clone()),
                }
            }
            MultTerm { coeff, forms }
        })
        .collect();
    (
        gcd,
        Circuit {
            field: c.field,
            nvars: c.nvars,
            terms,
        },
    )
}

pub fn is_simple(c: &Circuit) -> bool {
    gcd_and_simple(c).0.forms.is_empty()
}

pub fn circuit_rank(c: &Circuit) -> usize {
    let forms: Vec<FormVec> = c.forms().cloned().collect();
    rank_of(c.field, c.nvars, &forms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DependencyMode {
    /// Exact expansion into monomial coefficients.
    Expand,
    /// Evaluation on the grid `{0..d}^n`; exact whenever `|F| > d`.
    Grid,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dependencies {
    /// Basis of `{beta : sum beta_i T_i = 0}`.
    pub basis: Vec<Vec<Scalar>>,
    /// Greedy maximal independent set, scanning terms in order.
    pub independent: Vec<usize>,
    pub ind_fanin: usize,
}

/// Linear relations among the terms of `c`.
pub fn term_dependencies(c: &Circuit, mode: DependencyMode, lim: &Limits) -> Result<Dependencies> {
    let k = c.fanin();
    let rows: Matrix = match mode {
        DependencyMode::Expand => {
            let polys: Vec<Poly> = c
                .terms
                .iter()
                .map(|t| t.expand(c.nvars, lim.max_monomials))
                .collect::<Result<_>>()?;
            let mut keys: BTreeMap<&Vec<u8>, usize> = BTreeMap::new();
            for p in &polys {
                for m in p.terms.keys() {
                    let next = keys.len();
                    keys.entry(m).or_insert(next);
                }
            }
            let mut rows = vec![vec![c.field.zero(); k]; keys.len()];
            for (j, p) in polys.iter().enumerate() {
                for (m, v) in &p.terms {
                    rows[keys[m]][j] = v.clone();
                }
            }
            rows
        }
        DependencyMode::Grid => {
            let d = c.degree();
            if !c.field.exceeds(d as u64) {
                return input(format!("grid mode needs more than {d} field elements"));
            }
            let size = (d as u128 + 1).checked_pow(c.nvars as u32).unwrap_or(u128::MAX);
            if size > lim.max_monomials as u128 {
                return resource(format!("evaluation grid of {size} points exceeds cap"));
            }
            grid_points(c.field, c.nvars, d)
                .map(|p| c.terms.iter().map(|t| t.eval(&p)).collect())
                .collect()
        }
    };
    let basis = nullspace(&rows, k, c.field);
    let mut independent = Vec::new();
    let mut acc: Matrix = Vec::new();
    for j in 0..k {
        let mut trial = acc.clone();
        trial.push(rows.iter().map(|r| r[j].clone()).collect());
        if crate::linalg::matrix_rank(&trial) == trial.len() {
            acc = trial;
            independent.push(j);
        }
    }
    Ok(Dependencies {
        ind_fanin: k - basis.len(),
        basis,
        independent,
    })
}

/// All points of `{0..d}^n`.
pub fn grid_points(field: FieldSpec, n: usize, d: usize) -> impl Iterator<Item = Vec<Scalar>> {
    let total = (d + 1).pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut p = Vec::with_capacity(n);
        for _ in 0..n {
            p.push(field.int((idx % (d + 1)) as i64));
            idx /= d + 1;
        }
        p
    })
}

/// A nonempty proper subset of terms summing to zero, if any.
pub fn vanishing_subset(c: &Circuit, lim: &Limits) -> Result<Option<Vec<usize>>> {
    let k = c.fanin();
    if k > lim.max_fanin {
        return resource(format!("fanin {k} exceeds cap {} for subset search", lim.max_fanin));
    }
    let polys: Vec<Poly> = c
        .terms
        .iter()
        .map(|t| t.expand(c.nvars, lim.max_monomials))
        .collect::<Result<_>>()?;
    // Gray-code walk over subsets, one toggle per step.
    let mut sum = Poly::zero(c.field, c.nvars);
    let mut mask: u64 = 0;
    let minus = -c.field.one();
    for step in 1u64..(1u64 << k) {
        let bit = step.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask & (1 << bit) != 0 {
            sum.add_assign(&polys[bit]);
        } else {
            sum.axpy(&minus, &polys[bit]);
        }
        if sum.is_zero() && mask.count_ones() as usize != k {
            return Ok(Some((0..k).filter(|i| mask & (1 << i) != 0).collect()));
        }
    }
    Ok(None)
}

pub fn is_minimal(c: &Circuit, lim: &Limits) -> Result<bool> {
    Ok(vanishing_subset(c, lim)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitProfile {
    pub fanin: usize,
    pub degree: usize,
    pub nvars: usize,
    pub rank: usize,
    pub gcd: MultTerm,
    pub simple: bool,
    pub identity: bool,
    pub minimal: bool,
    pub ind_fanin: usize,
}

pub fn profile(c: &Circuit, lim: &Limits) -> Result<CircuitProfile> {
    let (gcd, _) = gcd_and_simple(c);
    Ok(CircuitProfile {
        fanin: c.fanin(),
        degree: c.degree(),
        nvars: c.nvars,
        rank: circuit_rank(c),
        simple: gcd.forms.is_empty(),
        gcd,
        identity: c.expand(lim.max_monomials)?.is_zero(),
        minimal: is_minimal(c, lim)?,
        ind_fanin: term_dependencies(c, DependencyMode::Expand, lim)?.ind_fanin,
    })
}

/// `sum_i lambda_i (x + a_i y)^{k-2}` with `a_i = 0..k-1` and `lambda` the
/// normalized kernel vector of the power-sum system (last entry one).
pub fn gen_interpolation_identity(k: usize, field: FieldSpec) -> Result<Circuit> {
    if k < 3 {
        return input("interpolation identities need k >= 3");
    }
    if !field.exceeds(k as u64 - 1) {
        return input(format!("{field} has fewer than {k} elements"));
    }
    let a: Vec<Scalar> = (0..k as i64).map(|i| field.int(i)).collect();
    let d = k - 2;
    let rows: Matrix = (0..=d).map(|j| a.iter().map(|ai| ai.pow(j as u32)).collect()).collect();
    let ns = nullspace(&rows, k, field);
    debug_assert_eq!(ns.len(), 1);
    let last = ns[0][k - 1].inv().expect("kernel vector has full support");
    let terms = a
        .iter()
        .zip(&ns[0])
        .map(|(ai, li)| {
            let form = FormVec(vec![field.one(), ai.clone()]);
            MultTerm::new(li * &last, vec![form; d])
        })
        .collect::<Result<_>>()?;
    Circuit::new(field, 2, terms)
}

/// Seeded random circuit: forms with entries in `[-2, 2]`, coefficients in
/// `[-3, 3] \ {0}` (reduced mod `p` over a prime field).
pub fn gen_random(k: usize, d: usize, n: usize, field: FieldSpec, seed: u64) -> Result<Circuit> {
    if n == 0 {
        return input("need at least one variable");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut terms = Vec::with_capacity(k);
    for _ in 0..k {
        let coeff = loop {
            let c = field.int(rng.gen_range(-3..=3));
            if !c.is_zero() {
                break c;
            }
        };
        let forms = (0..d)
            .map(|_| loop {
                let v = FormVec((0..n).map(|_| field.int(rng.gen_range(-2..=2))).collect());
                if !v.is_zero() {
                    break v;
                }
            })
            .collect();
        terms.push(MultTerm::new(coeff, forms)?);
    }
    Circuit::new(field, n, terms)
}

/// Substitutes the variables of `c` by random independent forms in `n`
/// variables. Zero-ness, simplicity, minimality and rank are preserved.
pub fn embed(c: &Circuit, n: usize, seed: u64) -> Result<Circuit> {
    if n < c.nvars {
        return input("cannot embed into fewer variables");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let images = loop {
        let rows: Vec<FormVec> = (0..c.nvars)
            .map(|_| FormVec((0..n).map(|_| c.field.int(rng.gen_range(-2..=2))).collect()))
            .collect();
        if rank_of(c.field, n, &rows) == c.nvars {
            break rows;
        }
    };
    let map = |l: &FormVec| {
        let mut out = FormVec::zero(c.field, n);
        for (a, img) in l.0.iter().zip(&images) {
            out = out.axpy(a, img);
        }
        out
    };
    let terms = c
        .terms
        .iter()
        .map(|t| MultTerm::new(t.coeff.clone(), t.forms.iter().map(map).collect()))
        .collect::<Result<_>>()?;
    Circuit::new(c.field, n, terms)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StronglyMinimal {
    /// The non-basis term `T_i` completing the relation.
    pub index: usize,
    /// `(j, alpha_ij)` with `T_i = -sum alpha_ij T_j`, `alpha_ij != 0`.
    pub alphas: Vec<(usize, Scalar)>,
    /// `sum_j alpha_ij T_j + T_i`, basis terms first.
    pub circuit: Circuit,
}

/// Splits an identity into strongly minimal identities, one per term
/// outside the maximal independent set `basis`.
pub fn decompose_strongly_minimal(c: &Circuit, basis: &[usize], lim: &Limits) -> Result<Vec<StronglyMinimal>> {
    if !c.expand(lim.max_monomials)?.is_zero() {
        return precondition("circuit is not an identity");
    }
    let deps = term_dependencies(c, DependencyMode::Expand, lim)?;
    let sub = c.select(basis);
    let sub_deps = term_dependencies(&sub, DependencyMode::Expand, lim)?;
    if sub_deps.ind_fanin != basis.len() || basis.len() != deps.ind_fanin {
        return precondition("basis set is not a maximal independent set of terms");
    }
    let polys: Vec<Poly> = c
        .terms
        .iter()
        .map(|t| t.expand(c.nvars, lim.max_monomials))
        .collect::<Result<_>>()?;
    let mut keys: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    for p in &polys {
        for m in p.terms.keys() {
            let next = keys.len();
            keys.entry(m.clone()).or_insert(next);
        }
    }
    let column = |p: &Poly| {
        let mut v = vec![c.field.zero(); keys.len()];
        for (m, x) in &p.terms {
            v[keys[m]] = x.clone();
        }
        v
    };
    let cols: Vec<Vec<Scalar>> = basis.iter().map(|&j| column(&polys[j])).collect();
    let a: Matrix = (0..keys.len())
        .map(|r| cols.iter().map(|col| col[r].clone()).collect())
        .collect();
    let mut out = Vec::new();
    for i in (0..c.fanin()).filter(|i| !basis.contains(i)) {
        let rhs: Vec<Scalar> = column(&polys[i]).iter().map(|x| -x).collect();
        let Some(x) = crate::linalg::solve(&a, &rhs, basis.len(), c.field) else {
            return precondition(format!("term {i} is not in the span of the basis terms"));
        };
        let alphas: Vec<(usize, Scalar)> = basis
            .iter()
            .zip(x)
            .filter(|(_, a)| !a.is_zero())
            .map(|(&j, a)| (j, a))
            .collect();
        let mut terms: Vec<MultTerm> = alphas.iter().map(|(j, a)| c.terms[*j].scaled(a)).collect();
        terms.push(c.terms[i].clone());
        out.push(StronglyMinimal {
            index: i,
            alphas,
            circuit: Circuit::new(c.field, c.nvars, terms)?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FieldSpec = FieldSpec::Rational;

    fn f(c: &[i64]) -> FormVec {
        FormVec::from_ints(Q, c)
    }

    fn term(c: i64, forms: &[&[i64]]) -> MultTerm {
        MultTerm::new(Q.int(c), forms.iter().map(|x| f(x)).collect()).unwrap()
    }

    #[test]
    fn interpolation_k3() {
        let c = gen_interpolation_identity(3, Q).unwrap();
        let want = vec![term(1, &[&[1, 0]]), term(-2, &[&[1, 1]]), term(1, &[&[1, 2]])];
        assert_eq!(c.terms, want);
        assert!(c.is_identity().unwrap());
    }

    #[test]
    fn interpolation_k4() {
        let c = gen_interpolation_identity(4, Q).unwrap();
        let coeffs: Vec<Scalar> = c.terms.iter().map(|t| t.coeff.clone()).collect();
        assert_eq!(coeffs, [-1, 3, -3, 1].map(|x| Q.int(x)));
        assert!(c.is_identity().unwrap());
        let lim = Limits::default();
        let p = profile(&c, &lim).unwrap();
        assert!(p.simple && p.minimal && p.identity);
        assert_eq!((p.rank, p.ind_fanin), (2, 3));
    }

    #[test]
    fn interpolation_over_small_fields() {
        assert!(gen_interpolation_identity(5, FieldSpec::Prime(5))
            .unwrap()
            .is_identity()
            .unwrap());
        assert!(gen_interpolation_identity(5, FieldSpec::Prime(3)).is_err());
        assert!(gen_interpolation_identity(2, Q).is_err());
    }

    #[test]
    fn evaluation_matches_expansion() {
        let c = Circuit::new(
            Q,
            2,
            vec![
                term(2, &[&[1, 0], &[1, 0], &[0, 1]]),
                term(4, &[&[1, 0], &[1, 0], &[1, 1]]),
            ],
        )
        .unwrap();
        let p = c.expand(1000).unwrap();
        let pt = [Q.int(3), Q.int(-2)];
        assert_eq!(c.evaluate(&pt), p.eval(&pt));
        assert_eq!(c.evaluate(&pt), Q.int(2 * 9 * -2 + 4 * 9));
    }

    #[test]
    fn gcd_extraction() {
        // 2 x^2 y + 4 x^2 (y + x)
        let c = Circuit::new(
            Q,
            2,
            vec![
                term(2, &[&[1, 0], &[1, 0], &[0, 1]]),
                term(4, &[&[1, 0], &[1, 0], &[1, 1]]),
            ],
        )
        .unwrap();
        let (g, s) = gcd_and_simple(&c);
        assert_eq!(g, MultTerm::monic(Q, vec![f(&[1, 0]), f(&[1, 0])]));
        assert_eq!(s.terms, vec![term(2, &[&[0, 1]]), term(4, &[&[1, 1]])]);
        assert!(!is_simple(&c));
        assert!(is_simple(&s));
    }

    #[test]
    fn gcd_absorbs_scalars() {
        // (2x) y + x (x + y): gcd x, sim = 2 y + (x + y)
        let c = Circuit::new(Q, 2, vec![term(1, &[&[2, 0], &[0, 1]]), term(1, &[&[1, 0], &[1, 1]])]).unwrap();
        let (g, s) = gcd_and_simple(&c);
        assert_eq!(g.forms, vec![f(&[1, 0])]);
        assert_eq!(s.terms[0], term(2, &[&[0, 1]]));
        let prod = Circuit::new(
            Q,
            2,
            s.terms
                .iter()
                .map(|t| MultTerm::new(t.coeff.clone(), [g.forms.clone(), t.forms.clone()].concat()).unwrap())
                .collect(),
        )
        .unwrap();
        assert_eq!(prod.expand(100).unwrap(), c.expand(100).unwrap());
    }

    #[test]
    fn homogenize_pads() {
        let c = Circuit::new(Q, 1, vec![term(1, &[&[1], &[1]]), term(1, &[&[1]])]).unwrap();
        let h = homogenize(&c);
        assert_eq!(h.nvars, 2);
        assert_eq!(h.terms[1].forms, vec![f(&[1, 0]), f(&[0, 1])]);
        assert!(h.is_homogeneous());
        assert_eq!(homogenize(&h), h);
    }

    #[test]
    fn homogenize_affine() {
        // (x + 1) - x - 1
        let af = |l: i64, c: i64| AffineForm {
            linear: f(&[l]),
            constant: Q.int(c),
        };
        let a = AffineCircuit {
            field: Q,
            nvars: 1,
            terms: vec![
                AffineTerm {
                    coeff: Q.one(),
                    forms: vec![af(1, 1)],
                },
                AffineTerm {
                    coeff: Q.int(-1),
                    forms: vec![af(1, 0)],
                },
                AffineTerm {
                    coeff: Q.int(-1),
                    forms: vec![],
                },
            ],
        };
        let h = a.homogenize().unwrap();
        assert_eq!(h.nvars, 2);
        assert!(h.is_homogeneous());
        assert!(h.is_identity().unwrap());
        let pt = [Q.int(5)];
        assert_eq!(a.evaluate(&pt), h.evaluate(&[Q.int(5), Q.one()]));
    }

    #[test]
    fn dependencies_of_interpolation() {
        let c = gen_interpolation_identity(4, Q).unwrap();
        let lim = Limits::default();
        let e = term_dependencies(&c, DependencyMode::Expand, &lim).unwrap();
        let g = term_dependencies(&c, DependencyMode::Grid, &lim).unwrap();
        assert_eq!(e, g);
        assert_eq!(e.basis, vec![vec![Q.one(); 4]]);
        assert_eq!(e.independent, vec![0, 1, 2]);
    }

    #[test]
    fn minimality() {
        let lim = Limits::default();
        assert!(is_minimal(&gen_interpolation_identity(3, Q).unwrap(), &lim).unwrap());
        // x - x + y - y has the vanishing subset {T1, T2}
        let c = Circuit::new(
            Q,
            2,
            vec![
                term(1, &[&[1, 0]]),
                term(-1, &[&[1, 0]]),
                term(1, &[&[0, 1]]),
                term(-1, &[&[0, 1]]),
            ],
        )
        .unwrap();
        assert_eq!(vanishing_subset(&c, &lim).unwrap(), Some(vec![0, 1]));
        // x + x - 2x is minimal although its term relations have smaller support
        let c = Circuit::new(Q, 1, vec![term(1, &[&[1]]), term(1, &[&[1]]), term(-2, &[&[1]])]).unwrap();
        assert!(is_minimal(&c, &lim).unwrap());
    }

    #[test]
    fn strongly_minimal_pieces() {
        let c = gen_interpolation_identity(4, Q).unwrap();
        let parts = decompose_strongly_minimal(&c, &[0, 1, 2], &Limits::default()).unwrap();
        assert_eq!(parts.len(), 1);
        let p = &parts[0];
        assert_eq!(p.index, 3);
        assert_eq!(p.alphas, vec![(0, Q.one()), (1, Q.one()), (2, Q.one())]);
        let coeffs: Vec<Scalar> = p.circuit.terms.iter().map(|t| t.coeff.clone()).collect();
        assert_eq!(coeffs, [-1, 3, -3, 1].map(|x| Q.int(x)));
        assert!(p.circuit.is_identity().unwrap());
        assert!(decompose_strongly_minimal(&c, &[0, 1], &Limits::default()).is_err());
    }

    #[test]
    fn random_is_seeded() {
        let a = gen_random(3, 2, 3, Q, 9).unwrap();
        assert_eq!(a, gen_random(3, 2, 3, Q, 9).unwrap());
        assert_ne!(a, gen_random(3, 2, 3, Q, 10).unwrap());
    }

    #[test]
    fn embedding_keeps_identities() {
        let c = gen_interpolation_identity(4, Q).unwrap();
        let e = embed(&c, 4, 3).unwrap();
        assert!(e.is_identity().unwrap());
        assert_eq!(circuit_rank(&e), 2);
        assert!(is_simple(&e));
    }
}
