//! Matchings between terms, the matching nucleus, the nucleus, the nucleus
//! identity and the monic-forms change of coordinates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{term_dependencies, Circuit, DependencyMode, Limits, MultTerm};
use crate::error::{input, precondition, resource, structural, Result};
use crate::field::{FieldSpec, Scalar};
use crate::ideal::{combo_in_ideal, nodes_of, term_in_ideal, TermIdeal};
use crate::linalg::{coordinate_transform, invert, mat_mul, FormVec, Matrix, Subspace, Transform};
use crate::path::{find_certificate, Certificate};

/// Index pairs `(position in g, position in h)` with per-pair scales.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub field: FieldSpec,
    pub pairs: Vec<(usize, usize)>,
    pub scales: Vec<Scalar>,
}

impl Matching {
    fn new(field: FieldSpec) -> Self {
        Matching {
            field,
            pairs: Vec::new(),
            scales: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A `U`-matching between two terms, split into the forms inside `U` and
/// the forms outside it. Inside pairs carry scale one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermMatching {
    pub subspace: Subspace,
    pub inside: Matching,
    pub outside: Matching,
}

/// Unique `c` with `b - c a` in `u`, when `a` is outside `u`.
fn scale_mod(u: &Subspace, a: &FormVec, b: &FormVec) -> Option<Scalar> {
    let ra = u.reduce(a);
    let rb = u.reduce(b);
    let p = ra.lead()?;
    let c = &rb.0[p] / &ra.0[p];
    (!c.is_zero() && rb == ra.scale(&c)).then_some(c)
}

pub fn compute_matching(g: &MultTerm, h: &MultTerm, u: &Subspace) -> Option<TermMatching> {
    let field = u.field();
    let split = |t: &MultTerm| {
        let mut inside = Vec::new();
        let mut classes: Vec<(FormVec, Vec<usize>)> = Vec::new();
        for (i, l) in t.forms.iter().enumerate() {
            match u.class_key(l) {
                None => inside.push(i),
                Some(key) => match classes.iter_mut().find(|(k, _)| *k == key) {
                    Some((_, v)) => v.push(i),
                    None => classes.push((key, vec![i])),
                },
            }
        }
        (inside, classes)
    };
    let (gi, gc) = split(g);
    let (hi, hc) = split(h);
    if gi.len() != hi.len() || gc.len() != hc.len() {
        return None;
    }
    let mut inside = Matching::new(field);
    for (&a, &b) in gi.iter().zip(&hi) {
        inside.pairs.push((a, b));
        inside.scales.push(field.one());
    }
    let mut outside = Matching::new(field);
    for (key, gs) in &gc {
        let (_, hs) = hc.iter().find(|(k, _)| k == key)?;
        if hs.len() != gs.len() {
            return None;
        }
        for (&a, &b) in gs.iter().zip(hs) {
            outside.pairs.push((a, b));
            outside.scales.push(scale_mod(u, &g.forms[a], &h.forms[b])?);
        }
    }
    Some(TermMatching {
        subspace: u.clone(),
        inside,
        outside,
    })
}

/// Re-checks bijectivity and every pair condition.
pub fn verify_matching(g: &MultTerm, h: &MultTerm, m: &TermMatching) -> bool {
    let u = &m.subspace;
    let n = m.inside.len() + m.outside.len();
    if n != g.degree() || n != h.degree() {
        return false;
    }
    let mut seen_g = vec![false; n];
    let mut seen_h = vec![false; n];
    for &(a, b) in m.inside.pairs.iter().chain(&m.outside.pairs) {
        if a >= n || b >= n || seen_g[a] || seen_h[b] {
            return false;
        }
        seen_g[a] = true;
        seen_h[b] = true;
    }
    let inside_ok = m
        .inside
        .pairs
        .iter()
        .all(|&(a, b)| u.contains(&g.forms[a]) && u.contains(&h.forms[b]));
    let outside_ok = m.outside.pairs.iter().zip(&m.outside.scales).all(|(&(a, b), c)| {
        !c.is_zero() && !u.contains(&g.forms[a]) && u.contains(&h.forms[b].sub(&g.forms[a].scale(c)))
    });
    m.inside.scales.len() == m.inside.len() && m.outside.scales.len() == m.outside.len() && inside_ok && outside_ok
}

pub fn scaling_factor(m: &Matching) -> Scalar {
    m.scales.iter().fold(m.field.one(), |acc, c| acc * c)
}

/// `M(L_U(t))`: the forms of `t` inside `u`, coefficient one.
pub fn part_in(t: &MultTerm, u: &Subspace) -> MultTerm {
    MultTerm::monic(t.field(), t.forms.iter().filter(|l| u.contains(l)).cloned().collect())
}

/// Vertex sets of the `u`-matching graph, each sorted, ordered by least vertex.
pub fn matching_components(c: &Circuit, u: &Subspace) -> Vec<Vec<usize>> {
    let k = c.fanin();
    let mut comp: Vec<usize> = (0..k).collect();
    for a in 0..k {
        for b in a + 1..k {
            if comp[b] != comp[a] && compute_matching(&c.terms[a], &c.terms[b], u).is_some() {
                let (from, to) = (comp[b].max(comp[a]), comp[b].min(comp[a]));
                for x in comp.iter_mut() {
                    if *x == from {
                        *x = to;
                    }
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for v in 0..k {
        match out.iter_mut().find(|s| comp[s[0]] == comp[v]) {
            Some(s) => s.push(v),
            None => out.push(vec![v]),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    MatNucleus,
    Nucleus,
}

/// One round of the matching-nucleus construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatRound {
    pub component: Vec<usize>,
    pub rest: Vec<usize>,
    /// Certificate for `C_S` modulo zero.
    pub first: Certificate,
    /// Certificate for `C_{S'}` modulo the first path.
    pub second: Certificate,
    pub rank_after: usize,
}

/// One growth step of the nucleus construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extension {
    /// Positions in the independent list.
    pub phase: usize,
    pub round: usize,
    pub node: MultTerm,
    pub rank_after: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NucleusReport {
    pub stage: Stage,
    pub k: Subspace,
    /// `matchings[i]` matches `T_1` with `T_i`.
    pub matchings: Vec<TermMatching>,
    pub k_terms: Vec<MultTerm>,
    pub alphas: Vec<Scalar>,
    pub independent: Vec<usize>,
    pub rounds: Vec<MatRound>,
    pub extensions: Vec<Extension>,
}

impl NucleusReport {
    /// The nucleus identity `sum alpha_i K_i`.
    pub fn identity(&self, field: FieldSpec, nvars: usize) -> Result<Circuit> {
        let terms = self
            .k_terms
            .iter()
            .zip(&self.alphas)
            .map(|(t, a)| t.scaled(a))
            .collect();
        Circuit::new(field, nvars, terms)
    }
}

fn not_minimal() -> crate::error::Error {
    crate::error::Error::Structural("input not a minimal identity".into())
}

fn finish(c: &Circuit, k: Subspace, stage: Stage, lim: &Limits) -> Result<NucleusReport> {
    let mut matchings = Vec::new();
    for t in &c.terms {
        match compute_matching(&c.terms[0], t, &k) {
            Some(m) => matchings.push(m),
            None => return structural("terms are not matched by the constructed subspace"),
        }
    }
    let mut report = NucleusReport {
        stage,
        k_terms: c.terms.iter().map(|t| part_in(t, &k)).collect(),
        k,
        matchings,
        alphas: Vec::new(),
        independent: Vec::new(),
        rounds: Vec::new(),
        extensions: Vec::new(),
    };
    report.alphas = nucleus_alphas(c, &report)?;
    let id = report.identity(c.field, c.nvars)?;
    if !id.expand(lim.max_monomials)?.is_zero() {
        return structural("nucleus identity does not vanish");
    }
    Ok(report)
}

pub fn build_mat_nucleus(c: &Circuit, lim: &Limits) -> Result<NucleusReport> {
    let k = c.fanin();
    let zero = TermIdeal::zero(c.field, c.nvars);
    let mut u = Subspace::zero(c.field, c.nvars);
    let mut rounds = Vec::new();
    loop {
        let comps = matching_components(c, &u);
        if comps.len() <= 1 {
            break;
        }
        let s = comps[0].clone();
        let rest: Vec<usize> = (0..k).filter(|i| !s.contains(i)).collect();
        let first = find_certificate(&c.select(&s), &zero)?.ok_or_else(not_minimal)?;
        let base = first.path().ideal();
        let second = find_certificate(&c.select(&rest), &base)?.ok_or_else(not_minimal)?;
        u = u.join(&second.path().radspan);
        if matching_components(c, &u).len() >= comps.len() {
            return Err(not_minimal());
        }
        rounds.push(MatRound {
            component: s,
            rest,
            first,
            second,
            rank_after: u.rank(),
        });
    }
    if u.rank() >= k * k {
        return structural(format!("matching nucleus rank {} is not below {}", u.rank(), k * k));
    }
    let mut report = finish(c, u, Stage::MatNucleus, lim)?;
    report.rounds = rounds;
    Ok(report)
}

/// Whether `A_p` lies in `<U_0..U_q, A_{q+1}..A_{p-1}>`, decided by a
/// linear combination of the terms modulo the `U`-part ideal.
fn round_violated(a: &[&MultTerm], p: usize, q: usize, u: &Subspace) -> Result<bool> {
    let field = u.field();
    let gens: Vec<MultTerm> = a[..=q].iter().map(|t| part_in(t, u)).collect();
    let ideal = TermIdeal::new(field, u.ambient(), gens);
    let mut terms: Vec<MultTerm> = vec![a[p].clone()];
    terms.extend(a[q + 1..p].iter().map(|t| (*t).clone()));
    Ok(combo_in_ideal(&terms, 0, &ideal)?.is_some())
}

fn check_independent(c: &Circuit, indep: &[usize], lim: &Limits) -> Result<()> {
    let k = c.fanin();
    let mut sorted = indep.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != indep.len() || indep.iter().any(|&i| i >= k) || indep.is_empty() {
        return precondition("independent set must list distinct term indices");
    }
    let all = term_dependencies(c, DependencyMode::Expand, lim)?;
    let sub = term_dependencies(&c.select(indep), DependencyMode::Expand, lim)?;
    if !sub.basis.is_empty() {
        return precondition("listed terms are linearly dependent");
    }
    if indep.len() != all.ind_fanin {
        return precondition("listed terms are not a maximal independent set");
    }
    Ok(())
}

/// Grows the matching nucleus until the parts of the independent terms
/// are independent. `indep` defaults to the greedy maximal independent set.
pub fn build_nucleus(c: &Circuit, indep: Option<&[usize]>, lim: &Limits) -> Result<NucleusReport> {
    let mat = build_mat_nucleus(c, lim)?;
    let indep: Vec<usize> = match indep {
        Some(s) => {
            check_independent(c, s, lim)?;
            s.to_vec()
        }
        None => term_dependencies(c, DependencyMode::Expand, lim)?.independent,
    };
    let a: Vec<&MultTerm> = indep.iter().map(|&i| &c.terms[i]).collect();
    let mut u = mat.k.clone();
    let mut extensions = Vec::new();
    for p in 1..a.len() {
        for q in 0..p {
            if !round_violated(&a, p, q, &u)? {
                continue;
            }
            let prev = Subspace::span(c.field, c.nvars, a[..q].iter().flat_map(|t| part_in(t, &u).forms));
            let mut grown = None;
            for node in nodes_of(a[q], &prev) {
                let u2 = u.with(node.term.forms.iter().cloned());
                if !round_violated(&a, p, q, &u2)? {
                    grown = Some((node.term, u2));
                    break;
                }
            }
            let Some((node, u2)) = grown else {
                return structural(format!("no extending node in phase {p}, round {q}"));
            };
            u = u2;
            extensions.push(Extension {
                phase: p,
                round: q,
                node,
                rank_after: u.rank(),
            });
        }
    }
    let k = c.fanin();
    if u.rank() >= 2 * k * k {
        return structural(format!("nucleus rank {} is not below {}", u.rank(), 2 * k * k));
    }
    let mut report = finish(c, u, Stage::Nucleus, lim)?;
    let parts: Vec<MultTerm> = indep.iter().map(|&i| report.k_terms[i].clone()).collect();
    let pc = Circuit::new(c.field, c.nvars, parts)?;
    if !term_dependencies(&pc, DependencyMode::Expand, lim)?.basis.is_empty() {
        return structural("nucleus parts of the independent terms are dependent");
    }
    report.independent = indep;
    report.rounds = mat.rounds;
    report.extensions = extensions;
    Ok(report)
}

/// Coefficients `alpha_i = c_i * sc(pi_i) * alpha_1`, where `alpha_1` is the
/// leading coefficient of the outside part of `T_1` in coordinates that
/// send `K` onto the first variables.
fn nucleus_alphas(c: &Circuit, report: &NucleusReport) -> Result<Vec<Scalar>> {
    let k = &report.k;
    for (t, m) in c.terms.iter().zip(&report.matchings) {
        if m.subspace != *k || !verify_matching(&c.terms[0], t, m) {
            return structural("invalid matching in nucleus report");
        }
    }
    let tau = coordinate_transform(k, None)?;
    let r = k.rank();
    let mut alpha1 = c.field.one();
    for l in c.terms[0].forms.iter().filter(|l| !k.contains(l)) {
        let img = tau.apply(l);
        let j = img
            .last()
            .filter(|&j| j >= r)
            .expect("form outside K has a tail coordinate");
        alpha1 *= &img.0[j];
    }
    Ok(c.terms
        .iter()
        .zip(&report.matchings)
        .map(|(t, m)| &(&t.coeff * &scaling_factor(&m.outside)) * &alpha1)
        .collect())
}

pub fn nucleus_identity(c: &Circuit, report: &NucleusReport) -> Result<Circuit> {
    let alphas = nucleus_alphas(c, report)?;
    let terms = c
        .terms
        .iter()
        .zip(&alphas)
        .map(|(t, a)| part_in(t, &report.k).scaled(a))
        .collect();
    Circuit::new(c.field, c.nvars, terms)
}

/// Checks that no `K_{s_r}` lies in the ideal of the earlier members of a
/// proper subset of size at least two. At most `cap` subsets are examined.
pub fn clm_kmin_holds(k_terms: &[MultTerm], nvars: usize, cap: usize) -> Result<bool> {
    let k = k_terms.len();
    if k < 3 {
        return Ok(true);
    }
    let field = k_terms[0].field();
    let count = (1usize << k) - k - 2;
    if count > cap {
        return resource(format!("{count} subsets exceed the cap {cap}"));
    }
    for mask in 1u32..(1u32 << k) - 1 {
        let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        if s.len() < 2 {
            continue;
        }
        let (last, head) = s.split_last().unwrap();
        let ideal = TermIdeal::new(field, nvars, head.iter().map(|&i| k_terms[i].clone()).collect());
        if term_in_ideal(&k_terms[*last], &ideal)? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn verify_clm_kmin(report: &NucleusReport, nvars: usize, cap: usize) -> Result<bool> {
    clm_kmin_holds(&report.k_terms, nvars, cap)
}

/// A change of coordinates fixing `K` under which every form outside `K`
/// has a nonzero `y0`-coordinate in the basis `(y0, U, K)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonicTransform {
    pub tau: Transform,
    pub y0: FormVec,
    pub u: Subspace,
    /// First column of the block acting on `(y0, U)`.
    pub column: Vec<Scalar>,
    basis_inverse: Matrix,
}

impl MonicTransform {
    /// Coordinates of `v` in the basis `(y0, U, K)`.
    pub fn coordinates(&self, v: &FormVec) -> Vec<Scalar> {
        let field = self.y0.0[0].field();
        let n = v.len();
        (0..n)
            .map(|j| (0..n).fold(field.zero(), |acc, i| acc + &v.0[i] * &self.basis_inverse[i][j]))
            .collect()
    }
}

/// Small integers `0, 1, -1, 2, -2, ..`.
fn small(field: FieldSpec, i: usize) -> Scalar {
    let m = i.div_ceil(2) as i64;
    field.int(if i % 2 == 1 { m } else { -m })
}

pub const MONIC_GRID_BUDGET: usize = 20_000;
pub const MONIC_RANDOM_BUDGET: usize = 20_000;

pub fn make_monic(c: &Circuit, k: &Subspace, y0: Option<&FormVec>, seed: u64) -> Result<MonicTransform> {
    let field = c.field;
    let n = c.nvars;
    if !field.exceeds(c.degree() as u64) {
        return input(format!(
            "field of size {} is too small for degree {}",
            field.size().unwrap_or(0),
            c.degree()
        ));
    }
    let y0 = match y0 {
        Some(v) if k.contains(v) => return precondition("y0 lies in K"),
        Some(v) => v.clone(),
        None => match (0..n).find(|j| !k.pivots().contains(j)) {
            Some(j) => FormVec::unit(field, n, j),
            None => return precondition("K is the whole space"),
        },
    };
    let ky = k.with([y0.clone()]);
    let u_basis: Vec<FormVec> = (0..n)
        .filter(|j| !ky.pivots().contains(j))
        .map(|j| FormVec::unit(field, n, j))
        .collect();
    let r = 1 + u_basis.len();
    let mut bm: Matrix = vec![y0.0.clone()];
    bm.extend(u_basis.iter().map(|v| v.0.clone()));
    bm.extend(k.basis().iter().map(|v| v.0.clone()));
    let bm_inv = invert(&bm, field).expect("decomposition basis is invertible");
    let coords = |v: &FormVec| -> Vec<Scalar> {
        (0..n)
            .map(|j| (0..n).fold(field.zero(), |acc, i| acc + &v.0[i] * &bm_inv[i][j]))
            .collect()
    };
    let mut alphas: Vec<Vec<Scalar>> = Vec::new();
    let mut keys: Vec<FormVec> = Vec::new();
    for l in c.forms() {
        if let Some(key) = k.class_key(l) {
            if !keys.contains(&key) {
                keys.push(key);
                alphas.push(coords(l)[..r].to_vec());
            }
        }
    }
    let good = |y: &[Scalar]| {
        alphas
            .iter()
            .all(|a| !a.iter().zip(y).fold(field.zero(), |acc, (x, z)| acc + x * z).is_zero())
    };
    let column = find_point(field, r, seed, &good).ok_or_else(|| {
        crate::error::Error::Resource(format!(
            "no monic point found in {} tries",
            MONIC_GRID_BUDGET + MONIC_RANDOM_BUDGET
        ))
    })?;
    // A: first column = point, remaining columns unit vectors skipping one
    // index where the point is nonzero.
    let b0 = column.iter().position(|x| !x.is_zero()).expect("nonzero point");
    let others: Vec<usize> = (0..r).filter(|&b| b != b0).collect();
    let mut block: Matrix = vec![vec![field.zero(); n]; n];
    for a in 0..r {
        block[a][0] = column[a].clone();
        for (col, &b) in others.iter().enumerate() {
            if a == b {
                block[a][col + 1] = field.one();
            }
        }
    }
    for (a, row) in block.iter_mut().enumerate().skip(r) {
        row[a] = field.one();
    }
    let m = mat_mul(&mat_mul(&bm_inv, &block, field), &bm, field);
    let tau = Transform::new(field, m)?;
    let out = MonicTransform {
        tau,
        u: Subspace::span(field, n, u_basis),
        y0,
        column,
        basis_inverse: bm_inv,
    };
    for b in k.basis() {
        if out.tau.apply(b) != *b {
            return structural("monic transformation moves K");
        }
    }
    for l in c.forms().filter(|l| !k.contains(l)) {
        if out.coordinates(&out.tau.apply(l))[0].is_zero() {
            return structural("monic transformation left a form without y0");
        }
    }
    Ok(out)
}

/// Grid layers `{s_0..s_m}^r` of small integers, the all-ones vector first,
/// then seeded random points.
fn find_point(field: FieldSpec, r: usize, seed: u64, good: &dyn Fn(&[Scalar]) -> bool) -> Option<Vec<Scalar>> {
    let ones = vec![field.one(); r];
    if good(&ones) {
        return Some(ones);
    }
    let width = field.size().map_or(usize::MAX, |s| s as usize);
    let mut tried = 1usize;
    let mut m = 2usize;
    while m <= width && tried < MONIC_GRID_BUDGET {
        let mut idx = vec![0usize; r];
        loop {
            if idx.iter().any(|&i| i == m - 1) {
                let y: Vec<Scalar> = idx.iter().map(|&i| small(field, i)).collect();
                tried += 1;
                if good(&y) {
                    return Some(y);
                }
                if tried >= MONIC_GRID_BUDGET {
                    break;
                }
            }
            let mut pos = 0;
            while pos < r && idx[pos] == m - 1 {
                idx[pos] = 0;
                pos += 1;
            }
            if pos == r {
                break;
            }
            idx[pos] += 1;
        }
        m += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = field.size().map_or(1_000_000i64, |s| s as i64);
    for _ in 0..MONIC_RANDOM_BUDGET {
        let y: Vec<Scalar> = (0..r).map(|_| field.int(rng.gen_range(0..bound))).collect();
        if good(&y) {
            return Some(y);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gen_interpolation_identity;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn term(c: i64, fs: &[&[i64]]) -> MultTerm {
        MultTerm::new(q().int(c), fs.iter().map(|f| FormVec::from_ints(q(), f)).collect()).unwrap()
    }

    #[test]
    fn matchings_and_scales() {
        let g = term(1, &[&[1, 0], &[1, 1]]);
        let h = term(2, &[&[1, 0], &[3, 1]]);
        let sx = Subspace::span(q(), 2, [FormVec::from_ints(q(), &[1, 0])]);
        let m = compute_matching(&g, &h, &sx).unwrap();
        assert!(verify_matching(&g, &h, &m));
        assert_eq!(m.inside.pairs, vec![(0, 0)]);
        assert_eq!(scaling_factor(&m.outside), q().one());
        let sy = Subspace::span(q(), 2, [FormVec::from_ints(q(), &[0, 1])]);
        let m = compute_matching(&g, &h, &sy).unwrap();
        assert_eq!(scaling_factor(&m.outside), q().int(3));
        let m = compute_matching(&g, &g, &Subspace::zero(q(), 2)).unwrap();
        assert!(m.outside.scales.iter().all(Scalar::is_one));
        let x2 = term(1, &[&[1, 0], &[1, 0]]);
        let xy = term(1, &[&[1, 0], &[0, 1]]);
        assert!(compute_matching(&x2, &xy, &Subspace::zero(q(), 2)).is_none());
        assert_eq!(scaling_factor(&Matching::new(q())), q().one());
    }

    #[test]
    fn mat_nucleus_of_small_identities() {
        let lim = Limits::default();
        let t = term(1, &[&[1, 2]]);
        let c = Circuit::new(q(), 2, vec![t.clone(), t.scaled(&q().int(-1))]).unwrap();
        let rep = build_mat_nucleus(&c, &lim).unwrap();
        assert_eq!(rep.k.rank(), 0);
        assert!(rep.rounds.is_empty());
        assert_eq!(rep.alphas[0], -rep.alphas[1].clone());

        let c = gen_interpolation_identity(3, q()).unwrap();
        let rep = build_mat_nucleus(&c, &lim).unwrap();
        assert!((1..=2).contains(&rep.k.rank()));
        for (t, m) in c.terms.iter().zip(&rep.matchings) {
            assert!(verify_matching(&c.terms[0], t, m));
        }
        assert!(nucleus_identity(&c, &rep).unwrap().is_identity().unwrap());
    }

    #[test]
    fn nucleus_separates_independent_parts() {
        let lim = Limits::default();
        for k in 3..=5 {
            let c = gen_interpolation_identity(k, q()).unwrap();
            let rep = build_nucleus(&c, None, &lim).unwrap();
            assert!(rep.k.rank() < 2 * k * k);
            assert_eq!(rep.independent, (0..k - 1).collect::<Vec<_>>());
            assert!(nucleus_identity(&c, &rep).unwrap().is_identity().unwrap());
            assert!(verify_clm_kmin(&rep, c.nvars, 1 << 12).unwrap());
        }
        let c = gen_interpolation_identity(3, q()).unwrap();
        assert!(build_nucleus(&c, Some(&[0, 0]), &lim).is_err());
        assert!(build_nucleus(&c, Some(&[0]), &lim).is_err());
    }

    #[test]
    fn planted_dependence_breaks_kmin() {
        let c = gen_interpolation_identity(4, q()).unwrap();
        let rep = build_nucleus(&c, None, &Limits::default()).unwrap();
        let mut ks = rep.k_terms.clone();
        ks[1] = ks[0].clone();
        assert!(!clm_kmin_holds(&ks, c.nvars, 1 << 12).unwrap());
    }

    #[test]
    fn monic_example() {
        let c = Circuit::new(
            q(),
            2,
            vec![term(1, &[&[1, 0]]), term(-2, &[&[1, 1]]), term(1, &[&[1, 2]])],
        )
        .unwrap();
        let y = FormVec::from_ints(q(), &[0, 1]);
        let m = make_monic(&c, &Subspace::zero(q(), 2), Some(&y), 0).unwrap();
        assert_eq!(
            m.tau.apply(&FormVec::from_ints(q(), &[1, 0])),
            FormVec::from_ints(q(), &[1, 1])
        );
        for l in c.forms() {
            assert!(!m.tau.apply(l).0[1].is_zero());
        }
        let f2 = FieldSpec::prime(2).unwrap();
        let sq = Circuit::new(
            f2,
            2,
            vec![MultTerm::new(f2.one(), vec![FormVec::from_ints(f2, &[1, 0]); 2]).unwrap()],
        )
        .unwrap();
        assert!(matches!(
            make_monic(&sq, &Subspace::zero(f2, 2), None, 0),
            Err(crate::error::Error::Input(_))
        ));
    }
}
