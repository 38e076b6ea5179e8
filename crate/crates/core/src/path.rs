//! Paths through term nodes and non-zeroness certificates.

use crate::circuit::{Circuit, MultTerm};
use crate::error::{Error, Result};
use crate::field::Scalar;
use crate::ideal::{nodes_of, IdealOracle, Residue, TermIdeal};
use crate::linalg::Subspace;
use crate::poly::Poly;

/// `(v_1, .., v_j)` with `v_t` a node of `T_{sources[t]}` modulo the base
/// ideal extended by the earlier nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub base: TermIdeal,
    pub nodes: Vec<MultTerm>,
    pub sources: Vec<usize>,
    pub radspan: Subspace,
}

impl Path {
    pub fn empty(base: &TermIdeal) -> Path {
        Path {
            radspan: base.radspan().clone(),
            base: base.clone(),
            nodes: Vec::new(),
            sources: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The ideal `<base, v_1, .., v_j>`.
    pub fn ideal(&self) -> TermIdeal {
        self.base.with(&self.nodes)
    }

    /// Re-derives every node from scratch and compares exactly.
    pub fn check(&self, c: &Circuit) -> bool {
        if self.nodes.len() != self.sources.len() {
            return false;
        }
        let mut rs = self.base.radspan().clone();
        for (v, &s) in self.nodes.iter().zip(&self.sources) {
            let Some(t) = c.terms.get(s) else {
                return false;
            };
            if !nodes_of(t, &rs).iter().any(|n| n.term.same_polynomial(v)) {
                return false;
            }
            rs = rs.with(v.forms.iter().cloned());
        }
        rs == self.radspan
    }
}

struct Frame {
    rs: Subspace,
    options: Vec<MultTerm>,
    next: usize,
}

/// Depth-first stream of all paths through the prefix terms, in node order.
pub struct Paths<'a> {
    c: &'a Circuit,
    prefix: Vec<usize>,
    base: TermIdeal,
    stack: Vec<Frame>,
    started: bool,
    done: bool,
}

impl<'a> Paths<'a> {
    fn push_frame(&mut self) {
        let depth = self.stack.len();
        let rs = match self.stack.last() {
            None => self.base.radspan().clone(),
            Some(f) => f.rs.with(f.options[f.next - 1].forms.iter().cloned()),
        };
        let options = nodes_of(&self.c.terms[self.prefix[depth]], &rs)
            .into_iter()
            .map(|n| n.term)
            .collect();
        self.stack.push(Frame { rs, options, next: 0 });
    }

    fn current(&self) -> Path {
        let nodes: Vec<MultTerm> = self.stack.iter().map(|f| f.options[f.next - 1].clone()).collect();
        let top = self.stack.last().expect("nonempty stack");
        Path {
            radspan: top
                .rs
                .with(nodes.last().into_iter().flat_map(|v| v.forms.iter().cloned())),
            base: self.base.clone(),
            nodes,
            sources: self.prefix.clone(),
        }
    }
}

impl Iterator for Paths<'_> {
    type Item = Path;

    fn next(&mut self) -> Option<Path> {
        if self.done {
            return None;
        }
        if self.prefix.is_empty() {
            self.done = true;
            return Some(Path::empty(&self.base));
        }
        if !self.started {
            self.started = true;
            self.push_frame();
        }
        loop {
            let Some(top) = self.stack.last_mut() else {
                self.done = true;
                return None;
            };
            if top.next >= top.options.len() {
                self.stack.pop();
                continue;
            }
            top.next += 1;
            if self.stack.len() == self.prefix.len() {
                return Some(self.current());
            }
            self.push_frame();
        }
    }
}

pub fn enumerate_paths<'a>(c: &'a Circuit, prefix: &[usize], base: &TermIdeal) -> Paths<'a> {
    Paths {
        c,
        prefix: prefix.to_vec(),
        base: base.clone(),
        stack: Vec::new(),
        started: false,
        done: false,
    }
}

/// `C_{[i]'} = alpha * T_{i+1} != 0` modulo a path of the first `i` terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    i: usize,
    path: Path,
    alpha: Scalar,
}

impl Certificate {
    pub fn new(i: usize, path: Path, alpha: Scalar) -> Result<Self> {
        if alpha.is_zero() {
            return Err(Error::Input("certificate scalar must be nonzero".into()));
        }
        if path.len() != i {
            return Err(Error::Input(format!(
                "path of length {} for prefix length {i}",
                path.len()
            )));
        }
        Ok(Certificate { i, path, alpha })
    }

    /// Prefix length.
    pub fn i(&self) -> usize {
        self.i
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    /// Zero-based index of the surviving term.
    pub fn survivor(&self) -> usize {
        self.i
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertVerdict {
    Valid,
    Invalid(String),
}

impl CertVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, CertVerdict::Valid)
    }
}

pub fn verify_certificate(c: &Circuit, cert: &Certificate) -> Result<CertVerdict> {
    let i = cert.i;
    let bad = |s: &str| Ok(CertVerdict::Invalid(s.to_string()));
    if i >= c.fanin() {
        return bad("survivor index out of range");
    }
    if cert.path.sources != (0..i).collect::<Vec<_>>() {
        return bad("path does not run through the prefix terms in order");
    }
    if cert.path.base.nvars() != c.nvars || cert.path.base.field() != c.field {
        return bad("base ideal lives in a different ring");
    }
    if !cert.path.check(c) {
        return bad("path invariant fails");
    }
    let oracle = IdealOracle::new(&cert.path.ideal())?;
    let survivor = &c.terms[i];
    if oracle.contains_term(survivor)? {
        return bad("survivor lies in the path ideal");
    }
    let mut rest = Poly::zero(c.field, c.nvars);
    for t in &c.terms[i..] {
        rest.add_assign(&t.expand(c.nvars, crate::poly::DEFAULT_MONOMIAL_CAP)?);
    }
    let surv = survivor.expand(c.nvars, crate::poly::DEFAULT_MONOMIAL_CAP)?;
    rest.axpy(&-cert.alpha.clone(), &surv);
    if !oracle.contains_poly(&rest)? {
        return bad("tail is not congruent to the scaled survivor");
    }
    Ok(CertVerdict::Valid)
}

fn add_residue(acc: &mut Residue, r: &Residue) {
    for (k, v) in r {
        let s = acc.get(k).map_or_else(|| v.clone(), |a| a + v);
        if s.is_zero() {
            acc.remove(k);
        } else {
            acc.insert(k.clone(), s);
        }
    }
}

/// `lambda` with `a = lambda * b`, if any; `b` nonzero.
fn ratio(a: &Residue, b: &Residue) -> Option<Scalar> {
    let (k, bv) = b.iter().next()?;
    let field = bv.field();
    let lambda = a.get(k).map_or_else(|| field.zero(), |av| av / bv);
    let ok = a.keys().all(|k| b.contains_key(k))
        && b.iter()
            .all(|(k, bv)| a.get(k).cloned().unwrap_or_else(|| field.zero()) == &lambda * bv);
    ok.then_some(lambda)
}

fn certificate_on_path(c: &Circuit, i: usize, path: &Path) -> Result<Option<Scalar>> {
    let oracle = IdealOracle::new(&path.ideal())?;
    if oracle.contains_term(&c.terms[i])? {
        return Ok(None);
    }
    let ri = oracle.residue_term(&c.terms[i])?;
    let mut rest = Residue::new();
    for t in &c.terms[i + 1..] {
        add_residue(&mut rest, &oracle.residue_term(t)?);
    }
    // rest = (alpha - 1) * ri
    Ok(ratio(&rest, &ri).map(|l| l + c.field.one()).filter(|a| !a.is_zero()))
}

/// First certificate over `i = 0..k-1` and paths in stream order.
pub fn find_certificate(c: &Circuit, base: &TermIdeal) -> Result<Option<Certificate>> {
    let mut checked = 0usize;
    for i in 0..c.fanin() {
        let prefix: Vec<usize> = (0..i).collect();
        for path in enumerate_paths(c, &prefix, base) {
            checked += 1;
            match certificate_on_path(c, i, &path) {
                Ok(Some(alpha)) => return Certificate::new(i, path, alpha).map(Some),
                Ok(None) => {}
                Err(Error::Resource(m)) => {
                    return Err(Error::Resource(format!(
                        "{m} (prefix length {i}, {checked} paths examined)"
                    )));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(None)
}

#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IdentityVerdict {
    Zero,
    NonZero(Certificate),
}

impl IdentityVerdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, IdentityVerdict::Zero)
    }
}

pub fn path_identity_test(c: &Circuit) -> Result<IdentityVerdict> {
    Ok(match find_certificate(c, &TermIdeal::zero(c.field, c.nvars))? {
        Some(cert) => IdentityVerdict::NonZero(cert),
        None => IdentityVerdict::Zero,
    })
}
