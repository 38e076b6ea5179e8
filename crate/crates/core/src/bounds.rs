//! Truncations, families and the rank-bound verifiers.

use crate::chain::{set_of, Partition, Set};
use crate::circuit::{
    circuit_rank, is_minimal, is_simple, term_dependencies, Circuit, DependencyMode, Limits, MultTerm,
};
use crate::error::{precondition, resource, Result};
use crate::field::FieldSpec;
use crate::linalg::{orthogonal_decompose, quotient_rank, FormVec, Subspace};
use crate::nucleus::{build_nucleus, make_monic, MonicTransform};
use crate::pit::rank_bound;
use crate::sg::{sg_operator, SgConfig, SgOutcome};

/// The decomposition `F y0 + U + K` of the ambient space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frame {
    pub y0: FormVec,
    pub u: Subspace,
    pub k: Subspace,
}

impl Frame {
    pub fn from_monic(m: &MonicTransform, k: &Subspace) -> Frame {
        Frame {
            y0: m.y0.clone(),
            u: m.u.clone(),
            k: k.clone(),
        }
    }
}

/// `y0 + u / alpha` for `l = alpha y0 + u + v`.
pub fn trun(l: &FormVec, frame: &Frame) -> Result<FormVec> {
    let (alpha, u, _) = orthogonal_decompose(l, &frame.y0, frame.u.basis(), &frame.k)?;
    let Some(inv) = alpha.inv() else {
        return precondition("form not monic; run make_monic first");
    };
    Ok(frame.y0.axpy(&inv, &u))
}

/// Truncations of the forms outside `K`, without repeats, in first-seen order.
pub fn trun_set<'a>(forms: impl IntoIterator<Item = &'a FormVec>, frame: &Frame) -> Result<Vec<FormVec>> {
    let mut out: Vec<FormVec> = Vec::new();
    for l in forms {
        if frame.k.contains(l) {
            continue;
        }
        let t = trun(l, frame)?;
        if !out.contains(&t) {
            out.push(t);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyRow {
    /// First form of the class met in term order.
    pub rep: FormVec,
    /// `fam[i]`: product of the forms of `T_i` in `F* rep + K`.
    pub fam: Vec<MultTerm>,
    pub part: Partition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyTable {
    pub k: Subspace,
    pub rows: Vec<FamilyRow>,
}

impl FamilyTable {
    pub fn row_of(&self, l: &FormVec) -> Option<&FamilyRow> {
        let key = self.k.class_key(l)?;
        self.rows
            .iter()
            .find(|r| self.k.class_key(&r.rep).as_ref() == Some(&key))
    }

    /// Every family has one degree across the terms.
    pub fn uniform_degrees(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.fam.iter().all(|f| f.degree() == r.fam[0].degree()))
    }
}

pub fn family_table(c: &Circuit, k: &Subspace) -> FamilyTable {
    let mut rows: Vec<FamilyRow> = Vec::new();
    let mut keys: Vec<FormVec> = Vec::new();
    for l in c.forms() {
        let Some(key) = k.class_key(l) else { continue };
        if keys.contains(&key) {
            continue;
        }
        let fam: Vec<MultTerm> = c
            .terms
            .iter()
            .map(|t| {
                let forms = t
                    .forms
                    .iter()
                    .filter(|f| k.class_key(f).as_ref() == Some(&key))
                    .cloned()
                    .collect();
                MultTerm::monic(c.field, forms)
            })
            .collect();
        let mut labels = vec![0usize; fam.len()];
        for i in 0..fam.len() {
            labels[i] = (0..=i).find(|&j| fam[j].similar(&fam[i])).unwrap();
        }
        keys.push(key);
        rows.push(FamilyRow {
            rep: l.clone(),
            part: Partition::from_labels(&labels),
            fam,
        });
    }
    FamilyTable { k: k.clone(), rows }
}

/// A subset `I` of the partitions, one class from each, whose complement is
/// nonempty and preserved by every chosen partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitViolation {
    pub indices: Vec<usize>,
    pub classes: Vec<Set>,
    pub complement: Set,
}

pub const DEFAULT_SPLIT_CAP: u64 = 1_000_000;

/// Checks every nonempty `I` and class choice; `Ok(None)` when each
/// nonempty complement is split by some chosen partition.
pub fn split_lemma_holds(parts: &[Partition], k: usize, cap: u64) -> Result<Option<SplitViolation>> {
    let full = set_of(&(0..k).collect::<Vec<_>>());
    let mut checked = 0u64;
    for mask in 1u32..(1 << parts.len()) {
        let idx: Vec<usize> = (0..parts.len()).filter(|i| mask >> i & 1 == 1).collect();
        let mut choice = vec![0usize; idx.len()];
        loop {
            checked += 1;
            if checked > cap {
                return resource(format!("more than {cap} class choices"));
            }
            let classes: Vec<Set> = idx.iter().zip(&choice).map(|(&i, &c)| parts[i].classes()[c]).collect();
            let s = full & !classes.iter().fold(0, |a, b| a | b);
            if s != 0 && idx.iter().all(|&i| parts[i].preserves(s)) {
                return Ok(Some(SplitViolation {
                    indices: idx,
                    classes,
                    complement: s,
                }));
            }
            let mut pos = 0;
            while pos < idx.len() && choice[pos] + 1 == parts[idx[pos]].classes().len() {
                choice[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
            choice[pos] += 1;
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitCheck {
    /// No SG tuple exists, so there is nothing to check.
    pub vacuous: bool,
    pub tuple: Vec<FormVec>,
    pub parts: Vec<Partition>,
    pub violation: Option<SplitViolation>,
}

impl SplitCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }

    fn vacuous() -> Self {
        SplitCheck {
            vacuous: true,
            tuple: vec![],
            parts: vec![],
            violation: None,
        }
    }
}

fn require_simple_minimal(c: &Circuit, lim: &Limits) -> Result<()> {
    if !is_simple(c) {
        return precondition("circuit is not simple");
    }
    if !c.is_identity()? {
        return precondition("circuit is not an identity");
    }
    if !is_minimal(c, lim)? {
        return precondition("identity is not minimal");
    }
    Ok(())
}

/// Builds the nucleus, a monic frame and the SG tuple of the truncated
/// first term, then checks the partitions of the tuple's preimages.
pub fn verify_split_lemma(c: &Circuit, seed: u64, lim: &Limits, cap: u64) -> Result<SplitCheck> {
    require_simple_minimal(c, lim)?;
    let k = c.fanin();
    if term_dependencies(c, DependencyMode::Expand, lim)?.ind_fanin != k - 1 {
        return precondition("identity is not strongly minimal");
    }
    if k < 3 {
        return Ok(SplitCheck::vacuous());
    }
    let nucleus = build_nucleus(c, None, lim)?;
    let kk = &nucleus.k;
    if c.terms[0].forms.iter().all(|l| kk.contains(l)) {
        return Ok(SplitCheck::vacuous());
    }
    let m = make_monic(c, kk, None, seed)?;
    let ct = c.transform(&m.tau);
    let frame = Frame::from_monic(&m, kk);
    let truns = trun_set(&ct.terms[0].forms, &frame)?;
    let cfg = SgConfig::new(c.field, c.nvars, truns)?;
    let SgOutcome::Witness(w) = sg_operator(&cfg, k - 1, cap as u128)? else {
        return Ok(SplitCheck::vacuous());
    };
    let table = family_table(&ct, kk);
    let mut tuple = Vec::new();
    let mut parts = Vec::new();
    for &i in &w {
        let l = &cfg.vectors()[i];
        let pre = ct.terms[0]
            .forms
            .iter()
            .find(|f| !kk.contains(f) && trun(f, &frame).ok().as_ref() == Some(l))
            .expect("every truncation has a preimage");
        tuple.push(l.clone());
        parts.push(table.row_of(pre).expect("preimage lies outside K").part.clone());
    }
    let violation = split_lemma_holds(&parts, k, cap)?;
    Ok(SplitCheck {
        vacuous: false,
        tuple,
        parts,
        violation,
    })
}

/// Upper bound used for `SG_k(F, d)`: `2(k-1)` over the rationals and
/// `9k ceil(lg d)` otherwise, with `d` raised to 2.
pub fn sg_bound(k: usize, d: usize, field: FieldSpec) -> usize {
    if field.is_rational() {
        2 * k.saturating_sub(1)
    } else {
        let m = d.max(2) as u64;
        9 * k * (64 - (m - 1).leading_zeros()) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundEntry {
    pub name: String,
    pub bound: usize,
    pub measured: usize,
    /// `measured < bound` rather than `<=`.
    pub strict: bool,
    pub pass: bool,
}

impl BoundEntry {
    fn new(name: &str, measured: usize, bound: usize, strict: bool) -> Self {
        let pass = if strict { measured < bound } else { measured <= bound };
        BoundEntry {
            name: name.to_string(),
            bound,
            measured,
            strict,
            pass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub k: usize,
    pub d: usize,
    pub rank: usize,
    pub nucleus_rank: usize,
    pub non_nucleus_rank: usize,
    pub ind_fanin: usize,
    pub entries: Vec<BoundEntry>,
}

impl RankReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }
}

pub fn verify_rank_bounds(c: &Circuit, lim: &Limits) -> Result<RankReport> {
    require_simple_minimal(c, lim)?;
    let (k, d, field) = (c.fanin(), c.degree(), c.field);
    let rank = circuit_rank(c);
    let nucleus = build_nucleus(c, None, lim)?;
    let forms: Vec<FormVec> = c.forms().cloned().collect();
    let non_nucleus_rank = quotient_rank(&forms, &nucleus.k);
    let kp = term_dependencies(c, DependencyMode::Expand, lim)?.ind_fanin;
    let main = rank_bound(k, d.max(1), field)?.value;
    let mut entries = vec![
        BoundEntry::new("rank < main bound", rank, main, true),
        BoundEntry::new("nucleus rank < 2k^2", nucleus.k.rank(), 2 * k * k, true),
        BoundEntry::new(
            "rank <= 2k^2 + (k - k') SG_k'",
            rank,
            2 * k * k + (k - kp) * sg_bound(kp, d, field),
            false,
        ),
    ];
    if kp == k - 1 {
        entries.push(BoundEntry::new(
            "non-nucleus rank <= SG_(k-1)",
            non_nucleus_rank,
            sg_bound(k - 1, d, field),
            false,
        ));
    }
    Ok(RankReport {
        k,
        d,
        rank,
        nucleus_rank: nucleus.k.rank(),
        non_nucleus_rank,
        ind_fanin: kp,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gen_interpolation_identity;
    use crate::error::Error;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    fn f(v: &[i64]) -> FormVec {
        FormVec::from_ints(q(), v)
    }

    #[test]
    fn truncation() {
        let frame = Frame {
            y0: f(&[1, 0, 0]),
            u: Subspace::span(q(), 3, [f(&[0, 1, 0])]),
            k: Subspace::span(q(), 3, [f(&[0, 0, 1])]),
        };
        assert_eq!(trun(&f(&[2, 4, 3]), &frame).unwrap(), f(&[1, 2, 0]));
        assert_eq!(trun(&f(&[1, 0, 0]), &frame).unwrap(), f(&[1, 0, 0]));
        assert!(matches!(trun(&f(&[0, 0, 5]), &frame), Err(Error::Precondition(_))));
        let s = trun_set(&[f(&[2, 4, 3]), f(&[1, 2, 7]), f(&[0, 0, 1])], &frame).unwrap();
        assert_eq!(s, vec![f(&[1, 2, 0])]);
    }

    #[test]
    fn families_of_four_term_identity() {
        let c = gen_interpolation_identity(4, q()).unwrap();
        let t = family_table(&c, &Subspace::zero(q(), 2));
        let row = t.row_of(&f(&[1, 1])).unwrap();
        assert_eq!(
            row.fam.iter().map(MultTerm::degree).collect::<Vec<_>>(),
            vec![0, 2, 0, 0]
        );
        assert_eq!(row.part, Partition::from_labels(&[0, 1, 0, 0]));
        assert!(!t.uniform_degrees());
        assert_eq!(t.rows.len(), 4);
        // x divides every term once: trivial partition
        let terms = (1..=3)
            .map(|a| MultTerm::monic(q(), vec![f(&[1, 0]), f(&[1, a])]))
            .collect();
        let shared = Circuit::new(q(), 2, terms).unwrap();
        let t = family_table(&shared, &Subspace::zero(q(), 2));
        assert!(t.row_of(&f(&[2, 0])).unwrap().part.is_trivial());
    }

    #[test]
    fn split_lemma_planted() {
        let p = |l: &[usize]| Partition::from_labels(l);
        // {0,1} | {2}: choosing {0,1} leaves the singleton {2}
        let v = split_lemma_holds(&[p(&[0, 0, 1])], 3, 1000).unwrap().unwrap();
        assert_eq!((v.classes[0], v.complement), (set_of(&[0, 1]), set_of(&[2])));
        // two partitions that split each other's leftovers
        assert!(split_lemma_holds(&[p(&[0, 0, 1, 1]), p(&[0, 1, 0, 1])], 4, 1000)
            .unwrap()
            .is_some());
        // singletons on [2]: picking {0} leaves {1}, a preserved singleton
        assert!(split_lemma_holds(&[p(&[0, 1])], 2, 1000).unwrap().is_some());
        assert!(matches!(
            split_lemma_holds(&vec![p(&[0, 1, 2]); 6], 3, 2),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn split_lemma_on_identities() {
        let lim = Limits::default();
        for k in 3..=5 {
            let c = gen_interpolation_identity(k, q()).unwrap();
            let s = verify_split_lemma(&c, 0, &lim, DEFAULT_SPLIT_CAP).unwrap();
            assert!(s.holds());
            assert!(s.vacuous);
        }
    }

    #[test]
    fn rank_bounds_on_identities() {
        let lim = Limits::default();
        for (k, bound) in [(3, 27), (4, 48)] {
            let c = gen_interpolation_identity(k, q()).unwrap();
            let r = verify_rank_bounds(&c, &lim).unwrap();
            assert_eq!(r.rank, 2);
            assert_eq!(r.entries[0].bound, bound);
            assert!(r.all_pass(), "{r:?}");
        }
        let t = MultTerm::monic(q(), vec![f(&[1, 0]), f(&[1, 1])]);
        let nonsimple = Circuit::new(q(), 2, vec![t.clone(), t.scaled(&q().int(-1))]).unwrap();
        assert!(matches!(
            verify_rank_bounds(&nonsimple, &lim),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn sg_bounds() {
        assert_eq!(sg_bound(3, 4, q()), 4);
        let f5 = FieldSpec::prime(5).unwrap();
        assert_eq!(sg_bound(2, 4, f5), 36);
        assert_eq!(sg_bound(2, 1, f5), 18);
        assert_eq!(sg_bound(1, 5, f5), 27);
    }
}

#[cfg(test)]
mod props {
    use super::*;
    use crate::circuit::{embed, gen_interpolation_identity, Limits};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn families_share_degrees(seed in any::<u64>(), k in 3usize..=5, n in 2usize..=4) {
            let field = [FieldSpec::Rational, FieldSpec::Prime(7)][seed as usize % 2];
            let c = embed(&gen_interpolation_identity(k, field).unwrap(), n, seed).unwrap();
            let r = build_nucleus(&c, None, &Limits::default()).unwrap();
            let t = family_table(&c, &r.k);
            prop_assert!(t.uniform_degrees());
            for row in &t.rows {
                prop_assert!(row.fam.len() == k);
            }
        }
    }
}
