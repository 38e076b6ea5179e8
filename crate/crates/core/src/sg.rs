//! Sylvester-Gallai configurations.

use num_bigint::BigUint;

use crate::error::{input, resource, structural, Result};
use crate::field::FieldSpec;
use crate::format::{parse_config, write_config};
use crate::linalg::{in_span, rank_of, FormVec, Subspace};

/// Nonzero vectors, no two of them multiples of each other.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SgConfig {
    field: FieldSpec,
    n: usize,
    vectors: Vec<FormVec>,
}

impl SgConfig {
    pub fn new(field: FieldSpec, n: usize, vectors: Vec<FormVec>) -> Result<Self> {
        let mut seen = Vec::with_capacity(vectors.len());
        for v in &vectors {
            if v.len() != n {
                return input(format!("vector {v} has {} entries, expected {n}", v.len()));
            }
            if v.is_zero() {
                return input("configuration contains the zero vector");
            }
            let key = v.normalized();
            if seen.contains(&key) {
                return input(format!("vector {v} is a multiple of an earlier one"));
            }
            seen.push(key);
        }
        Ok(SgConfig { field, n, vectors })
    }

    pub fn parse(src: &str) -> Result<Self> {
        let (field, n, v) = parse_config(src)?;
        SgConfig::new(field, n, v)
    }

    pub fn to_text(&self) -> String {
        write_config(self.field, self.n, &self.vectors)
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> &[FormVec] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn rank(&self) -> usize {
        rank_of(self.field, self.n, &self.vectors)
    }

    pub fn subset(&self, idx: &[usize]) -> SgConfig {
        SgConfig {
            field: self.field,
            n: self.n,
            vectors: idx.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }

    /// Indices sorted by normalized vector.
    fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.vectors.len()).collect();
        idx.sort_by_key(|&i| self.vectors[i].normalized());
        idx
    }
}

pub const DEFAULT_SUBSET_CAP: u128 = 20_000_000;

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SgOutcome {
    Closed,
    /// `k` independent vectors (indices) whose span has no further point.
    Witness(Vec<usize>),
}

/// First independent `k`-subset, in sorted-vector lexicographic order,
/// whose span meets the configuration only in itself.
pub fn sg_operator(s: &SgConfig, k: usize, cap: u128) -> Result<SgOutcome> {
    if k < 2 {
        return input("k must be at least 2");
    }
    let count = binomial(s.len(), k);
    if count > cap {
        return resource(format!("{count} subsets of size {k} exceed the cap {cap}"));
    }
    let order = s.order();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut spans: Vec<Subspace> = vec![Subspace::zero(s.field, s.n)];
    Ok(search(s, k, &order, 0, &mut chosen, &mut spans).map_or(SgOutcome::Closed, SgOutcome::Witness))
}

fn search(
    s: &SgConfig,
    k: usize,
    order: &[usize],
    from: usize,
    chosen: &mut Vec<usize>,
    spans: &mut Vec<Subspace>,
) -> Option<Vec<usize>> {
    if chosen.len() == k {
        let span = spans.last().unwrap();
        let inside = s.vectors.iter().filter(|v| span.contains(v)).count();
        return (inside == k).then(|| chosen.clone());
    }
    for pos in from..order.len() {
        if order.len() - pos < k - chosen.len() {
            break;
        }
        let i = order[pos];
        let top = spans.last().unwrap();
        if top.contains(&s.vectors[i]) {
            continue;
        }
        let next = top.with([s.vectors[i].clone()]);
        chosen.push(i);
        spans.push(next);
        let found = search(s, k, order, pos + 1, chosen, spans);
        chosen.pop();
        spans.pop();
        if found.is_some() {
            return found;
        }
    }
    None
}

pub fn is_sg_closed(s: &SgConfig, k: usize, cap: u128) -> Result<bool> {
    Ok(sg_operator(s, k, cap)? == SgOutcome::Closed)
}

/// Checks a witness directly: independence, and no other vector of the
/// configuration in its span.
pub fn is_sg_witness(s: &SgConfig, v: &[usize]) -> bool {
    let vs: Vec<FormVec> = v.iter().map(|&i| s.vectors[i].clone()).collect();
    if rank_of(s.field, s.n, &vs) != v.len() {
        return false;
    }
    s.vectors
        .iter()
        .enumerate()
        .filter(|(i, _)| !v.contains(i))
        .all(|(_, w)| in_span(s.field, w, &vs).is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeavyVector {
    pub index: usize,
    pub support: usize,
    /// The greedy selection; its supports partition the coordinates.
    pub selected: Vec<usize>,
    pub rank: usize,
}

/// Greedy selection of vectors with maximal fresh support, coordinates
/// taken relative to `basis`.
pub fn heavy_vector(s: &SgConfig, k: usize, basis: &[FormVec]) -> Result<HeavyVector> {
    let bv = basis;
    let r = bv.len();
    if rank_of(s.field, s.n, bv) != r || s.rank() != r {
        return input("basis vectors must be independent and span the configuration");
    }
    let supports: Vec<Vec<bool>> = s
        .vectors
        .iter()
        .map(|v| {
            let c = in_span(s.field, v, bv).expect("basis spans the configuration");
            c.iter().map(|x| !x.is_zero()).collect()
        })
        .collect();
    let mut covered = vec![false; r];
    let mut selected = Vec::new();
    while covered.iter().any(|c| !c) {
        let best = (0..s.len())
            .filter(|&i| supports[i].iter().zip(&covered).all(|(a, b)| !(*a && *b)))
            .max_by_key(|&i| (supports[i].iter().filter(|x| **x).count(), std::cmp::Reverse(i)))
            .expect("a basis vector is always available");
        for (c, a) in covered.iter_mut().zip(&supports[best]) {
            *c |= *a;
        }
        selected.push(best);
    }
    let support = supports[selected[0]].iter().filter(|x| **x).count();
    if selected.len() >= k || support * (k - 1) < r {
        return structural(format!(
            "greedy selection has {} parts for k = {k}; the configuration is not SG_{k}-closed",
            selected.len()
        ));
    }
    Ok(HeavyVector {
        index: selected[0],
        support,
        selected,
        rank: r,
    })
}

pub fn gen_line() -> SgConfig {
    let q = FieldSpec::Rational;
    let v = [[1, 0], [1, 1], [1, 2]]
        .iter()
        .map(|r| FormVec::from_ints(q, r))
        .collect();
    SgConfig::new(q, 2, v).expect("distinct points")
}

pub fn gen_skew_lines() -> SgConfig {
    let q = FieldSpec::Rational;
    let v = [
        [1, 1, 0, 0],
        [1, 1, 1, 0],
        [1, 1, 2, 0],
        [1, 0, 1, 0],
        [1, 0, 1, 1],
        [1, 0, 1, 2],
    ]
    .iter()
    .map(|r| FormVec::from_ints(q, r))
    .collect();
    SgConfig::new(q, 4, v).expect("distinct points")
}

pub const FP_CONFIG_CAP: u64 = 1 << 16;

/// The two parts `S_1`, `S_2` of the construction over `F_p^{k+r}`.
pub fn gen_fp_parts(k: usize, r: usize, p: u64) -> Result<(SgConfig, SgConfig)> {
    let field = FieldSpec::prime(p)?;
    if k < 3 {
        return input("k must be at least 3");
    }
    if r == 0 {
        return input("r must be positive");
    }
    if (k as u64 - 1).is_multiple_of(p) {
        return input(format!("p = {p} divides k - 1 = {}", k - 1));
    }
    let size = (p as u128)
        .checked_pow(r as u32)
        .filter(|&s| s <= FP_CONFIG_CAP as u128);
    let Some(size) = size else {
        return input(format!("p^r exceeds {FP_CONFIG_CAP}"));
    };
    let n = k + r;
    let mut s1 = Vec::new();
    for i in 0..k - 1 {
        let mut v = FormVec::unit(field, n, i);
        v.0[n - 1] = field.one();
        s1.push(v);
    }
    let inv = field.int(k as i64 - 1).inv().expect("p does not divide k - 1");
    let mut avg = FormVec::zero(field, n);
    for i in 0..k - 1 {
        avg.0[i] = inv.clone();
    }
    avg.0[n - 1] = field.one();
    s1.push(avg);
    let mut s2 = Vec::new();
    for code in 1..size as u64 {
        let mut v = FormVec::zero(field, n);
        let mut c = code;
        for j in (0..r).rev() {
            v.0[k - 1 + j] = field.int((c % p) as i64);
            c /= p;
        }
        v.0[n - 1] = field.one();
        s2.push(v);
    }
    Ok((SgConfig::new(field, n, s1)?, SgConfig::new(field, n, s2)?))
}

pub fn gen_fp_config(k: usize, r: usize, p: u64) -> Result<SgConfig> {
    let (a, b) = gen_fp_parts(k, r, p)?;
    let mut v = a.vectors;
    v.extend(b.vectors);
    SgConfig::new(a.field, a.n, v)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GrowthRegime {
    /// `r < 9k`: nothing to check.
    BelowThreshold,
    Checked {
        satisfied: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthReport {
    pub size: usize,
    pub rank: usize,
    pub k: usize,
    pub closed: Option<bool>,
    pub regime: GrowthRegime,
}

impl GrowthReport {
    pub fn consistent(&self) -> bool {
        self.regime != GrowthRegime::Checked { satisfied: false } || self.closed == Some(false)
    }

    /// `2^{r/9k}` as a float, for display.
    pub fn bound(&self) -> f64 {
        (self.rank as f64 / (9 * self.k) as f64).exp2()
    }
}

/// Compares `|S|` with `2^{r/9k}` exactly (`|S|^{9k} >= 2^r`) when
/// `r >= 9k`. The closure verdict is attached when computable within `cap`.
pub fn sg_growth_check(s: &SgConfig, k: usize, cap: u128) -> Result<GrowthReport> {
    if k < 2 {
        return input("k must be at least 2");
    }
    let rank = s.rank();
    let closed = match is_sg_closed(s, k, cap) {
        Ok(b) => Some(b),
        Err(crate::error::Error::Resource(_)) => None,
        Err(e) => return Err(e),
    };
    let regime = if rank < 9 * k {
        GrowthRegime::BelowThreshold
    } else {
        let lhs = BigUint::from(s.len()).pow(9 * k as u32);
        let rhs = BigUint::from(1u8) << rank;
        GrowthRegime::Checked { satisfied: lhs >= rhs }
    };
    Ok(GrowthReport {
        size: s.len(),
        rank,
        k,
        closed,
        regime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAP: u128 = DEFAULT_SUBSET_CAP;

    fn cfg(field: FieldSpec, rows: &[&[i64]]) -> SgConfig {
        SgConfig::new(
            field,
            rows[0].len(),
            rows.iter().map(|r| FormVec::from_ints(field, r)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn closure_examples() {
        let line = gen_line();
        assert_eq!(line.rank(), 2);
        assert!(is_sg_closed(&line, 2, CAP).unwrap());
        let skew = gen_skew_lines();
        assert_eq!(skew.rank(), 4);
        assert!(is_sg_closed(&skew, 3, CAP).unwrap());
        let pair = cfg(FieldSpec::Rational, &[&[1, 0], &[0, 1]]);
        assert_eq!(sg_operator(&pair, 2, CAP).unwrap(), SgOutcome::Witness(vec![1, 0]));
    }

    #[test]
    fn skew_lines_at_four() {
        // four independent vectors span everything, so no witness exists
        assert_eq!(sg_operator(&gen_skew_lines(), 4, CAP).unwrap(), SgOutcome::Closed);
    }

    #[test]
    fn witnesses_are_valid() {
        let q = FieldSpec::Rational;
        let s = cfg(q, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 0], &[0, 0, 1], &[1, 0, 1]]);
        match sg_operator(&s, 2, CAP).unwrap() {
            SgOutcome::Witness(v) => assert!(is_sg_witness(&s, &v)),
            SgOutcome::Closed => panic!(),
        }
        assert!(!is_sg_witness(&s, &[0, 1]));
    }

    #[test]
    fn rejects_multiples() {
        let q = FieldSpec::Rational;
        let v = vec![FormVec::from_ints(q, &[1, 2]), FormVec::from_ints(q, &[2, 4])];
        assert!(SgConfig::new(q, 2, v).is_err());
    }

    #[test]
    fn heavy_vectors() {
        let q = FieldSpec::Rational;
        let s = cfg(q, &[&[1, 0], &[0, 1], &[1, 1]]);
        let e = [FormVec::unit(q, 2, 0), FormVec::unit(q, 2, 1)];
        let h = heavy_vector(&s, 2, &e).unwrap();
        assert_eq!((h.index, h.support), (2, 2));
        let line = gen_line();
        assert_eq!(heavy_vector(&line, 2, &line.vectors()[..2]).unwrap().support, 2);
        let pair = cfg(q, &[&[1, 0], &[0, 1]]);
        assert!(matches!(
            heavy_vector(&pair, 2, &e),
            Err(crate::error::Error::Structural(_))
        ));
    }

    #[test]
    fn fp_construction() {
        let s = gen_fp_config(3, 2, 3).unwrap();
        assert_eq!((s.len(), s.rank()), (11, 5));
        let (s1, _) = gen_fp_parts(3, 2, 3).unwrap();
        assert!(is_sg_closed(&s1, 2, CAP).unwrap());
        assert!(gen_fp_config(3, 1, 2).is_err());
        let g = sg_growth_check(&s, 3, CAP).unwrap();
        assert_eq!(g.regime, GrowthRegime::BelowThreshold);
        assert_eq!((g.size, g.rank), (11, 5));
    }

    #[test]
    fn text_round_trip() {
        let s = gen_fp_config(3, 2, 3).unwrap();
        assert_eq!(SgConfig::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(11, 3), 165);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
    }
}
