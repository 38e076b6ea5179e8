//! Partitions of a small universe and unbroken chains.
//!
//! Sets are bitmasks over `0..k` (`k <= 32`).

use std::collections::BTreeMap;

use crate::error::{input, Result};

pub type Set = u32;

pub fn set_of(elems: &[usize]) -> Set {
    elems.iter().fold(0, |m, &e| m | 1 << e)
}

pub fn elems(s: Set) -> Vec<usize> {
    (0..32).filter(|i| s >> i & 1 == 1).collect()
}

fn full(k: usize) -> Set {
    if k == 32 {
        u32::MAX
    } else {
        (1u32 << k) - 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    k: usize,
    /// Disjoint nonempty classes covering `0..k`, ordered by least element.
    classes: Vec<Set>,
}

impl Partition {
    pub fn new(k: usize, mut classes: Vec<Set>) -> Result<Self> {
        if k == 0 || k > 32 {
            return input("universe size must be in 1..=32");
        }
        let mut seen: Set = 0;
        for &c in &classes {
            if c == 0 || c & seen != 0 || c & !full(k) != 0 {
                return input("classes must be nonempty, disjoint and inside the universe");
            }
            seen |= c;
        }
        if seen != full(k) {
            return input("classes do not cover the universe");
        }
        classes.sort_by_key(|c| c.trailing_zeros());
        Ok(Partition { k, classes })
    }

    /// Classes from a label per element.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by: BTreeMap<usize, Set> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            *by.entry(l).or_default() |= 1 << i;
        }
        Partition::new(labels.len(), by.into_values().collect()).expect("labels cover the universe")
    }

    pub fn singletons(k: usize) -> Self {
        Partition::from_labels(&(0..k).collect::<Vec<_>>())
    }

    pub fn universe(&self) -> usize {
        self.k
    }

    pub fn classes(&self) -> &[Set] {
        &self.classes
    }

    pub fn is_trivial(&self) -> bool {
        self.classes.len() == 1
    }

    pub fn class_of(&self, x: usize) -> Set {
        *self
            .classes
            .iter()
            .find(|c| *c >> x & 1 == 1)
            .expect("element in universe")
    }

    /// Some class meets `s` without containing it.
    pub fn splits(&self, s: Set) -> bool {
        s != 0 && !self.classes.iter().any(|c| s & !c == 0)
    }

    pub fn preserves(&self, s: Set) -> bool {
        !self.splits(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionCollection {
    pub k: usize,
    pub parts: Vec<Partition>,
}

impl PartitionCollection {
    pub fn new(k: usize, parts: Vec<Partition>) -> Result<Self> {
        if parts.iter().any(|p| p.universe() != k) {
            return input("partition over a different universe");
        }
        Ok(PartitionCollection { k, parts })
    }

    pub fn nontrivial(&self) -> usize {
        self.parts.iter().filter(|p| !p.is_trivial()).count()
    }

    /// At least `k - 1` partitions, all non-trivial.
    pub fn meets_hypothesis(&self) -> bool {
        self.nontrivial() == self.parts.len() && self.parts.len() + 1 >= self.k
    }
}

/// `sets[i]` is a class of `parts[sources[i]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    pub sets: Vec<Set>,
    pub sources: Vec<usize>,
}

impl Chain {
    pub fn complement(&self, k: usize) -> Set {
        full(k) & !self.sets.iter().fold(0, |a, s| a | s)
    }
}

/// The definition, checked literally.
pub fn is_unbroken(coll: &PartitionCollection, chain: &Chain) -> bool {
    if chain.sets.is_empty() || chain.sets.len() != chain.sources.len() {
        return false;
    }
    let mut used = vec![false; coll.parts.len()];
    for (&s, &src) in chain.sets.iter().zip(&chain.sources) {
        if src >= coll.parts.len() || used[src] || !coll.parts[src].classes().contains(&s) {
            return false;
        }
        used[src] = true;
    }
    let comp = chain.complement(coll.k);
    comp != 0 && chain.sources.iter().all(|&i| coll.parts[i].preserves(comp))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainMethod {
    /// Merge recursion plus the phase/round labelling.
    Labelling,
    /// Exhaustive search over complements.
    Exhaustive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChainSearch {
    pub chain: Option<Chain>,
    pub method: Option<ChainMethod>,
    pub hypothesis: bool,
    /// Satisfiability according to the exhaustive search, run for `k <= 8`.
    pub exhaustive: Option<bool>,
}

pub const EXHAUSTIVE_LIMIT: usize = 8;

pub fn find_unbroken_chain(coll: &PartitionCollection) -> ChainSearch {
    let hypothesis = coll.meets_hypothesis();
    let avail: Vec<usize> = (0..coll.parts.len()).filter(|&i| !coll.parts[i].is_trivial()).collect();
    let blocks: Vec<Set> = (0..coll.k).map(|i| 1 << i).collect();
    let labelled = merge_recursion(coll, &blocks, &avail)
        .map(|c| prune(coll, c))
        .filter(|c| is_unbroken(coll, c));
    let exhaustive = (coll.k <= EXHAUSTIVE_LIMIT).then(|| exhaustive_chain(coll));
    let verdict = exhaustive.as_ref().map(Option::is_some);
    match (labelled, exhaustive) {
        (Some(c), _) => ChainSearch {
            chain: Some(c),
            method: Some(ChainMethod::Labelling),
            hypothesis,
            exhaustive: verdict,
        },
        (None, Some(Some(c))) => ChainSearch {
            chain: Some(c),
            method: Some(ChainMethod::Exhaustive),
            hypothesis,
            exhaustive: verdict,
        },
        _ => ChainSearch {
            chain: None,
            method: None,
            hypothesis,
            exhaustive: verdict,
        },
    }
}

/// Drops sets whose removal keeps the chain unbroken.
fn prune(coll: &PartitionCollection, mut chain: Chain) -> Chain {
    let mut i = 0;
    while i < chain.sets.len() && chain.sets.len() > 1 {
        let mut t = chain.clone();
        t.sets.remove(i);
        t.sources.remove(i);
        if is_unbroken(coll, &t) {
            chain = t;
        } else {
            i += 1;
        }
    }
    chain
}

fn union_of(blocks: &[Set], mask: u64) -> Set {
    blocks
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(0, |a, (_, b)| a | b)
}

/// Blocks are the elements of the merged universe; every available
/// partition preserves every block.
fn merge_recursion(coll: &PartitionCollection, blocks: &[Set], avail: &[usize]) -> Option<Chain> {
    let m = blocks.len();
    if m < 2 {
        return None;
    }
    let mut masks: Vec<u64> = (1u64..1 << m).filter(|x| x.count_ones() >= 2).collect();
    masks.sort_by_key(|x| (x.count_ones(), *x));
    for mask in masks {
        let s = union_of(blocks, mask);
        let size = mask.count_ones() as usize;
        let split = avail.iter().filter(|&&i| coll.parts[i].splits(s)).count();
        if split + 2 <= size {
            let mut merged: Vec<Set> = Vec::new();
            let mut placed = false;
            for (i, &b) in blocks.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    if !placed {
                        merged.push(s);
                        placed = true;
                    }
                } else {
                    merged.push(b);
                }
            }
            let keep: Vec<usize> = avail.iter().copied().filter(|&i| coll.parts[i].preserves(s)).collect();
            return merge_recursion(coll, &merged, &keep);
        }
    }
    labelling(coll, blocks, avail)
}

struct Labeller<'a> {
    coll: &'a PartitionCollection,
    blocks: &'a [Set],
    label: Vec<Option<usize>>,
    pool: Vec<usize>,
}

impl Labeller<'_> {
    fn splits(&self, p: usize, elems: &[usize]) -> bool {
        let s = elems.iter().fold(0, |a, &e| a | self.blocks[e]);
        self.coll.parts[p].splits(s)
    }

    fn take(&mut self, elems: &[usize]) -> Option<usize> {
        let pos = self.pool.iter().position(|&p| self.splits(p, elems))?;
        Some(self.pool.remove(pos))
    }
}

/// `E_{<=l}` for the current levels: `{i, last}` plus elements at level `1..=l`.
fn e_upto(i: usize, last: usize, level: &[usize], l: usize) -> Vec<usize> {
    let mut out = vec![i, last];
    out.extend((0..level.len()).filter(|&b| level[b] >= 1 && level[b] <= l));
    out
}

/// Labels partitions so that `P_b` splits `{b, last}` for every `b`; the
/// classes of `b` then form a chain with complement `{last}`.
fn labelling(coll: &PartitionCollection, blocks: &[Set], avail: &[usize]) -> Option<Chain> {
    let m = blocks.len();
    let last = m - 1;
    let mut st = Labeller {
        coll,
        blocks,
        label: vec![None; last],
        pool: avail.to_vec(),
    };
    let guard = 64 * (m + 1) * (m + 1) * (avail.len() + 1);
    let mut steps = 0usize;
    for i in 0..last {
        if let Some(p) = st.take(&[i, last]) {
            st.label[i] = Some(p);
            continue;
        }
        let mut level = vec![1usize; i];
        let mut found: Option<usize> = None;
        let mut j = 1;
        'rounds: while found.is_none() {
            if j > i + 1 {
                return None;
            }
            loop {
                steps += 1;
                if steps > guard {
                    return None;
                }
                let mut progressed = false;
                for b in 0..i {
                    if level[b] != j {
                        continue;
                    }
                    let mut target = e_upto(i, last, &level, j - 1);
                    target.push(b);
                    let Some(p) = st.take(&target) else { continue };
                    let mut hanging = st.label[b].replace(p).expect("covered element is labelled");
                    level[b] = j + 1;
                    progressed = true;
                    // settle the hanging partition
                    loop {
                        steps += 1;
                        if steps > guard {
                            return None;
                        }
                        if st.splits(hanging, &[i, last]) {
                            found = Some(hanging);
                            break 'rounds;
                        }
                        let mut swapped = false;
                        'levels: for l in 0..j.saturating_sub(1) {
                            for c in 0..i {
                                if level[c] != l + 1 {
                                    continue;
                                }
                                let mut t = e_upto(i, last, &level, l);
                                t.push(c);
                                if st.splits(hanging, &t) {
                                    hanging = st.label[c].replace(hanging).expect("labelled");
                                    level[c] = l + 2;
                                    swapped = true;
                                    break 'levels;
                                }
                            }
                        }
                        if !swapped {
                            st.pool.push(hanging);
                            break;
                        }
                    }
                    break;
                }
                if !progressed {
                    break;
                }
            }
            if !level.contains(&(j + 1)) {
                return None;
            }
            j += 1;
        }
        st.label[i] = found;
    }
    let mut chain = Chain {
        sets: Vec::new(),
        sources: Vec::new(),
    };
    for (b, p) in st.label.iter().enumerate() {
        let p = (*p)?;
        let rep = blocks[b].trailing_zeros() as usize;
        chain.sets.push(coll.parts[p].class_of(rep));
        chain.sources.push(p);
    }
    Some(chain)
}

/// For each candidate complement `T`, covers its complement with at most
/// one class per `T`-preserving partition.
pub fn exhaustive_chain(coll: &PartitionCollection) -> Option<Chain> {
    let all = full(coll.k);
    for t in 1..=all {
        if t == all {
            continue;
        }
        let target = all & !t;
        let keep: Vec<usize> = (0..coll.parts.len()).filter(|&i| coll.parts[i].preserves(t)).collect();
        // state -> (previous state, partition, class)
        let mut reach: BTreeMap<Set, Option<(Set, usize, Set)>> = BTreeMap::new();
        reach.insert(0, None);
        for &p in &keep {
            let snapshot: Vec<Set> = reach.keys().copied().collect();
            for s in snapshot {
                for &c in coll.parts[p].classes() {
                    if c & t == 0 {
                        reach.entry(s | c).or_insert(Some((s, p, c)));
                    }
                }
            }
            if reach.contains_key(&target) {
                break;
            }
        }
        if reach.contains_key(&target) {
            let mut chain = Chain {
                sets: Vec::new(),
                sources: Vec::new(),
            };
            let mut cur = target;
            while let Some(Some((prev, p, c))) = reach.get(&cur) {
                chain.sets.push(*c);
                chain.sources.push(*p);
                cur = *prev;
            }
            chain.sets.reverse();
            chain.sources.reverse();
            return Some(chain);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn coll(k: usize, parts: &[&[usize]]) -> PartitionCollection {
        PartitionCollection::new(k, parts.iter().map(|l| Partition::from_labels(l)).collect()).unwrap()
    }

    #[test]
    fn split_and_preserve() {
        let p = Partition::from_labels(&[0, 0, 1]);
        assert!(p.preserves(set_of(&[0, 1])));
        assert!(p.splits(set_of(&[1, 2])));
        assert!(p.preserves(set_of(&[2])));
        assert!(p.preserves(0));
        assert!(Partition::new(3, vec![0b011, 0b010]).is_err());
        assert!(Partition::new(3, vec![0b011]).is_err());
    }

    #[test]
    fn pair_and_singleton() {
        let c = coll(3, &[&[0, 0, 1], &[0, 1, 2]]);
        let r = find_unbroken_chain(&c);
        let ch = r.chain.unwrap();
        assert_eq!(r.method, Some(ChainMethod::Labelling));
        assert_eq!(ch.sets, vec![set_of(&[0, 1])]);
        assert_eq!(ch.complement(3), set_of(&[2]));
        let alone = coll(3, &[&[0, 0, 1]]);
        assert!(is_unbroken(
            &alone,
            &Chain {
                sets: vec![0b011],
                sources: vec![0]
            }
        ));
    }

    #[test]
    fn singleton_partitions() {
        for k in 2..=7 {
            let s: Vec<usize> = (0..k).collect();
            let parts: Vec<&[usize]> = vec![&s[..]; k - 1];
            let c = coll(k, &parts);
            let r = find_unbroken_chain(&c);
            let ch = r.chain.unwrap();
            assert!(is_unbroken(&c, &ch));
            assert_eq!(r.method, Some(ChainMethod::Labelling));
        }
    }

    #[test]
    fn too_few_partitions_may_fail() {
        // {0,1} | {2,3} alone: no chain exists
        let c = coll(4, &[&[0, 0, 1, 1]]);
        let r = find_unbroken_chain(&c);
        assert!(!r.hypothesis);
        assert!(r.chain.is_some() == r.exhaustive.unwrap());
    }

    #[test]
    fn random_collections_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let k = rng.gen_range(3..=7);
            let count = rng.gen_range(k - 1..=k + 1);
            let mut parts = Vec::new();
            while parts.len() < count {
                let blocks = rng.gen_range(2..=k);
                let labels: Vec<usize> = (0..k).map(|_| rng.gen_range(0..blocks)).collect();
                let p = Partition::from_labels(&labels);
                if !p.is_trivial() {
                    parts.push(p);
                }
            }
            let c = PartitionCollection::new(k, parts).unwrap();
            let r = find_unbroken_chain(&c);
            assert!(r.hypothesis);
            let ch = r.chain.expect("chain exists");
            assert!(is_unbroken(&c, &ch));
            assert_eq!(r.method, Some(ChainMethod::Labelling), "{c:?}");
            assert_eq!(r.exhaustive, Some(true));
        }
    }
}
