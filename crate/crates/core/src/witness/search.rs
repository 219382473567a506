//! Pruned depth-first search for the distinct centraliser monoids of the
//! elements of a generator.
//!
//! Each tracked map is checked against partial assignments as soon as both
//! sides of a commutation equation are known. A subtree is cut when every
//! still-viable tracked map is already confirmed: all its completions then
//! share one centraliser, and only the least completion is kept.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::condition::ConditionId;
use super::generator::{analogue_generator, enumerate_commuting, Generator};
use super::WitnessError;
use crate::algebra::{majority_value, unary_centraliser, Element, MajorityOp, Monoid, SigmaIndex, UnaryOp, MAX_SIGMA};

pub type Mask = [u64; 4];

/// A map watched during the search; when it commutes, all of `members` are
/// credited to the centraliser.
#[derive(Clone, Debug)]
pub struct TrackedMap {
    pub map: UnaryOp,
    pub members: Monoid,
}

#[derive(Clone, Copy, Debug)]
struct LinkedCheck {
    from: u8,
    to: u8,
    table: [Element; 4],
}

/// Per-chunk counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Generator elements accounted for, visited or inside a cut subtree.
    pub candidates: u64,
    pub leaves: u64,
    pub nodes: u64,
    pub pruned_subtrees: u64,
}

impl SearchStats {
    pub fn add(&mut self, other: &SearchStats) {
        self.candidates += other.candidates;
        self.leaves += other.leaves;
        self.nodes += other.nodes;
        self.pruned_subtrees += other.pruned_subtrees;
    }
}

/// Outcome of one top-level prefix of the search tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChunkResult {
    pub index: usize,
    /// Viable-set key and least σ-values found for it.
    pub found: Vec<(Mask, Vec<Element>)>,
    pub stats: SearchStats,
}

/// A distinct monoid with its least witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageMonoid {
    pub monoid: Monoid,
    pub representative: MajorityOp,
}

pub struct SearchPlan {
    generator: Generator,
    base: Monoid,
    tracked: Vec<TrackedMap>,
    full: Mask,
    // per (block, option): tracked maps violated by the option alone
    kill: Vec<Vec<Mask>>,
    // per block: cross-block checks completed at that block, grouped by map
    linked: Vec<Vec<LinkedCheck>>,
    linked_range: Vec<Vec<(u32, u32)>>,
    linked_mask: Vec<Mask>,
    // per number of assigned blocks: maps with every check decided
    confirmed: Vec<Mask>,
    subtree: Vec<u64>,
    split: usize,
    order: WitnessOrder,
    // per block: index of the option that is least under `order`
    least_option: Vec<usize>,
}

/// Total order used to pick one witness per monoid: σ-values compared
/// lexicographically with positions taken in `priority` order, values
/// ascending or descending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessOrder {
    k: u8,
    priority: Vec<u8>,
    descending: bool,
}

impl WitnessOrder {
    /// Plain comparison of σ-strings.
    pub fn lexicographic(k: u8) -> Self {
        let len = SigmaIndex::for_carrier(k).expect("valid carrier").len();
        WitnessOrder {
            k,
            priority: (0..len as u8).collect(),
            descending: false,
        }
    }

    pub fn new(k: u8, priority: Vec<u8>, descending: bool) -> Result<Self, WitnessError> {
        let len = SigmaIndex::for_carrier(k)?.len();
        let mut sorted = priority.clone();
        sorted.sort_unstable();
        if sorted != (0..len as u8).collect::<Vec<_>>() {
            return Err(WitnessError::Inconsistent("priority is not a permutation of σ".into()));
        }
        Ok(WitnessOrder {
            k,
            priority,
            descending,
        })
    }

    #[inline]
    fn value(&self, v: Element) -> Element {
        if self.descending {
            self.k - 1 - v
        } else {
            v
        }
    }

    /// Sort key of a σ-value table.
    pub fn rank(&self, values: &[Element]) -> [Element; MAX_SIGMA] {
        let mut out = [0; MAX_SIGMA];
        for (slot, &p) in out.iter_mut().zip(&self.priority) {
            *slot = self.value(values[p as usize]);
        }
        out
    }

    fn unrank(&self, key: &[Element; MAX_SIGMA]) -> [Element; MAX_SIGMA] {
        let mut out = [0; MAX_SIGMA];
        for (&r, &p) in key.iter().zip(&self.priority) {
            out[p as usize] = self.value(r);
        }
        out
    }
}

#[inline]
fn set(mask: &mut Mask, j: usize) {
    mask[j / 64] |= 1 << (j % 64);
}

#[inline]
fn subset(a: &Mask, b: &Mask) -> bool {
    (a[0] & !b[0]) | (a[1] & !b[1]) | (a[2] & !b[2]) | (a[3] & !b[3]) == 0
}

fn bits(mask: &Mask) -> impl Iterator<Item = usize> + '_ {
    (0..4).flat_map(move |w| {
        let mut b = mask[w];
        std::iter::from_fn(move || {
            (b != 0).then(|| {
                let j = b.trailing_zeros() as usize;
                b &= b - 1;
                w * 64 + j
            })
        })
    })
}

impl SearchPlan {
    pub fn new(generator: Generator, base: Monoid, tracked: Vec<TrackedMap>) -> Result<Self, WitnessError> {
        let k = generator.k();
        if tracked.len() > 256 {
            return Err(WitnessError::Inconsistent("too many tracked maps".into()));
        }
        let sigma = SigmaIndex::for_carrier(k)?;
        let blocks = generator.blocks();
        let nblocks = blocks.len();
        let mut block_of = [0usize; MAX_SIGMA];
        for (d, b) in blocks.iter().enumerate() {
            for &p in b.positions() {
                block_of[p as usize] = d;
            }
        }
        let mut full = [0; 4];
        let mut kill: Vec<Vec<Mask>> = blocks.iter().map(|b| vec![[0; 4]; b.options().len()]).collect();
        let mut linked_by: Vec<Vec<(usize, LinkedCheck)>> = vec![Vec::new(); nblocks];
        let mut last_block = vec![0usize; tracked.len()];
        for (j, tm) in tracked.iter().enumerate() {
            set(&mut full, j);
            let s = tm.map;
            let table = {
                let mut t = [0; 4];
                t[..k as usize].copy_from_slice(s.table());
                t
            };
            for (p, &t) in sigma.triples().iter().enumerate() {
                let image = [s.apply(t[0]), s.apply(t[1]), s.apply(t[2])];
                let bp = block_of[p];
                match sigma.position(image) {
                    None => {
                        let forced = majority_value(image).expect("repeated entry");
                        let at = blocks[bp].positions().iter().position(|&q| q as usize == p).unwrap();
                        for (oi, opt) in blocks[bp].options().iter().enumerate() {
                            if s.apply(opt[at]) != forced {
                                set(&mut kill[bp][oi], j);
                            }
                        }
                        last_block[j] = last_block[j].max(bp);
                    }
                    Some(q) if block_of[q] == bp => {
                        let b = &blocks[bp];
                        let at_p = b.positions().iter().position(|&x| x as usize == p).unwrap();
                        let at_q = b.positions().iter().position(|&x| x as usize == q).unwrap();
                        for (oi, opt) in b.options().iter().enumerate() {
                            if s.apply(opt[at_p]) != opt[at_q] {
                                set(&mut kill[bp][oi], j);
                            }
                        }
                        last_block[j] = last_block[j].max(bp);
                    }
                    Some(q) => {
                        let d = bp.max(block_of[q]);
                        linked_by[d].push((
                            j,
                            LinkedCheck {
                                from: p as u8,
                                to: q as u8,
                                table,
                            },
                        ));
                        last_block[j] = last_block[j].max(d);
                    }
                }
            }
        }
        let mut linked = Vec::with_capacity(nblocks);
        let mut linked_range = Vec::with_capacity(nblocks);
        let mut linked_mask = Vec::with_capacity(nblocks);
        for mut list in linked_by {
            list.sort_by_key(|(j, c)| (*j, c.from, c.to));
            let mut range = vec![(0u32, 0u32); tracked.len()];
            let mut mask = [0; 4];
            for (i, (j, _)) in list.iter().enumerate() {
                if range[*j].1 == 0 {
                    range[*j].0 = i as u32;
                }
                range[*j].1 = i as u32 + 1;
                set(&mut mask, *j);
            }
            linked.push(list.into_iter().map(|(_, c)| c).collect());
            linked_range.push(range);
            linked_mask.push(mask);
        }
        let mut confirmed = vec![[0; 4]; nblocks + 1];
        for (j, &last) in last_block.iter().enumerate() {
            for c in confirmed.iter_mut().skip(last + 1) {
                set(c, j);
            }
        }
        let mut subtree = vec![1u64; nblocks + 1];
        for d in (0..nblocks).rev() {
            subtree[d] = subtree[d + 1].saturating_mul(blocks[d].options().len() as u64);
        }
        let mut plan = SearchPlan {
            generator,
            base,
            tracked,
            full,
            kill,
            linked,
            linked_range,
            linked_mask,
            confirmed,
            subtree,
            split: 0,
            order: WitnessOrder::lexicographic(k),
            least_option: Vec::new(),
        };
        plan.set_witness_order(WitnessOrder::lexicographic(k))?;
        plan.set_chunk_target(64);
        Ok(plan)
    }

    /// Search plan for a class at `k = 4`: one tracked representative per
    /// other non-trivial class.
    pub fn for_condition(c: &ConditionId) -> Result<Self, WitnessError> {
        let generator = enumerate_commuting(c)?;
        let mut base = Monoid::trivial(4)?;
        for s in c.members() {
            base.insert(&s);
        }
        let tracked = ConditionId::all_nontrivial()
            .into_iter()
            .filter(|other| other != c)
            .map(|other| {
                let members = other.members();
                TrackedMap {
                    map: members[0],
                    members: Monoid::from_codes(4, members.iter().map(UnaryOp::code)).expect("valid codes"),
                }
            })
            .collect();
        SearchPlan::new(generator, base, tracked)
    }

    /// Search plan for a single map with a characterisation-driven
    /// generator, tracking every other non-trivial map on its own.
    pub fn for_map(s: &UnaryOp) -> Result<Self, WitnessError> {
        let k = s.k();
        let generator =
            analogue_generator(s)?.ok_or_else(|| WitnessError::Inconsistent(format!("no generator for {s}")))?;
        let mut base = Monoid::trivial(k)?;
        base.insert(s);
        let tracked = UnaryOp::all(k)?
            .filter(|t| !t.is_trivial() && t != s)
            .map(|t| TrackedMap {
                map: t,
                members: Monoid::from_codes(k, [t.code()]).expect("valid code"),
            })
            .collect();
        SearchPlan::new(generator, base, tracked)
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn tracked(&self) -> &[TrackedMap] {
        &self.tracked
    }

    pub fn set_witness_order(&mut self, order: WitnessOrder) -> Result<(), WitnessError> {
        if order.k != self.generator.k() {
            return Err(WitnessError::Inconsistent("witness order for another carrier".into()));
        }
        self.least_option = self
            .generator
            .blocks()
            .iter()
            .map(|b| {
                (0..b.options().len())
                    .min_by_key(|&oi| {
                        // positions outside the block tie
                        let mut values = [0; MAX_SIGMA];
                        for (&p, &v) in b.positions().iter().zip(&b.options()[oi]) {
                            values[p as usize] = v;
                        }
                        order.rank(&values)
                    })
                    .unwrap_or(0)
            })
            .collect();
        self.order = order;
        Ok(())
    }

    pub fn witness_order(&self) -> &WitnessOrder {
        &self.order
    }

    /// Splits the top of the tree into at least `target` prefixes where the
    /// generator allows.
    pub fn set_chunk_target(&mut self, target: usize) {
        let blocks = self.generator.blocks();
        let mut split = 0;
        let mut count = 1usize;
        while split < blocks.len() && count < target.max(1) {
            count = count.saturating_mul(blocks[split].options().len());
            split += 1;
        }
        self.split = split;
    }

    pub fn chunk_count(&self) -> usize {
        self.generator.blocks()[..self.split]
            .iter()
            .map(|b| b.options().len())
            .product()
    }

    pub fn run_chunk(&self, index: usize) -> ChunkResult {
        let blocks = self.generator.blocks();
        let mut choice = vec![0usize; self.split];
        let mut rest = index;
        for d in (0..self.split).rev() {
            let n = blocks[d].options().len();
            choice[d] = rest % n;
            rest /= n;
        }
        let mut values = [0; MAX_SIGMA];
        let mut viable = self.full;
        for (d, &oi) in choice.iter().enumerate() {
            viable = self.step(d, oi, viable, &mut values);
        }
        let mut found = HashMap::new();
        let mut stats = SearchStats::default();
        self.dfs(self.split, viable, &mut values, &mut found, &mut stats);
        let mut found: Vec<(Mask, Vec<Element>)> = found
            .into_iter()
            .map(|(m, key)| (m, self.order.unrank(&key)[..self.len()].to_vec()))
            .collect();
        found.sort();
        ChunkResult { index, found, stats }
    }

    fn len(&self) -> usize {
        SigmaIndex::for_carrier(self.generator.k())
            .expect("valid carrier")
            .len()
    }

    /// Assigns option `oi` of block `d` and returns the surviving maps.
    #[inline]
    fn step(&self, d: usize, oi: usize, viable: Mask, values: &mut [Element; MAX_SIGMA]) -> Mask {
        let block = &self.generator.blocks()[d];
        for (&p, &v) in block.positions().iter().zip(&block.options()[oi]) {
            values[p as usize] = v;
        }
        let k = &self.kill[d][oi];
        let mut v = [
            viable[0] & !k[0],
            viable[1] & !k[1],
            viable[2] & !k[2],
            viable[3] & !k[3],
        ];
        let lm = &self.linked_mask[d];
        let checks = &self.linked[d];
        let ranges = &self.linked_range[d];
        for w in 0..4 {
            let mut b = v[w] & lm[w];
            while b != 0 {
                let j = w * 64 + b.trailing_zeros() as usize;
                b &= b - 1;
                let (start, end) = ranges[j];
                for c in &checks[start as usize..end as usize] {
                    if c.table[values[c.from as usize] as usize] != values[c.to as usize] {
                        v[w] &= !(1 << (j % 64));
                        break;
                    }
                }
            }
        }
        v
    }

    fn dfs(
        &self,
        d: usize,
        viable: Mask,
        values: &mut [Element; MAX_SIGMA],
        // keyed by viable set, holding the least ranked σ-values
        found: &mut HashMap<Mask, [Element; MAX_SIGMA]>,
        stats: &mut SearchStats,
    ) {
        stats.nodes += 1;
        let blocks = self.generator.blocks();
        if d == blocks.len() {
            stats.leaves += 1;
            stats.candidates += 1;
            record(found, viable, self.order.rank(values));
            return;
        }
        if subset(&viable, &self.confirmed[d]) {
            stats.pruned_subtrees += 1;
            stats.candidates += self.subtree[d];
            let mut least = *values;
            for (b, &oi) in blocks[d..].iter().zip(&self.least_option[d..]) {
                for (&p, &v) in b.positions().iter().zip(&b.options()[oi]) {
                    least[p as usize] = v;
                }
            }
            record(found, viable, self.order.rank(&least));
            return;
        }
        for oi in 0..blocks[d].options().len() {
            let next = self.step(d, oi, viable, values);
            self.dfs(d + 1, next, values, found, stats);
        }
    }

    /// Monoid credited for a viable-set key.
    pub fn monoid_of(&self, key: &Mask) -> Monoid {
        let mut m = self.base;
        for j in bits(key) {
            for s in self.tracked[j].members.members() {
                m.insert(&s);
            }
        }
        m
    }

    /// Merges chunk outcomes and checks every key against the full
    /// centraliser of its witness.
    pub fn finish<'a>(
        &self,
        chunks: impl IntoIterator<Item = &'a ChunkResult>,
    ) -> Result<(Vec<StageMonoid>, SearchStats), WitnessError> {
        let mut merged: HashMap<Mask, Vec<Element>> = HashMap::new();
        let mut stats = SearchStats::default();
        let mut seen = vec![false; self.chunk_count()];
        for chunk in chunks {
            match seen.get_mut(chunk.index) {
                Some(flag) if !*flag => *flag = true,
                _ => return Err(WitnessError::Inconsistent(format!("unexpected chunk {}", chunk.index))),
            }
            stats.add(&chunk.stats);
            for (key, values) in &chunk.found {
                merged
                    .entry(*key)
                    .and_modify(|old| {
                        if self.order.rank(values) < self.order.rank(old) {
                            old.clone_from(values);
                        }
                    })
                    .or_insert_with(|| values.clone());
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(WitnessError::Inconsistent(format!("chunk {missing} missing")));
        }
        if stats.candidates as u128 != self.generator.cardinality() {
            return Err(WitnessError::Inconsistent(format!(
                "covered {} of {} candidates",
                stats.candidates,
                self.generator.cardinality()
            )));
        }
        let mut out = Vec::with_capacity(merged.len());
        for (key, values) in merged {
            let representative = MajorityOp::new(self.generator.k(), &values)?;
            let monoid = self.monoid_of(&key);
            let actual = unary_centraliser(&representative);
            if actual != monoid {
                return Err(WitnessError::Inconsistent(format!(
                    "witness {representative} has centraliser {actual:?}, expected {monoid:?}"
                )));
            }
            out.push(StageMonoid { monoid, representative });
        }
        out.sort_by_key(|a| a.monoid);
        Ok((out, stats))
    }

    /// Runs every chunk on the current thread.
    pub fn run_all(&self) -> Result<(Vec<StageMonoid>, SearchStats), WitnessError> {
        let chunks: Vec<ChunkResult> = (0..self.chunk_count()).map(|i| self.run_chunk(i)).collect();
        self.finish(&chunks)
    }
}

fn record(found: &mut HashMap<Mask, [Element; MAX_SIGMA]>, key: Mask, ranked: [Element; MAX_SIGMA]) {
    found
        .entry(key)
        .and_modify(|old| {
            if ranked < *old {
                *old = ranked;
            }
        })
        .or_insert(ranked);
}
