//! Exact generators: the commuting majority operations of a class as a
//! product of independent blocks of σ-positions.

use super::condition::{ConditionId, A_PAIRS};
use super::image3::{analyze_image3, ImageThreeCase};
use super::lemmas::class_templates;
use super::WitnessError;
use crate::algebra::{Element, MajorityOp, Permutation, SigmaIndex, Triple, UnaryOp, MAX_SIGMA};

/// A set of σ-positions whose joint values range over `options`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Block {
    positions: Vec<u8>,
    options: Vec<Vec<Element>>,
}

impl Block {
    /// Normalises to ascending positions and lexicographically sorted,
    /// duplicate-free options.
    pub fn new(positions: Vec<u8>, options: Vec<Vec<Element>>) -> Self {
        let mut order: Vec<usize> = (0..positions.len()).collect();
        order.sort_by_key(|&i| positions[i]);
        let positions: Vec<u8> = order.iter().map(|&i| positions[i]).collect();
        let mut options: Vec<Vec<Element>> = options
            .into_iter()
            .map(|o| order.iter().map(|&i| o[i]).collect())
            .collect();
        options.sort();
        options.dedup();
        Block { positions, options }
    }

    pub fn positions(&self) -> &[u8] {
        &self.positions
    }

    pub fn options(&self) -> &[Vec<Element>] {
        &self.options
    }
}

/// The majority operations obtained by choosing one option per block.
#[derive(Clone, Debug)]
pub struct Generator {
    k: u8,
    blocks: Vec<Block>,
}

impl Generator {
    /// Blocks must partition σ. They are ordered by least position.
    pub fn new(k: u8, mut blocks: Vec<Block>) -> Result<Self, WitnessError> {
        let sigma = SigmaIndex::for_carrier(k)?;
        let mut seen = vec![false; sigma.len()];
        for b in &blocks {
            for &p in &b.positions {
                let slot = seen
                    .get_mut(p as usize)
                    .ok_or_else(|| WitnessError::Inconsistent(format!("position {p} outside σ")))?;
                if *slot {
                    return Err(WitnessError::Inconsistent(format!("position {p} in two blocks")));
                }
                *slot = true;
            }
            if b.options
                .iter()
                .any(|o| o.len() != b.positions.len() || o.iter().any(|&v| v >= k))
            {
                return Err(WitnessError::Inconsistent("malformed block option".into()));
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(WitnessError::Inconsistent("blocks do not cover σ".into()));
        }
        blocks.sort_by_key(|b| b.positions[0]);
        Ok(Generator { k, blocks })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn cardinality(&self) -> u128 {
        self.blocks.iter().map(|b| b.options.len() as u128).product()
    }

    /// σ-values of the generator element with the given option indices.
    pub fn values_at(&self, choice: &[usize]) -> [Element; MAX_SIGMA] {
        let mut values = [0; MAX_SIGMA];
        for (b, &c) in self.blocks.iter().zip(choice) {
            for (&p, &v) in b.positions.iter().zip(&b.options[c]) {
                values[p as usize] = v;
            }
        }
        values
    }

    /// The least element in σ-string order.
    pub fn least(&self) -> MajorityOp {
        self.op(&vec![0; self.blocks.len()])
    }

    fn op(&self, choice: &[usize]) -> MajorityOp {
        let len = SigmaIndex::for_carrier(self.k).expect("valid carrier").len();
        MajorityOp::new(self.k, &self.values_at(choice)[..len]).expect("valid values")
    }

    /// Streams all elements; nothing is materialised.
    pub fn iter(&self) -> GeneratorIter<'_> {
        let done = self.blocks.iter().any(|b| b.options.is_empty());
        GeneratorIter {
            generator: self,
            choice: vec![0; self.blocks.len()],
            done,
        }
    }
}

pub struct GeneratorIter<'a> {
    generator: &'a Generator,
    choice: Vec<usize>,
    done: bool,
}

impl Iterator for GeneratorIter<'_> {
    type Item = MajorityOp;

    fn next(&mut self) -> Option<MajorityOp> {
        if self.done {
            return None;
        }
        let out = self.generator.op(&self.choice);
        // odometer, last block fastest
        self.done = true;
        for (i, c) in self.choice.iter_mut().enumerate().rev() {
            *c += 1;
            if *c < self.generator.blocks[i].options.len() {
                self.done = false;
                break;
            }
            *c = 0;
        }
        Some(out)
    }
}

impl<'a> IntoIterator for &'a Generator {
    type Item = MajorityOp;
    type IntoIter = GeneratorIter<'a>;

    fn into_iter(self) -> Self::IntoIter {
        self.iter()
    }
}

fn singletons(k: u8, domain: impl Fn(Triple) -> Vec<Element>) -> Vec<Block> {
    let sigma = SigmaIndex::for_carrier(k).expect("valid carrier");
    sigma
        .triples()
        .iter()
        .enumerate()
        .map(|(i, &t)| Block::new(vec![i as u8], domain(t).into_iter().map(|v| vec![v]).collect()))
        .collect()
}

fn position(t: Triple) -> u8 {
    SigmaIndex::for_carrier(4)
        .expect("valid carrier")
        .position(t)
        .expect("injective triple") as u8
}

/// Generator of `{ f : condition_holds(c, f) }`.
pub fn enumerate_commuting(c: &ConditionId) -> Result<Generator, WitnessError> {
    let blocks = match *c {
        ConditionId::Trivial => return Err(WitnessError::TrivialCondition),
        ConditionId::A(i @ 1..=4) => singletons(4, |_| (0..4).filter(|&v| v != i - 1).collect()),
        ConditionId::A(i) => {
            let [a, b, c, d] = A_PAIRS[(i - 5) as usize];
            singletons(4, |t| {
                if t.contains(&a) && t.contains(&b) {
                    vec![a, b]
                } else {
                    vec![c, d]
                }
            })
        }
        ConditionId::U(n) => image_three_blocks(&UnaryOp::from_code(4, n as u32)?)?,
        _ => class_templates(c)
            .expect("permutation class")
            .into_iter()
            .map(|t| Block::new(t.triples.into_iter().map(position).collect(), t.allowed))
            .collect(),
    };
    Generator::new(4, blocks)
}

fn image_three_blocks(s: &UnaryOp) -> Result<Vec<Block>, WitnessError> {
    let a = analyze_image3(s)?;
    let uv = vec![a.u, a.v];
    let mut blocks = Vec::new();
    let linked = a.linked_triples();
    // the linked triples whose image is `r`
    let below = |r: Triple| -> Vec<Triple> { linked.iter().copied().filter(|&q| a.image(q) == r).collect() };
    match a.case {
        ImageThreeCase::NotSym => {
            for t in a.pair_triples() {
                let lower = below(t);
                if lower.is_empty() {
                    blocks.push(Block::new(vec![position(t)], uv.iter().map(|&w| vec![w]).collect()));
                    continue;
                }
                let mut positions = vec![position(t)];
                positions.extend(lower.iter().map(|&q| position(q)));
                let mut options = Vec::new();
                for &w in &uv {
                    let pre = a.preimage(w);
                    for &p in &pre {
                        for &q in &pre {
                            options.push(vec![w, p, q]);
                        }
                    }
                }
                blocks.push(Block::new(positions, options));
            }
        }
        ImageThreeCase::Sym => {
            for t in a.pair_triples() {
                blocks.push(Block::new(vec![position(t)], uv.iter().map(|&w| vec![w]).collect()));
            }
            for orbit in &a.orbits {
                let lower: Vec<Triple> = orbit
                    .iter()
                    .map(|&p| below(p).into_iter().find(|q| q.contains(&a.v)).expect("v-triple"))
                    .collect();
                let mut positions: Vec<u8> = orbit.iter().map(|&p| position(p)).collect();
                positions.extend(lower.iter().map(|&q| position(q)));
                let mut options = Vec::new();
                for seed in [a.u, a.x, a.y] {
                    let mut top = Vec::with_capacity(orbit.len());
                    let mut value = seed;
                    for _ in orbit {
                        top.push(value);
                        value = s.apply(value);
                    }
                    // the v-triple under each orbit triple ranges over s⁻¹ of its value
                    let mut partial: Vec<Vec<Element>> = vec![top.clone()];
                    for &w in &top {
                        let pre = a.preimage(w);
                        partial = partial
                            .into_iter()
                            .flat_map(|o| {
                                pre.iter().map(move |&p| {
                                    let mut o = o.clone();
                                    o.push(p);
                                    o
                                })
                            })
                            .collect();
                    }
                    options.extend(partial);
                }
                blocks.push(Block::new(positions, options));
            }
        }
    }
    Ok(blocks)
}

/// Generic construction for a permutation `p` on any supported carrier:
/// σ splits into orbits under `t ↦ p ∘ t`, and a value at an orbit's least
/// triple determines the rest of the orbit.
pub fn permutation_generator(p: &Permutation) -> Result<Generator, WitnessError> {
    let k = p.op().k();
    let sigma = SigmaIndex::for_carrier(k)?;
    let image = |t: Triple| [p.apply(t[0]), p.apply(t[1]), p.apply(t[2])];
    let mut seen = vec![false; sigma.len()];
    let mut blocks = Vec::new();
    for (i, &t) in sigma.triples().iter().enumerate() {
        if seen[i] {
            continue;
        }
        let mut orbit = vec![t];
        let mut next = image(t);
        while next != t {
            orbit.push(next);
            next = image(next);
        }
        let positions: Vec<u8> = orbit
            .iter()
            .map(|&o| {
                let j = sigma.position(o).expect("injective");
                seen[j] = true;
                j as u8
            })
            .collect();
        let options = (0..k)
            .filter_map(|w| {
                let mut values = Vec::with_capacity(orbit.len());
                let mut v = w;
                for _ in &orbit {
                    values.push(v);
                    v = p.apply(v);
                }
                (v == w).then_some(values)
            })
            .collect();
        blocks.push(Block::new(positions, options));
    }
    Generator::new(k, blocks)
}

/// Generic construction for an image-2 map with a `(k-1)`-element preimage:
/// every σ-value ranges over that preimage.
pub fn big_preimage_generator(s: &UnaryOp) -> Result<Generator, WitnessError> {
    let k = s.k();
    let big = (0..k)
        .map(|a| s.preimage_mask(a))
        .find(|m| m.count_ones() == k as u32 - 1)
        .filter(|_| s.image_size() == 2)
        .ok_or_else(|| WitnessError::Inconsistent(format!("{s} has no {}-element preimage", k - 1)))?;
    let domain: Vec<Element> = (0..k).filter(|&a| big >> a & 1 == 1).collect();
    Generator::new(k, singletons(k, |_| domain.clone()))
}

/// The characterisation-driven generator for any map that has one, at
/// either carrier size.
pub fn analogue_generator(s: &UnaryOp) -> Result<Option<Generator>, WitnessError> {
    if s.is_trivial() {
        return Ok(None);
    }
    if s.is_permutation() {
        return permutation_generator(&Permutation::new(*s)?).map(Some);
    }
    if s.image_size() == 2 && (0..s.k()).any(|a| s.preimage_mask(a).count_ones() == s.k() as u32 - 1) {
        return big_preimage_generator(s).map(Some);
    }
    if s.k() == 4 {
        let c = super::condition::condition_of_code(s.code());
        if matches!(c, ConditionId::A(5..=7) | ConditionId::U(_)) {
            return enumerate_commuting(&c).map(Some);
        }
    }
    Ok(None)
}
