use std::sync::OnceLock;

use super::{check_carrier, AlgebraError, Element};

pub type Triple = [Element; 3];

const NONE: u8 = u8::MAX;

/// The injective triples over `{0, …, k-1}` in lexicographic order.
///
/// This is the free domain of a majority operation: every other triple has
/// a repeated entry and its value is fixed by the majority law.
#[derive(Debug)]
pub struct SigmaIndex {
    k: u8,
    triples: Vec<Triple>,
    // indexed by x·k² + y·k + z
    positions: [u8; 64],
}

impl SigmaIndex {
    fn build(k: u8) -> Self {
        let mut triples = Vec::new();
        let mut positions = [NONE; 64];
        for x in 0..k {
            for y in 0..k {
                for z in 0..k {
                    if x != y && y != z && x != z {
                        positions[encode(k, [x, y, z])] = triples.len() as u8;
                        triples.push([x, y, z]);
                    }
                }
            }
        }
        SigmaIndex { k, triples, positions }
    }

    pub fn for_carrier(k: u8) -> Result<&'static SigmaIndex, AlgebraError> {
        static K3: OnceLock<SigmaIndex> = OnceLock::new();
        static K4: OnceLock<SigmaIndex> = OnceLock::new();
        check_carrier(k)?;
        Ok(match k {
            3 => K3.get_or_init(|| SigmaIndex::build(3)),
            _ => K4.get_or_init(|| SigmaIndex::build(4)),
        })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    #[inline]
    pub fn triple(&self, index: usize) -> Triple {
        self.triples[index]
    }

    /// Index of `t` in canonical order, `None` if `t` has a repeated entry.
    #[inline]
    pub fn position(&self, t: Triple) -> Option<usize> {
        if t.iter().any(|&v| v >= self.k) {
            return None;
        }
        match self.positions[encode(self.k, t)] {
            NONE => None,
            p => Some(p as usize),
        }
    }
}

#[inline]
fn encode(k: u8, t: Triple) -> usize {
    let k = k as usize;
    (t[0] as usize * k + t[1] as usize) * k + t[2] as usize
}

/// Value forced by the majority law on a triple with a repetition.
#[inline]
pub fn majority_value(t: Triple) -> Option<Element> {
    if t[0] == t[1] || t[0] == t[2] {
        Some(t[0])
    } else if t[1] == t[2] {
        Some(t[1])
    } else {
        None
    }
}
