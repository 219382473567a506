use std::fmt;

use super::{check_carrier, AlgebraError, Element, MAX_K};

/// A self-map of `{0, …, k-1}`, stored as its value table.
///
/// The canonical integer code of a map `s` is `Σ s(j)·k^(k-1-j)`, so the
/// table reads as the base-`k` digits of the code, most significant first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnaryOp {
    k: u8,
    table: [Element; MAX_K],
}

impl UnaryOp {
    pub fn new(k: u8, table: &[Element]) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        if table.len() != k as usize {
            return Err(AlgebraError::Length {
                expected: k as usize,
                got: table.len(),
            });
        }
        let mut t = [0; MAX_K];
        for (slot, &v) in t.iter_mut().zip(table) {
            if v >= k {
                return Err(AlgebraError::ElementOutOfRange { value: v, k });
            }
            *slot = v;
        }
        Ok(UnaryOp { k, table: t })
    }

    pub fn from_code(k: u8, code: u32) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        let count = (k as u32).pow(k as u32);
        if code >= count {
            return Err(AlgebraError::CodeOutOfRange { code, k });
        }
        let mut table = [0; MAX_K];
        let mut rest = code;
        for j in (0..k as usize).rev() {
            table[j] = (rest % k as u32) as Element;
            rest /= k as u32;
        }
        Ok(UnaryOp { k, table })
    }

    pub fn code(&self) -> u32 {
        self.table().iter().fold(0, |acc, &v| acc * self.k as u32 + v as u32)
    }

    pub fn identity(k: u8) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        let mut table = [0; MAX_K];
        for (j, slot) in table.iter_mut().enumerate().take(k as usize) {
            *slot = j as Element;
        }
        Ok(UnaryOp { k, table })
    }

    pub fn constant(k: u8, a: Element) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        if a >= k {
            return Err(AlgebraError::ElementOutOfRange { value: a, k });
        }
        let mut table = [0; MAX_K];
        table[..k as usize].fill(a);
        Ok(UnaryOp { k, table })
    }

    /// All `k^k` maps in code order.
    pub fn all(k: u8) -> Result<impl Iterator<Item = UnaryOp>, AlgebraError> {
        check_carrier(k)?;
        let count = (k as u32).pow(k as u32);
        Ok((0..count).map(move |n| UnaryOp::from_code(k, n).expect("code in range")))
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn table(&self) -> &[Element] {
        &self.table[..self.k as usize]
    }

    #[inline]
    pub fn apply(&self, x: Element) -> Element {
        self.table[x as usize]
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &UnaryOp) -> Result<UnaryOp, AlgebraError> {
        if self.k != other.k {
            return Err(AlgebraError::CarrierMismatch {
                left: self.k,
                right: other.k,
            });
        }
        let mut table = [0; MAX_K];
        for (slot, &x) in table.iter_mut().zip(&other.table[..self.k as usize]) {
            *slot = self.table[x as usize];
        }
        Ok(UnaryOp { k: self.k, table })
    }

    /// Image as a bit mask over the carrier.
    pub fn image_mask(&self) -> u8 {
        self.table().iter().fold(0, |m, &v| m | (1 << v))
    }

    pub fn image_size(&self) -> usize {
        self.image_mask().count_ones() as usize
    }

    /// Preimage of `v` as a bit mask.
    pub fn preimage_mask(&self, v: Element) -> u8 {
        self.table()
            .iter()
            .enumerate()
            .filter(|&(_, &w)| w == v)
            .fold(0, |m, (j, _)| m | (1 << j))
    }

    pub fn is_permutation(&self) -> bool {
        self.image_size() == self.k as usize
    }

    pub fn is_identity(&self) -> bool {
        self.table().iter().enumerate().all(|(j, &v)| j == v as usize)
    }

    pub fn is_constant(&self) -> bool {
        self.image_size() == 1
    }

    /// Identity or a constant: the maps commuting with every idempotent operation.
    pub fn is_trivial(&self) -> bool {
        self.is_identity() || self.is_constant()
    }

    /// Kernel partition, blocks sorted by least element.
    pub fn kernel(&self) -> Vec<Vec<Element>> {
        let mut blocks: Vec<Vec<Element>> = Vec::new();
        let mut seen = [usize::MAX; MAX_K];
        for (j, &v) in self.table().iter().enumerate() {
            if seen[v as usize] == usize::MAX {
                seen[v as usize] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[seen[v as usize]].push(j as Element);
        }
        blocks
    }
}

impl fmt::Debug for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "u{}{}", self.code(), self)
    }
}

impl fmt::Display for UnaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (j, v) in self.table().iter().enumerate() {
            if j > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A bijective [`UnaryOp`] together with its cycle decomposition.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    op: UnaryOp,
    cycles: Vec<Vec<Element>>,
}

impl Permutation {
    pub fn new(op: UnaryOp) -> Result<Self, AlgebraError> {
        if !op.is_permutation() {
            return Err(AlgebraError::NotPermutation(op.to_string()));
        }
        let k = op.k() as usize;
        let mut visited = [false; MAX_K];
        let mut cycles = Vec::new();
        for start in 0..k {
            if visited[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start as Element;
            while !visited[x as usize] {
                visited[x as usize] = true;
                cycle.push(x);
                x = op.apply(x);
            }
            cycles.push(cycle);
        }
        Ok(Permutation { op, cycles })
    }

    pub fn identity(k: u8) -> Result<Self, AlgebraError> {
        Permutation::new(UnaryOp::identity(k)?)
    }

    /// Builds a permutation from disjoint cycles; unmentioned points are fixed.
    pub fn from_cycles(k: u8, cycles: &[&[Element]]) -> Result<Self, AlgebraError> {
        let mut table: Vec<Element> = (0..k).collect();
        for cycle in cycles {
            for (i, &x) in cycle.iter().enumerate() {
                if x >= k {
                    return Err(AlgebraError::ElementOutOfRange { value: x, k });
                }
                table[x as usize] = cycle[(i + 1) % cycle.len()];
            }
        }
        Permutation::new(UnaryOp::new(k, &table)?)
    }

    /// All `k!` permutations in code order.
    pub fn all(k: u8) -> Result<Vec<Permutation>, AlgebraError> {
        Ok(UnaryOp::all(k)?
            .filter(UnaryOp::is_permutation)
            .map(|op| Permutation::new(op).expect("bijective"))
            .collect())
    }

    pub fn op(&self) -> &UnaryOp {
        &self.op
    }

    #[inline]
    pub fn apply(&self, x: Element) -> Element {
        self.op.apply(x)
    }

    /// All cycles including fixed points, each starting at its least element.
    pub fn cycles(&self) -> &[Vec<Element>] {
        &self.cycles
    }

    /// Cycle lengths in decreasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles.iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn fixed_points(&self) -> usize {
        self.cycles.iter().filter(|c| c.len() == 1).count()
    }

    pub fn order(&self) -> usize {
        fn gcd(a: usize, b: usize) -> usize {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        self.cycles.iter().map(Vec::len).fold(1, |l, n| l / gcd(l, n) * n)
    }

    pub fn inverse(&self) -> Permutation {
        let mut table = [0; MAX_K];
        for x in 0..self.op.k() {
            table[self.op.apply(x) as usize] = x;
        }
        Permutation::new(UnaryOp::new(self.op.k(), &table[..self.op.k() as usize]).expect("valid")).expect("bijective")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation, AlgebraError> {
        Permutation::new(self.op.compose(&other.op)?)
    }
}

impl TryFrom<UnaryOp> for Permutation {
    type Error = AlgebraError;

    fn try_from(op: UnaryOp) -> Result<Self, Self::Error> {
        Permutation::new(op)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Cycle notation without fixed points, e.g. `(0 3 1)`; `id` for the identity.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for cycle in self.cycles.iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "(")?;
            for (i, x) in cycle.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "id")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codec_examples() {
        assert_eq!(UnaryOp::from_code(4, 26).unwrap().table(), &[0, 1, 2, 2]);
        assert_eq!(UnaryOp::from_code(4, 0).unwrap().table(), &[0, 0, 0, 0]);
        assert_eq!(UnaryOp::new(4, &[0, 1, 2, 3]).unwrap().code(), 27);
        assert_eq!(UnaryOp::new(4, &[3, 0, 0, 1]).unwrap().code(), 193);
    }

    #[test]
    fn codec_rejects_out_of_range() {
        assert!(matches!(
            UnaryOp::from_code(4, 256),
            Err(AlgebraError::CodeOutOfRange { code: 256, k: 4 })
        ));
        assert!(UnaryOp::from_code(3, 27).is_err());
        assert!(UnaryOp::new(4, &[0, 1, 4, 0]).is_err());
        assert!(UnaryOp::new(5, &[0, 1, 2, 3, 4]).is_err());
    }

    #[test]
    fn codec_round_trips_every_code() {
        for k in [3u8, 4] {
            for s in UnaryOp::all(k).unwrap() {
                let back = UnaryOp::from_code(k, s.code()).unwrap();
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn composition_examples() {
        let id = UnaryOp::identity(4).unwrap();
        let s = UnaryOp::new(4, &[3, 0, 0, 1]).unwrap();
        assert_eq!(id.compose(&s).unwrap(), s);
        let c2 = UnaryOp::constant(4, 2).unwrap();
        assert_eq!(c2.compose(&s).unwrap(), c2);
        let inv = UnaryOp::new(4, &[1, 0, 3, 2]).unwrap();
        assert_eq!(inv.compose(&inv).unwrap(), id);
        // left composition: (s ∘ t)(j) = s(t(j))
        let t = UnaryOp::new(4, &[1, 2, 3, 0]).unwrap();
        assert_eq!(s.compose(&t).unwrap().table(), &[0, 0, 1, 3]);
    }

    #[test]
    fn composition_rejects_mixed_carriers() {
        let a = UnaryOp::identity(3).unwrap();
        let b = UnaryOp::identity(4).unwrap();
        assert!(matches!(a.compose(&b), Err(AlgebraError::CarrierMismatch { .. })));
    }

    #[test]
    fn permutation_structure() {
        let p = Permutation::from_cycles(4, &[&[0, 3, 1]]).unwrap();
        assert_eq!(p.op().table(), &[3, 0, 2, 1]);
        assert_eq!(p.to_string(), "(0 3 1)");
        assert_eq!(p.order(), 3);
        assert_eq!(p.fixed_points(), 1);
        assert_eq!(p.cycle_type(), vec![3, 1]);
        let q = Permutation::from_cycles(4, &[&[0, 1], &[2, 3]]).unwrap();
        assert_eq!(q.order(), 2);
        assert_eq!(q.inverse(), q);
        assert!(Permutation::new(UnaryOp::from_code(4, 26).unwrap()).is_err());
        assert_eq!(Permutation::all(4).unwrap().len(), 24);
        for p in Permutation::all(4).unwrap() {
            assert_eq!(24 % p.order(), 0);
            assert!(p.compose(&p.inverse()).unwrap().op().is_identity());
        }
    }

    #[test]
    fn kernel_blocks() {
        let s = UnaryOp::new(4, &[3, 0, 0, 1]).unwrap();
        assert_eq!(s.kernel(), vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(s.image_size(), 3);
        assert_eq!(s.preimage_mask(0), 0b0110);
        assert_eq!(s.preimage_mask(2), 0);
    }
}
