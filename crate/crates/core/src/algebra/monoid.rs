use std::fmt;

use super::{check_carrier, AlgebraError, Permutation, UnaryOp};

/// A set of unary operations on a carrier of size `k`, as a bit vector
/// indexed by unary code.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monoid {
    k: u8,
    bits: [u64; 4],
}

impl Monoid {
    pub fn empty(k: u8) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        Ok(Monoid { k, bits: [0; 4] })
    }

    /// `{id, c_0, …, c_{k-1}}`, contained in the centraliser of every
    /// idempotent operation.
    pub fn trivial(k: u8) -> Result<Self, AlgebraError> {
        let mut m = Monoid::empty(k)?;
        m.insert(&UnaryOp::identity(k)?);
        for a in 0..k {
            m.insert(&UnaryOp::constant(k, a)?);
        }
        Ok(m)
    }

    pub fn full(k: u8) -> Result<Self, AlgebraError> {
        Monoid::from_codes(k, 0..(k as u32).pow(k as u32))
    }

    pub fn from_codes(k: u8, codes: impl IntoIterator<Item = u32>) -> Result<Self, AlgebraError> {
        let mut m = Monoid::empty(k)?;
        let count = (k as u32).pow(k as u32);
        for c in codes {
            if c >= count {
                return Err(AlgebraError::CodeOutOfRange { code: c, k });
            }
            m.bits[(c / 64) as usize] |= 1 << (c % 64);
        }
        Ok(m)
    }

    pub fn from_bits(k: u8, bits: [u64; 4]) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        let count = (k as u32).pow(k as u32);
        let mut valid = [0u64; 4];
        for c in 0..count {
            valid[(c / 64) as usize] |= 1 << (c % 64);
        }
        if bits.iter().zip(valid).any(|(b, v)| b & !v != 0) {
            return Err(AlgebraError::CodeOutOfRange { code: count, k });
        }
        Ok(Monoid { k, bits })
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn bits(&self) -> [u64; 4] {
        self.bits
    }

    pub fn insert(&mut self, s: &UnaryOp) {
        debug_assert_eq!(s.k(), self.k);
        let c = s.code();
        self.bits[(c / 64) as usize] |= 1 << (c % 64);
    }

    #[inline]
    pub fn contains_code(&self, code: u32) -> bool {
        code < 256 && self.bits[(code / 64) as usize] >> (code % 64) & 1 == 1
    }

    pub fn contains(&self, s: &UnaryOp) -> bool {
        s.k() == self.k && self.contains_code(s.code())
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Member codes in increasing order.
    pub fn codes(&self) -> Vec<u32> {
        (0..256u32).filter(|&c| self.contains_code(c)).collect()
    }

    pub fn members(&self) -> impl Iterator<Item = UnaryOp> + '_ {
        self.codes()
            .into_iter()
            .map(move |c| UnaryOp::from_code(self.k, c).expect("valid code"))
    }

    pub fn is_subset(&self, other: &Monoid) -> bool {
        self.k == other.k && self.bits.iter().zip(other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn intersection(&self, other: &Monoid) -> Monoid {
        let mut bits = self.bits;
        for (a, b) in bits.iter_mut().zip(other.bits) {
            *a &= b;
        }
        Monoid { k: self.k, bits }
    }

    /// Checks closure under pairwise composition.
    pub fn is_composition_closed(&self) -> bool {
        let members: Vec<UnaryOp> = self.members().collect();
        members.iter().all(|s| {
            members
                .iter()
                .all(|t| self.contains(&s.compose(t).expect("same carrier")))
        })
    }

    pub fn is_monoid(&self) -> bool {
        self.contains(&UnaryOp::identity(self.k).expect("valid carrier")) && self.is_composition_closed()
    }

    /// `{p ∘ u ∘ p⁻¹ : u ∈ self}`.
    pub fn conjugate(&self, p: &Permutation) -> Result<Monoid, AlgebraError> {
        let mut out = Monoid::empty(self.k)?;
        for u in self.members() {
            out.insert(&conjugate_unary(&u, p)?);
        }
        Ok(out)
    }
}

/// `u^p = p ∘ u ∘ p⁻¹`.
pub fn conjugate_unary(u: &UnaryOp, p: &Permutation) -> Result<UnaryOp, AlgebraError> {
    p.op().compose(u)?.compose(p.inverse().op())
}

impl fmt::Debug for Monoid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Monoid{:?}", self.codes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_and_full() {
        let t = Monoid::trivial(4).unwrap();
        assert_eq!(t.codes(), vec![0, 27, 85, 170, 255]);
        assert!(t.is_monoid());
        let full = Monoid::full(4).unwrap();
        assert_eq!(full.len(), 256);
        assert!(full.is_monoid());
        assert!(t.is_subset(&full));
        assert!(!full.is_subset(&t));
        assert_eq!(Monoid::full(3).unwrap().len(), 27);
    }

    #[test]
    fn closure_detects_missing_product() {
        let k = 4;
        let s = UnaryOp::new(k, &[1, 2, 3, 0]).unwrap();
        let mut m = Monoid::trivial(k).unwrap();
        m.insert(&s);
        assert!(!m.is_composition_closed());
        let s2 = s.compose(&s).unwrap();
        let s3 = s2.compose(&s).unwrap();
        m.insert(&s2);
        m.insert(&s3);
        assert!(m.is_composition_closed());
    }

    #[test]
    fn from_bits_rejects_excess_at_k3() {
        assert!(Monoid::from_bits(3, [0, 0, 0, 1]).is_err());
        assert!(Monoid::from_bits(3, [1 << 26, 0, 0, 0]).is_ok());
        assert!(Monoid::from_codes(3, [27]).is_err());
    }

    #[test]
    fn conjugation_of_unary_is_an_action() {
        let perms = Permutation::all(4).unwrap();
        let u = UnaryOp::new(4, &[3, 0, 0, 1]).unwrap();
        for p in &perms {
            for q in perms.iter().step_by(5) {
                let lhs = conjugate_unary(&conjugate_unary(&u, p).unwrap(), q).unwrap();
                let rhs = conjugate_unary(&u, &q.compose(p).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }
}
