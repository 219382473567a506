//! Finite-operation arithmetic on `{0, …, k-1}` for `k ∈ {3, 4}`.
//!
//! Unary maps are coded by integers, majority operations by their values on
//! σ (the injective triples). Commutation of an operation `f` with a unary
//! map `s` means `s(f(x)) = f(s ∘ x)` for every argument tuple `x`.

mod monoid;
mod ops;
mod sigma;
mod unary;

use thiserror::Error;

pub use monoid::{conjugate_unary, Monoid};
pub use ops::{tail_index, FinitaryOp, LeftAbsorptiveOp, MajorityOp, MAX_SIGMA, MAX_TAIL};
pub use sigma::{majority_value, SigmaIndex, Triple};
pub use unary::{Permutation, UnaryOp};

pub type Element = u8;

pub const MAX_K: usize = 4;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("unsupported carrier size {0} (expected 3 or 4)")]
    UnsupportedCarrier(u8),
    #[error("unary code {code} out of range for k = {k}")]
    CodeOutOfRange { code: u32, k: u8 },
    #[error("element {value} out of range for k = {k}")]
    ElementOutOfRange { value: u8, k: u8 },
    #[error("carrier mismatch: {left} vs {right}")]
    CarrierMismatch { left: u8, right: u8 },
    #[error("expected {expected} entries, got {got}")]
    Length { expected: usize, got: usize },
    #[error("table violates the defining identities at {0:?}")]
    IdentityViolation(Vec<Element>),
    #[error("{0} is not a permutation")]
    NotPermutation(String),
    #[error("{0}")]
    Parse(String),
}

pub(crate) fn check_carrier(k: u8) -> Result<(), AlgebraError> {
    if (3..=4).contains(&k) {
        Ok(())
    } else {
        Err(AlgebraError::UnsupportedCarrier(k))
    }
}

/// Full-table commutation test: `s(f(x)) = f(s ∘ x)` for all `x ∈ A^n`.
pub fn commutes(f: &FinitaryOp, s: &UnaryOp) -> Result<bool, AlgebraError> {
    if f.k() != s.k() {
        return Err(AlgebraError::CarrierMismatch {
            left: f.k(),
            right: s.k(),
        });
    }
    let mut image = vec![0; f.arity()];
    Ok(f.rows().all(|(x, v)| {
        for (slot, &xi) in image.iter_mut().zip(&x) {
            *slot = s.apply(xi);
        }
        s.apply(v) == f.eval(&image)
    }))
}

/// Commutation of a majority operation checked on σ only.
///
/// `f(s ∘ x)` is evaluated on demand: when `s ∘ x` has a repetition the
/// majority law gives the value directly.
pub fn commutes_on_sigma(f: &MajorityOp, s: &UnaryOp) -> bool {
    debug_assert_eq!(f.k(), s.k());
    let sigma = SigmaIndex::for_carrier(f.k()).expect("valid carrier");
    sigma.triples().iter().zip(f.values()).all(|(t, &v)| {
        let image = [s.apply(t[0]), s.apply(t[1]), s.apply(t[2])];
        s.apply(v) == f.eval(image)
    })
}

/// `{f}' = { s ∈ O^(1) : f ⊥ s }`.
pub fn unary_centraliser(f: &MajorityOp) -> Monoid {
    let k = f.k();
    let mut m = Monoid::empty(k).expect("valid carrier");
    for s in UnaryOp::all(k).expect("valid carrier") {
        if commutes_on_sigma(f, &s) {
            m.insert(&s);
        }
    }
    m
}

/// Full-table centraliser, used as an independent check of
/// [`unary_centraliser`].
pub fn unary_centraliser_full(f: &FinitaryOp) -> Monoid {
    let k = f.k();
    let mut m = Monoid::empty(k).expect("valid carrier");
    for s in UnaryOp::all(k).expect("valid carrier") {
        if commutes(f, &s).expect("same carrier") {
            m.insert(&s);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_majority(k: u8) -> impl Iterator<Item = MajorityOp> {
        let len = SigmaIndex::for_carrier(k).unwrap().len();
        let total = (k as u64).pow(len as u32);
        (0..total).map(move |mut n| {
            let mut v = vec![0; len];
            for slot in v.iter_mut().rev() {
                *slot = (n % k as u64) as u8;
                n /= k as u64;
            }
            MajorityOp::new(k, &v).unwrap()
        })
    }

    #[test]
    fn sigma_commutation_matches_full_table_at_k3() {
        let maps: Vec<UnaryOp> = UnaryOp::all(3).unwrap().collect();
        let mut pairs = 0;
        for f in all_majority(3) {
            let full = f.expand();
            for s in &maps {
                assert_eq!(commutes_on_sigma(&f, s), commutes(&full, s).unwrap(), "{f:?} {s}");
                pairs += 1;
            }
        }
        assert_eq!(pairs, 729 * 27);
    }

    #[test]
    fn constants_and_identity_always_commute() {
        for f in all_majority(3).step_by(17) {
            let m = unary_centraliser(&f);
            assert!(Monoid::trivial(3).unwrap().is_subset(&m));
            assert!(m.is_monoid());
        }
    }

    #[test]
    fn mismatched_carriers_are_rejected() {
        let f = MajorityOp::new(3, &[0; 6]).unwrap().expand();
        let s = UnaryOp::identity(4).unwrap();
        assert!(commutes(&f, &s).is_err());
    }
}
