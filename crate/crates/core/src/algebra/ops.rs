use std::fmt;

use super::sigma::{majority_value, SigmaIndex, Triple};
use super::{check_carrier, AlgebraError, Element, Permutation};

/// Largest σ size supported (k = 4).
pub const MAX_SIGMA: usize = 24;
/// Number of patterns `(a, b, b)` with `a ≠ b` at k = 4.
pub const MAX_TAIL: usize = 12;

/// An operation of arbitrary positive arity given by its full value table,
/// rows in lexicographic order of the argument tuple.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FinitaryOp {
    k: u8,
    arity: usize,
    table: Vec<Element>,
}

impl FinitaryOp {
    pub fn new(k: u8, arity: usize, table: Vec<Element>) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        if arity == 0 {
            return Err(AlgebraError::Parse("arity must be positive".into()));
        }
        let expected = (k as usize).pow(arity as u32);
        if table.len() != expected {
            return Err(AlgebraError::Length {
                expected,
                got: table.len(),
            });
        }
        if let Some(&v) = table.iter().find(|&&v| v >= k) {
            return Err(AlgebraError::ElementOutOfRange { value: v, k });
        }
        Ok(FinitaryOp { k, arity, table })
    }

    pub fn from_fn(k: u8, arity: usize, f: impl Fn(&[Element]) -> Element) -> Result<Self, AlgebraError> {
        check_carrier(k)?;
        let mut table = Vec::with_capacity((k as usize).pow(arity as u32));
        let mut tuple = vec![0; arity];
        for _ in 0..(k as usize).pow(arity as u32) {
            table.push(f(&tuple));
            next_tuple(k, &mut tuple);
        }
        FinitaryOp::new(k, arity, table)
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn table(&self) -> &[Element] {
        &self.table
    }

    pub fn eval(&self, args: &[Element]) -> Element {
        debug_assert_eq!(args.len(), self.arity);
        let index = args.iter().fold(0usize, |acc, &x| acc * self.k as usize + x as usize);
        self.table[index]
    }

    /// Iterates all argument tuples with their values.
    pub fn rows(&self) -> impl Iterator<Item = (Vec<Element>, Element)> + '_ {
        let mut tuple = vec![0; self.arity];
        self.table.iter().map(move |&v| {
            let row = tuple.clone();
            next_tuple(self.k, &mut tuple);
            (row, v)
        })
    }
}

fn next_tuple(k: u8, tuple: &mut [Element]) {
    for slot in tuple.iter_mut().rev() {
        *slot += 1;
        if *slot < k {
            return;
        }
        *slot = 0;
    }
}

/// A majority operation, stored as its values on σ in canonical order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MajorityOp {
    k: u8,
    values: [Element; MAX_SIGMA],
}

impl MajorityOp {
    pub fn new(k: u8, values: &[Element]) -> Result<Self, AlgebraError> {
        let sigma = SigmaIndex::for_carrier(k)?;
        Ok(MajorityOp {
            k,
            values: checked_values(k, sigma.len(), values)?,
        })
    }

    /// Parses the digit string over canonical σ order, e.g. `"1232…"`.
    pub fn from_sigma_string(k: u8, s: &str) -> Result<Self, AlgebraError> {
        MajorityOp::new(k, &parse_digits(s)?)
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn values(&self) -> &[Element] {
        let len = SigmaIndex::for_carrier(self.k).expect("valid carrier").len();
        &self.values[..len]
    }

    pub fn sigma_string(&self) -> String {
        self.values().iter().map(|v| char::from(b'0' + v)).collect()
    }

    /// Value at `t`; off σ the majority law decides.
    #[inline]
    pub fn eval(&self, t: Triple) -> Element {
        match majority_value(t) {
            Some(v) => v,
            None => {
                let sigma = SigmaIndex::for_carrier(self.k).expect("valid carrier");
                self.values[sigma.position(t).expect("injective triple")]
            }
        }
    }

    pub fn expand(&self) -> FinitaryOp {
        FinitaryOp::from_fn(self.k, 3, |x| self.eval([x[0], x[1], x[2]])).expect("valid table")
    }

    /// Recovers the σ-restriction of a full ternary table that satisfies the
    /// majority law.
    pub fn restrict(op: &FinitaryOp) -> Result<Self, AlgebraError> {
        if op.arity() != 3 {
            return Err(AlgebraError::Length {
                expected: 3,
                got: op.arity(),
            });
        }
        let sigma = SigmaIndex::for_carrier(op.k())?;
        for (row, v) in op.rows() {
            let t = [row[0], row[1], row[2]];
            if let Some(m) = majority_value(t) {
                if m != v {
                    return Err(AlgebraError::IdentityViolation(row));
                }
            }
        }
        let values: Vec<Element> = sigma.triples().iter().map(|t| op.eval(t)).collect();
        MajorityOp::new(op.k(), &values)
    }

    pub fn to_left_absorptive(&self) -> LeftAbsorptiveOp {
        LeftAbsorptiveOp::build(self.k, self.values, |_, b| b)
    }

    /// `f^p(x) = p(f(p⁻¹ ∘ x))`.
    pub fn conjugate(&self, p: &Permutation) -> Result<MajorityOp, AlgebraError> {
        if p.op().k() != self.k {
            return Err(AlgebraError::CarrierMismatch {
                left: self.k,
                right: p.op().k(),
            });
        }
        let sigma = SigmaIndex::for_carrier(self.k)?;
        let inv = p.inverse();
        let mut values = [0; MAX_SIGMA];
        for (slot, t) in values.iter_mut().zip(sigma.triples()) {
            let pre = [inv.apply(t[0]), inv.apply(t[1]), inv.apply(t[2])];
            *slot = p.apply(self.eval(pre));
        }
        Ok(MajorityOp { k: self.k, values })
    }
}

impl fmt::Display for MajorityOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.sigma_string())
    }
}

impl fmt::Debug for MajorityOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Maj[{}]", self.sigma_string())
    }
}

/// A ternary operation satisfying `f(x,y,x) ≈ f(x,x,y) ≈ x`.
///
/// Besides its σ-values it is free on the triples `(a, b, b)` with `a ≠ b`
/// (the "tail"). Tail `(a,b,b) ↦ b` gives the majority operations, tail
/// `(a,b,b) ↦ a` the semiprojections on the first coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct LeftAbsorptiveOp {
    k: u8,
    values: [Element; MAX_SIGMA],
    tail: [Element; MAX_TAIL],
}

impl LeftAbsorptiveOp {
    pub fn new(k: u8, values: &[Element], tail: &[Element]) -> Result<Self, AlgebraError> {
        let sigma = SigmaIndex::for_carrier(k)?;
        let values = checked_values(k, sigma.len(), values)?;
        let tail_len = k as usize * (k as usize - 1);
        if tail.len() != tail_len {
            return Err(AlgebraError::Length {
                expected: tail_len,
                got: tail.len(),
            });
        }
        let mut t = [0; MAX_TAIL];
        for (slot, &v) in t.iter_mut().zip(tail) {
            if v >= k {
                return Err(AlgebraError::ElementOutOfRange { value: v, k });
            }
            *slot = v;
        }
        Ok(LeftAbsorptiveOp { k, values, tail: t })
    }

    /// The semiprojection on the leftmost coordinate agreeing with `f` on σ.
    pub fn semiprojection(f: &MajorityOp) -> Self {
        LeftAbsorptiveOp::build(f.k, f.values, |a, _| a)
    }

    fn build(k: u8, values: [Element; MAX_SIGMA], tail_of: impl Fn(Element, Element) -> Element) -> Self {
        let mut tail = [0; MAX_TAIL];
        for a in 0..k {
            for b in (0..k).filter(|&b| b != a) {
                tail[tail_index(k, a, b)] = tail_of(a, b);
            }
        }
        LeftAbsorptiveOp { k, values, tail }
    }

    pub fn k(&self) -> u8 {
        self.k
    }

    /// Value on `(a, b, b)`, `a ≠ b`.
    pub fn tail_value(&self, a: Element, b: Element) -> Element {
        self.tail[tail_index(self.k, a, b)]
    }

    pub fn sigma_values(&self) -> &[Element] {
        let len = SigmaIndex::for_carrier(self.k).expect("valid carrier").len();
        &self.values[..len]
    }

    pub fn tail_values(&self) -> &[Element] {
        &self.tail[..self.k as usize * (self.k as usize - 1)]
    }

    #[inline]
    pub fn eval(&self, t: Triple) -> Element {
        if t[0] == t[1] || t[0] == t[2] {
            t[0]
        } else if t[1] == t[2] {
            self.tail[tail_index(self.k, t[0], t[1])]
        } else {
            let sigma = SigmaIndex::for_carrier(self.k).expect("valid carrier");
            self.values[sigma.position(t).expect("injective triple")]
        }
    }

    pub fn is_majority(&self) -> bool {
        self.pairs().all(|(a, b)| self.tail_value(a, b) == b)
    }

    pub fn is_semiprojection(&self) -> bool {
        self.pairs().all(|(a, b)| self.tail_value(a, b) == a)
    }

    pub fn as_majority(&self) -> Option<MajorityOp> {
        self.is_majority().then_some(MajorityOp {
            k: self.k,
            values: self.values,
        })
    }

    fn pairs(&self) -> impl Iterator<Item = (Element, Element)> {
        let k = self.k;
        (0..k).flat_map(move |a| (0..k).filter(move |&b| b != a).map(move |b| (a, b)))
    }

    pub fn expand(&self) -> FinitaryOp {
        FinitaryOp::from_fn(self.k, 3, |x| self.eval([x[0], x[1], x[2]])).expect("valid table")
    }

    /// Recovers the operation from a full table satisfying both absorption
    /// identities.
    pub fn restrict(op: &FinitaryOp) -> Result<Self, AlgebraError> {
        if op.arity() != 3 {
            return Err(AlgebraError::Length {
                expected: 3,
                got: op.arity(),
            });
        }
        let k = op.k();
        let sigma = SigmaIndex::for_carrier(k)?;
        for (row, v) in op.rows() {
            if (row[0] == row[1] || row[0] == row[2]) && v != row[0] {
                return Err(AlgebraError::IdentityViolation(row));
            }
        }
        let values: Vec<Element> = sigma.triples().iter().map(|t| op.eval(t)).collect();
        let mut tail = Vec::new();
        for a in 0..k {
            for b in (0..k).filter(|&b| b != a) {
                tail.push(op.eval(&[a, b, b]));
            }
        }
        LeftAbsorptiveOp::new(k, &values, &tail)
    }
}

/// Index of the pattern `(a, b, b)` among the `k(k-1)` patterns in
/// lexicographic order of `(a, b)`.
#[inline]
pub fn tail_index(k: u8, a: Element, b: Element) -> usize {
    a as usize * (k as usize - 1) + if b < a { b as usize } else { b as usize - 1 }
}

fn checked_values(k: u8, len: usize, values: &[Element]) -> Result<[Element; MAX_SIGMA], AlgebraError> {
    check_carrier(k)?;
    if values.len() != len {
        return Err(AlgebraError::Length {
            expected: len,
            got: values.len(),
        });
    }
    let mut out = [0; MAX_SIGMA];
    for (slot, &v) in out.iter_mut().zip(values) {
        if v >= k {
            return Err(AlgebraError::ElementOutOfRange { value: v, k });
        }
        *slot = v;
    }
    Ok(out)
}

fn parse_digits(s: &str) -> Result<Vec<Element>, AlgebraError> {
    s.trim()
        .chars()
        .map(|c| {
            c.to_digit(10)
                .map(|d| d as Element)
                .ok_or_else(|| AlgebraError::Parse(format!("invalid digit {c:?} in {s:?}")))
        })
        .collect()
}
