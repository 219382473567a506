use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::WitnessError;
use crate::algebra::{Element, Permutation, UnaryOp};

/// Attribute class of a unary map on `{0,1,2,3}` after clarification with
/// respect to commutation with majority operations.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ConditionId {
    /// Image size 2. `A1..A4`: one preimage is `A \ {i-1}`; `A5..A7`: kernel
    /// `{{0,1},{2,3}}`, `{{0,2},{1,3}}`, `{{0,3},{1,2}}`.
    A(u8),
    /// 4-cycles.
    C(u8),
    /// Products of two transpositions.
    D(u8),
    /// 3-cycles.
    E(u8),
    /// Transpositions.
    F(u8),
    /// A single map with a 3-element image, by code.
    U(u8),
    /// Identity and constants.
    Trivial,
}

/// Letters `(a, b, c, d)` for the permutation classes: C = `(a b c d)`,
/// D = `(a b)(c d)`, E = `(a b c)(d)`, F = `(a b)(c)(d)`.
const C_LETTERS: [[Element; 4]; 3] = [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 1, 3]];
const D_LETTERS: [[Element; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];
const E_LETTERS: [[Element; 4]; 4] = [[0, 1, 2, 3], [0, 1, 3, 2], [0, 2, 3, 1], [1, 2, 3, 0]];
const F_LETTERS: [[Element; 4]; 6] = [
    [0, 1, 2, 3],
    [0, 2, 1, 3],
    [0, 3, 1, 2],
    [1, 2, 0, 3],
    [1, 3, 0, 2],
    [2, 3, 0, 1],
];

/// Kernel pairs `{a, b} | {c, d}` for A5..A7.
pub(crate) const A_PAIRS: [[Element; 4]; 3] = [[0, 1, 2, 3], [0, 2, 1, 3], [0, 3, 1, 2]];

impl ConditionId {
    /// The 167 non-trivial classes in canonical order.
    pub fn all_nontrivial() -> Vec<ConditionId> {
        let mut out = Vec::with_capacity(167);
        out.extend((1..=7).map(ConditionId::A));
        out.extend((1..=3).map(ConditionId::C));
        out.extend((1..=3).map(ConditionId::D));
        out.extend((1..=4).map(ConditionId::E));
        out.extend((1..=6).map(ConditionId::F));
        out.extend(
            (0..=255u32)
                .filter(|&n| UnaryOp::from_code(4, n).unwrap().image_size() == 3)
                .map(|n| ConditionId::U(n as u8)),
        );
        out
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, ConditionId::Trivial)
    }

    pub fn is_permutation_class(&self) -> bool {
        matches!(
            self,
            ConditionId::C(_) | ConditionId::D(_) | ConditionId::E(_) | ConditionId::F(_)
        )
    }

    /// Member maps in code order.
    pub fn members(&self) -> Vec<UnaryOp> {
        let table = class_table();
        (0..256u32)
            .filter(|&n| table[n as usize] == *self)
            .map(|n| UnaryOp::from_code(4, n).unwrap())
            .collect()
    }

    /// The least-code member.
    pub fn representative(&self) -> UnaryOp {
        self.members()[0]
    }

    /// `(a, b, c, d)` naming of a permutation class.
    pub fn letters(&self) -> Option<[Element; 4]> {
        let idx = |i: u8| i as usize - 1;
        match *self {
            ConditionId::C(i) => Some(C_LETTERS[idx(i)]),
            ConditionId::D(i) => Some(D_LETTERS[idx(i)]),
            ConditionId::E(i) => Some(E_LETTERS[idx(i)]),
            ConditionId::F(i) => Some(F_LETTERS[idx(i)]),
            _ => None,
        }
    }

    /// The defining permutation of a permutation class.
    pub fn permutation(&self) -> Option<Permutation> {
        let [a, b, c, d] = self.letters()?;
        let p = match self {
            ConditionId::C(_) => Permutation::from_cycles(4, &[&[a, b, c, d]]),
            ConditionId::D(_) => Permutation::from_cycles(4, &[&[a, b], &[c, d]]),
            ConditionId::E(_) => Permutation::from_cycles(4, &[&[a, b, c]]),
            _ => Permutation::from_cycles(4, &[&[a, b]]),
        };
        Some(p.expect("valid cycles"))
    }

    /// File-name friendly tag, e.g. `A1`, `U193`.
    pub fn tag(&self) -> String {
        match self {
            ConditionId::U(n) => format!("U{n}"),
            other => other.to_string(),
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionId::A(i) => write!(f, "A{i}"),
            ConditionId::C(i) => write!(f, "C{i}"),
            ConditionId::D(i) => write!(f, "D{i}"),
            ConditionId::E(i) => write!(f, "E{i}"),
            ConditionId::F(i) => write!(f, "F{i}"),
            ConditionId::U(n) => write!(f, "U({n})"),
            ConditionId::Trivial => write!(f, "TRIVIAL"),
        }
    }
}

impl FromStr for ConditionId {
    type Err = WitnessError;

    /// Accepts `A1`, `U(193)`, `U193` and `TRIVIAL`, case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || WitnessError::Parse(format!("unknown condition tag {s:?}"));
        let upper = s.trim().to_ascii_uppercase();
        if upper == "TRIVIAL" {
            return Ok(ConditionId::Trivial);
        }
        let (head, rest) = upper.split_at(1.min(upper.len()));
        let rest = rest.trim_start_matches('(').trim_end_matches(')');
        let n: u32 = rest.parse().map_err(|_| bad())?;
        let id = match head {
            "A" if (1..=7).contains(&n) => ConditionId::A(n as u8),
            "C" if (1..=3).contains(&n) => ConditionId::C(n as u8),
            "D" if (1..=3).contains(&n) => ConditionId::D(n as u8),
            "E" if (1..=4).contains(&n) => ConditionId::E(n as u8),
            "F" if (1..=6).contains(&n) => ConditionId::F(n as u8),
            "U" if n < 256 && UnaryOp::from_code(4, n).unwrap().image_size() == 3 => ConditionId::U(n as u8),
            _ => return Err(bad()),
        };
        Ok(id)
    }
}

impl Serialize for ConditionId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ConditionId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Structural data of a unary map together with its class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryClass {
    pub map: UnaryOp,
    pub image_size: usize,
    pub kernel: Vec<Vec<Element>>,
    /// Number of fixed points, for permutations.
    pub fixed_points: Option<usize>,
    pub condition: ConditionId,
    /// All maps identified with `map` by attribute clarification.
    pub members: Vec<UnaryOp>,
}

/// Classifies a unary map on `{0,1,2,3}`.
pub fn classify_unary(s: &UnaryOp) -> Result<UnaryClass, WitnessError> {
    if s.k() != 4 {
        return Err(WitnessError::UnsupportedCarrier(s.k()));
    }
    let condition = condition_of(s);
    let fixed_points = s
        .is_permutation()
        .then(|| Permutation::new(*s).expect("bijective").fixed_points());
    Ok(UnaryClass {
        map: *s,
        image_size: s.image_size(),
        kernel: s.kernel(),
        fixed_points,
        condition,
        members: condition.members(),
    })
}

fn class_table() -> &'static [ConditionId; 256] {
    static TABLE: OnceLock<[ConditionId; 256]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [ConditionId::Trivial; 256];
        for (n, slot) in t.iter_mut().enumerate() {
            *slot = condition_of(&UnaryOp::from_code(4, n as u32).unwrap());
        }
        t
    })
}

/// Class of a map by code, via a cached table.
pub fn condition_of_code(code: u32) -> ConditionId {
    class_table()[code as usize]
}

fn condition_of(s: &UnaryOp) -> ConditionId {
    if s.is_trivial() {
        return ConditionId::Trivial;
    }
    match s.image_size() {
        2 => {
            let kernel = s.kernel();
            if let Some(single) = kernel.iter().find(|b| b.len() == 1) {
                ConditionId::A(single[0] + 1)
            } else {
                // {{0, p}, {..}}: partner of 0 decides
                ConditionId::A(4 + kernel[0][1])
            }
        }
        3 => ConditionId::U(s.code() as u8),
        _ => {
            let p = Permutation::new(*s).expect("bijective");
            match p.cycle_type().as_slice() {
                [4] => ConditionId::C(match s.apply(s.apply(0)) {
                    2 => 1,
                    3 => 2,
                    _ => 3,
                }),
                [2, 2] => ConditionId::D(s.apply(0)),
                [3, 1] => {
                    let fixed = (0..4).find(|&x| s.apply(x) == x).unwrap();
                    ConditionId::E(4 - fixed)
                }
                _ => {
                    let moved: Vec<Element> = (0..4).filter(|&x| s.apply(x) != x).collect();
                    let i = F_LETTERS
                        .iter()
                        .position(|l| l[0] == moved[0] && l[1] == moved[1])
                        .unwrap();
                    ConditionId::F(i as u8 + 1)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(t: &[u8]) -> UnaryOp {
        UnaryOp::new(4, t).unwrap()
    }

    #[test]
    fn named_examples() {
        assert_eq!(classify_unary(&op(&[0, 1, 1, 1])).unwrap().condition, ConditionId::A(1));
        assert_eq!(classify_unary(&op(&[1, 0, 3, 2])).unwrap().condition, ConditionId::D(1));
        assert_eq!(
            classify_unary(&op(&[3, 0, 0, 1])).unwrap().condition,
            ConditionId::U(193)
        );
        assert_eq!(
            classify_unary(&op(&[0, 1, 2, 3])).unwrap().condition,
            ConditionId::Trivial
        );
        assert_eq!(
            classify_unary(&op(&[2, 2, 2, 2])).unwrap().condition,
            ConditionId::Trivial
        );
    }

    #[test]
    fn class_sizes_partition_all_maps() {
        let all = ConditionId::all_nontrivial();
        assert_eq!(all.len(), 167);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let mut total = ConditionId::Trivial.members().len();
        assert_eq!(total, 5);
        for c in &all {
            let n = c.members().len();
            let expected = match c {
                ConditionId::A(_) => 12,
                ConditionId::C(_) | ConditionId::E(_) => 2,
                _ => 1,
            };
            assert_eq!(n, expected, "{c}");
            total += n;
        }
        assert_eq!(total, 256);
        let a_total: usize = all
            .iter()
            .filter(|c| matches!(c, ConditionId::A(_)))
            .map(|c| c.members().len())
            .sum();
        assert_eq!(a_total, 84);
        assert_eq!(all.iter().filter(|c| matches!(c, ConditionId::U(_))).count(), 144);
    }

    #[test]
    fn a1_members_are_the_twelve_maps() {
        let members = ConditionId::A(1).members();
        assert!(members.contains(&op(&[0, 1, 1, 1])));
        assert!(members.contains(&op(&[3, 2, 2, 2])));
        for m in members {
            assert_eq!(m.preimage_mask(m.apply(1)), 0b1110);
        }
    }

    #[test]
    fn permutation_classes_are_inverse_closed() {
        for c in ConditionId::all_nontrivial()
            .into_iter()
            .filter(|c| c.is_permutation_class())
        {
            let p = c.permutation().unwrap();
            let members = c.members();
            assert!(members.contains(p.op()), "{c}");
            assert!(members.contains(p.inverse().op()), "{c}");
            assert_eq!(condition_of(p.op()), c);
        }
        assert_eq!(ConditionId::C(1).permutation().unwrap().to_string(), "(0 1 2 3)");
        assert_eq!(ConditionId::E(4).permutation().unwrap().to_string(), "(1 2 3)");
        assert_eq!(ConditionId::F(6).permutation().unwrap().to_string(), "(2 3)");
    }

    #[test]
    fn kernel_classes() {
        assert_eq!(condition_of(&op(&[0, 0, 1, 1])), ConditionId::A(5));
        assert_eq!(condition_of(&op(&[2, 3, 2, 3])), ConditionId::A(6));
        assert_eq!(condition_of(&op(&[1, 0, 0, 1])), ConditionId::A(7));
        assert_eq!(condition_of(&op(&[2, 2, 0, 2])), ConditionId::A(3));
    }

    #[test]
    fn tags_parse_back() {
        for c in ConditionId::all_nontrivial() {
            assert_eq!(c.to_string().parse::<ConditionId>().unwrap(), c);
            assert_eq!(c.tag().parse::<ConditionId>().unwrap(), c);
        }
        assert!("A8".parse::<ConditionId>().is_err());
        assert!("U26x".parse::<ConditionId>().is_err());
        // u_27 is the identity, not an image-3 map
        assert!("U27".parse::<ConditionId>().is_err());
        assert_eq!("u(26)".parse::<ConditionId>().unwrap(), ConditionId::U(26));
    }
}
