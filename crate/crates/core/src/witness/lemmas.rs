//! Commutation conditions for the permutation classes and the kernel-type
//! classes, written as membership tests on small tuples of values.

use super::condition::{ConditionId, A_PAIRS};
use super::image3::analyze_image3;
use super::WitnessError;
use crate::algebra::{Element, LeftAbsorptiveOp, MajorityOp, Permutation, SigmaIndex, Triple, UnaryOp};

/// A tuple of argument triples whose values must form one of `allowed`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub triples: Vec<Triple>,
    pub allowed: Vec<Vec<Element>>,
}

impl Template {
    fn holds(&self, eval: impl Fn(Triple) -> Element) -> bool {
        let values: Vec<Element> = self.triples.iter().map(|&t| eval(t)).collect();
        self.allowed.contains(&values)
    }
}

// Letters a, b, c, d stand for the roles fixed by the permutation's cycles.
const C_SIGMA: [[&str; 4]; 6] = [
    ["abc", "bcd", "cda", "dab"],
    ["abd", "bca", "cdb", "dac"],
    ["acb", "bdc", "cad", "dba"],
    ["adb", "bac", "cbd", "dca"],
    ["acd", "bda", "cab", "dbc"],
    ["adc", "bad", "cba", "dcb"],
];
const C_TAIL: [[&str; 4]; 3] = [
    ["abb", "bcc", "cdd", "daa"],
    ["acc", "bdd", "caa", "dbb"],
    ["add", "baa", "cbb", "dcc"],
];
const D_SIGMA: [[&str; 2]; 12] = [
    ["abc", "bad"],
    ["acd", "bdc"],
    ["abd", "bac"],
    ["adc", "bcd"],
    ["acb", "bda"],
    ["cad", "dbc"],
    ["adb", "bca"],
    ["dac", "cbd"],
    ["cab", "dba"],
    ["cda", "dcb"],
    ["dab", "cba"],
    ["dca", "cdb"],
];
const D_TAIL: [[&str; 2]; 6] = [
    ["abb", "baa"],
    ["acc", "bdd"],
    ["add", "bcc"],
    ["caa", "dbb"],
    ["cbb", "daa"],
    ["cdd", "dcc"],
];
const E_SIGMA: [[&str; 3]; 8] = [
    ["abc", "bca", "cab"],
    ["acb", "bac", "cba"],
    ["abd", "bcd", "cad"],
    ["bad", "cbd", "acd"],
    ["adb", "bdc", "cda"],
    ["bda", "cdb", "adc"],
    ["dab", "dbc", "dca"],
    ["dba", "dcb", "dac"],
];
const E_TAIL: [[&str; 3]; 4] = [
    ["abb", "bcc", "caa"],
    ["acc", "baa", "cbb"],
    ["add", "bdd", "cdd"],
    ["daa", "dbb", "dcc"],
];
const F_SIGMA: [[&str; 2]; 12] = [
    ["abc", "bac"],
    ["acd", "bcd"],
    ["abd", "bad"],
    ["adc", "bdc"],
    ["acb", "bca"],
    ["cad", "cbd"],
    ["adb", "bda"],
    ["dac", "dbc"],
    ["cab", "cba"],
    ["cda", "cdb"],
    ["dab", "dba"],
    ["dca", "dcb"],
];
const F_TAIL: [[&str; 2]; 5] = [
    ["abb", "baa"],
    ["acc", "bcc"],
    ["add", "bdd"],
    ["caa", "cbb"],
    ["daa", "dbb"],
];

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Family {
    C,
    D,
    E,
    F,
}

fn word(letters: [Element; 4], w: &str) -> Vec<Element> {
    w.bytes().map(|b| letters[(b - b'a') as usize]).collect()
}

fn triple(letters: [Element; 4], w: &str) -> Triple {
    let v = word(letters, w);
    [v[0], v[1], v[2]]
}

fn templates(family: Family, letters: [Element; 4], with_tail: bool) -> Vec<Template> {
    fn build<const N: usize>(rows: &[[&str; N]], letters: [Element; 4], allowed: &[Vec<Element>]) -> Vec<Template> {
        rows.iter()
            .map(|row| Template {
                triples: row.iter().map(|w| triple(letters, w)).collect(),
                allowed: allowed.to_vec(),
            })
            .collect()
    }
    let allowed: Vec<Vec<Element>> = match family {
        Family::C => ["abcd", "bcda", "cdab", "dabc"]
            .iter()
            .map(|w| word(letters, w))
            .collect(),
        Family::D => ["ab", "ba", "cd", "dc"].iter().map(|w| word(letters, w)).collect(),
        Family::E => ["abc", "bca", "cab", "ddd"].iter().map(|w| word(letters, w)).collect(),
        Family::F => ["ab", "ba", "cc", "dd"].iter().map(|w| word(letters, w)).collect(),
    };
    let mut out = match family {
        Family::C => build(&C_SIGMA, letters, &allowed),
        Family::D => build(&D_SIGMA, letters, &allowed),
        Family::E => build(&E_SIGMA, letters, &allowed),
        Family::F => build(&F_SIGMA, letters, &allowed),
    };
    if with_tail {
        out.extend(match family {
            Family::C => build(&C_TAIL, letters, &allowed),
            Family::D => build(&D_TAIL, letters, &allowed),
            Family::E => build(&E_TAIL, letters, &allowed),
            Family::F => {
                let mut t = build(&F_TAIL, letters, &allowed);
                // (c,d,d) and (d,c,c) are fixed by the transposition
                let fixed = vec![word(letters, "c"), word(letters, "d")];
                for w in ["cdd", "dcc"] {
                    t.push(Template {
                        triples: vec![triple(letters, w)],
                        allowed: fixed.clone(),
                    });
                }
                t
            }
        });
    }
    out
}

fn family_of(c: &ConditionId) -> Option<Family> {
    match c {
        ConditionId::C(_) => Some(Family::C),
        ConditionId::D(_) => Some(Family::D),
        ConditionId::E(_) => Some(Family::E),
        ConditionId::F(_) => Some(Family::F),
        _ => None,
    }
}

/// σ-templates of a permutation class, in the order they are listed above.
pub fn class_templates(c: &ConditionId) -> Option<Vec<Template>> {
    Some(templates(family_of(c)?, c.letters()?, false))
}

/// Letters `(a, b, c, d)` read off the cycles of an arbitrary non-identity
/// permutation.
fn letters_of(p: &Permutation) -> Result<(Family, [Element; 4]), WitnessError> {
    let cycles = p.cycles();
    let long: Vec<&Vec<Element>> = cycles.iter().filter(|c| c.len() > 1).collect();
    let fixed: Vec<Element> = cycles.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
    Ok(match p.cycle_type().as_slice() {
        [4] => (Family::C, [long[0][0], long[0][1], long[0][2], long[0][3]]),
        [2, 2] => (Family::D, [long[0][0], long[0][1], long[1][0], long[1][1]]),
        [3, 1] => (Family::E, [long[0][0], long[0][1], long[0][2], fixed[0]]),
        [2, 1, 1] => (Family::F, [long[0][0], long[0][1], fixed[0], fixed[1]]),
        _ => return Err(WitnessError::TrivialCondition),
    })
}

/// Whether `f` commutes with every member of class `c`, decided by the
/// class's own characterisation.
pub fn condition_holds(c: &ConditionId, f: &MajorityOp) -> Result<bool, WitnessError> {
    if f.k() != 4 {
        return Err(WitnessError::UnsupportedCarrier(f.k()));
    }
    let sigma = SigmaIndex::for_carrier(4)?;
    match *c {
        ConditionId::Trivial => Err(WitnessError::TrivialCondition),
        ConditionId::A(i @ 1..=4) => {
            let excluded = i - 1;
            Ok(f.values().iter().all(|&v| v != excluded))
        }
        ConditionId::A(i) => {
            let [a, b, c, d] = A_PAIRS[(i - 5) as usize];
            Ok(sigma.triples().iter().zip(f.values()).all(|(t, &v)| {
                if t.contains(&a) && t.contains(&b) {
                    v == a || v == b
                } else {
                    v == c || v == d
                }
            }))
        }
        ConditionId::U(n) => {
            let s = UnaryOp::from_code(4, n as u32)?;
            Ok(analyze_image3(&s)?.condition_holds(f))
        }
        _ => Ok(class_templates(c)
            .expect("permutation class")
            .iter()
            .all(|t| t.holds(|x| f.eval(x)))),
    }
}

/// Commutation of a left-absorptive operation with a permutation, using
/// the extended characterisation that also constrains the tail.
pub fn general_condition_holds(p: &Permutation, g: &LeftAbsorptiveOp) -> Result<bool, WitnessError> {
    if p.op().k() != 4 || g.k() != 4 {
        return Err(WitnessError::UnsupportedCarrier(p.op().k().min(g.k())));
    }
    let (family, letters) = letters_of(p)?;
    Ok(templates(family, letters, true).iter().all(|t| t.holds(|x| g.eval(x))))
}
