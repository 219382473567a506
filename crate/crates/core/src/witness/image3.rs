use std::collections::BTreeMap;

use serde::Serialize;

use super::WitnessError;
use crate::algebra::{Element, MajorityOp, Permutation, Triple, UnaryOp};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum ImageThreeCase {
    /// Both points of the two-element preimage lie in the image.
    #[serde(rename = "NOT_SYM")]
    NotSym,
    /// `s` permutes its image.
    #[serde(rename = "SYM")]
    Sym,
}

/// Structure of a unary map with a 3-element image on `{0,1,2,3}`.
///
/// `s(u) = s(v) = α`, `s(x) = β`, `s(y) = γ`, and `t` is the point missing
/// from the image.
#[derive(Clone, Debug)]
pub struct ImageThreeAnalysis {
    pub s: UnaryOp,
    pub alpha: Element,
    pub beta: Element,
    pub gamma: Element,
    pub t: Element,
    pub u: Element,
    pub v: Element,
    pub x: Element,
    pub y: Element,
    /// `s` restricted to its image, as (argument, value) pairs.
    pub zeta: Vec<(Element, Element)>,
    /// `ζ` extended by fixing `t`, when `ζ` is a bijection.
    pub zeta_permutation: Option<Permutation>,
    /// Index permutation with `(α,β,γ) = (u,x,y) ∘ ξ`, in the symmetric case.
    pub xi: Option<Permutation>,
    pub case: ImageThreeCase,
    /// Orbits of the permutations of `(u,x,y)` under `p ↦ s ∘ p`, each
    /// starting at its least triple; empty in the non-symmetric case.
    pub orbits: Vec<Vec<Triple>>,
}

fn apply(s: &UnaryOp, t: Triple) -> Triple {
    [s.apply(t[0]), s.apply(t[1]), s.apply(t[2])]
}

/// Forced values, and admissible values of the triples left open.
pub type SeedPropagation = (BTreeMap<Triple, Element>, BTreeMap<Triple, Vec<Element>>);

/// All orderings of three distinct points.
pub(crate) fn arrangements(p: [Element; 3]) -> [Triple; 6] {
    [
        [p[0], p[1], p[2]],
        [p[0], p[2], p[1]],
        [p[1], p[0], p[2]],
        [p[1], p[2], p[0]],
        [p[2], p[0], p[1]],
        [p[2], p[1], p[0]],
    ]
}

pub fn analyze_image3(s: &UnaryOp) -> Result<ImageThreeAnalysis, WitnessError> {
    if s.k() != 4 {
        return Err(WitnessError::UnsupportedCarrier(s.k()));
    }
    if s.image_size() != 3 {
        return Err(WitnessError::WrongImageSize {
            expected: 3,
            got: s.image_size(),
        });
    }
    let image = s.image_mask();
    let in_image = |a: Element| image >> a & 1 == 1;
    let t = (0..4).find(|&a| !in_image(a)).unwrap();
    let pair = s
        .kernel()
        .into_iter()
        .find(|b| b.len() == 2)
        .expect("image size 3 has one doubled class");
    let others: Vec<Element> = (0..4).filter(|a| !pair.contains(a)).collect();
    let (case, u, v, x, y) = if in_image(pair[0]) && in_image(pair[1]) {
        // x is the remaining image point, y the missing one
        let (x, y) = if in_image(others[0]) {
            (others[0], others[1])
        } else {
            (others[1], others[0])
        };
        (ImageThreeCase::NotSym, pair[0], pair[1], x, y)
    } else {
        let (u, v) = if in_image(pair[0]) {
            (pair[0], pair[1])
        } else {
            (pair[1], pair[0])
        };
        (ImageThreeCase::Sym, u, v, others[0], others[1])
    };
    let (alpha, beta, gamma) = (s.apply(u), s.apply(x), s.apply(y));

    let zeta: Vec<(Element, Element)> = (0..4).filter(|&a| in_image(a)).map(|a| (a, s.apply(a))).collect();
    let zeta_permutation = (case == ImageThreeCase::Sym).then(|| {
        let mut table = [0, 1, 2, 3];
        for &(a, b) in &zeta {
            table[a as usize] = b;
        }
        Permutation::new(UnaryOp::new(4, &table).unwrap()).expect("ζ permutes the image")
    });

    let (xi, orbits) = if case == ImageThreeCase::Sym {
        let base = [u, x, y];
        let idx = |e: Element| base.iter().position(|&b| b == e).unwrap() as Element;
        let xi_table = [idx(alpha), idx(beta), idx(gamma)];
        let xi = Permutation::new(UnaryOp::new(3, &xi_table).unwrap()).expect("bijective");
        let mut remaining: Vec<Triple> = arrangements(base).to_vec();
        remaining.sort();
        let mut orbits = Vec::new();
        while let Some(&first) = remaining.first() {
            let mut orbit = vec![first];
            let mut next = apply(s, first);
            while next != first {
                orbit.push(next);
                next = apply(s, next);
            }
            remaining.retain(|t| !orbit.contains(t));
            orbits.push(orbit);
        }
        (Some(xi), orbits)
    } else {
        (None, Vec::new())
    };

    Ok(ImageThreeAnalysis {
        s: *s,
        alpha,
        beta,
        gamma,
        t,
        u,
        v,
        x,
        y,
        zeta,
        zeta_permutation,
        xi,
        case,
        orbits,
    })
}

impl ImageThreeAnalysis {
    /// Arguments whose value is constrained to `{u, v}`: the orderings of
    /// `(u,v,x)` and `(u,v,y)`.
    pub fn pair_triples(&self) -> Vec<Triple> {
        let mut out = arrangements([self.u, self.v, self.x]).to_vec();
        out.extend(arrangements([self.u, self.v, self.y]));
        out
    }

    /// Arguments `(w,x,y) ∘ π` for `w ∈ {u, v}`; each is linked to the
    /// injective triple `s ∘ (w,x,y) ∘ π`.
    pub fn linked_triples(&self) -> Vec<Triple> {
        let mut out = arrangements([self.u, self.x, self.y]).to_vec();
        out.extend(arrangements([self.v, self.x, self.y]));
        out
    }

    pub fn image(&self, t: Triple) -> Triple {
        apply(&self.s, t)
    }

    /// `s⁻¹[a]` as a sorted list.
    pub fn preimage(&self, a: Element) -> Vec<Element> {
        (0..4).filter(|&b| self.s.apply(b) == a).collect()
    }

    /// Decides commutation with `s` from the characterisation.
    pub fn condition_holds(&self, f: &MajorityOp) -> bool {
        self.pair_triples()
            .into_iter()
            .all(|t| matches!(f.eval(t), w if w == self.u || w == self.v))
            && self
                .linked_triples()
                .into_iter()
                .all(|t| self.s.apply(f.eval(t)) == f.eval(self.image(t)))
    }

    /// Propagates seed values along the orbits and onto the `v`-triples.
    ///
    /// Returns the values forced by the seeds (seeds excluded) and, for the
    /// `v`-triples left open, their admissible values.
    pub fn propagate_seeds(&self, seeds: &[(Triple, Element)]) -> Result<SeedPropagation, WitnessError> {
        if self.case != ImageThreeCase::Sym {
            return Err(WitnessError::Inconsistent(
                "seeds apply to the symmetric case only".into(),
            ));
        }
        let mut known: BTreeMap<Triple, Element> = BTreeMap::new();
        for &(t, w) in seeds {
            let orbit = self
                .orbits
                .iter()
                .find(|o| o.contains(&t))
                .ok_or_else(|| WitnessError::Inconsistent(format!("{t:?} is not an orbit triple")))?;
            let start = orbit.iter().position(|&o| o == t).unwrap();
            let mut value = w;
            for step in 0..orbit.len() {
                let at = orbit[(start + step) % orbit.len()];
                if let Some(&old) = known.get(&at) {
                    if old != value {
                        return Err(WitnessError::Inconsistent(format!("conflicting seeds at {at:?}")));
                    }
                }
                known.insert(at, value);
                value = self.s.apply(value);
            }
            if value != w {
                return Err(WitnessError::Inconsistent(format!(
                    "seed {w} at {t:?} does not close its orbit"
                )));
            }
        }
        let mut free = BTreeMap::new();
        for q in arrangements([self.v, self.x, self.y]) {
            if let Some(&target) = known.get(&self.image(q)) {
                let options = self.preimage(target);
                match options.as_slice() {
                    [] => return Err(WitnessError::Inconsistent(format!("no value for {q:?}"))),
                    [only] => {
                        known.insert(q, *only);
                    }
                    _ => {
                        free.insert(q, options);
                    }
                }
            }
        }
        for (t, _) in seeds {
            known.remove(t);
        }
        Ok((known, free))
    }

    /// Number of majority operations commuting with `s`.
    pub fn commuting_count(&self) -> u64 {
        let singles = 2u64.pow(12);
        match self.case {
            ImageThreeCase::NotSym => {
                // per (u,v,x)-ordering: value in {u,v}, two linked triples below it
                let per_block: u64 = [self.u, self.v]
                    .iter()
                    .map(|&w| (self.preimage(w).len() as u64).pow(2))
                    .sum();
                2u64.pow(6) * per_block.pow(6)
            }
            ImageThreeCase::Sym => {
                let per_orbit = |orbit: &Vec<Triple>| -> u64 {
                    let len = orbit.len();
                    [self.u, self.x, self.y]
                        .iter()
                        .map(|&w| {
                            let mut value = w;
                            // each orbit triple carries one linked v-triple
                            let mut product = 1;
                            for _ in 0..len {
                                product *= self.preimage(value).len() as u64;
                                value = self.s.apply(value);
                            }
                            product
                        })
                        .sum()
                };
                singles * self.orbits.iter().map(per_orbit).product::<u64>()
            }
        }
    }
}
