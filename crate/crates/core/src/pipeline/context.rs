//! Assembly of the majority-versus-unary context and its canonical forms.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PipelineError;
use crate::algebra::{unary_centraliser, MajorityOp, Monoid, Permutation, UnaryOp};
use crate::fca::{FormalContext, Side};
use crate::witness::{ConditionId, StageMonoid};

/// One attribute: a set of unary maps that always commute together.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttributeClass {
    pub label: String,
    pub members: Vec<UnaryOp>,
}

/// Attribute set of the context plus the maps every operation commutes with.
#[derive(Clone, Debug)]
pub struct AttributeUniverse {
    k: u8,
    classes: Vec<AttributeClass>,
    trivial: Monoid,
}

/// The 167 classes at `k = 4`, in canonical order.
pub fn standard_attributes() -> AttributeUniverse {
    let classes = ConditionId::all_nontrivial()
        .into_iter()
        .map(|c| AttributeClass {
            label: c.tag(),
            members: c.members(),
        })
        .collect();
    AttributeUniverse {
        k: 4,
        classes,
        trivial: Monoid::trivial(4).expect("k = 4"),
    }
}

/// One attribute per non-trivial map, labelled `u<code>`.
pub fn map_attributes(k: u8) -> Result<AttributeUniverse, PipelineError> {
    let classes = UnaryOp::all(k)?
        .filter(|s| !s.is_trivial())
        .map(|s| AttributeClass {
            label: format!("u{}", s.code()),
            members: vec![s],
        })
        .collect();
    Ok(AttributeUniverse {
        k,
        classes,
        trivial: Monoid::trivial(k)?,
    })
}

impl AttributeUniverse {
    pub fn k(&self) -> u8 {
        self.k
    }

    pub fn classes(&self) -> &[AttributeClass] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.label.clone()).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    /// Class bits of a centraliser. Classes must be wholly in or out.
    pub fn project(&self, m: &Monoid) -> Result<FixedBitSet, PipelineError> {
        let mut row = FixedBitSet::with_capacity(self.classes.len());
        for (j, class) in self.classes.iter().enumerate() {
            let present = class.members.iter().filter(|s| m.contains(s)).count();
            if present == class.members.len() {
                row.insert(j);
            } else if present > 0 {
                return Err(PipelineError::Inconsistent(format!(
                    "class {} only partly in a centraliser ({present} of {})",
                    class.label,
                    class.members.len()
                )));
            }
        }
        Ok(row)
    }

    /// Unary maps named by a set of class bits, plus the trivial ones.
    pub fn expand(&self, bits: &FixedBitSet) -> Monoid {
        let mut m = self.trivial;
        for j in bits.ones() {
            for s in &self.classes[j].members {
                m.insert(s);
            }
        }
        m
    }

    /// Maps attribute labels of another context onto class indices.
    pub fn columns_of(&self, ctx: &FormalContext) -> Result<Vec<usize>, PipelineError> {
        ctx.attributes()
            .iter()
            .map(|l| {
                self.position(l)
                    .ok_or_else(|| PipelineError::Inconsistent(format!("unknown attribute {l}")))
            })
            .collect()
    }

    /// Expands a row or intent of `ctx`, whose attributes are a subset of
    /// this universe.
    pub fn expand_in(&self, ctx: &FormalContext, bits: &FixedBitSet) -> Result<Monoid, PipelineError> {
        let cols = self.columns_of(ctx)?;
        let mut full = FixedBitSet::with_capacity(self.classes.len());
        full.extend(bits.ones().map(|j| cols[j]));
        Ok(self.expand(&full))
    }
}

/// Objects paired with their σ-witnesses and originating stages.
#[derive(Clone, Debug)]
pub struct AssembledContext {
    pub context: FormalContext,
    pub witnesses: Vec<MajorityOp>,
    /// Stage tag per object; `None` for the added trivial witness.
    pub provenance: Vec<Option<String>>,
}

impl AssembledContext {
    /// Number of different operations among the objects.
    pub fn distinct_functions(&self) -> usize {
        self.witnesses.iter().collect::<BTreeSet<_>>().len()
    }
}

pub fn object_label(tag: &str, f: &MajorityOp) -> String {
    format!("{tag}:{}", f.sigma_string())
}

/// Witness encoded in an object label `<tag>:<σ-values>`.
pub fn witness_of_label(label: &str) -> Result<MajorityOp, PipelineError> {
    let digits = label.rsplit(':').next().unwrap_or(label);
    let k = match digits.len() {
        6 => 3,
        24 => 4,
        n => return Err(PipelineError::Inconsistent(format!("label {label:?} has {n} σ-values"))),
    };
    Ok(MajorityOp::from_sigma_string(k, digits)?)
}

/// A majority operation commuting only with the trivial maps. Exhaustive
/// at `k = 3`, seeded random search at `k = 4`.
pub fn trivial_witness(k: u8, seed: u64) -> Result<Option<MajorityOp>, PipelineError> {
    let trivial = Monoid::trivial(k)?;
    let n = crate::algebra::SigmaIndex::for_carrier(k)?.len();
    if k == 3 {
        for mut code in 0..3u32.pow(n as u32) {
            let mut v = vec![0u8; n];
            for slot in v.iter_mut().rev() {
                *slot = (code % 3) as u8;
                code /= 3;
            }
            let f = MajorityOp::new(3, &v)?;
            if unary_centraliser(&f) == trivial {
                return Ok(Some(f));
            }
        }
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100_000 {
        let v: Vec<u8> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let f = MajorityOp::new(k, &v)?;
        if unary_centraliser(&f) == trivial {
            return Ok(Some(f));
        }
    }
    Ok(None)
}

pub const TRIVIAL_WITNESS_SEED: u64 = 0x5eed;

/// Joins stage outputs, in the given order, into one context; cross-stage
/// duplicates are kept. `extra` is appended with label `f0`.
pub fn assemble(
    universe: &AttributeUniverse,
    stages: &[(String, Vec<StageMonoid>)],
    extra: Option<&MajorityOp>,
) -> Result<AssembledContext, PipelineError> {
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut witnesses = Vec::new();
    let mut provenance = Vec::new();
    for (tag, monoids) in stages {
        let own = universe.position(tag);
        for m in monoids {
            if unary_centraliser(&m.representative) != m.monoid {
                return Err(PipelineError::Inconsistent(format!(
                    "stage {tag}: witness {} does not have its recorded centraliser",
                    m.representative
                )));
            }
            let row = universe.project(&m.monoid)?;
            if let Some(j) = own {
                if !row.contains(j) {
                    return Err(PipelineError::Inconsistent(format!(
                        "stage {tag}: witness {} does not commute with its class",
                        m.representative
                    )));
                }
            }
            labels.push(object_label(tag, &m.representative));
            rows.push(row);
            witnesses.push(m.representative);
            provenance.push(Some(tag.clone()));
        }
    }
    if let Some(f) = extra {
        let row = universe.project(&unary_centraliser(f))?;
        labels.push(object_label("f0", f));
        rows.push(row);
        witnesses.push(*f);
        provenance.push(None);
    }
    let context = FormalContext::new(labels, universe.labels(), rows)?;
    Ok(AssembledContext {
        context,
        witnesses,
        provenance,
    })
}

/// Object-clarified and object-reduced context, then its attribute-clarified
/// and attribute-reduced form.
#[derive(Clone, Debug)]
pub struct Canonical {
    pub clarified_objects: usize,
    pub objects: FormalContext,
    pub attributes: FormalContext,
}

pub fn canonicalize(assembled: &FormalContext) -> Canonical {
    let (clarified, _) = assembled.clarify(Side::Objects);
    let (objects, _) = clarified.reduce(Side::Objects);
    let (attr_clarified, _) = objects.clarify(Side::Attributes);
    let (attributes, _) = attr_clarified.reduce(Side::Attributes);
    Canonical {
        clarified_objects: clarified.object_count(),
        objects,
        attributes,
    }
}

/// Every intent of `ctx` as an explicit monoid.
pub fn list_monoids(ctx: &FormalContext, universe: &AttributeUniverse) -> Result<Vec<Monoid>, PipelineError> {
    ctx.next_closure_intents()
        .map(|i| universe.expand_in(ctx, &i))
        .collect()
}

/// A maximal proper intent and the object whose row it is.
#[derive(Clone, Debug)]
pub struct MaximalMonoid {
    pub intent: FixedBitSet,
    pub object: usize,
    pub monoid: Monoid,
}

/// Maximal proper intents of a context, each matched to the single object
/// carrying it as its row.
pub fn maximal_monoids(ctx: &FormalContext, universe: &AttributeUniverse) -> Result<Vec<MaximalMonoid>, PipelineError> {
    ctx.maximal_proper_intents()
        .into_iter()
        .map(|intent| {
            let carriers: Vec<usize> = (0..ctx.object_count()).filter(|&g| *ctx.row(g) == intent).collect();
            match carriers.as_slice() {
                [g] => Ok(MaximalMonoid {
                    monoid: universe.expand_in(ctx, &intent)?,
                    intent,
                    object: *g,
                }),
                _ => Err(PipelineError::Inconsistent(format!(
                    "maximal intent carried by {} objects",
                    carriers.len()
                ))),
            }
        })
        .collect()
}

/// Orbits of a list of operations under conjugation by all permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyPartition {
    /// Object indices per class; classes ordered by representative.
    pub classes: Vec<Vec<usize>>,
    /// Least σ-string within each class.
    pub representatives: Vec<MajorityOp>,
}

pub fn conjugacy_partition(objects: &[MajorityOp]) -> Result<ConjugacyPartition, PipelineError> {
    let Some(first) = objects.first() else {
        return Ok(ConjugacyPartition {
            classes: vec![],
            representatives: vec![],
        });
    };
    let perms = Permutation::all(first.k())?;
    let mut index: HashMap<&MajorityOp, Vec<usize>> = HashMap::new();
    for (i, f) in objects.iter().enumerate() {
        index.entry(f).or_default().push(i);
    }
    let mut assigned = vec![false; objects.len()];
    let mut classes: BTreeMap<String, (MajorityOp, Vec<usize>)> = BTreeMap::new();
    for (i, f) in objects.iter().enumerate() {
        if assigned[i] {
            continue;
        }
        let mut members = Vec::new();
        let mut orbit = BTreeSet::new();
        for p in &perms {
            orbit.insert(f.conjugate(p)?);
        }
        for g in &orbit {
            if let Some(ix) = index.get(g) {
                for &j in ix {
                    assigned[j] = true;
                    members.push(j);
                }
            }
        }
        members.sort_unstable();
        let rep = *members
            .iter()
            .map(|&j| &objects[j])
            .min_by_key(|g| g.sigma_string())
            .expect("contains f");
        classes.insert(rep.sigma_string(), (rep, members));
    }
    let (representatives, classes) = classes.into_values().unzip();
    Ok(ConjugacyPartition {
        classes,
        representatives,
    })
}

/// Number of orbits of a family of monoids under conjugation.
pub fn monoid_orbit_count(monoids: &[Monoid]) -> Result<usize, PipelineError> {
    let Some(first) = monoids.first() else {
        return Ok(0);
    };
    let perms = Permutation::all(first.k())?;
    let mut seen: BTreeSet<Monoid> = BTreeSet::new();
    let mut count = 0;
    for m in monoids {
        if seen.contains(m) {
            continue;
        }
        count += 1;
        for p in &perms {
            seen.insert(m.conjugate(p)?);
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witness::distinct_monoids;

    #[test]
    fn standard_universe_shape() {
        let u = standard_attributes();
        assert_eq!(u.len(), 167);
        let sizes = |f: fn(&ConditionId) -> bool| -> Vec<usize> {
            ConditionId::all_nontrivial()
                .iter()
                .zip(u.classes())
                .filter(|(c, _)| f(c))
                .map(|(_, a)| a.members.len())
                .collect()
        };
        assert_eq!(sizes(|c| matches!(c, ConditionId::A(_))), vec![12; 7]);
        assert_eq!(sizes(|c| matches!(c, ConditionId::U(_))).len(), 144);
        assert!(
            sizes(|c| matches!(c, ConditionId::U(_) | ConditionId::D(_) | ConditionId::F(_)))
                .iter()
                .all(|&n| n == 1)
        );
        assert!(sizes(|c| matches!(c, ConditionId::C(_) | ConditionId::E(_)))
            .iter()
            .all(|&n| n == 2));
        let total: usize = u.classes().iter().map(|c| c.members.len()).sum();
        assert_eq!(total + 5, 256);
        let mut all = FixedBitSet::with_capacity(167);
        all.insert_range(..);
        assert_eq!(u.expand(&all).len(), 256);
    }

    #[test]
    fn trivial_witness_has_empty_row() {
        let u = standard_attributes();
        let f = trivial_witness(4, TRIVIAL_WITNESS_SEED).unwrap().unwrap();
        assert_eq!(u.project(&unary_centraliser(&f)).unwrap().count_ones(..), 0);
        assert_eq!(trivial_witness(4, TRIVIAL_WITNESS_SEED).unwrap().unwrap(), f);
    }

    #[test]
    fn partial_class_is_an_error() {
        let u = standard_attributes();
        let mut m = Monoid::trivial(4).unwrap();
        m.insert(&ConditionId::A(1).members()[0]);
        assert!(u.project(&m).is_err());
    }

    #[test]
    fn small_assembly() {
        let u = standard_attributes();
        let stages: Vec<(String, Vec<StageMonoid>)> = [ConditionId::C(1), ConditionId::E(1)]
            .iter()
            .map(|c| (c.tag(), distinct_monoids(c).unwrap().monoids))
            .collect();
        let f0 = trivial_witness(4, TRIVIAL_WITNESS_SEED).unwrap();
        let a = assemble(&u, &stages, f0.as_ref()).unwrap();
        assert_eq!(a.context.object_count(), stages[0].1.len() + stages[1].1.len() + 1);
        assert_eq!(a.provenance.last(), Some(&None));
        for (g, label) in a.context.objects().iter().enumerate() {
            assert_eq!(witness_of_label(label).unwrap(), a.witnesses[g]);
        }
        let canon = canonicalize(&a.context);
        let n = a.context.next_closure_intents().count();
        assert_eq!(canon.objects.next_closure_intents().count(), n);
        assert_eq!(canon.attributes.next_closure_intents().count(), n);
        for m in list_monoids(&canon.objects, &u).unwrap() {
            assert!(m.is_monoid());
        }
        for m in maximal_monoids(&canon.objects, &u).unwrap() {
            let f = witness_of_label(&canon.objects.objects()[m.object]).unwrap();
            assert_eq!(unary_centraliser(&f), m.monoid);
        }
    }

    #[test]
    fn conjugacy_classes_are_orbits() {
        let f = trivial_witness(4, TRIVIAL_WITNESS_SEED).unwrap().unwrap();
        let perms = Permutation::all(4).unwrap();
        let mut objects: Vec<MajorityOp> = perms.iter().take(3).map(|p| f.conjugate(p).unwrap()).collect();
        // first coordinate on σ commutes with every permutation
        let sym = MajorityOp::from_sigma_string(4, "000000111111222222333333").unwrap();
        objects.push(sym);
        let part = conjugacy_partition(&objects).unwrap();
        assert_eq!(part.classes.len(), 2);
        let single = part.classes.iter().position(|c| c == &vec![3]).unwrap();
        assert_eq!(part.representatives[single], sym);
        assert_eq!(monoid_orbit_count(&[Monoid::trivial(4).unwrap()]).unwrap(), 1);
    }
}
