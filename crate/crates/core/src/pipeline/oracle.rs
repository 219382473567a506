//! Brute-force cross-check on `{0,1,2}`.

use serde::Serialize;

use super::context::{assemble, canonicalize, map_attributes, maximal_monoids, trivial_witness, TRIVIAL_WITNESS_SEED};
use super::PipelineError;
use crate::algebra::{commutes, commutes_on_sigma, unary_centraliser, unary_centraliser_full, MajorityOp, UnaryOp};
use crate::fca::FormalContext;
use crate::witness::{SearchPlan, StageMonoid};

/// Every majority operation on `{0,1,2}`, in σ-string order.
pub fn all_majority_k3() -> Vec<MajorityOp> {
    (0..729u32)
        .map(|mut n| {
            let mut v = [0u8; 6];
            for slot in v.iter_mut().rev() {
                *slot = (n % 3) as u8;
                n /= 3;
            }
            MajorityOp::new(3, &v).expect("majority values")
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OracleReport {
    pub operations: usize,
    pub pairs: usize,
    /// Pairs where σ-restricted and full-table commutation disagree.
    pub mismatches: usize,
    /// Operations whose two centraliser computations disagree.
    pub centraliser_mismatches: usize,
    pub clarified_objects: usize,
    pub reduced_objects: usize,
    pub reduced_attributes: usize,
    pub intents: usize,
    pub maximal_intents: usize,
    /// Objects assembled from per-map searches instead of brute force.
    pub search_objects: usize,
    pub search_intents: usize,
    pub search_maximal_intents: usize,
}

/// Brute-force context of all 729 operations against the non-trivial maps,
/// checked against the search-based path through the same canonicalisation.
pub fn oracle_k3() -> Result<OracleReport, PipelineError> {
    let ops = all_majority_k3();
    let maps: Vec<UnaryOp> = UnaryOp::all(3)?.collect();
    let mut mismatches = 0;
    let mut centraliser_mismatches = 0;
    for f in &ops {
        let table = f.expand();
        for s in &maps {
            if commutes(&table, s)? != commutes_on_sigma(f, s) {
                mismatches += 1;
            }
        }
        if unary_centraliser_full(&table) != unary_centraliser(f) {
            centraliser_mismatches += 1;
        }
    }

    let universe = map_attributes(3)?;
    let brute_rows = ops
        .iter()
        .map(|f| universe.project(&unary_centraliser_full(&f.expand())))
        .collect::<Result<Vec<_>, _>>()?;
    let brute = FormalContext::new(
        ops.iter().map(MajorityOp::sigma_string).collect(),
        universe.labels(),
        brute_rows,
    )?;
    let canon = canonicalize(&brute);
    let intents = canon.objects.next_closure_intents().count();
    let maximal = maximal_monoids(&canon.objects, &universe)?.len();
    if canon.attributes.next_closure_intents().count() != intents || brute.next_closure_intents().count() != intents {
        return Err(PipelineError::Inconsistent(
            "intent counts differ between canonical forms".into(),
        ));
    }

    let mut stages: Vec<(String, Vec<StageMonoid>)> = Vec::new();
    for class in universe.classes() {
        let (monoids, _) = SearchPlan::for_map(&class.members[0])?.run_all()?;
        stages.push((class.label.clone(), monoids));
    }
    let extra = trivial_witness(3, TRIVIAL_WITNESS_SEED)?;
    let searched = assemble(&universe, &stages, extra.as_ref())?;
    let search_canon = canonicalize(&searched.context);

    Ok(OracleReport {
        operations: ops.len(),
        pairs: ops.len() * maps.len(),
        mismatches,
        centraliser_mismatches,
        clarified_objects: canon.clarified_objects,
        reduced_objects: canon.objects.object_count(),
        reduced_attributes: canon.attributes.attribute_count(),
        intents,
        maximal_intents: maximal,
        search_objects: searched.context.object_count(),
        search_intents: search_canon.objects.next_closure_intents().count(),
        search_maximal_intents: maximal_monoids(&search_canon.objects, &universe)?.len(),
    })
}
