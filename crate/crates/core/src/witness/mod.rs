//! Majority operations commuting with a given unary map on `{0,1,2,3}`.
//!
//! The 251 non-trivial unary maps fall into 167 classes whose members are
//! interchangeable as attributes. For each class this module decides
//! commutation from a compact characterisation, streams the commuting
//! majority operations as a product of independent blocks, and searches
//! those for their distinct centraliser monoids.

mod condition;
mod generator;
mod image3;
mod lemmas;
mod search;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use condition::{classify_unary, condition_of_code, ConditionId, UnaryClass};
pub use generator::{
    analogue_generator, big_preimage_generator, enumerate_commuting, permutation_generator, Block, Generator,
    GeneratorIter,
};
pub use image3::{analyze_image3, ImageThreeAnalysis, ImageThreeCase, SeedPropagation};
pub use lemmas::{class_templates, condition_holds, general_condition_holds, Template};
pub use search::{ChunkResult, Mask, SearchPlan, SearchStats, StageMonoid, TrackedMap, WitnessOrder};

use crate::algebra::{AlgebraError, MajorityOp, Monoid};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("the trivial class carries no condition")]
    TrivialCondition,
    #[error("unsupported carrier size {0}")]
    UnsupportedCarrier(u8),
    #[error("expected image size {expected}, got {got}")]
    WrongImageSize { expected: usize, got: usize },
    #[error("{0}")]
    Parse(String),
    #[error("inconsistent search state: {0}")]
    Inconsistent(String),
}

/// Counters for a completed stage.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageStats {
    #[serde(flatten)]
    pub search: SearchStats,
    pub wall_ms: u64,
}

/// The distinct centraliser monoids of one class's commuting operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageResult {
    pub condition: ConditionId,
    pub monoids: Vec<StageMonoid>,
    pub stats: StageStats,
}

#[derive(Serialize, Deserialize)]
struct StageMonoidRecord {
    monoid: Vec<u32>,
    representative: String,
}

#[derive(Serialize, Deserialize)]
struct StageRecord {
    condition: ConditionId,
    monoids: Vec<StageMonoidRecord>,
    statistics: StageStats,
}

impl StageResult {
    pub fn to_json(&self) -> String {
        let record = StageRecord {
            condition: self.condition,
            monoids: self
                .monoids
                .iter()
                .map(|m| StageMonoidRecord {
                    monoid: m.monoid.codes(),
                    representative: m.representative.sigma_string(),
                })
                .collect(),
            statistics: self.stats,
        };
        serde_json::to_string_pretty(&record).expect("serialisable")
    }

    pub fn from_json(text: &str) -> Result<Self, WitnessError> {
        let record: StageRecord = serde_json::from_str(text).map_err(|e| WitnessError::Parse(e.to_string()))?;
        let monoids = record
            .monoids
            .into_iter()
            .map(|m| {
                Ok(StageMonoid {
                    monoid: Monoid::from_codes(4, m.monoid)?,
                    representative: MajorityOp::from_sigma_string(4, &m.representative)?,
                })
            })
            .collect::<Result<Vec<_>, AlgebraError>>()?;
        Ok(StageResult {
            condition: record.condition,
            monoids,
            stats: record.statistics,
        })
    }
}

/// Runs the whole search for one class, in parallel over chunks.
pub fn distinct_monoids(c: &ConditionId) -> Result<StageResult, WitnessError> {
    let start = Instant::now();
    let plan = SearchPlan::for_condition(c)?;
    let chunks: Vec<ChunkResult> = (0..plan.chunk_count())
        .into_par_iter()
        .map(|i| plan.run_chunk(i))
        .collect();
    let (monoids, search) = plan.finish(&chunks)?;
    Ok(StageResult {
        condition: *c,
        monoids,
        stats: StageStats {
            search,
            wall_ms: start.elapsed().as_millis() as u64,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::unary_centraliser;

    #[test]
    fn stage_result_round_trips() {
        let r = distinct_monoids(&ConditionId::C(1)).unwrap();
        assert!(!r.monoids.is_empty());
        for m in &r.monoids {
            assert!(condition_holds(&ConditionId::C(1), &m.representative).unwrap());
            assert_eq!(unary_centraliser(&m.representative), m.monoid);
        }
        let back = StageResult::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
    }
}
