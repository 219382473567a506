//! End-to-end assembly from stored stages and the figure report.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::context::{
    assemble, canonicalize, conjugacy_partition, list_monoids, maximal_monoids, monoid_orbit_count,
    standard_attributes, trivial_witness, witness_of_label, TRIVIAL_WITNESS_SEED,
};
use super::stage::{load_stage, run_stage, StageOptions, StageOutcome};
use super::store::{collect_digests, write_atomic, write_manifest, Layout};
use super::PipelineError;
use crate::algebra::MajorityOp;
use crate::fca::render_cxt;
use crate::witness::{ConditionId, StageMonoid, StageResult};

/// Target figures for a complete run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedFigures {
    pub assembled_objects: usize,
    pub reduced_objects: usize,
    pub reduced_attributes: usize,
    pub intents: usize,
    pub maximal_intents: usize,
    pub witness_conjugacy_classes: usize,
    pub maximal_witness_conjugacy_classes: usize,
}

impl ExpectedFigures {
    /// The published figures for `{0,1,2,3}`.
    pub fn standard() -> Self {
        serde_json::from_str(include_str!("../../data/expected-k4.json")).expect("bundled table parses")
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| PipelineError::Json(format!("{}: {e}", path.display())))
    }

    fn pairs(&self) -> [(&'static str, usize); 7] {
        [
            ("assembled_objects", self.assembled_objects),
            ("reduced_objects", self.reduced_objects),
            ("reduced_attributes", self.reduced_attributes),
            ("intents", self.intents),
            ("maximal_intents", self.maximal_intents),
            ("witness_conjugacy_classes", self.witness_conjugacy_classes),
            (
                "maximal_witness_conjugacy_classes",
                self.maximal_witness_conjugacy_classes,
            ),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureCheck {
    pub figure: String,
    pub expected: usize,
    pub actual: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage: String,
    pub monoids: usize,
    pub candidates: u64,
    pub leaves: u64,
    pub nodes: u64,
    pub pruned_subtrees: u64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentCounts {
    pub assembled: usize,
    pub object_reduced: usize,
    pub attribute_reduced: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub stages: Vec<StageSummary>,
    /// Objects of the assembled context: every stage witness plus the
    /// trivial one, duplicates across stages counted separately.
    pub assembled_objects: usize,
    pub distinct_functions: usize,
    pub clarified_objects: usize,
    pub reduced_objects: usize,
    pub reduced_attributes: usize,
    pub intents: IntentCounts,
    pub maximal_intents: usize,
    pub witness_conjugacy_classes: usize,
    pub maximal_witness_conjugacy_classes: usize,
    pub monoid_conjugacy_classes: usize,
    pub maximal_monoid_conjugacy_classes: usize,
    /// Every intent is a monoid containing the trivial maps, and maximal
    /// ones are pairwise incomparable.
    pub structure_ok: bool,
    pub checks: Vec<FigureCheck>,
    pub files: BTreeMap<String, String>,
}

impl PipelineReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&FigureCheck> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    fn actual(&self, figure: &str) -> usize {
        match figure {
            "assembled_objects" => self.assembled_objects,
            "reduced_objects" => self.reduced_objects,
            "reduced_attributes" => self.reduced_attributes,
            "intents" => self.intents.object_reduced,
            "maximal_intents" => self.maximal_intents,
            "witness_conjugacy_classes" => self.witness_conjugacy_classes,
            "maximal_witness_conjugacy_classes" => self.maximal_witness_conjugacy_classes,
            other => unreachable!("unknown figure {other}"),
        }
    }
}

/// Runs every stage not yet stored.
pub fn run_all_stages(layout: &Layout, options: &StageOptions) -> Result<Vec<StageOutcome>, PipelineError> {
    ConditionId::all_nontrivial()
        .iter()
        .map(|c| run_stage(layout, c, options))
        .collect()
}

/// All stored stages in canonical order; a missing one is an error.
pub fn load_all_stages(layout: &Layout) -> Result<Vec<StageResult>, PipelineError> {
    ConditionId::all_nontrivial()
        .iter()
        .map(|c| load_stage(layout, c)?.ok_or_else(|| PipelineError::MissingStage(c.tag())))
        .collect()
}

/// Assembles the context from stored stages and writes `K1.cxt`.
pub fn assemble_stored(layout: &Layout) -> Result<super::AssembledContext, PipelineError> {
    let stages = load_all_stages(layout)?;
    let lists: Vec<(String, Vec<StageMonoid>)> = stages.into_iter().map(|s| (s.condition.tag(), s.monoids)).collect();
    let extra = trivial_witness(4, TRIVIAL_WITNESS_SEED)?
        .ok_or_else(|| PipelineError::Inconsistent("no operation with trivial centraliser found".into()))?;
    let assembled = assemble(&standard_attributes(), &lists, Some(&extra))?;
    write_atomic(&layout.context("K1"), render_cxt(&assembled.context).as_bytes())?;
    Ok(assembled)
}

/// Recomputes every figure from the stored stages, writes the contexts,
/// the report and the manifest, and compares with `expected`.
pub fn verify_report(layout: &Layout, expected: &ExpectedFigures) -> Result<PipelineReport, PipelineError> {
    let stages = load_all_stages(layout)?;
    let summaries: Vec<StageSummary> = stages
        .iter()
        .map(|s| StageSummary {
            stage: s.condition.tag(),
            monoids: s.monoids.len(),
            candidates: s.stats.search.candidates,
            leaves: s.stats.search.leaves,
            nodes: s.stats.search.nodes,
            pruned_subtrees: s.stats.search.pruned_subtrees,
            wall_ms: s.stats.wall_ms,
        })
        .collect();
    let assembled = assemble_stored(layout)?;
    let universe = standard_attributes();
    let canon = canonicalize(&assembled.context);
    write_atomic(&layout.context("K2"), render_cxt(&canon.objects).as_bytes())?;
    write_atomic(&layout.context("K3"), render_cxt(&canon.attributes).as_bytes())?;

    let monoids = list_monoids(&canon.objects, &universe)?;
    let intents = IntentCounts {
        assembled: assembled.context.next_closure_intents().count(),
        object_reduced: monoids.len(),
        attribute_reduced: canon.attributes.next_closure_intents().count(),
    };
    let maximal = maximal_monoids(&canon.objects, &universe)?;
    let structure_ok = monoids.iter().all(|m| m.is_monoid())
        && maximal.iter().all(|a| {
            maximal
                .iter()
                .all(|b| std::ptr::eq(a, b) || !a.monoid.is_subset(&b.monoid))
        });

    let witnesses: Vec<MajorityOp> = canon
        .objects
        .objects()
        .iter()
        .map(|l| witness_of_label(l))
        .collect::<Result<_, _>>()?;
    let maximal_witnesses: Vec<MajorityOp> = maximal.iter().map(|m| witnesses[m.object]).collect();
    let object_monoids: Vec<_> = (0..canon.objects.object_count())
        .map(|g| universe.expand_in(&canon.objects, canon.objects.row(g)))
        .collect::<Result<_, _>>()?;
    let maximal_list: Vec<_> = maximal.iter().map(|m| m.monoid).collect();

    let mut report = PipelineReport {
        stages: summaries,
        assembled_objects: assembled.context.object_count(),
        distinct_functions: assembled.distinct_functions(),
        clarified_objects: canon.clarified_objects,
        reduced_objects: canon.objects.object_count(),
        reduced_attributes: canon.attributes.attribute_count(),
        intents,
        maximal_intents: maximal.len(),
        witness_conjugacy_classes: conjugacy_partition(&witnesses)?.classes.len(),
        maximal_witness_conjugacy_classes: conjugacy_partition(&maximal_witnesses)?.classes.len(),
        monoid_conjugacy_classes: monoid_orbit_count(&object_monoids)?,
        maximal_monoid_conjugacy_classes: monoid_orbit_count(&maximal_list)?,
        structure_ok,
        checks: vec![],
        files: BTreeMap::new(),
    };
    report.checks = expected
        .pairs()
        .iter()
        .map(|&(figure, want)| {
            let actual = report.actual(figure);
            FigureCheck {
                figure: figure.to_string(),
                expected: want,
                actual,
                pass: actual == want,
            }
        })
        .collect();
    report.files = collect_digests(layout)?
        .into_iter()
        .filter(|(f, _)| !f.starts_with("reports/"))
        .collect();
    let text = serde_json::to_string_pretty(&report).expect("serialisable") + "\n";
    write_atomic(&layout.report(), text.as_bytes())?;
    write_manifest(layout)?;
    Ok(report)
}
