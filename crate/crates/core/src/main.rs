use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use centmon::algebra::UnaryOp;
use centmon::fca::{read_cxt, write_cxt, FormalContext};
use centmon::pipeline::{
    assemble_stored, canonicalize, conjugacy_partition, maximal_monoids, oracle_k3, run_stage, standard_attributes,
    verify_report, witness_of_label, ExpectedFigures, Layout, PipelineError, StageOptions, StageOutcome,
    DEFAULT_CHUNK_TARGET,
};
use centmon::witness::{classify_unary, enumerate_commuting, ConditionId};

/// Centralising monoids with majority witnesses on {0,1,2,3}.
#[derive(Parser, Debug)]
#[command(name = "centmon", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Machine-readable output on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct RunDir {
    /// Run directory holding stages/, contexts/ and reports/.
    #[arg(long, default_value = ".")]
    dir: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Describe a unary map given by its code.
    Classify {
        code: u32,
        #[command(flatten)]
        out: Output,
    },
    /// Stream the majority operations commuting with a class.
    Enumerate {
        #[arg(long)]
        attribute: ConditionId,
        /// Print only the number of operations.
        #[arg(long)]
        count_only: bool,
        /// Print at most this many operations.
        #[arg(long)]
        limit: Option<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Search one class, or all, for distinct centraliser monoids.
    Stage {
        #[arg(long, required_unless_present = "all", conflicts_with = "all")]
        attribute: Option<ConditionId>,
        #[arg(long)]
        all: bool,
        /// Suspend after roughly this many search nodes; rerun to resume.
        #[arg(long)]
        budget: Option<u64>,
        /// Number of top-level chunks to split each stage into.
        #[arg(long, default_value_t = DEFAULT_CHUNK_TARGET)]
        chunks: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[command(flatten)]
        run: RunDir,
        #[command(flatten)]
        out: Output,
    },
    /// Join all stored stages into contexts/K1.cxt.
    Assemble {
        #[command(flatten)]
        run: RunDir,
        #[command(flatten)]
        out: Output,
    },
    /// Reduce a context; writes K2.cxt and K3.cxt next to it or to --out-dir.
    Canonicalize {
        input: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Enumerate the intents of a context.
    Intents {
        input: PathBuf,
        #[arg(long)]
        count: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Maximal proper intents of a context.
    Maximal {
        input: PathBuf,
        #[arg(long)]
        count: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Conjugacy classes of the witnesses named by a context's objects.
    Conjugacy {
        input: PathBuf,
        /// Only the witnesses of maximal intents.
        #[arg(long)]
        maximal: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Brute-force cross-check on {0,1,2}.
    Oracle {
        #[command(flatten)]
        out: Output,
    },
    /// Recompute every figure from stored stages and compare with targets.
    Verify {
        #[command(flatten)]
        run: RunDir,
        /// JSON table of target figures; defaults to the bundled one.
        #[arg(long)]
        expected: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
}

enum Failure {
    Computation(String),
    Mismatch,
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        Failure::Computation(e.to_string())
    }
}

impl From<centmon::fca::FcaError> for Failure {
    fn from(e: centmon::fca::FcaError) -> Self {
        Failure::Computation(e.to_string())
    }
}

impl From<centmon::witness::WitnessError> for Failure {
    fn from(e: centmon::witness::WitnessError) -> Self {
        Failure::Computation(e.to_string())
    }
}

impl From<centmon::algebra::AlgebraError> for Failure {
    fn from(e: centmon::algebra::AlgebraError) -> Self {
        Failure::Computation(e.to_string())
    }
}

/// Writes a result to stdout; a closed pipe is not an error.
fn emit(json: bool, value: serde_json::Value, text: impl FnOnce() -> String) {
    let body = if json {
        serde_json::to_string_pretty(&value).expect("serialisable")
    } else {
        text()
    };
    let _ = writeln!(std::io::stdout().lock(), "{body}");
}

fn bits_labels(ctx: &FormalContext, bits: &fixedbitset::FixedBitSet) -> Vec<String> {
    bits.ones().map(|j| ctx.attributes()[j].clone()).collect()
}

fn classify(code: u32, json: bool) -> Result<(), Failure> {
    let s = UnaryOp::from_code(4, code)?;
    let c = classify_unary(&s)?;
    let members: Vec<u32> = c.members.iter().map(UnaryOp::code).collect();
    emit(
        json,
        json!({
            "code": code,
            "table": s.table(),
            "image_size": c.image_size,
            "kernel": c.kernel,
            "fixed_points": c.fixed_points,
            "condition": c.condition.tag(),
            "members": members,
        }),
        || {
            let mut lines = vec![
                format!("map        {s}"),
                format!("image size {}", c.image_size),
                format!("kernel     {:?}", c.kernel),
            ];
            if let Some(fp) = c.fixed_points {
                lines.push(format!("fixed pts  {fp}"));
            }
            lines.push(format!("condition  {}", c.condition));
            lines.push(format!("members    {members:?}"));
            lines.join("\n")
        },
    );
    Ok(())
}

fn enumerate(c: ConditionId, count_only: bool, limit: Option<u64>, json: bool) -> Result<(), Failure> {
    let generator = enumerate_commuting(&c)?;
    if count_only {
        let n = generator.iter().count() as u64;
        emit(json, json!({ "condition": c.tag(), "count": n }), || n.to_string());
        return Ok(());
    }
    let limit = limit.unwrap_or(u64::MAX);
    let ops: Vec<String> = generator
        .iter()
        .take(limit as usize)
        .map(|f| f.sigma_string())
        .collect();
    emit(json, json!({ "condition": c.tag(), "operations": ops }), || {
        ops.join("\n")
    });
    Ok(())
}

fn stage(conditions: Vec<ConditionId>, options: &StageOptions, layout: &Layout, json: bool) -> Result<(), Failure> {
    let mut rows = Vec::new();
    let mut suspended = false;
    for c in conditions {
        match run_stage(layout, &c, options)? {
            StageOutcome::Complete(r) => rows.push(json!({
                "stage": c.tag(),
                "complete": true,
                "monoids": r.monoids.len(),
                "candidates": r.stats.search.candidates,
            })),
            StageOutcome::Suspended { completed, total } => {
                suspended = true;
                rows.push(json!({
                    "stage": c.tag(),
                    "complete": false,
                    "chunks_done": completed,
                    "chunks": total,
                }));
                break;
            }
        }
    }
    emit(json, json!(rows), || {
        rows.iter()
            .map(|r| match r["complete"].as_bool() {
                Some(true) => format!("{} {} monoids", r["stage"].as_str().unwrap_or(""), r["monoids"]),
                _ => format!(
                    "{} suspended at {}/{} chunks",
                    r["stage"].as_str().unwrap_or(""),
                    r["chunks_done"],
                    r["chunks"]
                ),
            })
            .collect::<Vec<_>>()
            .join("\n")
    });
    if suspended {
        eprintln!("budget exhausted; rerun the same command to resume");
    }
    Ok(())
}

fn canonicalize_file(input: &Path, out_dir: Option<PathBuf>, json: bool) -> Result<(), Failure> {
    let ctx = read_cxt(input)?;
    let canon = canonicalize(&ctx);
    let dir = out_dir.unwrap_or_else(|| input.parent().map(Path::to_path_buf).unwrap_or_default());
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Computation(e.to_string()))?;
    let (k2, k3) = (dir.join("K2.cxt"), dir.join("K3.cxt"));
    if k2 == input || k3 == input {
        return Err(Failure::Computation("refusing to overwrite the input context".into()));
    }
    write_cxt(&canon.objects, &k2)?;
    write_cxt(&canon.attributes, &k3)?;
    emit(
        json,
        json!({
            "objects": ctx.object_count(),
            "clarified_objects": canon.clarified_objects,
            "reduced_objects": canon.objects.object_count(),
            "reduced_attributes": canon.attributes.attribute_count(),
        }),
        || {
            format!(
                "{} objects, {} after clarification, {} after reduction; {} attributes after reduction",
                ctx.object_count(),
                canon.clarified_objects,
                canon.objects.object_count(),
                canon.attributes.attribute_count()
            )
        },
    );
    Ok(())
}

fn intents(input: &Path, count: bool, json: bool) -> Result<(), Failure> {
    let ctx = read_cxt(input)?;
    if count {
        let n = ctx.next_closure_intents().count();
        emit(json, json!({ "intents": n }), || n.to_string());
    } else {
        let all: Vec<Vec<String>> = ctx.next_closure_intents().map(|i| bits_labels(&ctx, &i)).collect();
        emit(json, json!(all), || {
            all.iter().map(|i| i.join(" ")).collect::<Vec<_>>().join("\n")
        });
    }
    Ok(())
}

fn maximal(input: &Path, count: bool, json: bool) -> Result<(), Failure> {
    let ctx = read_cxt(input)?;
    let maximal = ctx.maximal_proper_intents();
    if count {
        emit(json, json!({ "maximal_intents": maximal.len() }), || {
            maximal.len().to_string()
        });
        return Ok(());
    }
    let rows: Vec<serde_json::Value> = maximal
        .iter()
        .map(|i| {
            let objects: Vec<&String> = (0..ctx.object_count())
                .filter(|&g| ctx.row(g) == i)
                .map(|g| &ctx.objects()[g])
                .collect();
            json!({ "objects": objects, "attributes": bits_labels(&ctx, i) })
        })
        .collect();
    emit(json, json!(rows), || {
        rows.iter()
            .map(|r| format!("{}: {}", r["objects"], r["attributes"]))
            .collect::<Vec<_>>()
            .join("\n")
    });
    Ok(())
}

fn conjugacy(input: &Path, only_maximal: bool, json: bool) -> Result<(), Failure> {
    let ctx = read_cxt(input)?;
    let indices: Vec<usize> = if only_maximal {
        let universe = standard_attributes();
        maximal_monoids(&ctx, &universe)?.iter().map(|m| m.object).collect()
    } else {
        (0..ctx.object_count()).collect()
    };
    let witnesses = indices
        .iter()
        .map(|&g| witness_of_label(&ctx.objects()[g]))
        .collect::<Result<Vec<_>, _>>()?;
    let part = conjugacy_partition(&witnesses)?;
    let classes: Vec<serde_json::Value> = part
        .classes
        .iter()
        .zip(&part.representatives)
        .map(|(members, rep)| {
            let labels: Vec<&String> = members.iter().map(|&i| &ctx.objects()[indices[i]]).collect();
            json!({ "representative": rep.sigma_string(), "members": labels })
        })
        .collect();
    emit(
        json,
        json!({ "objects": witnesses.len(), "classes": classes.len(), "partition": classes }),
        || {
            let mut lines = vec![format!("{} objects in {} classes", witnesses.len(), classes.len())];
            for c in &classes {
                lines.push(format!(
                    "{} ({})",
                    c["representative"].as_str().unwrap_or(""),
                    c["members"].as_array().map_or(0, Vec::len)
                ));
            }
            lines.join("\n")
        },
    );
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Classify { code, out } => classify(code, out.json),
        Command::Enumerate {
            attribute,
            count_only,
            limit,
            out,
        } => enumerate(attribute, count_only, limit, out.json),
        Command::Stage {
            attribute,
            all,
            budget,
            chunks,
            workers,
            run,
            out,
        } => {
            let conditions = if all {
                ConditionId::all_nontrivial()
            } else {
                attribute.into_iter().collect()
            };
            let mut options = StageOptions {
                node_budget: budget,
                chunk_target: chunks,
                verbose: true,
                ..StageOptions::default()
            };
            if let Some(w) = workers {
                options.workers = w;
            }
            stage(conditions, &options, &Layout::new(run.dir), out.json)
        }
        Command::Assemble { run, out } => {
            let layout = Layout::new(run.dir);
            let a = assemble_stored(&layout)?;
            emit(
                out.json,
                json!({
                    "objects": a.context.object_count(),
                    "distinct_functions": a.distinct_functions(),
                    "attributes": a.context.attribute_count(),
                }),
                || {
                    format!(
                        "{} objects ({} distinct operations) over {} attributes",
                        a.context.object_count(),
                        a.distinct_functions(),
                        a.context.attribute_count()
                    )
                },
            );
            Ok(())
        }
        Command::Canonicalize { input, out_dir, out } => canonicalize_file(&input, out_dir, out.json),
        Command::Intents { input, count, out } => intents(&input, count, out.json),
        Command::Maximal { input, count, out } => maximal(&input, count, out.json),
        Command::Conjugacy { input, maximal, out } => conjugacy(&input, maximal, out.json),
        Command::Oracle { out } => {
            let r = oracle_k3()?;
            let value = serde_json::to_value(&r).expect("serialisable");
            emit(out.json, value, || {
                format!(
                    "{} operations, {} pairs, {} mismatches; {} intents, {} maximal (search path: {} / {})",
                    r.operations,
                    r.pairs,
                    r.mismatches,
                    r.intents,
                    r.maximal_intents,
                    r.search_intents,
                    r.search_maximal_intents
                )
            });
            if r.mismatches > 0
                || r.centraliser_mismatches > 0
                || r.search_intents != r.intents
                || r.search_maximal_intents != r.maximal_intents
            {
                return Err(Failure::Mismatch);
            }
            Ok(())
        }
        Command::Verify { run, expected, out } => {
            let expected = match expected {
                Some(path) => ExpectedFigures::from_file(&path)?,
                None => ExpectedFigures::standard(),
            };
            let report = verify_report(&Layout::new(run.dir), &expected)?;
            let value = serde_json::to_value(&report).expect("serialisable");
            emit(out.json, value, || {
                report
                    .checks
                    .iter()
                    .map(|c| {
                        format!(
                            "{} {:<36} expected {:>6}  got {:>6}",
                            if c.pass { "PASS" } else { "FAIL" },
                            c.figure,
                            c.expected,
                            c.actual
                        )
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            });
            if report.all_pass() {
                Ok(())
            } else {
                Err(Failure::Mismatch)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Computation(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Mismatch) => ExitCode::from(3),
    }
}
