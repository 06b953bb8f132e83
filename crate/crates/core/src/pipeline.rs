//! End-to-end runs: schema, graph, checks and artifact files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use crate::class_gen::generate_class_hierarchy;
use crate::config::{validate_config, GeneratorConfig};
use crate::error::Error;
use crate::kg::KnowledgeGraph;
use crate::kg_gen::{assign_types, generate_triples, precheck, GenerationReport};
use crate::reasoner::{check_consistency, check_schema_consistency, ConsistencyReport};
use crate::relation_gen::{compute_compatibility_matrix, CompatibilityMatrix};
use crate::relation_gen::{generate_relations, relation_stats, RelationStats};
use crate::schema::{HierarchyMetrics, Schema};
use crate::serializer::{serialize, serialize_kg, IriPolicy};

/// The characteristic compatibility matrix, computed once per process.
pub fn shared_matrix() -> &'static CompatibilityMatrix {
    static MATRIX: OnceLock<CompatibilityMatrix> = OnceLock::new();
    MATRIX.get_or_init(compute_compatibility_matrix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Schema,
    Kg,
    Both,
}

/// Wall-clock time per stage. Stages that did not run stay at zero.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunTimings {
    pub class_gen: Duration,
    pub relation_gen: Duration,
    pub schema_check: Duration,
    pub typing: Duration,
    pub triple_gen: Duration,
    pub precheck: Duration,
    pub kg_check: Duration,
    pub serialization: Duration,
    pub total: Duration,
}

impl RunTimings {
    pub fn stages(&self) -> [(&'static str, Duration); 8] {
        [
            ("class_gen", self.class_gen),
            ("relation_gen", self.relation_gen),
            ("schema_check", self.schema_check),
            ("typing", self.typing),
            ("triple_gen", self.triple_gen),
            ("precheck", self.precheck),
            ("kg_check", self.kg_check),
            ("serialization", self.serialization),
        ]
    }

    pub fn stage_sum(&self) -> Duration {
        self.stages().iter().map(|(_, d)| *d).sum()
    }

    pub fn to_stats_text(&self) -> String {
        let mut out = String::new();
        for (name, d) in self.stages() {
            let _ = writeln!(out, "time.{name} = {:.6}", d.as_secs_f64());
        }
        let _ = writeln!(out, "time.total = {:.6}", self.total.as_secs_f64());
        out
    }
}

fn timed<T>(slot: &mut Duration, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    *slot += start.elapsed();
    out
}

/// Everything a run produced, before anything touches the file system.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: GeneratorConfig,
    pub schema: Schema,
    /// Set when the schema was generated in this run.
    pub hierarchy_metrics: Option<HierarchyMetrics>,
    pub relation_stats: RelationStats,
    pub schema_report: ConsistencyReport,
    pub kg: Option<KnowledgeGraph>,
    pub generation: Option<GenerationReport>,
    pub kg_report: Option<ConsistencyReport>,
    pub warnings: Vec<String>,
    pub timings: RunTimings,
}

impl Run {
    pub fn is_consistent(&self) -> bool {
        self.schema_report.consistent && self.kg_report.as_ref().is_none_or(|r| r.consistent)
    }

    pub fn stats_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.config.seed);
        let _ = writeln!(out, "num_classes = {}", self.schema.hierarchy.len());
        if let Some(m) = &self.hierarchy_metrics {
            let _ = writeln!(out, "max_depth = {}", m.max_depth);
            let _ = writeln!(out, "avg_depth = {:.4}", m.avg_depth);
            let _ = writeln!(out, "inheritance_ratio = {:.4}", m.inheritance_ratio);
            let _ = writeln!(out, "avg_disjointness = {:.4}", m.disjointness_proportion);
        }
        let s = &self.relation_stats;
        let _ = writeln!(out, "num_relations = {}", s.num_relations);
        let _ = writeln!(out, "prop_profiled_relations = {:.4}", s.profiled_proportion);
        if let Some(spec) = s.mean_specificity {
            let _ = writeln!(out, "relation_specificity = {spec:.4}");
        }
        for c in crate::schema::Characteristic::ALL {
            let _ = writeln!(out, "prop_{} = {:.4}", c.key(), s.flag(c));
        }
        let _ = writeln!(out, "prop_inverseof = {:.4}", s.inverse_proportion);
        let _ = writeln!(out, "prop_subproperties = {:.4}", s.subproperty_proportion);
        if let Some(g) = &self.generation {
            out.push_str(&g.to_stats_text());
        }
        let _ = writeln!(out, "schema_consistent = {}", self.schema_report.consistent);
        if let Some(r) = &self.kg_report {
            let _ = writeln!(out, "kg_consistent = {}", r.consistent);
            let _ = writeln!(out, "violations = {}", r.violations.len());
        }
        out
    }

    pub fn report_text(&self) -> String {
        let mut out = String::from("[schema]\n");
        out.push_str(&self.schema_report.to_text());
        if let Some(r) = &self.kg_report {
            out.push_str("\n[kg]\n");
            out.push_str(&r.to_text());
        }
        if !self.warnings.is_empty() {
            out.push_str("\n[warnings]\n");
            for w in &self.warnings {
                let _ = writeln!(out, "{w}");
            }
        }
        out
    }
}

/// Runs the stages selected by `mode`. `Mode::Kg` needs `schema`; the other
/// modes generate one and ignore the argument.
pub fn run(cfg: &GeneratorConfig, mode: Mode, schema: Option<Schema>) -> Result<Run, Error> {
    let report = validate_config(cfg);
    if !report.is_ok() {
        return Err(Error::InvalidConfig(report));
    }
    let start = Instant::now();
    let mut t = RunTimings::default();
    let mut warnings = report.warnings.iter().map(|i| i.to_string()).collect::<Vec<_>>();
    let seed = cfg.seed;

    let (schema, hierarchy_metrics) = match (mode, schema) {
        (Mode::Kg, Some(schema)) => (schema, None),
        (Mode::Kg, None) => return Err(Error::MissingSchema),
        _ => {
            let (h, trace) = timed(&mut t.class_gen, || generate_class_hierarchy(cfg, seed))?;
            warnings.extend(trace.warnings);
            let matrix = shared_matrix();
            let (rels, rel_report) =
                timed(&mut t.relation_gen, || generate_relations(cfg, &h, matrix, seed))?;
            warnings.extend(rel_report.warnings);
            (Schema::new(h, rels), Some(trace.metrics))
        }
    };
    let schema_report = timed(&mut t.schema_check, || check_schema_consistency(&schema));

    let (kg, generation, kg_report) = if mode == Mode::Schema {
        (None, None, None)
    } else {
        let (typing, typing_warnings) = timed(&mut t.typing, || assign_types(cfg, &schema, seed));
        warnings.extend(typing_warnings);
        let (raw, trace) =
            timed(&mut t.triple_gen, || generate_triples(cfg, &schema, &typing, seed));
        warnings.extend(trace.warnings.iter().cloned());
        let (kg, outcome) = timed(&mut t.precheck, || precheck(&raw, &schema));
        let kg_report = timed(&mut t.kg_check, || check_consistency(&schema, &kg));
        let mut generation = GenerationReport::measure(cfg, &schema, &kg);
        generation.rejections = trace.rejections;
        generation.over_budget = trace.over_budget;
        generation.removed = outcome.removed;
        generation.warnings = warnings.clone();
        (Some(kg), Some(generation), Some(kg_report))
    };

    t.total = start.elapsed();
    Ok(Run {
        config: cfg.clone(),
        relation_stats: relation_stats(&schema),
        schema,
        hierarchy_metrics,
        schema_report,
        kg,
        generation,
        kg_report,
        warnings,
        timings: t,
    })
}

/// Renders and writes the run's files into `dir`, creating it if needed.
///
/// Rendering time is added to `run.timings.serialization`; file I/O is not
/// timed. Returns the written paths in a fixed order.
pub fn write_artifacts(run: &mut Run, dir: &Path) -> Result<Vec<PathBuf>, Error> {
    let policy = IriPolicy::default();
    let mut files: Vec<(String, String)> = Vec::new();
    let start = Instant::now();
    for &format in &run.config.formats {
        let ext = format.extension();
        files.push((
            format!("schema.{ext}"),
            serialize(&run.schema, None, format, &policy),
        ));
        if let Some(kg) = &run.kg {
            files.push((format!("kg.{ext}"), serialize_kg(kg, format, &policy)));
            files.push((
                format!("full.{ext}"),
                serialize(&run.schema, Some(kg), format, &policy),
            ));
        }
    }
    let elapsed = start.elapsed();
    run.timings.serialization += elapsed;
    run.timings.total += elapsed;

    let mut stats = run.stats_text();
    stats.push_str(&run.timings.to_stats_text());
    files.push(("stats.txt".into(), stats));
    files.push(("report.txt".into(), run.report_text()));
    let violations = run
        .kg_report
        .iter()
        .chain(std::iter::once(&run.schema_report))
        .map(|r| r.to_json_lines())
        .collect::<String>();
    if !violations.is_empty() {
        files.push(("report.jsonl".into(), violations));
    }

    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, text) in files {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Default directory for a run: `{output_dir}/{run_name}`.
pub fn run_dir(cfg: &GeneratorConfig, run_name: &str) -> PathBuf {
    cfg.output_dir.join(run_name)
}
