//! The experiment grid: nine schema rows crossed with three graph rows.

use std::fmt::Write as _;
use std::panic::{catch_unwind, AssertUnwindSafe};

use rayon::prelude::*;

use crate::config::GeneratorConfig;
use crate::pipeline::{run, Mode, Run};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemaRow {
    pub name: &'static str,
    pub num_classes: usize,
    pub max_depth: u32,
    pub avg_depth: f64,
    pub num_relations: usize,
    pub relation_specificity: f64,
    /// Shared value of class disjointness and every relation proportion.
    pub proportion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphRow {
    pub name: &'static str,
    pub num_entities: usize,
    pub num_triples: usize,
    pub prop_untyped: f64,
    pub avg_depth_specific: f64,
    pub avg_multityping: f64,
}

const fn s(
    name: &'static str,
    num_classes: usize,
    max_depth: u32,
    avg_depth: f64,
    proportion: f64,
) -> SchemaRow {
    SchemaRow {
        name,
        num_classes,
        max_depth,
        avg_depth,
        num_relations: num_classes,
        relation_specificity: avg_depth,
        proportion,
    }
}

const fn g(name: &'static str, num_entities: usize) -> GraphRow {
    GraphRow {
        name,
        num_entities,
        num_triples: num_entities * 10,
        prop_untyped: 0.3,
        avg_depth_specific: 2.0,
        avg_multityping: 2.0,
    }
}

pub const SCHEMA_ROWS: [SchemaRow; 9] = [
    s("S1", 25, 3, 1.5, 0.1),
    s("S2", 25, 3, 1.5, 0.2),
    s("S3", 25, 3, 1.5, 0.3),
    s("S4", 100, 4, 2.5, 0.1),
    s("S5", 100, 4, 2.5, 0.2),
    s("S6", 100, 4, 2.5, 0.3),
    s("S7", 250, 5, 3.0, 0.1),
    s("S8", 250, 5, 3.0, 0.2),
    s("S9", 250, 5, 3.0, 0.3),
];

pub const GRAPH_ROWS: [GraphRow; 3] = [g("G1", 100), g("G2", 1_000), g("G3", 10_000)];

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub schemas: Vec<SchemaRow>,
    pub graphs: Vec<GraphRow>,
    pub seeds: Vec<u64>,
}

impl GridSpec {
    /// All 27 cells with the given seeds.
    pub fn full(seeds: Vec<u64>) -> Self {
        GridSpec {
            schemas: SCHEMA_ROWS.to_vec(),
            graphs: GRAPH_ROWS.to_vec(),
            seeds,
        }
    }

    /// Cells in row-major order: schema, then graph, then seed.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &schema in &self.schemas {
            for &graph in &self.graphs {
                for &seed in &self.seeds {
                    out.push(Cell {
                        schema,
                        graph,
                        seed,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub schema: SchemaRow,
    pub graph: GraphRow,
    pub seed: u64,
}

impl Cell {
    pub fn name(&self) -> String {
        format!("{}-{}-{}", self.schema.name, self.graph.name, self.seed)
    }

    pub fn config(&self) -> GeneratorConfig {
        let (sr, gr) = (&self.schema, &self.graph);
        let p = sr.proportion;
        GeneratorConfig {
            num_classes: sr.num_classes,
            max_depth: sr.max_depth,
            avg_depth: sr.avg_depth,
            avg_disjointness: p,
            num_relations: sr.num_relations,
            relation_specificity: sr.relation_specificity,
            prop_asymmetric: p,
            prop_symmetric: p,
            prop_irreflexive: p,
            prop_reflexive: p,
            prop_transitive: p,
            prop_functional: p,
            prop_inversefunctional: p,
            prop_inverseof: p,
            prop_subproperties: p,
            num_entities: gr.num_entities,
            num_triples: gr.num_triples,
            prop_untyped: gr.prop_untyped,
            avg_depth_specific: gr.avg_depth_specific,
            multityping: true,
            avg_multityping: gr.avg_multityping,
            seed: self.seed,
            ..GeneratorConfig::default()
        }
    }
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    /// The finished run, or why it did not finish.
    pub outcome: Result<Run, String>,
}

impl CellResult {
    pub fn is_consistent(&self) -> bool {
        self.outcome.as_ref().is_ok_and(|r| r.is_consistent())
    }
}

/// Runs one cell; errors and panics are captured in the result.
pub fn run_cell(cell: Cell) -> CellResult {
    let cfg = cell.config();
    let outcome = match catch_unwind(AssertUnwindSafe(|| run(&cfg, Mode::Both, None))) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(panic) => Err(panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "panic".into())),
    };
    CellResult { cell, outcome }
}

#[derive(Debug, Clone)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
}

/// Runs every cell of `spec` on the rayon pool, in a fixed output order.
pub fn run_grid(spec: &GridSpec) -> GridReport {
    let cells = spec.cells().into_par_iter().map(run_cell).collect();
    GridReport { cells }
}

const COLUMNS: [&str; 14] = [
    "cell",
    "consistent",
    "classes",
    "max_depth",
    "avg_depth",
    "relations",
    "specificity",
    "entities",
    "triples",
    "untyped",
    "depth_specific",
    "multityping",
    "violations",
    "warnings",
];

const TIME_COLUMNS: [&str; 9] = [
    "class_gen",
    "relation_gen",
    "schema_check",
    "typing",
    "triple_gen",
    "precheck",
    "kg_check",
    "serialization",
    "total",
];

impl GridReport {
    pub fn consistent_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_consistent()).count()
    }

    fn rows(&self, timings: bool) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|c| {
                let mut row = vec![c.cell.name()];
                match &c.outcome {
                    Err(e) => {
                        row.push(format!("error: {e}"));
                        row.resize(COLUMNS.len() + if timings { TIME_COLUMNS.len() } else { 0 }, String::new());
                    }
                    Ok(r) => {
                        let m = r.hierarchy_metrics.unwrap_or_default();
                        let g = r.generation.as_ref().expect("mode both");
                        let violations = r.schema_report.violations.len()
                            + r.kg_report.as_ref().map_or(0, |k| k.violations.len());
                        row.extend([
                            r.is_consistent().to_string(),
                            r.schema.hierarchy.len().to_string(),
                            m.max_depth.to_string(),
                            format!("{:.3}", m.avg_depth),
                            r.relation_stats.num_relations.to_string(),
                            r.relation_stats
                                .mean_specificity
                                .map_or("-".into(), |v| format!("{v:.3}")),
                            g.realized_entities.to_string(),
                            g.realized_triples.to_string(),
                            format!("{:.3}", g.prop_untyped),
                            format!("{:.3}", g.avg_depth_specific),
                            format!("{:.3}", g.avg_multityping),
                            violations.to_string(),
                            r.warnings.len().to_string(),
                        ]);
                        if timings {
                            let t = &r.timings;
                            row.extend(
                                t.stages()
                                    .iter()
                                    .map(|(_, d)| *d)
                                    .chain([t.total])
                                    .map(|d| format!("{:.4}", d.as_secs_f64())),
                            );
                        }
                    }
                }
                row
            })
            .collect()
    }

    fn header(timings: bool) -> Vec<String> {
        let mut h: Vec<String> = COLUMNS.iter().map(|s| s.to_string()).collect();
        if timings {
            h.extend(TIME_COLUMNS.iter().map(|s| format!("t_{s}")));
        }
        h
    }

    /// Aligned plain-text table. Without timings the text depends only on
    /// the spec and seeds.
    pub fn to_table(&self, timings: bool) -> String {
        let mut rows = vec![Self::header(timings)];
        rows.extend(self.rows(timings));
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|i| rows.iter().map(|r| r[i].len()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(&widths)
                .map(|(v, w)| format!("{v:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        let _ = writeln!(
            out,
            "consistent: {}/{}",
            self.consistent_count(),
            self.cells.len()
        );
        out
    }

    pub fn to_csv(&self, timings: bool) -> String {
        let mut out = Self::header(timings).join(",");
        out.push('\n');
        for row in self.rows(timings) {
            let cells: Vec<String> = row
                .into_iter()
                .map(|v| {
                    if v.contains([',', '"', '\n']) {
                        format!("\"{}\"", v.replace('"', "\"\""))
                    } else {
                        v
                    }
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}
