//! Knowledge graph generation: entity typing, triple sampling and the
//! precheck that removes triples a reasoner would reject.
//!
//! Every typing assertion and every triple is tried against an incremental
//! [`Closure`] and rolled back if it entails a violation, so the graph is
//! consistent by construction. Domain and range entailments therefore act as
//! soft constraints: an entity may receive a triple whose domain it does not
//! yet belong to, as long as the entailed type clashes with nothing.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::config::GeneratorConfig;
use crate::kg::{KnowledgeGraph, Triple};
use crate::reasoner::{Closure, Fact, Refusal, RuleId};
use crate::rng::{stage_rng, Stream};
use crate::schema::{Characteristic, ClassHierarchy, ClassId, EntityId, RelationId, Schema};

/// Sampling attempts per endpoint before falling back to any entity.
const ENDPOINT_TRIES: usize = 8;
/// Consecutive failures after which a relation is considered saturated.
const SATURATION_FAILURES: usize = 200;
/// Most facts a single triple may add to the closure. Keeps transitive
/// components small, which keeps reasoning time linear in the triple count.
pub const INFERENCE_BUDGET: usize = 128;

/// Entity typing; `typing[e]` is empty for untyped entities.
pub type Typing = Vec<Vec<ClassId>>;

/// Assigns most-specific classes to `cfg.num_entities` entities.
///
/// Returns the typing and any warnings (targets that could not be met).
pub fn assign_types(cfg: &GeneratorConfig, schema: &Schema, seed: u64) -> (Typing, Vec<String>) {
    let mut rng = stage_rng(seed, Stream::Typing);
    let h = &schema.hierarchy;
    let n = cfg.num_entities;
    let mut typing: Typing = vec![Vec::new(); n];
    let mut warnings = Vec::new();
    if h.is_empty() {
        if n > 0 && cfg.prop_untyped < 1.0 {
            warnings.push("schema has no classes; every entity is untyped".into());
        }
        return (typing, warnings);
    }

    let untyped = ((cfg.prop_untyped * n as f64).round() as usize).min(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut typed: Vec<usize> = order[untyped..].to_vec();
    typed.sort_unstable();

    let by_depth: Vec<Vec<ClassId>> = (0..=h.max_depth()).map(|d| h.classes_at_depth(d)).collect();
    let max_depth = h.max_depth().max(1);
    let lo = (cfg.avg_depth_specific.floor() as u32).clamp(1, max_depth);
    let hi = (cfg.avg_depth_specific.ceil() as u32).clamp(1, max_depth);
    let extra_per_entity = (cfg.effective_multityping() - 1.0).max(0.0);

    let mut closure = Closure::for_schema(schema);
    let mut depth_sum = 0u64;
    let mut placed = 0u64;
    let mut extra_owed = 0usize;
    let mut failed_primary = 0usize;

    for (i, &e) in typed.iter().enumerate() {
        let entity = EntityId::from_index(e);
        // depth nearest to keeping the running mean on target
        let cost = |d: u32| {
            ((depth_sum + d as u64) as f64 / (placed + 1) as f64 - cfg.avg_depth_specific).abs()
        };
        let depth = if lo == hi || cost(lo) < cost(hi) - 1e-12 {
            lo
        } else if cost(hi) < cost(lo) - 1e-12 {
            hi
        } else if rng.gen_bool(0.5) {
            lo
        } else {
            hi
        };
        let mut candidates = by_depth[depth as usize].clone();
        candidates.shuffle(&mut rng);
        let Some(first) = candidates
            .iter()
            .copied()
            .find(|&c| closure.try_assert(Fact::Type(entity, c)).is_ok())
        else {
            failed_primary += 1;
            continue;
        };
        depth_sum += depth as u64;
        placed += 1;
        typing[e].push(first);

        // spread extra classes evenly over typed entities
        let due = ((i + 1) as f64 * extra_per_entity).floor() as usize
            - (i as f64 * extra_per_entity).floor() as usize;
        extra_owed += due;
        while extra_owed > 0 {
            let added = candidates.iter().copied().find(|&c| {
                !typing[e].contains(&c)
                    && typing[e].iter().all(|&t| !h.disjoint(t, c))
                    && closure.try_assert(Fact::Type(entity, c)).is_ok()
            });
            match added {
                Some(c) => {
                    typing[e].push(c);
                    extra_owed -= 1;
                }
                None => break,
            }
        }
    }
    if failed_primary > 0 {
        warnings.push(format!(
            "{failed_primary} entities could not be typed consistently and stay untyped"
        ));
    }
    if extra_owed > 0 {
        warnings.push(format!(
            "{extra_owed} additional classes could not be assigned without disjointness clashes"
        ));
    }
    for t in &mut typing {
        t.sort_unstable();
    }
    (typing, warnings)
}

/// Per-relation sampling weights `b^(i/(n-1))` over a seeded permutation,
/// so the lightest relation gets exactly `b` times the weight of the
/// heaviest.
pub fn relation_weights(n: usize, balance: f64, rng: &mut impl Rng) -> Vec<f64> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut w = vec![0.0; n];
    for (rank, &r) in perm.iter().enumerate() {
        w[r] = if n == 1 {
            1.0
        } else {
            balance.powf(rank as f64 / (n - 1) as f64)
        };
    }
    w
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleGenTrace {
    /// Rejected candidate triples by the rule that produced the clashing
    /// fact.
    pub rejections: BTreeMap<RuleId, usize>,
    /// Candidates discarded before reaching the reasoner (self-loops on
    /// irreflexive relations, duplicates, functional subjects in use).
    pub filtered: usize,
    /// Candidates that would have entailed more than [`INFERENCE_BUDGET`]
    /// facts.
    pub over_budget: usize,
    pub saturated: Vec<RelationId>,
    pub warnings: Vec<String>,
}

/// Samples `cfg.num_triples` triples over the typed entities.
pub fn generate_triples(
    cfg: &GeneratorConfig,
    schema: &Schema,
    typing: &Typing,
    seed: u64,
) -> (KnowledgeGraph, TripleGenTrace) {
    let mut rng = stage_rng(seed, Stream::Triples);
    let mut kg = KnowledgeGraph {
        typing: typing.clone(),
        triples: Vec::new(),
    };
    let mut trace = TripleGenTrace::default();
    let n = typing.len();
    let nr = schema.relations.len();
    if n == 0 || nr == 0 {
        if cfg.num_triples > 0 {
            trace
                .warnings
                .push("no entities or relations; no triples generated".into());
        }
        return (kg, trace);
    }

    let mut closure = Closure::for_schema(schema);
    for e in kg.entities() {
        for &c in kg.types_of(e) {
            // typing produced by assign_types is consistent; anything else
            // would have been dropped there
            let _ = closure.try_assert(Fact::Type(e, c));
        }
    }

    let mut weights = relation_weights(nr, cfg.relation_balance, &mut rng);
    let mut pick = WeightedIndex::new(&weights).ok();
    let mut unobserved = Pool::new(n);
    let mut failures = vec![0usize; nr];

    while kg.triples.len() < cfg.num_triples {
        let Some(dist) = &pick else { break };
        let r = RelationId::from_index(dist.sample(&mut rng));
        let prof = schema.relation(r);
        let h = &schema.hierarchy;

        let s = endpoint(&mut rng, &unobserved, n, |e| fits(h, &closure, e, prof.domain));
        let o = endpoint(&mut rng, &unobserved, n, |e| fits(h, &closure, e, prof.range));
        let self_loop_banned = prof.flags.contains(Characteristic::Irreflexive)
            || prof.flags.contains(Characteristic::Asymmetric);
        let ok = if (s == o && self_loop_banned)
            || closure.has_triple(s, r, o)
            || (prof.flags.contains(Characteristic::Functional) && !closure.objects(r, s).is_empty())
            || (prof.flags.contains(Characteristic::InverseFunctional)
                && !closure.subjects(r, o).is_empty())
        {
            trace.filtered += 1;
            false
        } else {
            match closure.try_assert_bounded(Fact::Triple(s, r, o), INFERENCE_BUDGET) {
                Ok(_) => true,
                Err(Refusal::Violation(rej)) => {
                    *trace.rejections.entry(rej.cause).or_default() += 1;
                    false
                }
                Err(Refusal::TooManyInferences) => {
                    trace.over_budget += 1;
                    false
                }
            }
        };

        if ok {
            kg.triples.push(Triple::new(s, r, o));
            unobserved.remove(s);
            unobserved.remove(o);
            failures[r.index()] = 0;
        } else {
            failures[r.index()] += 1;
            if failures[r.index()] >= SATURATION_FAILURES {
                trace.saturated.push(r);
                weights[r.index()] = 0.0;
                pick = if weights.iter().any(|w| *w > 0.0) {
                    WeightedIndex::new(&weights).ok()
                } else {
                    None
                };
            }
        }
    }
    if kg.triples.len() < cfg.num_triples {
        trace.warnings.push(format!(
            "saturation: generated {} of {} triples ({} relations saturated)",
            kg.triples.len(),
            cfg.num_triples,
            trace.saturated.len()
        ));
    }
    (kg, trace)
}

/// Entity ids not yet used in any triple, with O(1) removal.
struct Pool {
    items: Vec<EntityId>,
    pos: Vec<usize>,
}

impl Pool {
    fn new(n: usize) -> Self {
        Pool {
            items: (0..n).map(EntityId::from_index).collect(),
            pos: (0..n).collect(),
        }
    }

    fn remove(&mut self, e: EntityId) {
        let i = self.pos[e.index()];
        if i == usize::MAX {
            return;
        }
        let last = *self.items.last().expect("non-empty when an entry is live");
        self.items.swap_remove(i);
        if last != e {
            self.pos[last.index()] = i;
        }
        self.pos[e.index()] = usize::MAX;
    }
}

/// Unobserved entities first; otherwise any entity. `accept` filters
/// candidates; after the tries run out the last candidate is used anyway and
/// left to the reasoner.
fn endpoint(
    rng: &mut ChaCha8Rng,
    unobserved: &Pool,
    n: usize,
    accept: impl Fn(EntityId) -> bool,
) -> EntityId {
    let mut last = EntityId::from_index(rng.gen_range(0..n));
    if !unobserved.items.is_empty() {
        for _ in 0..ENDPOINT_TRIES {
            let e = *unobserved.items.choose(rng).expect("non-empty");
            if accept(e) {
                return e;
            }
        }
    }
    for _ in 0..ENDPOINT_TRIES {
        if accept(last) {
            return last;
        }
        last = EntityId::from_index(rng.gen_range(0..n));
    }
    last
}

/// `e` can take on `class` without a direct disjointness clash.
fn fits(h: &ClassHierarchy, closure: &Closure<'_>, e: EntityId, class: Option<ClassId>) -> bool {
    match class {
        None => true,
        Some(c) => closure.types_of(e).iter().all(|&t| !h.disjoint(t, c)),
    }
}

/// Replays typing and triples in order into a fresh closure and drops
/// whatever would make it inconsistent. Earlier assertions win.
pub fn precheck(kg: &KnowledgeGraph, schema: &Schema) -> (KnowledgeGraph, PrecheckOutcome) {
    let mut closure = Closure::for_schema(schema);
    let mut out = KnowledgeGraph::with_entities(kg.num_entities());
    let mut removed: BTreeMap<RuleId, usize> = BTreeMap::new();
    for e in kg.entities() {
        for &c in kg.types_of(e) {
            match closure.try_assert(Fact::Type(e, c)) {
                Ok(_) => out.typing[e.index()].push(c),
                Err(rej) => *removed.entry(rej.cause).or_default() += 1,
            }
        }
    }
    let mut duplicates = 0;
    let mut seen = rustc_hash::FxHashSet::default();
    for &t in &kg.triples {
        if !seen.insert(t) {
            duplicates += 1;
            continue;
        }
        match closure.try_assert(Fact::from(t)) {
            Ok(_) => out.triples.push(t),
            Err(rej) => *removed.entry(rej.cause).or_default() += 1,
        }
    }
    (out, PrecheckOutcome { removed, duplicates })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrecheckOutcome {
    /// Removed assertions by the rule that produced the clashing fact.
    pub removed: BTreeMap<RuleId, usize>,
    pub duplicates: usize,
}

impl PrecheckOutcome {
    pub fn total_removed(&self) -> usize {
        self.removed.values().sum::<usize>() + self.duplicates
    }
}

/// Requested against realized figures for a generated graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    pub requested_entities: usize,
    /// Entities occurring in at least one triple.
    pub realized_entities: usize,
    pub requested_triples: usize,
    pub realized_triples: usize,
    pub prop_untyped: f64,
    /// Mean depth of the most-specific classes of typed entities.
    pub avg_depth_specific: f64,
    /// Mean number of most-specific classes per typed entity.
    pub avg_multityping: f64,
    /// Triples per relation, indexed by relation id.
    pub relation_histogram: Vec<usize>,
    pub rejections: BTreeMap<RuleId, usize>,
    pub over_budget: usize,
    pub removed: BTreeMap<RuleId, usize>,
    pub warnings: Vec<String>,
}

impl GenerationReport {
    /// Realized figures of `kg`; the bookkeeping fields start empty.
    pub fn measure(cfg: &GeneratorConfig, schema: &Schema, kg: &KnowledgeGraph) -> Self {
        let n = kg.num_entities();
        let mut used = vec![false; n];
        let mut histogram = vec![0usize; schema.relations.len()];
        for t in &kg.triples {
            used[t.s.index()] = true;
            used[t.o.index()] = true;
            if let Some(slot) = histogram.get_mut(t.p.index()) {
                *slot += 1;
            }
        }
        let typed: Vec<&Vec<ClassId>> = kg.typing.iter().filter(|t| !t.is_empty()).collect();
        let mean = |f: &dyn Fn(&Vec<ClassId>) -> f64| {
            if typed.is_empty() {
                0.0
            } else {
                typed.iter().map(|t| f(t)).sum::<f64>() / typed.len() as f64
            }
        };
        let h = &schema.hierarchy;
        GenerationReport {
            requested_entities: cfg.num_entities,
            realized_entities: used.iter().filter(|u| **u).count(),
            requested_triples: cfg.num_triples,
            realized_triples: kg.triples.len(),
            prop_untyped: if n == 0 {
                0.0
            } else {
                kg.untyped_count() as f64 / n as f64
            },
            avg_depth_specific: mean(&|t| {
                t.iter().map(|c| h.depth(*c) as f64).sum::<f64>() / t.len() as f64
            }),
            avg_multityping: mean(&|t| t.len() as f64),
            relation_histogram: histogram,
            rejections: BTreeMap::new(),
            over_budget: 0,
            removed: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    /// Flat `key = value` lines.
    pub fn to_stats_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "requested_entities = {}", self.requested_entities);
        let _ = writeln!(out, "realized_entities = {}", self.realized_entities);
        let _ = writeln!(out, "requested_triples = {}", self.requested_triples);
        let _ = writeln!(out, "realized_triples = {}", self.realized_triples);
        let _ = writeln!(out, "prop_untyped = {:.4}", self.prop_untyped);
        let _ = writeln!(out, "avg_depth_specific = {:.4}", self.avg_depth_specific);
        let _ = writeln!(out, "avg_multityping = {:.4}", self.avg_multityping);
        for (i, count) in self.relation_histogram.iter().enumerate() {
            let _ = writeln!(out, "triples.R{i} = {count}");
        }
        for (rule, count) in &self.rejections {
            let _ = writeln!(out, "rejected.{rule} = {count}");
        }
        let _ = writeln!(out, "rejected.inference_budget = {}", self.over_budget);
        for (rule, count) in &self.removed {
            let _ = writeln!(out, "removed.{rule} = {count}");
        }
        let _ = writeln!(out, "warnings = {}", self.warnings.len());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{CharacteristicSet, RelationProfile};

    fn one_relation(flags: CharacteristicSet) -> Schema {
        let mut h = ClassHierarchy::new();
        h.push_class(None).unwrap();
        Schema::new(
            h,
            vec![RelationProfile {
                flags,
                ..Default::default()
            }],
        )
    }

    #[test]
    fn weights_span_the_balance() {
        let mut rng = stage_rng(1, Stream::Triples);
        let w = relation_weights(10, 0.25, &mut rng);
        let max = w.iter().cloned().fold(f64::MIN, f64::max);
        let min = w.iter().cloned().fold(f64::MAX, f64::min);
        assert!((max - 1.0).abs() < 1e-12);
        assert!((min - 0.25).abs() < 1e-12);
        assert_eq!(relation_weights(4, 1.0, &mut rng), vec![1.0; 4]);
    }

    #[test]
    fn all_untyped() {
        let cfg = GeneratorConfig {
            prop_untyped: 1.0,
            ..Default::default()
        };
        let (t, _) = assign_types(&cfg, &one_relation(CharacteristicSet::EMPTY), 1);
        assert!(t.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn functional_saturates() {
        let cfg = GeneratorConfig {
            num_entities: 10,
            num_triples: 20,
            prop_untyped: 1.0,
            ..Default::default()
        };
        let schema = one_relation(CharacteristicSet::EMPTY.with(Characteristic::Functional));
        let (typing, _) = assign_types(&cfg, &schema, 2);
        let (kg, trace) = generate_triples(&cfg, &schema, &typing, 2);
        assert!(kg.triples.len() <= 10);
        assert!(trace.warnings.iter().any(|w| w.contains("saturation")));
    }

    #[test]
    fn pool_removal() {
        let mut p = Pool::new(4);
        p.remove(EntityId(1));
        p.remove(EntityId(1));
        p.remove(EntityId(3));
        let mut left = p.items.clone();
        left.sort();
        assert_eq!(left, vec![EntityId(0), EntityId(2)]);
    }
}
