//! Forward-chaining reasoner over the OWL 2 RL rules needed for the
//! constructs this crate generates.
//!
//! | rule      | premises                                   | conclusion      |
//! |-----------|--------------------------------------------|-----------------|
//! | scm-sco   | `C1 ⊑ C2`, `C2 ⊑ C3`                       | `C1 ⊑ C3`       |
//! | scm-spo   | `P1 ⊑ P2`, `P2 ⊑ P3`                       | `P1 ⊑ P3`       |
//! | cax-sco   | `C1 ⊑ C2`, `x : C1`                        | `x : C2`        |
//! | prp-dom   | `dom(P) = C`, `P(x, y)`                    | `x : C`         |
//! | prp-rng   | `rng(P) = C`, `P(x, y)`                    | `y : C`         |
//! | prp-symp  | `P` symmetric, `P(x, y)`                   | `P(y, x)`       |
//! | prp-trp   | `P` transitive, `P(x, y)`, `P(y, z)`       | `P(x, z)`       |
//! | prp-inv1  | `P1 inv P2`, `P1(x, y)`                    | `P2(y, x)`      |
//! | prp-inv2  | `P1 inv P2`, `P2(x, y)`                    | `P1(y, x)`      |
//! | prp-spo1  | `P1 ⊑ P2`, `P1(x, y)`                      | `P2(x, y)`      |
//! | prp-rfp   | `P` reflexive, `P(x, y)`                   | `P(x, x)`, `P(y, y)` |
//! | prp-rfp   | `P` reflexive, `dom(P) = C`, `x : C`       | `P(x, x)`       |
//!
//! Violations: `cax-dw` (an individual in two disjoint classes, or a class
//! below a class it is disjoint with), `prp-irp`, `prp-asyp`, and `prp-fp` /
//! `prp-ifp` under the unique name assumption (two distinct identifiers are
//! never the same individual).

mod engine;
mod replay;

use std::fmt;

pub use engine::{Closure, Refusal, Rejection};
pub use replay::replay_violation;

use crate::kg::{KnowledgeGraph, Triple};
use crate::schema::{Characteristic, ClassId, EntityId, RelationId, Schema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleId {
    CaxSco,
    CaxDw,
    ScmSco,
    ScmSpo,
    PrpDom,
    PrpRng,
    PrpSymp,
    PrpTrp,
    PrpInv1,
    PrpInv2,
    PrpSpo1,
    PrpRfp,
    PrpIrp,
    PrpAsyp,
    PrpFp,
    PrpIfp,
}

impl RuleId {
    pub const ALL: [RuleId; 16] = [
        RuleId::CaxSco,
        RuleId::CaxDw,
        RuleId::ScmSco,
        RuleId::ScmSpo,
        RuleId::PrpDom,
        RuleId::PrpRng,
        RuleId::PrpSymp,
        RuleId::PrpTrp,
        RuleId::PrpInv1,
        RuleId::PrpInv2,
        RuleId::PrpSpo1,
        RuleId::PrpRfp,
        RuleId::PrpIrp,
        RuleId::PrpAsyp,
        RuleId::PrpFp,
        RuleId::PrpIfp,
    ];

    pub const VIOLATIONS: [RuleId; 5] = [
        RuleId::CaxDw,
        RuleId::PrpIrp,
        RuleId::PrpAsyp,
        RuleId::PrpFp,
        RuleId::PrpIfp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::CaxSco => "cax-sco",
            RuleId::CaxDw => "cax-dw",
            RuleId::ScmSco => "scm-sco",
            RuleId::ScmSpo => "scm-spo",
            RuleId::PrpDom => "prp-dom",
            RuleId::PrpRng => "prp-rng",
            RuleId::PrpSymp => "prp-symp",
            RuleId::PrpTrp => "prp-trp",
            RuleId::PrpInv1 => "prp-inv1",
            RuleId::PrpInv2 => "prp-inv2",
            RuleId::PrpSpo1 => "prp-spo1",
            RuleId::PrpRfp => "prp-rfp",
            RuleId::PrpIrp => "prp-irp",
            RuleId::PrpAsyp => "prp-asyp",
            RuleId::PrpFp => "prp-fp",
            RuleId::PrpIfp => "prp-ifp",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleId> {
        Self::ALL.into_iter().find(|r| r.name() == name)
    }

    pub fn is_violation(self) -> bool {
        Self::VIOLATIONS.contains(&self)
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Anything the engine can store and derive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Fact {
    Type(EntityId, ClassId),
    Triple(EntityId, RelationId, EntityId),
    SubClassOf(ClassId, ClassId),
    SubPropertyOf(RelationId, RelationId),
}

impl From<Triple> for Fact {
    fn from(t: Triple) -> Self {
        Fact::Triple(t.s, t.p, t.o)
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::Type(e, c) => write!(f, "{e} rdf:type {c}"),
            Fact::Triple(s, p, o) => write!(f, "{s} {p} {o}"),
            Fact::SubClassOf(a, b) => write!(f, "{a} rdfs:subClassOf {b}"),
            Fact::SubPropertyOf(a, b) => write!(f, "{a} rdfs:subPropertyOf {b}"),
        }
    }
}

/// Schema statements used as rule premises but never derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axiom {
    Disjoint(ClassId, ClassId),
    Domain(RelationId, ClassId),
    Range(RelationId, ClassId),
    /// Stored with the lower relation id first.
    InverseOf(RelationId, RelationId),
    Has(RelationId, Characteristic),
}

impl Axiom {
    /// Whether the schema states this axiom.
    pub fn holds_in(&self, schema: &Schema) -> bool {
        let n = schema.relations.len();
        let h = &schema.hierarchy;
        match *self {
            Axiom::Disjoint(a, b) => {
                h.contains(a)
                    && h.contains(b)
                    && h.disjoint_pairs().contains(&crate::schema::ordered(a, b))
            }
            Axiom::Domain(p, c) => p.index() < n && schema.relation(p).domain == Some(c),
            Axiom::Range(p, c) => p.index() < n && schema.relation(p).range == Some(c),
            Axiom::InverseOf(p, q) => {
                p < q
                    && q.index() < n
                    && (schema.relation(p).inverse_of == Some(q)
                        || schema.relation(q).inverse_of == Some(p))
            }
            Axiom::Has(p, c) => p.index() < n && schema.relation(p).flags.contains(c),
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Disjoint(a, b) => write!(f, "{a} owl:disjointWith {b}"),
            Axiom::Domain(p, c) => write!(f, "{p} rdfs:domain {c}"),
            Axiom::Range(p, c) => write!(f, "{p} rdfs:range {c}"),
            Axiom::InverseOf(p, q) => write!(f, "{p} owl:inverseOf {q}"),
            Axiom::Has(p, c) => write!(f, "{p} rdf:type owl:{}", c.owl_name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Premise {
    Fact(Fact),
    Axiom(Axiom),
}

impl fmt::Display for Premise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Premise::Fact(x) => x.fmt(f),
            Premise::Axiom(a) => a.fmt(f),
        }
    }
}

/// One rule application. The final step of a derivation has no conclusion:
/// it is the violation itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub rule: RuleId,
    pub premises: Vec<Premise>,
    pub conclusion: Option<Fact>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: RuleId,
    /// The clashing facts, sorted.
    pub participants: Vec<Fact>,
    /// Rule applications from asserted facts to the violation, in order.
    pub derivation: Vec<Step>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.rule)?;
        for p in &self.participants {
            write!(f, " [{p}]")?;
        }
        for (i, s) in self.derivation.iter().enumerate() {
            write!(f, "\n  {}. {}", i + 1, s.rule)?;
            let premises: Vec<String> = s.premises.iter().map(|p| p.to_string()).collect();
            write!(f, " {}", premises.join(" ; "))?;
            match &s.conclusion {
                Some(c) => write!(f, " => {c}")?,
                None => write!(f, " => false")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violations: Vec<Violation>,
    /// Number of derived (not asserted) facts.
    pub closure_size: usize,
    /// Fixpoint rounds.
    pub iterations: usize,
}

impl ConsistencyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "consistent = {}\nviolations = {}\nclosure_size = {}\niterations = {}\n",
            self.consistent,
            self.violations.len(),
            self.closure_size,
            self.iterations
        ));
        for v in &self.violations {
            out.push_str(&format!("\n{v}\n"));
        }
        out
    }

    /// One JSON object per line, one line per violation.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            let participants: Vec<String> = v.participants.iter().map(|p| p.to_string()).collect();
            let derivation: Vec<serde_json::Value> = v
                .derivation
                .iter()
                .map(|s| {
                    serde_json::json!({
                        "rule": s.rule.name(),
                        "premises": s.premises.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                        "conclusion": s.conclusion.map(|c| c.to_string()),
                    })
                })
                .collect();
            let rec = serde_json::json!({
                "rule": v.rule.name(),
                "participants": participants,
                "derivation": derivation,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        out
    }

    pub fn count_by_rule(&self, rule: RuleId) -> usize {
        self.violations.iter().filter(|v| v.rule == rule).count()
    }
}

/// Asserted facts of a schema/KG pair, in a fixed order.
pub fn asserted_facts(schema: &Schema, kg: &KnowledgeGraph) -> Vec<Fact> {
    let mut out = schema_facts(schema);
    for e in kg.entities() {
        for &c in kg.types_of(e) {
            out.push(Fact::Type(e, c));
        }
    }
    out.extend(kg.triples.iter().map(|t| Fact::from(*t)));
    out
}

pub(crate) fn schema_facts(schema: &Schema) -> Vec<Fact> {
    let mut out = Vec::new();
    for c in schema.hierarchy.classes() {
        if let Some(p) = schema.hierarchy.parent(c) {
            out.push(Fact::SubClassOf(c, p));
        }
    }
    for r in schema.relation_ids() {
        if let Some(q) = schema.relation(r).subproperty_of {
            out.push(Fact::SubPropertyOf(r, q));
        }
    }
    out
}

/// Least fixpoint of the entailment rules over the asserted facts.
pub fn materialize<'s>(schema: &'s Schema, kg: &KnowledgeGraph) -> Closure<'s> {
    let mut closure = Closure::new(schema);
    for f in asserted_facts(schema, kg) {
        closure.assert_fact(f);
    }
    closure.run();
    closure
}

pub fn check_consistency(schema: &Schema, kg: &KnowledgeGraph) -> ConsistencyReport {
    materialize(schema, kg).report()
}

/// Schema-only check: subclass/subproperty closure, classes placed below a
/// class they are disjoint with, and for every relation a one-triple witness
/// `R(w1, w2)` between fresh untyped individuals.
pub fn check_schema_consistency(schema: &Schema) -> ConsistencyReport {
    let base = Closure::for_schema(schema);
    let mut report = base.report();
    for r in schema.relation_ids() {
        let mut c = base.clone();
        let (w1, w2) = (EntityId(0), EntityId(1));
        c.assert_fact(Fact::Triple(w1, r, w2));
        c.run();
        let witness = c.report();
        report.closure_size = report.closure_size.max(witness.closure_size);
        report.iterations = report.iterations.max(witness.iterations);
        for v in witness.violations {
            if !report.violations.contains(&v) {
                report.violations.push(v);
            }
        }
    }
    report.consistent = report.violations.is_empty();
    report
}

#[cfg(test)]
mod tests;
