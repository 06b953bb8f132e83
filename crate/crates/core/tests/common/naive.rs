//! Reference reasoner: applies every rule to every combination of known
//! facts until nothing changes. Slow, but short enough to check by eye.

use std::collections::BTreeSet;

use kgsynth::reasoner::{Fact, RuleId};
use kgsynth::{Characteristic, ClassId, KnowledgeGraph, RelationId, Schema};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NaiveResult {
    pub facts: BTreeSet<Fact>,
    /// Rule and sorted clashing facts of every violation instance.
    pub violations: BTreeSet<(RuleId, Vec<Fact>)>,
}

impl NaiveResult {
    pub fn consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

fn has(schema: &Schema, p: RelationId, c: Characteristic) -> bool {
    schema.relations[p.index()].flags.contains(c)
}

fn disjoint(schema: &Schema, a: ClassId, b: ClassId) -> bool {
    let pairs = schema.hierarchy.disjoint_pairs();
    pairs.contains(&(a, b)) || pairs.contains(&(b, a))
}

/// Relations `q` with `p owl:inverseOf q` stated on either side.
fn inverses(schema: &Schema, p: RelationId) -> Vec<RelationId> {
    let mut out = Vec::new();
    if let Some(q) = schema.relations[p.index()].inverse_of {
        out.push(q);
    }
    for (i, r) in schema.relations.iter().enumerate() {
        if r.inverse_of == Some(p) {
            out.push(RelationId(i as u32));
        }
    }
    out
}

pub fn initial_facts(schema: &Schema, kg: &KnowledgeGraph) -> BTreeSet<Fact> {
    let mut facts = BTreeSet::new();
    for (i, parent) in schema.hierarchy.parents().iter().enumerate() {
        if let Some(p) = parent {
            facts.insert(Fact::SubClassOf(ClassId(i as u32), *p));
        }
    }
    for (i, r) in schema.relations.iter().enumerate() {
        if let Some(q) = r.subproperty_of {
            facts.insert(Fact::SubPropertyOf(RelationId(i as u32), q));
        }
    }
    for (e, classes) in kg.typing.iter().enumerate() {
        for &c in classes {
            facts.insert(Fact::Type(kgsynth::EntityId(e as u32), c));
        }
    }
    for t in &kg.triples {
        facts.insert(Fact::Triple(t.s, t.p, t.o));
    }
    facts
}

fn one_step(schema: &Schema, facts: &BTreeSet<Fact>) -> BTreeSet<Fact> {
    use Fact::*;
    let mut new = BTreeSet::new();
    for &f in facts {
        match f {
            Type(x, c) => {
                for (i, r) in schema.relations.iter().enumerate() {
                    let p = RelationId(i as u32);
                    if r.domain == Some(c) && r.flags.contains(Characteristic::Reflexive) {
                        new.insert(Triple(x, p, x));
                    }
                }
            }
            Triple(x, p, y) => {
                let r = &schema.relations[p.index()];
                if let Some(c) = r.domain {
                    new.insert(Type(x, c));
                }
                if let Some(c) = r.range {
                    new.insert(Type(y, c));
                }
                if has(schema, p, Characteristic::Symmetric) {
                    new.insert(Triple(y, p, x));
                }
                if has(schema, p, Characteristic::Reflexive) {
                    new.insert(Triple(x, p, x));
                    new.insert(Triple(y, p, y));
                }
                for q in inverses(schema, p) {
                    new.insert(Triple(y, q, x));
                }
            }
            _ => {}
        }
        for &g in facts {
            match (f, g) {
                (SubClassOf(a, b), SubClassOf(b2, c)) if b == b2 => {
                    new.insert(SubClassOf(a, c));
                }
                (SubPropertyOf(a, b), SubPropertyOf(b2, c)) if b == b2 => {
                    new.insert(SubPropertyOf(a, c));
                }
                (SubClassOf(c, d), Type(x, c2)) if c == c2 => {
                    new.insert(Type(x, d));
                }
                (SubPropertyOf(p, q), Triple(x, p2, y)) if p == p2 => {
                    new.insert(Triple(x, q, y));
                }
                (Triple(x, p, y), Triple(y2, p2, z))
                    if p == p2 && y == y2 && has(schema, p, Characteristic::Transitive) =>
                {
                    new.insert(Triple(x, p, z));
                }
                _ => {}
            }
        }
    }
    new
}

fn violations(schema: &Schema, facts: &BTreeSet<Fact>) -> BTreeSet<(RuleId, Vec<Fact>)> {
    use Fact::*;
    let mut out = BTreeSet::new();
    let mut add = |rule, mut fs: Vec<Fact>| {
        fs.sort_unstable();
        fs.dedup();
        out.insert((rule, fs));
    };
    for &f in facts {
        match f {
            SubClassOf(a, b) if disjoint(schema, a, b) => add(RuleId::CaxDw, vec![f]),
            Triple(x, p, y) if x == y && has(schema, p, Characteristic::Irreflexive) => {
                add(RuleId::PrpIrp, vec![f])
            }
            _ => {}
        }
        for &g in facts {
            match (f, g) {
                (Type(x, c), Type(x2, d)) if x == x2 && c < d && disjoint(schema, c, d) => {
                    add(RuleId::CaxDw, vec![f, g])
                }
                (Triple(x, p, y), Triple(y2, p2, x2))
                    if p == p2 && x == x2 && y == y2 && has(schema, p, Characteristic::Asymmetric) =>
                {
                    add(RuleId::PrpAsyp, vec![f, g])
                }
                (Triple(x, p, y), Triple(x2, p2, y2))
                    if p == p2 && x == x2 && y < y2 && has(schema, p, Characteristic::Functional) =>
                {
                    add(RuleId::PrpFp, vec![f, g])
                }
                (Triple(x, p, y), Triple(x2, p2, y2))
                    if p == p2
                        && y == y2
                        && x < x2
                        && has(schema, p, Characteristic::InverseFunctional) =>
                {
                    add(RuleId::PrpIfp, vec![f, g])
                }
                _ => {}
            }
        }
    }
    out
}

/// Closure and violations of `kg` under `schema`.
pub fn naive(schema: &Schema, kg: &KnowledgeGraph) -> NaiveResult {
    let mut facts = initial_facts(schema, kg);
    loop {
        let before = facts.len();
        let new = one_step(schema, &facts);
        facts.extend(new);
        if facts.len() == before {
            break;
        }
    }
    let violations = violations(schema, &facts);
    NaiveResult { facts, violations }
}
