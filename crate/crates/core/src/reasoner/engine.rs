use rustc_hash::FxHashMap;

use super::{Axiom, ConsistencyReport, Fact, Premise, RuleId, Step, Violation};
use crate::schema::{Characteristic, ClassId, EntityId, RelationId, Schema};

type FactId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ref {
    Fact(FactId),
    Axiom(Axiom),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Origin {
    Asserted,
    Derived { rule: RuleId, premises: Vec<Ref> },
}

#[derive(Debug, Clone)]
struct RawViolation {
    rule: RuleId,
    facts: Vec<FactId>,
    axiom: Axiom,
}

#[derive(Debug, Clone, Copy, Default)]
struct RelInfo {
    domain: Option<ClassId>,
    range: Option<ClassId>,
    reflexive: bool,
    irreflexive: bool,
    symmetric: bool,
    asymmetric: bool,
    transitive: bool,
    functional: bool,
    inverse_functional: bool,
}

/// Why a tentative assertion was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rejection {
    /// The violation rule that fired.
    pub violation: RuleId,
    /// Rule that produced the newest clashing fact (the violation rule
    /// itself when that fact was asserted directly).
    pub cause: RuleId,
}

/// Why a bounded assertion was refused.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refusal {
    Violation(Rejection),
    /// The assertion entailed more facts than allowed.
    TooManyInferences,
}

#[derive(Debug, Clone, Copy)]
struct Checkpoint {
    facts: usize,
    violations: usize,
    cursor: usize,
    rounds: usize,
}

/// Materialized facts with provenance, maintained incrementally.
///
/// Facts are processed semi-naively: every new fact is joined once against
/// everything already stored, so each rule instance fires when its last
/// premise arrives. Insertions are journaled, which lets a caller try an
/// assertion and roll it back if it leads to a violation.
#[derive(Debug, Clone)]
pub struct Closure<'s> {
    schema: &'s Schema,
    rel: Vec<RelInfo>,
    /// Every `q` with `p owl:inverseOf q` stated on either side.
    inverses: Vec<Vec<RelationId>>,
    disjoint_with: Vec<Vec<ClassId>>,
    reflexive_on_domain: Vec<Vec<RelationId>>,

    facts: Vec<Fact>,
    ids: FxHashMap<Fact, FactId>,
    origin: Vec<Origin>,
    cursor: usize,
    rounds: usize,

    types: Vec<Vec<ClassId>>,
    members: Vec<Vec<EntityId>>,
    out: FxHashMap<(RelationId, EntityId), Vec<EntityId>>,
    inn: FxHashMap<(RelationId, EntityId), Vec<EntityId>>,
    by_relation: Vec<Vec<(EntityId, EntityId)>>,
    supers: Vec<Vec<ClassId>>,
    subs: Vec<Vec<ClassId>>,
    super_props: Vec<Vec<RelationId>>,
    sub_props: Vec<Vec<RelationId>>,

    violations: Vec<RawViolation>,
    stop_on_violation: bool,
    /// Fact count at which a bounded assertion gives up.
    cap: Option<usize>,
}

impl<'s> Closure<'s> {
    pub fn new(schema: &'s Schema) -> Self {
        let nc = schema.hierarchy.len();
        let nr = schema.relations.len();
        let mut rel = vec![RelInfo::default(); nr];
        let mut reflexive_on_domain = vec![Vec::new(); nc];
        for r in schema.relation_ids() {
            let p = schema.relation(r);
            let f = p.flags;
            rel[r.index()] = RelInfo {
                domain: p.domain,
                range: p.range,
                reflexive: f.contains(Characteristic::Reflexive),
                irreflexive: f.contains(Characteristic::Irreflexive),
                symmetric: f.contains(Characteristic::Symmetric),
                asymmetric: f.contains(Characteristic::Asymmetric),
                transitive: f.contains(Characteristic::Transitive),
                functional: f.contains(Characteristic::Functional),
                inverse_functional: f.contains(Characteristic::InverseFunctional),
            };
            if let (true, Some(d)) = (rel[r.index()].reflexive, p.domain) {
                reflexive_on_domain[d.index()].push(r);
            }
        }
        let mut inverses = vec![Vec::new(); nr];
        for r in schema.relation_ids() {
            if let Some(q) = schema.relation(r).inverse_of {
                for (a, b) in [(r, q), (q, r)] {
                    if !inverses[a.index()].contains(&b) {
                        inverses[a.index()].push(b);
                    }
                }
            }
        }
        let mut disjoint_with = vec![Vec::new(); nc];
        for &(a, b) in schema.hierarchy.disjoint_pairs() {
            disjoint_with[a.index()].push(b);
            disjoint_with[b.index()].push(a);
        }
        Closure {
            schema,
            rel,
            inverses,
            disjoint_with,
            reflexive_on_domain,
            facts: Vec::new(),
            ids: FxHashMap::default(),
            origin: Vec::new(),
            cursor: 0,
            rounds: 0,
            types: Vec::new(),
            members: vec![Vec::new(); nc],
            out: FxHashMap::default(),
            inn: FxHashMap::default(),
            by_relation: vec![Vec::new(); nr],
            supers: vec![Vec::new(); nc],
            subs: vec![Vec::new(); nc],
            super_props: vec![Vec::new(); nr],
            sub_props: vec![Vec::new(); nr],
            violations: Vec::new(),
            stop_on_violation: false,
            cap: None,
        }
    }

    /// A closure seeded with the schema's subclass/subproperty axioms and
    /// run to fixpoint.
    pub fn for_schema(schema: &'s Schema) -> Self {
        let mut c = Closure::new(schema);
        for f in super::schema_facts(schema) {
            c.assert_fact(f);
        }
        c.run();
        c
    }

    pub fn schema(&self) -> &'s Schema {
        self.schema
    }

    /// Stores an asserted fact without propagating it. Returns false if the
    /// fact was already known.
    pub fn assert_fact(&mut self, fact: Fact) -> bool {
        self.insert(fact, Origin::Asserted).is_some()
    }

    /// Propagates pending facts to fixpoint; returns the rounds taken.
    pub fn run(&mut self) -> usize {
        let start = self.rounds;
        while self.cursor < self.facts.len() {
            let end = self.facts.len();
            self.rounds += 1;
            while self.cursor < end {
                let id = self.cursor as FactId;
                self.cursor += 1;
                self.fire(id);
                if self.stop_on_violation && !self.violations.is_empty() {
                    return self.rounds - start;
                }
                if self.cap.is_some_and(|cap| self.facts.len() > cap) {
                    return self.rounds - start;
                }
            }
        }
        self.rounds - start
    }

    /// Asserts `fact` and propagates it unless that yields a violation, in
    /// which case every effect is undone. The closure must be violation-free
    /// and at fixpoint beforehand.
    pub fn try_assert(&mut self, fact: Fact) -> Result<bool, Rejection> {
        self.try_assert_all(&[fact])
    }

    /// All-or-nothing version of [`Closure::try_assert`]; true if anything new
    /// was stored.
    pub fn try_assert_all(&mut self, facts: &[Fact]) -> Result<bool, Rejection> {
        debug_assert!(self.violations.is_empty());
        debug_assert_eq!(self.cursor, self.facts.len());
        let cp = self.checkpoint();
        let mut any = false;
        for &f in facts {
            any |= self.insert(f, Origin::Asserted).is_some();
            if !self.violations.is_empty() {
                break;
            }
        }
        if self.violations.is_empty() {
            self.stop_on_violation = true;
            self.run();
            self.stop_on_violation = false;
        }
        if let Some(v) = self.violations.first() {
            let newest = *v.facts.iter().max().expect("violation has facts");
            let cause = match &self.origin[newest as usize] {
                Origin::Derived { rule, .. } => *rule,
                Origin::Asserted => v.rule,
            };
            let rejection = Rejection {
                violation: v.rule,
                cause,
            };
            self.rollback(cp);
            return Err(rejection);
        }
        Ok(any)
    }

    /// Like [`Closure::try_assert`], but also undoes the assertion when it
    /// would add more than `max_new` facts in total.
    pub fn try_assert_bounded(&mut self, fact: Fact, max_new: usize) -> Result<bool, Refusal> {
        let cp = self.checkpoint();
        self.cap = Some(cp.facts + max_new);
        let outcome = self.try_assert(fact);
        self.cap = None;
        match outcome {
            Err(rejection) => Err(Refusal::Violation(rejection)),
            Ok(_) if self.facts.len() > cp.facts + max_new => {
                self.rollback(cp);
                Err(Refusal::TooManyInferences)
            }
            Ok(any) => Ok(any),
        }
    }

    fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            facts: self.facts.len(),
            violations: self.violations.len(),
            cursor: self.cursor,
            rounds: self.rounds,
        }
    }

    fn rollback(&mut self, cp: Checkpoint) {
        while self.facts.len() > cp.facts {
            let fact = self.facts.pop().expect("non-empty");
            self.origin.pop();
            self.ids.remove(&fact);
            self.unindex(fact);
        }
        self.violations.truncate(cp.violations);
        self.cursor = cp.cursor;
        self.rounds = cp.rounds;
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.ids.contains_key(fact)
    }

    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.facts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facts.is_empty()
    }

    pub fn derived_count(&self) -> usize {
        self.origin
            .iter()
            .filter(|o| matches!(o, Origin::Derived { .. }))
            .count()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.facts.iter()
    }

    /// Classes of `e`, asserted and derived.
    pub fn types_of(&self, e: EntityId) -> &[ClassId] {
        self.types.get(e.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn objects(&self, p: RelationId, s: EntityId) -> &[EntityId] {
        self.out.get(&(p, s)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn subjects(&self, p: RelationId, o: EntityId) -> &[EntityId] {
        self.inn.get(&(p, o)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn has_triple(&self, s: EntityId, p: RelationId, o: EntityId) -> bool {
        self.objects(p, s).contains(&o)
    }

    /// Superproperties of `p` (strict), from the subproperty closure.
    pub fn super_properties(&self, p: RelationId) -> &[RelationId] {
        &self.super_props[p.index()]
    }

    // ---- storage --------------------------------------------------------

    fn insert(&mut self, fact: Fact, origin: Origin) -> Option<FactId> {
        if self.ids.contains_key(&fact) {
            return None;
        }
        let id = self.facts.len() as FactId;
        self.check_violations(fact, id);
        self.facts.push(fact);
        self.origin.push(origin);
        self.ids.insert(fact, id);
        self.index(fact);
        Some(id)
    }

    fn derive(&mut self, fact: Fact, rule: RuleId, premises: Vec<Ref>) {
        if !self.ids.contains_key(&fact) {
            self.insert(fact, Origin::Derived { rule, premises });
        }
    }

    fn index(&mut self, fact: Fact) {
        match fact {
            Fact::Type(e, c) => {
                if self.types.len() <= e.index() {
                    self.types.resize_with(e.index() + 1, Vec::new);
                }
                self.types[e.index()].push(c);
                self.members[c.index()].push(e);
            }
            Fact::Triple(s, p, o) => {
                self.out.entry((p, s)).or_default().push(o);
                self.inn.entry((p, o)).or_default().push(s);
                self.by_relation[p.index()].push((s, o));
            }
            Fact::SubClassOf(a, b) => {
                self.supers[a.index()].push(b);
                self.subs[b.index()].push(a);
            }
            Fact::SubPropertyOf(a, b) => {
                self.super_props[a.index()].push(b);
                self.sub_props[b.index()].push(a);
            }
        }
    }

    fn unindex(&mut self, fact: Fact) {
        match fact {
            Fact::Type(e, c) => {
                self.types[e.index()].pop();
                self.members[c.index()].pop();
            }
            Fact::Triple(s, p, o) => {
                self.out.get_mut(&(p, s)).expect("indexed").pop();
                self.inn.get_mut(&(p, o)).expect("indexed").pop();
                self.by_relation[p.index()].pop();
            }
            Fact::SubClassOf(a, b) => {
                self.supers[a.index()].pop();
                self.subs[b.index()].pop();
            }
            Fact::SubPropertyOf(a, b) => {
                self.super_props[a.index()].pop();
                self.sub_props[b.index()].pop();
            }
        }
    }

    fn id(&self, fact: &Fact) -> FactId {
        self.ids[fact]
    }

    /// Violations completed by `fact`, which is about to get id `id`.
    fn check_violations(&mut self, fact: Fact, id: FactId) {
        let mut found: Vec<RawViolation> = Vec::new();
        match fact {
            Fact::Type(e, c) => {
                let Some(known) = self.types.get(e.index()) else {
                    return;
                };
                for &d in &self.disjoint_with[c.index()] {
                    if known.contains(&d) {
                        found.push(RawViolation {
                            rule: RuleId::CaxDw,
                            facts: vec![self.ids[&Fact::Type(e, d)], id],
                            axiom: Axiom::Disjoint(c.min(d), c.max(d)),
                        });
                    }
                }
            }
            Fact::Triple(s, p, o) => {
                let info = self.rel[p.index()];
                if info.irreflexive && s == o {
                    found.push(RawViolation {
                        rule: RuleId::PrpIrp,
                        facts: vec![id],
                        axiom: Axiom::Has(p, Characteristic::Irreflexive),
                    });
                }
                if info.asymmetric {
                    let facts = if s == o {
                        Some(vec![id])
                    } else {
                        self.ids
                            .get(&Fact::Triple(o, p, s))
                            .map(|&other| vec![other, id])
                    };
                    if let Some(facts) = facts {
                        found.push(RawViolation {
                            rule: RuleId::PrpAsyp,
                            facts,
                            axiom: Axiom::Has(p, Characteristic::Asymmetric),
                        });
                    }
                }
                if info.functional {
                    for &o2 in self.objects(p, s) {
                        found.push(RawViolation {
                            rule: RuleId::PrpFp,
                            facts: vec![self.ids[&Fact::Triple(s, p, o2)], id],
                            axiom: Axiom::Has(p, Characteristic::Functional),
                        });
                    }
                }
                if info.inverse_functional {
                    for &s2 in self.subjects(p, o) {
                        found.push(RawViolation {
                            rule: RuleId::PrpIfp,
                            facts: vec![self.ids[&Fact::Triple(s2, p, o)], id],
                            axiom: Axiom::Has(p, Characteristic::InverseFunctional),
                        });
                    }
                }
            }
            Fact::SubClassOf(a, b) => {
                if self.disjoint_with[a.index()].contains(&b) {
                    found.push(RawViolation {
                        rule: RuleId::CaxDw,
                        facts: vec![id],
                        axiom: Axiom::Disjoint(a.min(b), a.max(b)),
                    });
                }
            }
            Fact::SubPropertyOf(..) => {}
        }
        self.violations.extend(found);
    }

    // ---- rules ----------------------------------------------------------

    fn fire(&mut self, id: FactId) {
        let fact = self.facts[id as usize];
        let me = Ref::Fact(id);
        match fact {
            Fact::Type(x, c) => {
                for d in self.supers[c.index()].clone() {
                    let sco = self.id(&Fact::SubClassOf(c, d));
                    self.derive(Fact::Type(x, d), RuleId::CaxSco, vec![Ref::Fact(sco), me]);
                }
                for p in self.reflexive_on_domain[c.index()].clone() {
                    self.derive(
                        Fact::Triple(x, p, x),
                        RuleId::PrpRfp,
                        vec![
                            Ref::Axiom(Axiom::Has(p, Characteristic::Reflexive)),
                            Ref::Axiom(Axiom::Domain(p, c)),
                            me,
                        ],
                    );
                }
            }
            Fact::Triple(x, p, y) => {
                let info = self.rel[p.index()];
                if let Some(c) = info.domain {
                    self.derive(
                        Fact::Type(x, c),
                        RuleId::PrpDom,
                        vec![Ref::Axiom(Axiom::Domain(p, c)), me],
                    );
                }
                if let Some(c) = info.range {
                    self.derive(
                        Fact::Type(y, c),
                        RuleId::PrpRng,
                        vec![Ref::Axiom(Axiom::Range(p, c)), me],
                    );
                }
                if info.symmetric {
                    self.derive(
                        Fact::Triple(y, p, x),
                        RuleId::PrpSymp,
                        vec![Ref::Axiom(Axiom::Has(p, Characteristic::Symmetric)), me],
                    );
                }
                if info.transitive {
                    let ax = Ref::Axiom(Axiom::Has(p, Characteristic::Transitive));
                    for z in self.objects(p, y).to_vec() {
                        let other = self.id(&Fact::Triple(y, p, z));
                        self.derive(
                            Fact::Triple(x, p, z),
                            RuleId::PrpTrp,
                            vec![ax, me, Ref::Fact(other)],
                        );
                    }
                    for w in self.subjects(p, x).to_vec() {
                        let other = self.id(&Fact::Triple(w, p, x));
                        self.derive(
                            Fact::Triple(w, p, y),
                            RuleId::PrpTrp,
                            vec![ax, Ref::Fact(other), me],
                        );
                    }
                }
                for i in 0..self.inverses[p.index()].len() {
                    let q = self.inverses[p.index()][i];
                    let (rule, axiom) = if p < q {
                        (RuleId::PrpInv1, Axiom::InverseOf(p, q))
                    } else {
                        (RuleId::PrpInv2, Axiom::InverseOf(q, p))
                    };
                    self.derive(Fact::Triple(y, q, x), rule, vec![Ref::Axiom(axiom), me]);
                }
                for q in self.super_props[p.index()].clone() {
                    let spo = self.id(&Fact::SubPropertyOf(p, q));
                    self.derive(
                        Fact::Triple(x, q, y),
                        RuleId::PrpSpo1,
                        vec![Ref::Fact(spo), me],
                    );
                }
                if info.reflexive {
                    let ax = Ref::Axiom(Axiom::Has(p, Characteristic::Reflexive));
                    self.derive(Fact::Triple(x, p, x), RuleId::PrpRfp, vec![ax, me]);
                    self.derive(Fact::Triple(y, p, y), RuleId::PrpRfp, vec![ax, me]);
                }
            }
            Fact::SubClassOf(a, b) => {
                for c in self.supers[b.index()].clone() {
                    let other = self.id(&Fact::SubClassOf(b, c));
                    self.derive(
                        Fact::SubClassOf(a, c),
                        RuleId::ScmSco,
                        vec![me, Ref::Fact(other)],
                    );
                }
                for z in self.subs[a.index()].clone() {
                    let other = self.id(&Fact::SubClassOf(z, a));
                    self.derive(
                        Fact::SubClassOf(z, b),
                        RuleId::ScmSco,
                        vec![Ref::Fact(other), me],
                    );
                }
                for x in self.members[a.index()].clone() {
                    let t = self.id(&Fact::Type(x, a));
                    self.derive(Fact::Type(x, b), RuleId::CaxSco, vec![me, Ref::Fact(t)]);
                }
            }
            Fact::SubPropertyOf(p, q) => {
                for r in self.super_props[q.index()].clone() {
                    let other = self.id(&Fact::SubPropertyOf(q, r));
                    self.derive(
                        Fact::SubPropertyOf(p, r),
                        RuleId::ScmSpo,
                        vec![me, Ref::Fact(other)],
                    );
                }
                for z in self.sub_props[p.index()].clone() {
                    let other = self.id(&Fact::SubPropertyOf(z, p));
                    self.derive(
                        Fact::SubPropertyOf(z, q),
                        RuleId::ScmSpo,
                        vec![Ref::Fact(other), me],
                    );
                }
                for (x, y) in self.by_relation[p.index()].clone() {
                    let t = self.id(&Fact::Triple(x, p, y));
                    self.derive(Fact::Triple(x, q, y), RuleId::PrpSpo1, vec![me, Ref::Fact(t)]);
                }
            }
        }
    }

    // ---- reporting ------------------------------------------------------

    fn premise(&self, r: Ref) -> Premise {
        match r {
            Ref::Fact(id) => Premise::Fact(self.facts[id as usize]),
            Ref::Axiom(a) => Premise::Axiom(a),
        }
    }

    fn derivation(&self, raw: &RawViolation) -> Vec<Step> {
        let mut needed = vec![false; self.facts.len()];
        let mut stack: Vec<FactId> = raw.facts.clone();
        while let Some(id) = stack.pop() {
            if std::mem::replace(&mut needed[id as usize], true) {
                continue;
            }
            if let Origin::Derived { premises, .. } = &self.origin[id as usize] {
                for p in premises {
                    if let Ref::Fact(f) = p {
                        stack.push(*f);
                    }
                }
            }
        }
        // ids are topologically ordered: premises always precede conclusions
        let mut steps: Vec<Step> = needed
            .iter()
            .enumerate()
            .filter(|(_, n)| **n)
            .filter_map(|(id, _)| match &self.origin[id] {
                Origin::Asserted => None,
                Origin::Derived { rule, premises } => Some(Step {
                    rule: *rule,
                    premises: premises.iter().map(|p| self.premise(*p)).collect(),
                    conclusion: Some(self.facts[id]),
                }),
            })
            .collect();
        let mut premises: Vec<Premise> = raw.facts.iter().map(|f| self.premise(Ref::Fact(*f))).collect();
        premises.push(Premise::Axiom(raw.axiom));
        steps.push(Step {
            rule: raw.rule,
            premises,
            conclusion: None,
        });
        steps
    }

    pub fn violations(&self) -> Vec<Violation> {
        self.violations
            .iter()
            .map(|raw| {
                let mut participants: Vec<Fact> =
                    raw.facts.iter().map(|id| self.facts[*id as usize]).collect();
                participants.sort_unstable();
                Violation {
                    rule: raw.rule,
                    participants,
                    derivation: self.derivation(raw),
                }
            })
            .collect()
    }

    pub fn report(&self) -> ConsistencyReport {
        let violations = self.violations();
        ConsistencyReport {
            consistent: violations.is_empty(),
            violations,
            closure_size: self.derived_count(),
            iterations: self.rounds,
        }
    }
}
