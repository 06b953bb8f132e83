//! RDF output (N-Triples and Turtle) and an N-Triples reader.
//!
//! Statements are emitted sorted by their rendered subject, predicate and
//! object, so equal inputs give byte-identical files. Named classes,
//! relations and entities render as `{base}C{n}`, `{base}R{n}` and
//! `{base}E{n}`; the virtual root is `owl:Thing`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::config::OutputFormat;
use crate::kg::{KnowledgeGraph, Triple};
use crate::schema::{
    Characteristic, ClassHierarchy, ClassId, EntityId, RelationId, RelationProfile, Schema,
    SchemaError,
};

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const DEFAULT_BASE: &str = "http://pygraf.t/";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

/// A resource the serializer knows how to name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Class(ClassId),
    Relation(RelationId),
    Entity(EntityId),
    Thing,
    Vocab(Vocab),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vocab {
    Type,
    SubClassOf,
    SubPropertyOf,
    Domain,
    Range,
    OwlClass,
    ObjectProperty,
    NamedIndividual,
    DisjointWith,
    InverseOf,
    Flag(Characteristic),
}

impl Vocab {
    fn iri(self) -> String {
        match self {
            Vocab::Type => format!("{RDF}type"),
            Vocab::SubClassOf => format!("{RDFS}subClassOf"),
            Vocab::SubPropertyOf => format!("{RDFS}subPropertyOf"),
            Vocab::Domain => format!("{RDFS}domain"),
            Vocab::Range => format!("{RDFS}range"),
            Vocab::OwlClass => format!("{OWL}Class"),
            Vocab::ObjectProperty => format!("{OWL}ObjectProperty"),
            Vocab::NamedIndividual => format!("{OWL}NamedIndividual"),
            Vocab::DisjointWith => format!("{OWL}disjointWith"),
            Vocab::InverseOf => format!("{OWL}inverseOf"),
            Vocab::Flag(c) => format!("{OWL}{}", c.owl_name()),
        }
    }

    fn from_iri(iri: &str) -> Option<Vocab> {
        if let Some(local) = iri.strip_prefix(RDF) {
            return (local == "type").then_some(Vocab::Type);
        }
        if let Some(local) = iri.strip_prefix(RDFS) {
            return match local {
                "subClassOf" => Some(Vocab::SubClassOf),
                "subPropertyOf" => Some(Vocab::SubPropertyOf),
                "domain" => Some(Vocab::Domain),
                "range" => Some(Vocab::Range),
                _ => None,
            };
        }
        let local = iri.strip_prefix(OWL)?;
        match local {
            "Class" => Some(Vocab::OwlClass),
            "ObjectProperty" => Some(Vocab::ObjectProperty),
            "NamedIndividual" => Some(Vocab::NamedIndividual),
            "disjointWith" => Some(Vocab::DisjointWith),
            "inverseOf" => Some(Vocab::InverseOf),
            other => Characteristic::from_owl_name(other).map(Vocab::Flag),
        }
    }
}

/// How identifiers map to IRIs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IriPolicy {
    pub base: String,
}

impl Default for IriPolicy {
    fn default() -> Self {
        IriPolicy {
            base: DEFAULT_BASE.to_string(),
        }
    }
}

impl IriPolicy {
    pub fn render(&self, t: Term) -> String {
        match t {
            Term::Class(c) => format!("{}{c}", self.base),
            Term::Relation(r) => format!("{}{r}", self.base),
            Term::Entity(e) => format!("{}{e}", self.base),
            Term::Thing => format!("{OWL}Thing"),
            Term::Vocab(v) => v.iri(),
        }
    }

    pub fn parse(&self, iri: &str) -> Option<Term> {
        if iri == format!("{OWL}Thing") {
            return Some(Term::Thing);
        }
        if let Some(local) = iri.strip_prefix(self.base.as_str()) {
            let (kind, digits) = local.split_at_checked(1)?;
            // reject "C01" and the like so rendering stays a bijection
            if digits.is_empty()
                || !digits.bytes().all(|b| b.is_ascii_digit())
                || (digits.len() > 1 && digits.starts_with('0'))
            {
                return None;
            }
            let n: u32 = digits.parse().ok()?;
            return match kind {
                "C" => Some(Term::Class(ClassId(n))),
                "R" => Some(Term::Relation(RelationId(n))),
                "E" => Some(Term::Entity(EntityId(n))),
                _ => None,
            };
        }
        Vocab::from_iri(iri).map(Term::Vocab)
    }
}

type Statement = (Term, Term, Term);

fn statements(schema: Option<&Schema>, kg: Option<&KnowledgeGraph>) -> Vec<Statement> {
    use Term::*;
    let ty = Vocab(self::Vocab::Type);
    let mut out = Vec::new();
    if let Some(schema) = schema {
        schema_statements(schema, &mut out);
    }
    if let Some(kg) = kg {
        for e in kg.entities() {
            out.push((Entity(e), ty, Vocab(self::Vocab::NamedIndividual)));
            for &c in kg.types_of(e) {
                out.push((Entity(e), ty, Class(c)));
            }
        }
        for t in &kg.triples {
            out.push((Entity(t.s), Relation(t.p), Entity(t.o)));
        }
    }
    out
}

fn schema_statements(schema: &Schema, out: &mut Vec<Statement>) {
    use Term::*;
    let ty = Vocab(self::Vocab::Type);
    out.push((Thing, ty, Vocab(self::Vocab::OwlClass)));
    let h = &schema.hierarchy;
    for c in h.classes() {
        out.push((Class(c), ty, Vocab(self::Vocab::OwlClass)));
        let parent = h.parent(c).map(Class).unwrap_or(Thing);
        out.push((Class(c), Vocab(self::Vocab::SubClassOf), parent));
    }
    for &(a, b) in h.disjoint_pairs() {
        out.push((Class(a), Vocab(self::Vocab::DisjointWith), Class(b)));
    }
    for r in schema.relation_ids() {
        let p = schema.relation(r);
        out.push((Relation(r), ty, Vocab(self::Vocab::ObjectProperty)));
        for c in p.flags.iter() {
            out.push((Relation(r), ty, Vocab(self::Vocab::Flag(c))));
        }
        if let Some(d) = p.domain {
            out.push((Relation(r), Vocab(self::Vocab::Domain), Class(d)));
        }
        if let Some(d) = p.range {
            out.push((Relation(r), Vocab(self::Vocab::Range), Class(d)));
        }
        if let Some(q) = p.inverse_of {
            out.push((Relation(r), Vocab(self::Vocab::InverseOf), Relation(q)));
        }
        if let Some(q) = p.subproperty_of {
            out.push((Relation(r), Vocab(self::Vocab::SubPropertyOf), Relation(q)));
        }
    }
}

/// Schema plus graph as RDF text. Pass `None` for a schema-only document.
pub fn serialize(
    schema: &Schema,
    kg: Option<&KnowledgeGraph>,
    format: OutputFormat,
    policy: &IriPolicy,
) -> String {
    render(statements(Some(schema), kg), format, policy)
}

/// Graph-only document: entity declarations, typing and triples.
pub fn serialize_kg(kg: &KnowledgeGraph, format: OutputFormat, policy: &IriPolicy) -> String {
    render(statements(None, Some(kg)), format, policy)
}

fn render(statements: Vec<Statement>, format: OutputFormat, policy: &IriPolicy) -> String {
    let mut rendered: Vec<[String; 3]> = statements
        .into_iter()
        .map(|(s, p, o)| [policy.render(s), policy.render(p), policy.render(o)])
        .collect();
    rendered.sort_unstable();
    rendered.dedup();
    match format {
        OutputFormat::Ntriples => {
            let mut out = String::with_capacity(rendered.len() * 80);
            for [s, p, o] in &rendered {
                let _ = writeln!(out, "<{s}> <{p}> <{o}> .");
            }
            out
        }
        OutputFormat::Turtle => turtle(&rendered, policy),
    }
}

fn turtle(rendered: &[[String; 3]], policy: &IriPolicy) -> String {
    let short = |iri: &str| -> String {
        if iri == format!("{RDF}type") {
            return "a".into();
        }
        for (prefix, ns) in [("", policy.base.as_str()), ("rdf", RDF), ("rdfs", RDFS), ("owl", OWL)] {
            if let Some(local) = iri.strip_prefix(ns) {
                if !local.is_empty() && local.bytes().all(|b| b.is_ascii_alphanumeric()) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{iri}>")
    };
    let mut out = String::new();
    let _ = writeln!(out, "@prefix : <{}> .", policy.base);
    for (prefix, ns) in [("owl", OWL), ("rdf", RDF), ("rdfs", RDFS)] {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    let mut by_subject: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for [s, p, o] in rendered {
        by_subject.entry(s).or_default().push((p, o));
    }
    for (s, pos) in by_subject {
        out.push('\n');
        out.push_str(&short(s));
        for (i, (p, o)) in pos.iter().enumerate() {
            let sep = if i == 0 { " " } else { " ;\n    " };
            let _ = write!(out, "{sep}{} {}", short(p), short(o));
        }
        out.push_str(" .\n");
    }
    out
}

/// Result of reading an N-Triples document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Parsed {
    pub schema: Schema,
    pub kg: KnowledgeGraph,
    /// Line number and text of statements outside the supported vocabulary.
    pub skipped: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Iri(String),
    Other,
}

/// Reads N-Triples produced by [`serialize`] (or any document over the same
/// vocabulary). Several documents can be read as one by passing them in
/// order; line numbers then refer to the concatenation.
pub fn parse_ntriples(text: &str, policy: &IriPolicy) -> Result<Parsed, ParseError> {
    let mut b = Builder::default();
    let mut skipped = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (s, p, o) = split_statement(trimmed).map_err(|m| ParseError::new(line, m))?;
        let understood = match (&s, &p, &o) {
            (Node::Iri(s), Node::Iri(p), Node::Iri(o)) => {
                match (policy.parse(s), policy.parse(p), policy.parse(o)) {
                    (Some(s), Some(p), Some(o)) => b.add(s, p, o),
                    _ => false,
                }
            }
            _ => false,
        };
        if !understood {
            skipped.push((line, trimmed.to_string()));
        }
    }
    let (schema, kg) = b.finish().map_err(|e| ParseError::new(0, e.to_string()))?;
    Ok(Parsed {
        schema,
        kg,
        skipped,
    })
}

fn split_statement(line: &str) -> Result<(Node, Node, Node), String> {
    let mut rest = line;
    let mut nodes = Vec::with_capacity(3);
    for _ in 0..3 {
        rest = rest.trim_start();
        let (node, after) = term(rest)?;
        nodes.push(node);
        rest = after;
    }
    let rest = rest.trim();
    let rest = rest
        .strip_prefix('.')
        .ok_or_else(|| "statement does not end with '.'".to_string())?;
    let rest = rest.trim();
    if !rest.is_empty() && !rest.starts_with('#') {
        return Err(format!("unexpected text after '.': {rest}"));
    }
    let o = nodes.pop().expect("three nodes");
    let p = nodes.pop().expect("three nodes");
    let s = nodes.pop().expect("three nodes");
    Ok((s, p, o))
}

fn term(text: &str) -> Result<(Node, &str), String> {
    if let Some(rest) = text.strip_prefix('<') {
        let end = rest.find('>').ok_or("unterminated IRI")?;
        let iri = &rest[..end];
        if iri.contains(char::is_whitespace) {
            return Err(format!("whitespace in IRI <{iri}>"));
        }
        return Ok((Node::Iri(iri.to_string()), &rest[end + 1..]));
    }
    if let Some(rest) = text.strip_prefix("_:") {
        let end = rest.find(char::is_whitespace).unwrap_or(rest.len());
        if end == 0 {
            return Err("empty blank node label".into());
        }
        return Ok((Node::Other, &rest[end..]));
    }
    if let Some(rest) = text.strip_prefix('"') {
        let bytes = rest.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'\\' => i += 2,
                b'"' => break,
                _ => i += 1,
            }
        }
        if i >= bytes.len() {
            return Err("unterminated literal".into());
        }
        let mut after = &rest[i + 1..];
        if let Some(r) = after.strip_prefix("^^") {
            let (_, r) = term(r)?;
            after = r;
        } else if let Some(r) = after.strip_prefix('@') {
            let end = r
                .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-'))
                .unwrap_or(r.len());
            after = &r[end..];
        }
        return Ok((Node::Other, after));
    }
    Err(format!(
        "expected a term at `{}`",
        text.chars().take(20).collect::<String>()
    ))
}

#[derive(Default)]
struct Builder {
    classes: usize,
    parents: BTreeMap<ClassId, ClassId>,
    disjoint: Vec<(ClassId, ClassId)>,
    relations: BTreeMap<RelationId, RelationProfile>,
    entities: usize,
    typing: BTreeMap<EntityId, Vec<ClassId>>,
    triples: Vec<Triple>,
}

impl Builder {
    fn class(&mut self, c: ClassId) {
        self.classes = self.classes.max(c.index() + 1);
    }

    fn relation(&mut self, r: RelationId) -> &mut RelationProfile {
        self.relations.entry(r).or_default()
    }

    fn entity(&mut self, e: EntityId) {
        self.entities = self.entities.max(e.index() + 1);
    }

    /// Records one statement; false if it is outside the vocabulary.
    fn add(&mut self, s: Term, p: Term, o: Term) -> bool {
        use Term::*;
        use self::Vocab as V;
        match (s, p, o) {
            (Thing, Vocab(V::Type), Vocab(V::OwlClass)) => {}
            (Class(c), Vocab(V::Type), Vocab(V::OwlClass)) => self.class(c),
            (Class(c), Vocab(V::SubClassOf), Thing) => self.class(c),
            (Class(c), Vocab(V::SubClassOf), Class(d)) => {
                self.class(c);
                self.class(d);
                self.parents.insert(c, d);
            }
            (Class(a), Vocab(V::DisjointWith), Class(b)) => {
                self.class(a);
                self.class(b);
                self.disjoint.push((a, b));
            }
            (Relation(r), Vocab(V::Type), Vocab(V::ObjectProperty)) => {
                self.relation(r);
            }
            (Relation(r), Vocab(V::Type), Vocab(V::Flag(c))) => self.relation(r).flags.insert(c),
            (Relation(r), Vocab(V::Domain), Class(c)) => {
                self.class(c);
                self.relation(r).domain = Some(c);
            }
            (Relation(r), Vocab(V::Range), Class(c)) => {
                self.class(c);
                self.relation(r).range = Some(c);
            }
            (Relation(r), Vocab(V::InverseOf), Relation(q)) => {
                self.relation(r).inverse_of = Some(q);
                self.relation(q).inverse_of = Some(r);
            }
            (Relation(r), Vocab(V::SubPropertyOf), Relation(q)) => {
                self.relation(q);
                self.relation(r).subproperty_of = Some(q);
            }
            (Entity(e), Vocab(V::Type), Vocab(V::NamedIndividual)) => self.entity(e),
            (Entity(e), Vocab(V::Type), Class(c)) => {
                self.entity(e);
                self.class(c);
                self.typing.entry(e).or_default().push(c);
            }
            (Entity(a), Relation(r), Entity(b)) => {
                self.entity(a);
                self.entity(b);
                self.relation(r);
                self.triples.push(Triple::new(a, r, b));
            }
            _ => return false,
        }
        true
    }

    fn finish(self) -> Result<(Schema, KnowledgeGraph), SchemaError> {
        let mut parents = vec![None; self.classes];
        for (c, p) in self.parents {
            parents[c.index()] = Some(p);
        }
        let mut h = ClassHierarchy::from_parents(&parents)?;
        for (a, b) in self.disjoint {
            h.add_disjoint_unchecked(a, b);
        }
        let nr = self
            .relations
            .keys()
            .next_back()
            .map_or(0, |r| r.index() + 1);
        let mut relations = vec![RelationProfile::default(); nr];
        for (r, p) in self.relations {
            relations[r.index()] = p;
        }
        let mut kg = KnowledgeGraph::with_entities(self.entities);
        for (e, mut classes) in self.typing {
            classes.sort_unstable();
            classes.dedup();
            kg.typing[e.index()] = classes;
        }
        kg.triples = self.triples;
        Ok((Schema::new(h, relations), kg))
    }
}
