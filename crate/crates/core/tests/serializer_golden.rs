use std::path::PathBuf;

use kgsynth::serializer::{parse_ntriples, serialize, serialize_kg, IriPolicy};
use kgsynth::{
    Characteristic, CharacteristicSet, ClassHierarchy, EntityId, KnowledgeGraph,
    OutputFormat, RelationId, RelationProfile, Schema, Triple,
};

use Characteristic::*;

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Three classes, four relations and three entities that together use every
/// flag and every axiom kind once.
fn fixture() -> (Schema, KnowledgeGraph) {
    let mut h = ClassHierarchy::new();
    let c0 = h.push_class(None).unwrap();
    let c1 = h.push_class(Some(c0)).unwrap();
    let c2 = h.push_class(None).unwrap();
    assert!(h.add_disjoint(c2, c1).unwrap());

    let flags = |cs: &[Characteristic]| cs.iter().copied().collect::<CharacteristicSet>();
    let relations = vec![
        RelationProfile {
            flags: flags(&[Reflexive, Symmetric, Transitive]),
            domain: Some(c0),
            range: Some(c0),
            ..Default::default()
        },
        RelationProfile {
            flags: flags(&[Irreflexive, Asymmetric, Functional]),
            domain: Some(c1),
            range: Some(c2),
            inverse_of: Some(RelationId(2)),
            ..Default::default()
        },
        RelationProfile {
            flags: flags(&[InverseFunctional]),
            inverse_of: Some(RelationId(1)),
            subproperty_of: Some(RelationId(3)),
            ..Default::default()
        },
        RelationProfile::default(),
    ];

    let mut kg = KnowledgeGraph::with_entities(3);
    kg.typing[0] = vec![c1];
    kg.typing[2] = vec![c2, c0];
    let t = |s, p, o| Triple::new(EntityId(s), RelationId(p), EntityId(o));
    kg.triples = vec![t(2, 1, 1), t(0, 0, 1), t(1, 3, 1)];
    (Schema::new(h, relations), kg)
}

#[test]
fn schema_document_matches_golden() {
    let (schema, _) = fixture();
    let text = serialize(&schema, None, OutputFormat::Ntriples, &IriPolicy::default());
    assert_eq!(text, golden("schema.nt"));
}

#[test]
fn graph_document_matches_golden() {
    let (_, kg) = fixture();
    let text = serialize_kg(&kg, OutputFormat::Ntriples, &IriPolicy::default());
    assert_eq!(text, golden("kg.nt"));
}

#[test]
fn full_document_matches_golden() {
    let (schema, kg) = fixture();
    let text = serialize(&schema, Some(&kg), OutputFormat::Ntriples, &IriPolicy::default());
    assert_eq!(text, golden("full.nt"));
}

#[test]
fn turtle_document_matches_golden() {
    let (schema, kg) = fixture();
    let text = serialize(&schema, Some(&kg), OutputFormat::Turtle, &IriPolicy::default());
    assert_eq!(text, golden("full.ttl"));
}

#[test]
fn golden_documents_parse_back() {
    let (schema, kg) = fixture();
    let policy = IriPolicy::default();
    let full = parse_ntriples(&golden("full.nt"), &policy).unwrap();
    assert!(full.skipped.is_empty());
    assert_eq!(full.schema, schema);
    assert_eq!(full.kg, kg.canonical());

    // schema and graph files read as one document give the same result
    let split = parse_ntriples(&(golden("schema.nt") + &golden("kg.nt")), &policy).unwrap();
    assert_eq!(split.schema, full.schema);
    assert_eq!(split.kg, full.kg);
}

#[test]
fn custom_base_changes_only_local_names() {
    let (schema, kg) = fixture();
    let policy = IriPolicy {
        base: "urn:x:".into(),
    };
    let text = serialize(&schema, Some(&kg), OutputFormat::Ntriples, &policy);
    let expected = golden("full.nt").replace("http://pygraf.t/", "urn:x:");
    let mut lines: Vec<&str> = expected.lines().collect();
    lines.sort_unstable();
    assert_eq!(text.lines().collect::<Vec<_>>(), lines);
    let parsed = parse_ntriples(&text, &policy).unwrap();
    assert_eq!(parsed.schema, schema);
}

#[test]
fn foreign_statements_are_skipped_not_fatal() {
    let doc = format!(
        "# a comment\n\n{}<http://pygraf.t/E0> <http://www.w3.org/2000/01/rdf-schema#label> \"zero\"@en .\n\
         _:b0 <http://pygraf.t/R0> <http://pygraf.t/E0> .\n\
         <http://example.org/x> <http://pygraf.t/R0> <http://pygraf.t/E0> .\n",
        golden("full.nt")
    );
    let parsed = parse_ntriples(&doc, &IriPolicy::default()).unwrap();
    let lines: Vec<usize> = parsed.skipped.iter().map(|(l, _)| *l).collect();
    assert_eq!(lines, vec![38, 39, 40]);
    assert_eq!(parsed.schema, fixture().0);
}

#[test]
fn broken_statement_is_an_error_with_its_line() {
    let mut doc = golden("kg.nt");
    doc.push_str("<http://pygraf.t/E0> <http://pygraf.t/R0> <http://pygraf.t/E1>\n");
    let err = parse_ntriples(&doc, &IriPolicy::default()).unwrap_err();
    assert_eq!(err.line, 10);
}

#[test]
fn one_sided_inverse_reads_back_as_a_pair() {
    let golden_full = golden("full.nt");
    let doc: String = golden_full
        .lines()
        .filter(|l| !l.starts_with("<http://pygraf.t/R2> <http://www.w3.org/2002/07/owl#inverseOf>"))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(doc.lines().count() + 1, golden_full.lines().count());
    let parsed = parse_ntriples(&doc, &IriPolicy::default()).unwrap();
    assert_eq!(parsed.schema.relation(RelationId(2)).inverse_of, Some(RelationId(1)));
    assert_eq!(parsed.schema, fixture().0);
}
