use super::*;
use crate::schema::{CharacteristicSet, ClassHierarchy, RelationProfile};

fn e(i: u32) -> EntityId {
    EntityId(i)
}

fn r(i: u32) -> RelationId {
    RelationId(i)
}

fn one_relation(flags: &[Characteristic]) -> Schema {
    let profile = RelationProfile {
        flags: flags.iter().copied().collect(),
        ..Default::default()
    };
    Schema::new(ClassHierarchy::new(), vec![profile])
}

fn kg(n: usize, triples: &[(u32, u32, u32)]) -> KnowledgeGraph {
    let mut g = KnowledgeGraph::with_entities(n);
    g.triples = triples
        .iter()
        .map(|&(s, p, o)| Triple::new(e(s), r(p), e(o)))
        .collect();
    g
}

#[test]
fn symmetric_adds_reverse() {
    let s = one_relation(&[Characteristic::Symmetric]);
    let c = materialize(&s, &kg(2, &[(0, 0, 1)]));
    assert!(c.has_triple(e(1), r(0), e(0)));
    assert!(c.is_consistent());
}

#[test]
fn transitive_path_closes() {
    let s = one_relation(&[Characteristic::Transitive]);
    for n in 2..=20u32 {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, 0, i + 1)).collect();
        let c = materialize(&s, &kg(n as usize, &edges));
        let pairs = c.facts().filter(|f| matches!(f, Fact::Triple(..))).count();
        assert_eq!(pairs as u32, n * (n - 1) / 2);
    }
}

#[test]
fn empty_graph_has_empty_closure() {
    let s = Schema::default();
    let c = materialize(&s, &KnowledgeGraph::default());
    assert!(c.is_empty());
    assert!(check_consistency(&s, &KnowledgeGraph::default()).consistent);
}

#[test]
fn inverse_of_irreflexive_two_steps() {
    let mut s = one_relation(&[Characteristic::Irreflexive]);
    s.relations[0].inverse_of = Some(r(1));
    s.relations.push(RelationProfile {
        inverse_of: Some(r(0)),
        ..Default::default()
    });
    let report = check_consistency(&s, &kg(1, &[(0, 1, 0)]));
    assert!(!report.consistent);
    assert_eq!(report.violations.len(), 1);
    let v = &report.violations[0];
    assert_eq!(v.rule, RuleId::PrpIrp);
    assert_eq!(v.derivation.len(), 2);
    assert_eq!(v.derivation[0].rule, RuleId::PrpInv2);
    replay_violation(&s, &kg(1, &[(0, 1, 0)]), v).unwrap();
}

#[test]
fn unflagged_graph_is_consistent() {
    let mut s = one_relation(&[]);
    s.relations.push(RelationProfile::default());
    let triples: Vec<_> = (0..30).map(|i| (i % 7, i % 2, (i * 3) % 5)).collect();
    assert!(check_consistency(&s, &kg(7, &triples)).consistent);
}

#[test]
fn disjoint_domain_and_range_clash() {
    let mut h = ClassHierarchy::new();
    let a = h.push_class(None).unwrap();
    let b = h.push_class(None).unwrap();
    h.add_disjoint(a, b).unwrap();
    let s = Schema::new(
        h,
        vec![RelationProfile {
            domain: Some(a),
            range: Some(b),
            ..Default::default()
        }],
    );
    let g = kg(2, &[(0, 0, 1), (1, 0, 0)]);
    let report = check_consistency(&s, &g);
    assert!(!report.consistent);
    for v in &report.violations {
        assert_eq!(v.rule, RuleId::CaxDw);
        replay_violation(&s, &g, v).unwrap();
    }
}

#[test]
fn functional_under_una() {
    let s = one_relation(&[Characteristic::Functional]);
    let report = check_consistency(&s, &kg(3, &[(0, 0, 1), (0, 0, 2)]));
    assert_eq!(report.count_by_rule(RuleId::PrpFp), 1);
    let report = check_consistency(&s, &kg(3, &[(0, 0, 1), (2, 0, 1)]));
    assert!(report.consistent);
}

#[test]
fn reflexive_reaches_domain_members() {
    let mut h = ClassHierarchy::new();
    let a = h.push_class(None).unwrap();
    let s = Schema::new(
        h,
        vec![RelationProfile {
            flags: CharacteristicSet::EMPTY.with(Characteristic::Reflexive),
            domain: Some(a),
            range: Some(a),
            ..Default::default()
        }],
    );
    let mut g = KnowledgeGraph::with_entities(2);
    g.typing[1].push(a);
    let c = materialize(&s, &g);
    assert!(c.has_triple(e(1), r(0), e(1)));
    assert!(!c.has_triple(e(0), r(0), e(0)));
}

#[test]
fn try_assert_rolls_back() {
    let s = one_relation(&[Characteristic::Asymmetric, Characteristic::Irreflexive]);
    let mut c = Closure::new(&s);
    assert_eq!(c.try_assert(Fact::Triple(e(0), r(0), e(1))), Ok(true));
    let before: Vec<Fact> = c.facts().copied().collect();
    let err = c.try_assert(Fact::Triple(e(1), r(0), e(0))).unwrap_err();
    assert_eq!(err.violation, RuleId::PrpAsyp);
    assert_eq!(err.cause, RuleId::PrpAsyp);
    assert_eq!(c.facts().copied().collect::<Vec<_>>(), before);
    assert!(c.is_consistent());
    assert_eq!(c.try_assert(Fact::Triple(e(1), r(0), e(2))), Ok(true));
    assert_eq!(c.try_assert(Fact::Triple(e(1), r(0), e(2))), Ok(false));
}

#[test]
fn rejection_names_the_entailing_rule() {
    let mut s = one_relation(&[Characteristic::Symmetric]);
    s.relations.push(RelationProfile {
        flags: CharacteristicSet::EMPTY.with(Characteristic::Asymmetric),
        ..Default::default()
    });
    s.relations[0].subproperty_of = Some(r(1));
    let mut c = Closure::for_schema(&s);
    let err = c.try_assert(Fact::Triple(e(0), r(0), e(1))).unwrap_err();
    assert_eq!(err.violation, RuleId::PrpAsyp);
    assert_eq!(err.cause, RuleId::PrpSpo1);
    assert!(c.is_consistent());
}

#[test]
fn schema_check_catches_disjoint_parent() {
    let mut h = ClassHierarchy::new();
    let a = h.push_class(None).unwrap();
    let b = h.push_class(Some(a)).unwrap();
    h.add_disjoint_unchecked(a, b);
    let s = Schema::new(h, Vec::new());
    let report = check_schema_consistency(&s);
    assert!(!report.consistent);
    assert_eq!(report.violations[0].rule, RuleId::CaxDw);
}

#[test]
fn schema_check_follows_subproperty_domains() {
    let mut h = ClassHierarchy::new();
    let a = h.push_class(None).unwrap();
    let b = h.push_class(None).unwrap();
    h.add_disjoint(a, b).unwrap();
    let s = Schema::new(
        h,
        vec![
            RelationProfile {
                subproperty_of: Some(r(1)),
                domain: Some(a),
                ..Default::default()
            },
            RelationProfile {
                domain: Some(b),
                ..Default::default()
            },
        ],
    );
    let report = check_schema_consistency(&s);
    assert!(!report.consistent);
    let v = &report.violations[0];
    let rules: Vec<RuleId> = v.derivation.iter().map(|s| s.rule).collect();
    assert!(rules.contains(&RuleId::PrpSpo1));
    assert!(rules.contains(&RuleId::PrpDom));
    assert_eq!(v.rule, RuleId::CaxDw);
}

#[test]
fn rule_names_round_trip() {
    for rule in RuleId::ALL {
        assert_eq!(RuleId::from_name(rule.name()), Some(rule));
    }
    assert_eq!(RuleId::ALL.iter().filter(|r| r.is_violation()).count(), 5);
}

#[test]
fn report_renders_one_json_line_per_violation() {
    let s = one_relation(&[Characteristic::Irreflexive]);
    let report = check_consistency(&s, &kg(2, &[(0, 0, 0), (1, 0, 1)]));
    let text = report.to_json_lines();
    assert_eq!(text.lines().count(), 2);
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["rule"], "prp-irp");
    }
    assert!(report.to_text().starts_with("consistent = false"));
}

#[test]
fn relation_with_two_inverses() {
    let mut s = one_relation(&[]);
    for _ in 0..2 {
        s.relations.push(RelationProfile {
            inverse_of: Some(r(0)),
            ..Default::default()
        });
    }
    let c = materialize(&s, &kg(2, &[(0, 0, 1)]));
    assert!(c.has_triple(e(1), r(1), e(0)));
    assert!(c.has_triple(e(1), r(2), e(0)));
}
