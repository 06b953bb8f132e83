//! Independent check of a reported derivation: every step must be a valid
//! rule instance over facts that are asserted or concluded by an earlier
//! step, and the last step must be a valid violation.

use std::collections::HashSet;

use super::{asserted_facts, Axiom, Fact, Premise, RuleId, Violation};
use crate::kg::KnowledgeGraph;
use crate::schema::{Characteristic, Schema};

pub fn replay_violation(
    schema: &Schema,
    kg: &KnowledgeGraph,
    violation: &Violation,
) -> Result<(), String> {
    let mut known: HashSet<Fact> = asserted_facts(schema, kg).into_iter().collect();
    let Some((last, steps)) = violation.derivation.split_last() else {
        return Err("empty derivation".into());
    };
    for (i, step) in steps.iter().enumerate() {
        let (facts, axioms) = split(&step.premises, schema, &known)
            .map_err(|e| format!("step {}: {e}", i + 1))?;
        let Some(conclusion) = step.conclusion else {
            return Err(format!("step {} has no conclusion", i + 1));
        };
        if !entails(step.rule, &facts, &axioms, conclusion) {
            return Err(format!(
                "step {}: {} does not yield {conclusion}",
                i + 1,
                step.rule
            ));
        }
        known.insert(conclusion);
    }
    if last.rule != violation.rule || last.conclusion.is_some() {
        return Err("last step is not the reported violation".into());
    }
    let (facts, axioms) = split(&last.premises, schema, &known)?;
    let mut participants = facts.clone();
    participants.sort_unstable();
    participants.dedup();
    if participants != violation.participants {
        return Err("participants differ from the final step".into());
    }
    if !violates(last.rule, &facts, &axioms) {
        return Err(format!("{} does not fire on its premises", last.rule));
    }
    Ok(())
}

fn split(
    premises: &[Premise],
    schema: &Schema,
    known: &HashSet<Fact>,
) -> Result<(Vec<Fact>, Vec<Axiom>), String> {
    let mut facts = Vec::new();
    let mut axioms = Vec::new();
    for p in premises {
        match p {
            Premise::Fact(f) => {
                if !known.contains(f) {
                    return Err(format!("premise {f} is neither asserted nor derived"));
                }
                facts.push(*f);
            }
            Premise::Axiom(a) => {
                if !a.holds_in(schema) {
                    return Err(format!("axiom {a} is not in the schema"));
                }
                axioms.push(*a);
            }
        }
    }
    Ok((facts, axioms))
}

fn has(axioms: &[Axiom], test: impl Fn(&Axiom) -> bool) -> bool {
    axioms.iter().any(test)
}

/// True if some ordering of the premise facts instantiates `rule`.
fn entails(rule: RuleId, facts: &[Fact], axioms: &[Axiom], c: Fact) -> bool {
    use Fact::*;
    let pairs = || {
        facts.iter().flat_map(move |a| facts.iter().map(move |b| (*a, *b)))
    };
    match rule {
        RuleId::CaxSco => pairs().any(|(a, b)| {
            matches!((a, b, c), (SubClassOf(c1, c2), Type(x, k), Type(y, d)) if k == c1 && x == y && d == c2)
        }),
        RuleId::ScmSco => pairs().any(|(a, b)| {
            matches!((a, b, c), (SubClassOf(x, y), SubClassOf(y2, z), SubClassOf(x2, z2)) if y == y2 && x == x2 && z == z2)
        }),
        RuleId::ScmSpo => pairs().any(|(a, b)| {
            matches!((a, b, c), (SubPropertyOf(x, y), SubPropertyOf(y2, z), SubPropertyOf(x2, z2)) if y == y2 && x == x2 && z == z2)
        }),
        RuleId::PrpDom => facts.iter().any(|t| match (*t, c) {
            (Triple(x, p, _), Type(x2, k)) => x == x2 && has(axioms, |a| *a == Axiom::Domain(p, k)),
            _ => false,
        }),
        RuleId::PrpRng => facts.iter().any(|t| match (*t, c) {
            (Triple(_, p, y), Type(y2, k)) => y == y2 && has(axioms, |a| *a == Axiom::Range(p, k)),
            _ => false,
        }),
        RuleId::PrpSymp => facts.iter().any(|t| match (*t, c) {
            (Triple(x, p, y), Triple(y2, p2, x2)) => {
                p == p2 && x == x2 && y == y2 && has(axioms, |a| *a == Axiom::Has(p, Characteristic::Symmetric))
            }
            _ => false,
        }),
        RuleId::PrpTrp => pairs().any(|(a, b)| match (a, b, c) {
            (Triple(x, p, y), Triple(y2, p2, z), Triple(x2, p3, z2)) => {
                p == p2
                    && p == p3
                    && y == y2
                    && x == x2
                    && z == z2
                    && has(axioms, |a| *a == Axiom::Has(p, Characteristic::Transitive))
            }
            _ => false,
        }),
        RuleId::PrpInv1 | RuleId::PrpInv2 => facts.iter().any(|t| match (*t, c) {
            (Triple(x, p, y), Triple(y2, q, x2)) if x == x2 && y == y2 => {
                let wanted = if rule == RuleId::PrpInv1 {
                    Axiom::InverseOf(p, q)
                } else {
                    Axiom::InverseOf(q, p)
                };
                has(axioms, |a| *a == wanted)
            }
            _ => false,
        }),
        RuleId::PrpSpo1 => pairs().any(|(a, b)| {
            matches!((a, b, c), (SubPropertyOf(p, q), Triple(x, p2, y), Triple(x2, q2, y2)) if p == p2 && q == q2 && x == x2 && y == y2)
        }),
        RuleId::PrpRfp => {
            let Triple(x, p, x2) = c else { return false };
            if x != x2 || !has(axioms, |a| *a == Axiom::Has(p, Characteristic::Reflexive)) {
                return false;
            }
            facts.iter().any(|f| match *f {
                Triple(s, p2, o) => p2 == p && (s == x || o == x),
                Type(e, k) => e == x && has(axioms, |a| *a == Axiom::Domain(p, k)),
                _ => false,
            })
        }
        _ => false,
    }
}

fn violates(rule: RuleId, facts: &[Fact], axioms: &[Axiom]) -> bool {
    use Fact::*;
    let flag = |p, ch| has(axioms, |a| *a == Axiom::Has(p, ch));
    match rule {
        RuleId::CaxDw => {
            let disjoint = |c, d| {
                has(axioms, |a| {
                    *a == Axiom::Disjoint(c, d) || *a == Axiom::Disjoint(d, c)
                })
            };
            match facts {
                [Type(x, c), Type(y, d)] => x == y && disjoint(*c, *d),
                [SubClassOf(a, b)] => disjoint(*a, *b),
                _ => false,
            }
        }
        RuleId::PrpIrp => match facts {
            [Triple(x, p, y)] => x == y && flag(*p, Characteristic::Irreflexive),
            _ => false,
        },
        RuleId::PrpAsyp => match facts {
            [Triple(x, p, y)] => x == y && flag(*p, Characteristic::Asymmetric),
            [Triple(x, p, y), Triple(y2, p2, x2)] => {
                p == p2 && x == x2 && y == y2 && flag(*p, Characteristic::Asymmetric)
            }
            _ => false,
        },
        RuleId::PrpFp => match facts {
            [Triple(x, p, y), Triple(x2, p2, y2)] => {
                x == x2 && p == p2 && y != y2 && flag(*p, Characteristic::Functional)
            }
            _ => false,
        },
        RuleId::PrpIfp => match facts {
            [Triple(x, p, y), Triple(x2, p2, y2)] => {
                y == y2 && p == p2 && x != x2 && flag(*p, Characteristic::InverseFunctional)
            }
            _ => false,
        },
        _ => false,
    }
}
