use std::fmt::Write as _;

use rayon::prelude::*;

use crate::kg::{KnowledgeGraph, Triple};
use crate::reasoner::check_consistency;
use crate::schema::{
    Characteristic, CharacteristicSet, ClassHierarchy, ClassId, EntityId, RelationId,
    RelationProfile, Schema,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Compatible,
    /// Contradictory as soon as the relation's domain has a member.
    SchemaInconsistent,
    /// Fine on its own, but no triple can be asserted without a clash (or the
    /// combination breaks role simplicity).
    InstanceIncompatible,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::SchemaInconsistent => "schema_inconsistent",
            Verdict::InstanceIncompatible => "instance_incompatible",
        }
    }
}

/// Verdict for each of the 128 characteristic subsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompatibilityMatrix {
    verdicts: Vec<Verdict>,
}

impl CompatibilityMatrix {
    pub fn verdict(&self, flags: CharacteristicSet) -> Verdict {
        self.verdicts[flags.bits() as usize]
    }

    pub fn is_compatible(&self, flags: CharacteristicSet) -> bool {
        self.verdict(flags) == Verdict::Compatible
    }

    pub fn iter(&self) -> impl Iterator<Item = (CharacteristicSet, Verdict)> + '_ {
        self.verdicts
            .iter()
            .enumerate()
            .map(|(bits, v)| (CharacteristicSet::from_bits(bits as u8), *v))
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.verdicts.iter().filter(|v| **v == verdict).count()
    }

    /// Plain-text table, one subset per line, ordered by bit pattern.
    pub fn to_table(&self) -> String {
        let rows: Vec<(String, Verdict)> =
            self.iter().map(|(s, v)| (s.to_string(), v)).collect();
        let width = rows.iter().map(|(s, _)| s.len()).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = writeln!(out, "{:<width$}  verdict", "flags");
        for (s, v) in rows {
            let _ = writeln!(out, "{s:<width$}  {}", v.name());
        }
        let _ = writeln!(
            out,
            "\ncompatible = {}, schema_inconsistent = {}, instance_incompatible = {}",
            self.count(Verdict::Compatible),
            self.count(Verdict::SchemaInconsistent),
            self.count(Verdict::InstanceIncompatible)
        );
        out
    }
}

/// The graphs a flag subset is judged on.
#[derive(Debug, Clone)]
pub struct Witness {
    /// One class `C0` that is both domain and range of the single relation `R0`.
    pub schema: Schema,
    /// `E0 : C0` and nothing else.
    pub axioms_only: KnowledgeGraph,
    /// `E0 : C0` plus `R0(E1, E2)`.
    pub with_triple: KnowledgeGraph,
}

pub fn witness(flags: CharacteristicSet) -> Witness {
    let mut h = ClassHierarchy::new();
    let c0 = h.push_class(None).expect("root parent");
    let schema = Schema::new(
        h,
        vec![RelationProfile {
            flags,
            domain: Some(c0),
            range: Some(c0),
            ..Default::default()
        }],
    );
    let mut axioms_only = KnowledgeGraph::with_entities(1);
    axioms_only.typing[0].push(ClassId(0));
    let mut with_triple = KnowledgeGraph::with_entities(3);
    with_triple.typing[0].push(ClassId(0));
    with_triple
        .triples
        .push(Triple::new(EntityId(1), RelationId(0), EntityId(2)));
    Witness {
        schema,
        axioms_only,
        with_triple,
    }
}

/// Transitive relations are not simple and may not carry these.
pub fn breaks_role_simplicity(flags: CharacteristicSet) -> bool {
    flags.contains(Characteristic::Transitive)
        && [
            Characteristic::Functional,
            Characteristic::InverseFunctional,
            Characteristic::Irreflexive,
            Characteristic::Asymmetric,
        ]
        .into_iter()
        .any(|c| flags.contains(c))
}

pub fn classify(flags: CharacteristicSet) -> Verdict {
    let w = witness(flags);
    if !check_consistency(&w.schema, &w.axioms_only).consistent {
        Verdict::SchemaInconsistent
    } else if !check_consistency(&w.schema, &w.with_triple).consistent
        || breaks_role_simplicity(flags)
    {
        Verdict::InstanceIncompatible
    } else {
        Verdict::Compatible
    }
}

pub fn compute_compatibility_matrix() -> CompatibilityMatrix {
    let verdicts = (0..CharacteristicSet::COUNT)
        .into_par_iter()
        .map(|bits| classify(CharacteristicSet::from_bits(bits as u8)))
        .collect();
    CompatibilityMatrix { verdicts }
}
