//! Small random schemas and graphs using every construct, including ones
//! the generators never emit (disjoint ancestors, subproperty cycles).

use rand::Rng;

use kgsynth::{
    CharacteristicSet, ClassHierarchy, ClassId, EntityId, KnowledgeGraph, RelationId,
    RelationProfile, Schema, Triple,
};

#[derive(Debug, Clone, Copy)]
pub struct Limits {
    pub classes: usize,
    pub relations: usize,
    pub entities: usize,
    pub triples: usize,
    pub types_per_entity: usize,
    pub disjoint_pairs: usize,
    /// Each flag is set with probability `2^-flag_sparsity`.
    pub flag_sparsity: u32,
}

pub const SMALL: Limits = Limits {
    classes: 10,
    relations: 6,
    entities: 10,
    triples: 50,
    types_per_entity: 2,
    disjoint_pairs: 3,
    flag_sparsity: 2,
};

/// Same universe as [`SMALL`] with fewer facts, so more graphs stay consistent.
pub const LIGHT: Limits = Limits {
    triples: 12,
    types_per_entity: 1,
    disjoint_pairs: 1,
    flag_sparsity: 3,
    ..SMALL
};

/// Alternates between the two profiles so both verdicts are well represented.
pub fn limits_for(seed: u64) -> Limits {
    if seed % 2 == 0 {
        SMALL
    } else {
        LIGHT
    }
}

pub fn random_schema(rng: &mut impl Rng, limits: Limits) -> Schema {
    let nc = rng.gen_range(0..=limits.classes);
    let parents: Vec<Option<ClassId>> = (0..nc)
        .map(|i| {
            if i == 0 || rng.gen_bool(0.3) {
                None
            } else {
                Some(ClassId(rng.gen_range(0..i) as u32))
            }
        })
        .collect();
    let mut h = ClassHierarchy::from_parents(&parents).expect("parents precede children");
    if nc >= 2 {
        for _ in 0..rng.gen_range(0..=limits.disjoint_pairs) {
            let a = rng.gen_range(0..nc) as u32;
            let b = rng.gen_range(0..nc) as u32;
            if a != b {
                h.add_disjoint_unchecked(ClassId(a), ClassId(b));
            }
        }
    }
    let nr = rng.gen_range(1..=limits.relations);
    let class = |rng: &mut dyn rand::RngCore| -> Option<ClassId> {
        if nc > 0 && rng.gen_bool(0.5) {
            Some(ClassId(rng.gen_range(0..nc) as u32))
        } else {
            None
        }
    };
    let mut relations = Vec::with_capacity(nr);
    for i in 0..nr {
        // sparse flags keep most graphs consistent enough to be interesting
        let bits = (0..limits.flag_sparsity).fold(0x7f, |acc, _| acc & rng.gen::<u8>());
        let other = |rng: &mut dyn rand::RngCore| -> Option<RelationId> {
            let j = rng.gen_range(0..nr);
            (j != i).then_some(RelationId(j as u32))
        };
        relations.push(RelationProfile {
            flags: CharacteristicSet::from_bits(bits),
            domain: class(rng),
            range: class(rng),
            inverse_of: if rng.gen_bool(0.2) { other(rng) } else { None },
            subproperty_of: if rng.gen_bool(0.25) { other(rng) } else { None },
        });
    }
    Schema::new(h, relations)
}

pub fn random_kg(rng: &mut impl Rng, schema: &Schema, limits: Limits) -> KnowledgeGraph {
    let ne = rng.gen_range(1..=limits.entities);
    let mut kg = KnowledgeGraph::with_entities(ne);
    let nc = schema.hierarchy.len();
    if nc > 0 {
        for t in &mut kg.typing {
            for _ in 0..rng.gen_range(0..=limits.types_per_entity) {
                t.push(ClassId(rng.gen_range(0..nc) as u32));
            }
            t.sort_unstable();
            t.dedup();
        }
    }
    let nr = schema.relations.len();
    for _ in 0..rng.gen_range(0..=limits.triples) {
        kg.triples.push(Triple::new(
            EntityId(rng.gen_range(0..ne) as u32),
            RelationId(rng.gen_range(0..nr) as u32),
            EntityId(rng.gen_range(0..ne) as u32),
        ));
    }
    kg
}
