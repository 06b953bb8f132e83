//! Knowledge graph value type.

use std::fmt;

use crate::schema::{ClassId, EntityId, RelationId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub s: EntityId,
    pub p: RelationId,
    pub o: EntityId,
}

impl Triple {
    pub fn new(s: EntityId, p: RelationId, o: EntityId) -> Self {
        Triple { s, p, o }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}, {})", self.p, self.s, self.o)
    }
}

/// Entities `E0..E{n-1}`, their most-specific classes, and asserted triples
/// in the order they were generated.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KnowledgeGraph {
    /// Most-specific classes per entity, sorted; empty means untyped.
    pub typing: Vec<Vec<ClassId>>,
    pub triples: Vec<Triple>,
}

impl KnowledgeGraph {
    pub fn with_entities(n: usize) -> Self {
        KnowledgeGraph {
            typing: vec![Vec::new(); n],
            triples: Vec::new(),
        }
    }

    pub fn num_entities(&self) -> usize {
        self.typing.len()
    }

    pub fn entities(&self) -> impl Iterator<Item = EntityId> {
        (0..self.typing.len()).map(EntityId::from_index)
    }

    pub fn types_of(&self, e: EntityId) -> &[ClassId] {
        &self.typing[e.index()]
    }

    /// Same graph with triples sorted; generation order is dropped.
    pub fn canonical(&self) -> KnowledgeGraph {
        let mut kg = self.clone();
        for t in &mut kg.typing {
            t.sort_unstable();
            t.dedup();
        }
        kg.triples.sort_unstable();
        kg.triples.dedup();
        kg
    }

    pub fn untyped_count(&self) -> usize {
        self.typing.iter().filter(|t| t.is_empty()).count()
    }
}
