//! Synthetic schema and knowledge graph generation.
//!
//! A run goes through [`class_gen`], [`relation_gen`] and [`kg_gen`], and
//! every artifact is checked by the OWL 2 RL engine in [`reasoner`] before
//! [`serializer`] writes it out. [`pipeline`] strings the stages together;
//! [`bench`] replays the experiment grid.

pub mod bench;
pub mod class_gen;
pub mod config;
pub mod error;
pub mod kg;
pub mod kg_gen;
pub mod pipeline;
pub mod reasoner;
pub mod relation_gen;
pub mod rng;
pub mod schema;
pub mod serializer;

pub use config::{GeneratorConfig, OutputFormat, ValidationReport};
pub use error::Error;
pub use kg::{KnowledgeGraph, Triple};
pub use reasoner::{check_consistency, check_schema_consistency, ConsistencyReport};
pub use schema::{
    Characteristic, CharacteristicSet, ClassHierarchy, ClassId, EntityId, RelationId,
    RelationProfile, Schema,
};
