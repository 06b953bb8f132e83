#![allow(dead_code)]

pub mod naive;
pub mod random;

use std::collections::BTreeSet;

use kgsynth::reasoner::{Closure, Fact, RuleId};

/// Closure facts of the engine as a set.
pub fn fact_set(c: &Closure<'_>) -> BTreeSet<Fact> {
    c.facts().copied().collect()
}

/// Violation instances reported by the engine, comparable with the oracle.
pub fn violation_set(c: &Closure<'_>) -> BTreeSet<(RuleId, Vec<Fact>)> {
    c.violations()
        .into_iter()
        .map(|v| (v.rule, v.participants))
        .collect()
}
