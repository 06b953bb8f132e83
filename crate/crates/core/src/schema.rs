//! In-memory schema: a single-inheritance class forest with disjointness
//! axioms, plus relations described by characteristic flags and optional
//! inverse/subproperty/domain/range links.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

macro_rules! dense_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }

            #[inline]
            pub fn from_index(i: usize) -> Self {
                Self(i as u32)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

dense_id!(
    /// Named class. The virtual root (`owl:Thing`) has no id.
    ClassId,
    "C"
);
dense_id!(RelationId, "R");
dense_id!(EntityId, "E");

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemaError {
    #[error("unknown class {0}")]
    UnknownClass(ClassId),
    #[error("unknown relation {0}")]
    UnknownRelation(RelationId),
    #[error("class hierarchy is empty")]
    EmptyHierarchy,
    #[error("class {0} has parent {1} which is not declared before it")]
    ParentNotDeclared(ClassId, ClassId),
    #[error("subclass cycle through {0}")]
    Cycle(ClassId),
    #[error("{0} and {1} cannot be disjoint: one is an ancestor of the other")]
    DisjointAncestor(ClassId, ClassId),
}

/// Unary relation characteristics, listed in the order relation generation
/// assigns them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Characteristic {
    Reflexive,
    Irreflexive,
    Symmetric,
    Asymmetric,
    Transitive,
    Functional,
    InverseFunctional,
}

impl Characteristic {
    pub const ALL: [Characteristic; 7] = [
        Characteristic::Reflexive,
        Characteristic::Irreflexive,
        Characteristic::Symmetric,
        Characteristic::Asymmetric,
        Characteristic::Transitive,
        Characteristic::Functional,
        Characteristic::InverseFunctional,
    ];

    #[inline]
    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Local name of the OWL class for this characteristic.
    pub fn owl_name(self) -> &'static str {
        match self {
            Characteristic::Reflexive => "ReflexiveProperty",
            Characteristic::Irreflexive => "IrreflexiveProperty",
            Characteristic::Symmetric => "SymmetricProperty",
            Characteristic::Asymmetric => "AsymmetricProperty",
            Characteristic::Transitive => "TransitiveProperty",
            Characteristic::Functional => "FunctionalProperty",
            Characteristic::InverseFunctional => "InverseFunctionalProperty",
        }
    }

    pub fn from_owl_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.owl_name() == name)
    }

    /// Short name used in config keys and reports.
    pub fn key(self) -> &'static str {
        match self {
            Characteristic::Reflexive => "reflexive",
            Characteristic::Irreflexive => "irreflexive",
            Characteristic::Symmetric => "symmetric",
            Characteristic::Asymmetric => "asymmetric",
            Characteristic::Transitive => "transitive",
            Characteristic::Functional => "functional",
            Characteristic::InverseFunctional => "inversefunctional",
        }
    }

    /// The characteristic the inverse relation exhibits.
    pub fn inverted(self) -> Self {
        match self {
            Characteristic::Functional => Characteristic::InverseFunctional,
            Characteristic::InverseFunctional => Characteristic::Functional,
            other => other,
        }
    }

    /// Restrictive characteristics only forbid triples; the others entail them.
    pub fn is_restrictive(self) -> bool {
        matches!(
            self,
            Characteristic::Irreflexive
                | Characteristic::Asymmetric
                | Characteristic::Functional
                | Characteristic::InverseFunctional
        )
    }
}

/// A set of [`Characteristic`]s packed into 7 bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CharacteristicSet(u8);

impl CharacteristicSet {
    pub const EMPTY: CharacteristicSet = CharacteristicSet(0);
    /// Number of distinct subsets.
    pub const COUNT: usize = 128;

    pub fn from_bits(bits: u8) -> Self {
        CharacteristicSet(bits & 0x7f)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, c: Characteristic) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn insert(&mut self, c: Characteristic) {
        self.0 |= c.bit();
    }

    pub fn with(mut self, c: Characteristic) -> Self {
        self.insert(c);
        self
    }

    pub fn union(self, other: Self) -> Self {
        CharacteristicSet(self.0 | other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Characteristic> {
        Characteristic::ALL.into_iter().filter(move |c| self.contains(*c))
    }

    /// Characteristics seen through `owl:inverseOf`.
    pub fn inverted(self) -> Self {
        self.iter().map(Characteristic::inverted).collect()
    }

    pub fn restrictive(self) -> Self {
        self.iter().filter(|c| c.is_restrictive()).collect()
    }
}

impl FromIterator<Characteristic> for CharacteristicSet {
    fn from_iter<T: IntoIterator<Item = Characteristic>>(iter: T) -> Self {
        let mut s = CharacteristicSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl fmt::Display for CharacteristicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(c.key())?;
        }
        f.write_str("}")
    }
}

/// Single-inheritance class forest under a virtual root.
///
/// Classes are appended in an order where every parent precedes its
/// children, which keeps depth computation and cycle freedom trivial.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassHierarchy {
    parents: Vec<Option<ClassId>>,
    depths: Vec<u32>,
    children: Vec<Vec<ClassId>>,
    root_children: Vec<ClassId>,
    disjoint_pairs: BTreeSet<(ClassId, ClassId)>,
}

impl ClassHierarchy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a hierarchy from an arbitrary parent map (e.g. a parsed file).
    pub fn from_parents(parents: &[Option<ClassId>]) -> Result<Self, SchemaError> {
        let n = parents.len();
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                if p.index() >= n {
                    return Err(SchemaError::UnknownClass(*p));
                }
                if p.index() == i {
                    return Err(SchemaError::Cycle(*p));
                }
            }
        }
        // depth by memoized walk; state 1 = on stack
        let mut depth: Vec<Option<u32>> = vec![None; n];
        let mut state = vec![0u8; n];
        for start in 0..n {
            let mut stack = vec![start];
            while let Some(&c) = stack.last() {
                if depth[c].is_some() {
                    stack.pop();
                    continue;
                }
                match parents[c] {
                    None => {
                        depth[c] = Some(1);
                        stack.pop();
                    }
                    Some(p) => match depth[p.index()] {
                        Some(d) => {
                            depth[c] = Some(d + 1);
                            state[c] = 0;
                            stack.pop();
                        }
                        None => {
                            if state[p.index()] == 1 {
                                return Err(SchemaError::Cycle(p));
                            }
                            state[c] = 1;
                            stack.push(p.index());
                        }
                    },
                }
            }
        }
        let mut h = ClassHierarchy {
            parents: parents.to_vec(),
            depths: depth.into_iter().map(|d| d.unwrap_or(1)).collect(),
            children: vec![Vec::new(); n],
            root_children: Vec::new(),
            disjoint_pairs: BTreeSet::new(),
        };
        for (i, p) in parents.iter().enumerate() {
            match p {
                Some(p) => h.children[p.index()].push(ClassId::from_index(i)),
                None => h.root_children.push(ClassId::from_index(i)),
            }
        }
        Ok(h)
    }

    /// Appends a new class under `parent` (`None` = root) and returns its id.
    pub fn push_class(&mut self, parent: Option<ClassId>) -> Result<ClassId, SchemaError> {
        let id = ClassId::from_index(self.parents.len());
        let depth = match parent {
            None => 1,
            Some(p) => {
                if p.index() >= self.parents.len() {
                    return Err(SchemaError::ParentNotDeclared(id, p));
                }
                self.depths[p.index()] + 1
            }
        };
        self.parents.push(parent);
        self.depths.push(depth);
        self.children.push(Vec::new());
        match parent {
            Some(p) => self.children[p.index()].push(id),
            None => self.root_children.push(id),
        }
        Ok(id)
    }

    /// Declares `a` and `b` disjoint. Rejects ancestor/descendant pairs.
    pub fn add_disjoint(&mut self, a: ClassId, b: ClassId) -> Result<bool, SchemaError> {
        self.check(a)?;
        self.check(b)?;
        if a == b || self.is_ancestor(a, b) || self.is_ancestor(b, a) {
            return Err(SchemaError::DisjointAncestor(a, b));
        }
        Ok(self.disjoint_pairs.insert(ordered(a, b)))
    }

    /// Inserts a pair without the ancestor check; used to plant faults.
    pub fn add_disjoint_unchecked(&mut self, a: ClassId, b: ClassId) {
        self.disjoint_pairs.insert(ordered(a, b));
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        (0..self.parents.len()).map(ClassId::from_index)
    }

    pub fn contains(&self, c: ClassId) -> bool {
        c.index() < self.parents.len()
    }

    fn check(&self, c: ClassId) -> Result<(), SchemaError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(SchemaError::UnknownClass(c))
        }
    }

    pub fn parent(&self, c: ClassId) -> Option<ClassId> {
        self.parents[c.index()]
    }

    pub fn parents(&self) -> &[Option<ClassId>] {
        &self.parents
    }

    /// Depth of `c`; children of the root have depth 1. Panics on unknown ids.
    pub fn depth(&self, c: ClassId) -> u32 {
        self.depths[c.index()]
    }

    pub fn children(&self, c: ClassId) -> &[ClassId] {
        &self.children[c.index()]
    }

    pub fn root_children(&self) -> &[ClassId] {
        &self.root_children
    }

    /// Strict ancestors of `c`, nearest first.
    pub fn ancestors(&self, c: ClassId) -> Ancestors<'_> {
        Ancestors {
            h: self,
            next: self.parents[c.index()],
        }
    }

    /// `c` followed by its ancestors.
    pub fn self_and_ancestors(&self, c: ClassId) -> impl Iterator<Item = ClassId> + '_ {
        std::iter::once(c).chain(self.ancestors(c))
    }

    /// True iff `a` is a strict ancestor of `d`.
    pub fn is_ancestor(&self, a: ClassId, d: ClassId) -> bool {
        let (da, dd) = (self.depth(a), self.depth(d));
        if da >= dd {
            return false;
        }
        self.ancestors(d).nth((dd - da - 1) as usize) == Some(a)
    }

    pub fn max_depth(&self) -> u32 {
        self.depths.iter().copied().max().unwrap_or(0)
    }

    pub fn classes_at_depth(&self, depth: u32) -> Vec<ClassId> {
        self.classes().filter(|c| self.depth(*c) == depth).collect()
    }

    pub fn disjoint_pairs(&self) -> &BTreeSet<(ClassId, ClassId)> {
        &self.disjoint_pairs
    }

    /// Disjointness including the pairs inherited by descendants.
    pub fn disjoint(&self, a: ClassId, b: ClassId) -> bool {
        if self.disjoint_pairs.is_empty() {
            return false;
        }
        self.self_and_ancestors(a).any(|x| {
            self.self_and_ancestors(b)
                .any(|y| x != y && self.disjoint_pairs.contains(&ordered(x, y)))
        })
    }

    /// Classes named in at least one declared disjointness pair.
    pub fn disjoint_class_count(&self) -> usize {
        let mut seen = BTreeSet::new();
        for (a, b) in &self.disjoint_pairs {
            seen.insert(*a);
            seen.insert(*b);
        }
        seen.len()
    }

    pub fn metrics(&self) -> Result<HierarchyMetrics, SchemaError> {
        hierarchy_metrics(self)
    }
}

pub struct Ancestors<'a> {
    h: &'a ClassHierarchy,
    next: Option<ClassId>,
}

impl Iterator for Ancestors<'_> {
    type Item = ClassId;

    fn next(&mut self) -> Option<ClassId> {
        let c = self.next?;
        self.next = self.h.parents[c.index()];
        Some(c)
    }
}

pub(crate) fn ordered(a: ClassId, b: ClassId) -> (ClassId, ClassId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Depth of `c` (root = 0, its children = 1).
pub fn class_depth(h: &ClassHierarchy, c: ClassId) -> Result<u32, SchemaError> {
    h.check(c)?;
    Ok(h.depth(c))
}

/// True iff some ancestor-or-self pair of `(a, b)` is declared disjoint.
pub fn are_disjoint(h: &ClassHierarchy, a: ClassId, b: ClassId) -> Result<bool, SchemaError> {
    h.check(a)?;
    h.check(b)?;
    Ok(h.disjoint(a, b))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HierarchyMetrics {
    pub max_depth: u32,
    pub avg_depth: f64,
    /// Classes with a named parent over named classes with a named child;
    /// 0 when no named class has children.
    pub inheritance_ratio: f64,
    pub disjointness_proportion: f64,
}

pub fn hierarchy_metrics(h: &ClassHierarchy) -> Result<HierarchyMetrics, SchemaError> {
    if h.is_empty() {
        return Err(SchemaError::EmptyHierarchy);
    }
    let n = h.len() as f64;
    let depth_sum: u64 = h.depths.iter().map(|d| *d as u64).sum();
    let with_parent = h.parents.iter().filter(|p| p.is_some()).count();
    let with_child = h.children.iter().filter(|c| !c.is_empty()).count();
    Ok(HierarchyMetrics {
        max_depth: h.max_depth(),
        avg_depth: depth_sum as f64 / n,
        inheritance_ratio: if with_child == 0 {
            0.0
        } else {
            with_parent as f64 / with_child as f64
        },
        disjointness_proportion: h.disjoint_class_count() as f64 / n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RelationProfile {
    pub flags: CharacteristicSet,
    pub inverse_of: Option<RelationId>,
    pub subproperty_of: Option<RelationId>,
    pub domain: Option<ClassId>,
    pub range: Option<ClassId>,
}

impl RelationProfile {
    pub fn is_profiled(&self) -> bool {
        self.domain.is_some() || self.range.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schema {
    pub hierarchy: ClassHierarchy,
    pub relations: Vec<RelationProfile>,
}

impl Schema {
    pub fn new(hierarchy: ClassHierarchy, relations: Vec<RelationProfile>) -> Self {
        Schema {
            hierarchy,
            relations,
        }
    }

    pub fn relation(&self, r: RelationId) -> &RelationProfile {
        &self.relations[r.index()]
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = RelationId> {
        (0..self.relations.len()).map(RelationId::from_index)
    }

    /// Structural problems with the schema; empty when every invariant holds.
    ///
    /// Flag compatibility is checked separately against a
    /// [`CompatibilityMatrix`](crate::relation_gen::CompatibilityMatrix).
    pub fn structural_problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let h = &self.hierarchy;
        for &(a, b) in h.disjoint_pairs() {
            if !h.contains(a) || !h.contains(b) {
                out.push(format!("disjoint pair ({a}, {b}) names an unknown class"));
            } else if a == b || h.is_ancestor(a, b) || h.is_ancestor(b, a) {
                out.push(format!("disjoint pair ({a}, {b}) on one lineage"));
            }
        }
        let n = self.relations.len();
        for r in self.relation_ids() {
            let p = self.relation(r);
            for c in [p.domain, p.range].into_iter().flatten() {
                if !h.contains(c) {
                    out.push(format!("{r} references unknown class {c}"));
                }
            }
            if let Some(q) = p.inverse_of {
                if q.index() >= n {
                    out.push(format!("{r} inverse of unknown {q}"));
                } else if q == r {
                    out.push(format!("{r} is its own inverse"));
                } else if self.relation(q).inverse_of != Some(r) {
                    out.push(format!("inverse link {r} -> {q} is not mirrored"));
                }
            }
            if let Some(q) = p.subproperty_of {
                if q.index() >= n {
                    out.push(format!("{r} subproperty of unknown {q}"));
                    continue;
                }
                if q == r {
                    out.push(format!("{r} is a subproperty of itself"));
                }
                let sup = self.relation(q);
                for (mine, theirs, what) in
                    [(p.domain, sup.domain, "domain"), (p.range, sup.range, "range")]
                {
                    if let (Some(a), Some(b)) = (mine, theirs) {
                        if h.contains(a) && h.contains(b) && h.disjoint(a, b) {
                            out.push(format!("{r} subproperty of {q} with disjoint {what}s"));
                        }
                    }
                }
            }
        }
        // subproperty chains must be acyclic
        for r in self.relation_ids() {
            let mut cur = self.relation(r).subproperty_of;
            let mut steps = 0;
            while let Some(q) = cur {
                if q.index() >= n {
                    break;
                }
                steps += 1;
                if q == r || steps > n {
                    out.push(format!("subproperty cycle through {r}"));
                    break;
                }
                cur = self.relation(q).subproperty_of;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> ClassHierarchy {
        let mut h = ClassHierarchy::new();
        let mut prev = None;
        for _ in 0..n {
            prev = Some(h.push_class(prev).unwrap());
        }
        h
    }

    #[test]
    fn chain_depths() {
        let h = chain(3);
        assert_eq!(class_depth(&h, ClassId(2)).unwrap(), 3);
        assert_eq!(class_depth(&h, ClassId(0)).unwrap(), 1);
        assert!(class_depth(&h, ClassId(3)).is_err());
        let m = h.metrics().unwrap();
        assert_eq!(m.max_depth, 3);
        assert!((m.avg_depth - 2.0).abs() < 1e-12);
        assert!((m.inheritance_ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn flat_root_children() {
        let h = ClassHierarchy::from_parents(&[None, None, None]).unwrap();
        let m = h.metrics().unwrap();
        assert_eq!(m.avg_depth, 1.0);
        assert_eq!(m.inheritance_ratio, 0.0);
        assert_eq!(m.max_depth, 1);
    }

    #[test]
    fn empty_metrics_error() {
        assert_eq!(
            ClassHierarchy::new().metrics(),
            Err(SchemaError::EmptyHierarchy)
        );
    }

    #[test]
    fn from_parents_rejects_cycle() {
        let err = ClassHierarchy::from_parents(&[Some(ClassId(1)), Some(ClassId(0))]);
        assert!(matches!(err, Err(SchemaError::Cycle(_))));
    }

    #[test]
    fn from_parents_matches_push() {
        let parents = [None, Some(ClassId(0)), Some(ClassId(1)), Some(ClassId(0)), None];
        let h = ClassHierarchy::from_parents(&parents).unwrap();
        let mut g = ClassHierarchy::new();
        for p in parents {
            g.push_class(p).unwrap();
        }
        assert_eq!(h, g);
    }

    #[test]
    fn disjointness_extends_to_children() {
        // root -> A(0) -> A'(2); root -> B(1)
        let h0 = ClassHierarchy::from_parents(&[None, None, Some(ClassId(0))]).unwrap();
        let mut h = h0.clone();
        h.add_disjoint(ClassId(0), ClassId(1)).unwrap();
        assert!(are_disjoint(&h, ClassId(2), ClassId(1)).unwrap());
        assert!(are_disjoint(&h, ClassId(1), ClassId(2)).unwrap());
        for c in h.classes() {
            assert!(!are_disjoint(&h, c, c).unwrap());
            assert!(!are_disjoint(&h0, c, ClassId(1)).unwrap());
        }
        assert!(h.add_disjoint(ClassId(0), ClassId(2)).is_err());
        assert!(are_disjoint(&h, ClassId(0), ClassId(9)).is_err());
    }

    #[test]
    fn characteristic_set_inversion() {
        let s: CharacteristicSet = [Characteristic::Functional, Characteristic::Symmetric]
            .into_iter()
            .collect();
        let inv = s.inverted();
        assert!(inv.contains(Characteristic::InverseFunctional));
        assert!(inv.contains(Characteristic::Symmetric));
        assert!(!inv.contains(Characteristic::Functional));
        assert_eq!(inv.inverted(), s);
        assert_eq!(s.to_string(), "{symmetric, functional}");
    }
}
