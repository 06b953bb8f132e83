//! Relation generation.
//!
//! Characteristics are assigned first, in the fixed order of
//! [`Characteristic::ALL`], and only where the resulting set stays
//! compatible. Inverse pairs, domains and ranges, and subproperty links
//! follow. Every link is kept only if each relation's *effective*
//! characteristics, meaning its own plus the restrictive ones it inherits
//! through superproperties and inverses, are still compatible and the
//! classes a single triple would entail are pairwise non-disjoint.

mod matrix;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use matrix::{
    breaks_role_simplicity, classify, compute_compatibility_matrix, witness, CompatibilityMatrix,
    Verdict, Witness,
};

use crate::config::{validate_config, GeneratorConfig};
use crate::error::Error;
use crate::rng::{stage_rng, Stream};
use crate::schema::{
    Characteristic, CharacteristicSet, ClassHierarchy, ClassId, RelationId, RelationProfile,
    Schema,
};

/// Realized relation statistics, recomputable from a schema.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationStats {
    pub num_relations: usize,
    /// Indexed like [`Characteristic::ALL`].
    pub flag_proportions: [f64; 7],
    pub inverse_proportion: f64,
    pub subproperty_proportion: f64,
    pub profiled_proportion: f64,
    /// Mean depth over every domain and range slot that is filled.
    pub mean_specificity: Option<f64>,
}

impl RelationStats {
    pub fn flag(&self, c: Characteristic) -> f64 {
        self.flag_proportions[c as usize]
    }
}

pub fn relation_stats(schema: &Schema) -> RelationStats {
    let n = schema.relations.len();
    let frac = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
    let mut flags = [0.0; 7];
    for c in Characteristic::ALL {
        flags[c as usize] = frac(schema.relations.iter().filter(|r| r.flags.contains(c)).count());
    }
    let mut depth_sum = 0u64;
    let mut slots = 0u64;
    for r in &schema.relations {
        for c in [r.domain, r.range].into_iter().flatten() {
            depth_sum += schema.hierarchy.depth(c) as u64;
            slots += 1;
        }
    }
    RelationStats {
        num_relations: n,
        flag_proportions: flags,
        inverse_proportion: frac(schema.relations.iter().filter(|r| r.inverse_of.is_some()).count()),
        subproperty_proportion: frac(
            schema
                .relations
                .iter()
                .filter(|r| r.subproperty_of.is_some())
                .count(),
        ),
        profiled_proportion: frac(schema.relations.iter().filter(|r| r.is_profiled()).count()),
        mean_specificity: (slots > 0).then(|| depth_sum as f64 / slots as f64),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationGenReport {
    pub stats: RelationStats,
    pub warnings: Vec<String>,
}

/// Generates `cfg.num_relations` relation profiles over `h`.
pub fn generate_relations(
    cfg: &GeneratorConfig,
    h: &ClassHierarchy,
    matrix: &CompatibilityMatrix,
    seed: u64,
) -> Result<(Vec<RelationProfile>, RelationGenReport), Error> {
    let report = validate_config(cfg);
    if !report.is_ok() {
        return Err(Error::InvalidConfig(report));
    }
    let mut gen = Generator {
        cfg,
        h,
        matrix,
        rng: stage_rng(seed, Stream::Relations),
        rels: vec![RelationProfile::default(); cfg.num_relations],
        warnings: Vec::new(),
    };
    gen.assign_flags();
    gen.pair_inverses();
    gen.assign_domains();
    gen.link_subproperties();

    let Generator { rels, warnings, .. } = gen;
    let stats = relation_stats(&Schema::new(h.clone(), rels.clone()));
    Ok((rels, RelationGenReport { stats, warnings }))
}

fn target(p: f64, n: usize) -> usize {
    (p * n as f64).round() as usize
}

struct Generator<'a> {
    cfg: &'a GeneratorConfig,
    h: &'a ClassHierarchy,
    matrix: &'a CompatibilityMatrix,
    rng: ChaCha8Rng,
    rels: Vec<RelationProfile>,
    warnings: Vec<String>,
}

impl Generator<'_> {
    fn ids(&self) -> Vec<RelationId> {
        (0..self.rels.len()).map(RelationId::from_index).collect()
    }

    fn shuffled(&mut self) -> Vec<RelationId> {
        let mut ids = self.ids();
        ids.shuffle(&mut self.rng);
        ids
    }

    fn flag_target(&self, c: Characteristic) -> f64 {
        let cfg = self.cfg;
        match c {
            Characteristic::Reflexive => cfg.prop_reflexive,
            Characteristic::Irreflexive => cfg.prop_irreflexive,
            Characteristic::Symmetric => cfg.prop_symmetric,
            Characteristic::Asymmetric => cfg.prop_asymmetric,
            Characteristic::Transitive => cfg.prop_transitive,
            Characteristic::Functional => cfg.prop_functional,
            Characteristic::InverseFunctional => cfg.prop_inversefunctional,
        }
    }

    /// Each characteristic goes to the compatible relations where it rules
    /// out the fewest characteristics still to come; ties are random.
    fn assign_flags(&mut self) {
        let n = self.rels.len();
        for (i, &c) in Characteristic::ALL.iter().enumerate() {
            let wanted = target(self.flag_target(c), n);
            if wanted == 0 {
                continue;
            }
            let later: Vec<Characteristic> = Characteristic::ALL[i + 1..]
                .iter()
                .copied()
                .filter(|g| self.flag_target(*g) > 0.0)
                .collect();
            let mut candidates: Vec<(usize, RelationId)> = self
                .shuffled()
                .into_iter()
                .filter_map(|r| {
                    let flags = self.rels[r.index()].flags;
                    let with = flags.with(c);
                    if !self.matrix.is_compatible(with) {
                        return None;
                    }
                    let loss = later
                        .iter()
                        .filter(|g| {
                            self.matrix.is_compatible(flags.with(**g))
                                && !self.matrix.is_compatible(with.with(**g))
                        })
                        .count();
                    Some((loss, r))
                })
                .collect();
            candidates.sort_by_key(|(loss, _)| *loss);
            if candidates.len() < wanted {
                self.warnings.push(format!(
                    "only {} of {wanted} relations can be {}",
                    candidates.len(),
                    c.key()
                ));
            }
            for (_, r) in candidates.into_iter().take(wanted) {
                self.rels[r.index()].flags.insert(c);
            }
        }
    }

    fn pair_inverses(&mut self) {
        let n = self.rels.len();
        let wanted = (self.cfg.prop_inverseof * n as f64 / 2.0).round() as usize;
        let order = self.shuffled();
        let mut pairs = 0;
        for exact in [true, false] {
            for (i, &p) in order.iter().enumerate() {
                if pairs == wanted {
                    return;
                }
                if self.rels[p.index()].inverse_of.is_some() {
                    continue;
                }
                for &q in &order[i + 1..] {
                    if self.rels[q.index()].inverse_of.is_some() {
                        continue;
                    }
                    let (fp, fq) = (self.rels[p.index()].flags, self.rels[q.index()].flags);
                    let fits = if exact {
                        fq == fp.inverted()
                    } else {
                        self.matrix.is_compatible(fp.union(fq.restrictive().inverted()))
                            && self.matrix.is_compatible(fq.union(fp.restrictive().inverted()))
                    };
                    if !fits {
                        continue;
                    }
                    self.rels[p.index()].inverse_of = Some(q);
                    self.rels[q.index()].inverse_of = Some(p);
                    if self.valid(p) && self.valid(q) {
                        pairs += 1;
                        break;
                    }
                    self.rels[p.index()].inverse_of = None;
                    self.rels[q.index()].inverse_of = None;
                }
            }
        }
        if pairs < wanted {
            self.warnings
                .push(format!("only {pairs} of {wanted} inverse pairs could be formed"));
        }
    }

    fn assign_domains(&mut self) {
        let n = self.rels.len();
        let wanted = target(self.cfg.prop_profiled_relations, n);
        // an inverse pair is profiled as a unit
        let mut units: Vec<Vec<RelationId>> = Vec::new();
        for r in self.ids() {
            match self.rels[r.index()].inverse_of {
                Some(q) if q < r => {}
                Some(q) => units.push(vec![r, q]),
                None => units.push(vec![r]),
            }
        }
        units.shuffle(&mut self.rng);

        let by_depth: Vec<Vec<ClassId>> = (0..=self.h.max_depth())
            .map(|d| self.h.classes_at_depth(d))
            .collect();
        let mut steer = DepthSteer::new(self.cfg.relation_specificity, self.h.max_depth());
        let mut profiled = 0;
        for unit in units {
            if profiled + unit.len() > wanted {
                continue;
            }
            profiled += unit.len();
            let p = unit[0];
            let mut flags = self.rels[p.index()].flags;
            if let Some(&q) = unit.get(1) {
                flags = flags.union(self.rels[q.index()].flags);
            }
            let same = flags.contains(Characteristic::Reflexive)
                || flags.contains(Characteristic::Symmetric);
            let overlap = flags.contains(Characteristic::Transitive);
            let copies = unit.len() as u64;

            let mut placed = false;
            for _ in 0..10 {
                let mut trial = steer.clone();
                let weight = if same { 2 * copies } else { copies };
                let d = trial.pick(weight, &mut self.rng);
                trial.record(d, weight);
                let domain = *by_depth[d as usize]
                    .choose(&mut self.rng)
                    .expect("every depth up to the maximum has a class");
                let range = if same {
                    domain
                } else {
                    let d = trial.pick(copies, &mut self.rng);
                    trial.record(d, copies);
                    *by_depth[d as usize].choose(&mut self.rng).expect("non-empty depth")
                };
                if overlap && self.h.disjoint(domain, range) {
                    continue;
                }
                self.set_profile(&unit, domain, range);
                if unit.iter().all(|r| self.valid(*r)) {
                    steer = trial;
                    placed = true;
                    break;
                }
            }
            if !placed {
                let d = steer.pick(2 * copies, &mut self.rng);
                let c = *by_depth[d as usize].choose(&mut self.rng).expect("non-empty depth");
                self.set_profile(&unit, c, c);
                steer.record(d, 2 * copies);
            }
        }
        if profiled < wanted {
            self.warnings
                .push(format!("only {profiled} of {wanted} relations could be profiled"));
        }
    }

    fn set_profile(&mut self, unit: &[RelationId], domain: ClassId, range: ClassId) {
        let p = unit[0];
        self.rels[p.index()].domain = Some(domain);
        self.rels[p.index()].range = Some(range);
        if let Some(&q) = unit.get(1) {
            self.rels[q.index()].domain = Some(range);
            self.rels[q.index()].range = Some(domain);
        }
    }

    fn link_subproperties(&mut self) {
        let n = self.rels.len();
        let wanted = target(self.cfg.prop_subproperties, n);
        if wanted == 0 {
            return;
        }
        let mut linked = 0;
        for p in self.shuffled() {
            if linked == wanted {
                break;
            }
            let supers = self.shuffled();
            for q in supers {
                if q == p || self.rels[p.index()].inverse_of == Some(q) || self.is_below(q, p) {
                    continue;
                }
                self.rels[p.index()].subproperty_of = Some(q);
                if schema_is_sound(&self.rels, self.h, self.matrix) {
                    linked += 1;
                    break;
                }
                self.rels[p.index()].subproperty_of = None;
            }
        }
        if linked < wanted {
            self.warnings
                .push(format!("only {linked} of {wanted} subproperty links could be added"));
        }
    }

    /// Whether `q` is `p` or a subproperty of it, following declared links.
    fn is_below(&self, mut q: RelationId, p: RelationId) -> bool {
        let mut steps = 0;
        loop {
            if q == p {
                return true;
            }
            match self.rels[q.index()].subproperty_of {
                Some(next) if steps <= self.rels.len() => {
                    q = next;
                    steps += 1;
                }
                _ => return false,
            }
        }
    }

    fn valid(&self, p: RelationId) -> bool {
        relation_is_sound(&self.rels, self.h, self.matrix, p)
    }
}

/// Relations a triple of `p` propagates to, with a flag set when the
/// triple arrives reversed.
pub fn reach(rels: &[RelationProfile], p: RelationId) -> BTreeSet<(RelationId, bool)> {
    let mut seen = BTreeSet::new();
    let mut stack = vec![(p, false)];
    while let Some((r, flipped)) = stack.pop() {
        if !seen.insert((r, flipped)) {
            continue;
        }
        let prof = &rels[r.index()];
        if let Some(q) = prof.subproperty_of {
            stack.push((q, flipped));
        }
        if let Some(q) = prof.inverse_of {
            stack.push((q, !flipped));
        }
        if prof.flags.contains(Characteristic::Symmetric) {
            stack.push((r, !flipped));
        }
    }
    seen
}

/// Characteristics binding on `p`'s own triples.
pub fn effective_flags(rels: &[RelationProfile], p: RelationId) -> CharacteristicSet {
    let reached = reach(rels, p);
    let mut flags = rels[p.index()].flags;
    for &(r, flipped) in &reached {
        let restrictive = rels[r.index()].flags.restrictive();
        flags = flags.union(if flipped {
            restrictive.inverted()
        } else {
            restrictive
        });
        if !flipped && reached.contains(&(r, true)) {
            flags.insert(Characteristic::Symmetric);
        }
    }
    flags
}

/// `p` can carry a triple: its effective characteristics are compatible and
/// the classes entailed for subject and object are pairwise non-disjoint.
pub fn relation_is_sound(
    rels: &[RelationProfile],
    h: &ClassHierarchy,
    matrix: &CompatibilityMatrix,
    p: RelationId,
) -> bool {
    Soundness::new(rels, h, matrix).relation(p)
}

/// Every relation is sound and no class is unsatisfiable because of what
/// reflexive relations entail for its members.
pub fn schema_is_sound(
    rels: &[RelationProfile],
    h: &ClassHierarchy,
    matrix: &CompatibilityMatrix,
) -> bool {
    let check = Soundness::new(rels, h, matrix);
    (0..rels.len()).all(|i| check.relation(RelationId::from_index(i)))
        && h.classes().all(|c| check.class(c))
}

struct Soundness<'a> {
    rels: &'a [RelationProfile],
    h: &'a ClassHierarchy,
    matrix: &'a CompatibilityMatrix,
    /// Reflexive relations by declared domain.
    reflexive_on: Vec<Vec<RelationId>>,
}

impl<'a> Soundness<'a> {
    fn new(rels: &'a [RelationProfile], h: &'a ClassHierarchy, matrix: &'a CompatibilityMatrix) -> Self {
        let mut reflexive_on = vec![Vec::new(); h.len()];
        for (i, r) in rels.iter().enumerate() {
            if let (true, Some(d)) = (r.flags.contains(Characteristic::Reflexive), r.domain) {
                reflexive_on[d.index()].push(RelationId::from_index(i));
            }
        }
        Soundness {
            rels,
            h,
            matrix,
            reflexive_on,
        }
    }

    /// Classes entailed for the subject and object of one `p` triple, before
    /// closing over the hierarchy.
    fn ends(&self, p: RelationId) -> (Vec<ClassId>, Vec<ClassId>) {
        let mut subject = Vec::new();
        let mut object = Vec::new();
        let mut reflexive = false;
        for (r, flipped) in reach(self.rels, p) {
            let prof = &self.rels[r.index()];
            reflexive |= prof.flags.contains(Characteristic::Reflexive);
            let (s, o) = if flipped {
                (prof.range, prof.domain)
            } else {
                (prof.domain, prof.range)
            };
            subject.extend(s);
            object.extend(o);
        }
        if reflexive {
            subject.append(&mut object.clone());
            object = subject.clone();
        }
        (subject, object)
    }

    /// Every class a member of all of `seed` is entailed to belong to.
    fn entailed(&self, seed: Vec<ClassId>) -> Vec<ClassId> {
        let mut seen = BTreeSet::new();
        let mut stack = seed;
        while let Some(c) = stack.pop() {
            for a in self.h.self_and_ancestors(c) {
                if !seen.insert(a) {
                    break;
                }
                for &r in &self.reflexive_on[a.index()] {
                    let (s, o) = self.ends(r);
                    stack.extend(s);
                    stack.extend(o);
                }
            }
        }
        seen.into_iter().collect()
    }

    fn relation(&self, p: RelationId) -> bool {
        if !self.matrix.is_compatible(effective_flags(self.rels, p)) {
            return false;
        }
        let (s, o) = self.ends(p);
        pairwise_compatible(self.h, &self.entailed(s))
            && pairwise_compatible(self.h, &self.entailed(o))
    }

    fn class(&self, c: ClassId) -> bool {
        pairwise_compatible(self.h, &self.entailed(vec![c]))
    }
}

fn pairwise_compatible(h: &ClassHierarchy, classes: &[ClassId]) -> bool {
    classes
        .iter()
        .enumerate()
        .all(|(i, a)| classes[i + 1..].iter().all(|b| !h.disjoint(*a, *b)))
}

/// Keeps the running mean depth of domain/range slots near a target by
/// choosing between the two depths around it.
#[derive(Clone)]
struct DepthSteer {
    target: f64,
    lo: u32,
    hi: u32,
    sum: u64,
    slots: u64,
}

impl DepthSteer {
    fn new(target: f64, max_depth: u32) -> Self {
        let max_depth = max_depth.max(1);
        let lo = (target.floor() as u32).clamp(1, max_depth);
        let hi = (target.ceil() as u32).clamp(1, max_depth);
        DepthSteer {
            target,
            lo,
            hi,
            sum: 0,
            slots: 0,
        }
    }

    fn cost(&self, depth: u32, weight: u64) -> f64 {
        let sum = self.sum + depth as u64 * weight;
        let slots = self.slots + weight;
        (sum as f64 / slots as f64 - self.target).abs()
    }

    /// Depth for the next `weight` slots.
    fn pick(&self, weight: u64, rng: &mut ChaCha8Rng) -> u32 {
        let (a, b) = (self.cost(self.lo, weight), self.cost(self.hi, weight));
        if (a - b).abs() < 1e-12 {
            if rng.gen_bool(0.5) {
                self.lo
            } else {
                self.hi
            }
        } else if a < b {
            self.lo
        } else {
            self.hi
        }
    }

    fn record(&mut self, depth: u32, weight: u64) {
        self.sum += depth as u64 * weight;
        self.slots += weight;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class_gen::generate_class_hierarchy;
    use crate::reasoner::check_schema_consistency;

    fn build(cfg: &GeneratorConfig, seed: u64) -> (Schema, RelationGenReport) {
        let (h, _) = generate_class_hierarchy(cfg, seed).unwrap();
        let m = compute_compatibility_matrix();
        let (rels, report) = generate_relations(cfg, &h, &m, seed).unwrap();
        (Schema::new(h, rels), report)
    }

    #[test]
    fn s1_proportions() {
        let cfg = GeneratorConfig::default();
        let (schema, report) = build(&cfg, 42);
        assert_eq!(schema.relations.len(), 25);
        for c in Characteristic::ALL {
            assert!((report.stats.flag(c) - 0.1).abs() <= 0.08, "{c:?} {report:?}");
        }
        assert!((report.stats.inverse_proportion - 0.1).abs() <= 0.08);
        assert!(schema.structural_problems().is_empty());
        assert!(check_schema_consistency(&schema).consistent);
    }

    #[test]
    fn forced_single_inverse_pair() {
        let cfg = GeneratorConfig {
            num_relations: 2,
            prop_inverseof: 1.0,
            prop_profiled_relations: 1.0,
            prop_subproperties: 0.0,
            ..Default::default()
        };
        let (schema, _) = build(&cfg, 3);
        let (a, b) = (&schema.relations[0], &schema.relations[1]);
        assert_eq!(a.inverse_of, Some(RelationId(1)));
        assert_eq!(b.inverse_of, Some(RelationId(0)));
        assert_eq!((a.domain, a.range), (b.range, b.domain));
    }

    #[test]
    fn heavy_rows_stay_consistent() {
        for (n, depth, avg, p) in [(25, 3, 1.5, 0.3), (100, 4, 2.5, 0.3), (250, 5, 3.0, 0.2)] {
            let cfg = GeneratorConfig {
                num_classes: n,
                num_relations: n,
                max_depth: depth,
                avg_depth: avg,
                relation_specificity: avg,
                avg_disjointness: p,
                prop_reflexive: p,
                prop_irreflexive: p,
                prop_symmetric: p,
                prop_asymmetric: p,
                prop_transitive: p,
                prop_functional: p,
                prop_inversefunctional: p,
                prop_inverseof: p,
                prop_subproperties: p,
                ..Default::default()
            };
            let (schema, report) = build(&cfg, 11);
            let m = compute_compatibility_matrix();
            for r in schema.relation_ids() {
                assert!(m.is_compatible(schema.relation(r).flags));
            }
            assert!(schema_is_sound(&schema.relations, &schema.hierarchy, &m));
            for c in Characteristic::ALL {
                assert!((report.stats.flag(c) - p).abs() <= 0.08, "{c:?} {report:?}");
            }
            assert!((report.stats.mean_specificity.unwrap() - avg).abs() <= 0.3);
            let rep = check_schema_consistency(&schema);
            assert!(rep.consistent, "{}\n{:?}", rep.to_text(), schema.relations);
        }
    }

    #[test]
    fn effective_flags_follow_inverse_and_super() {
        let mut rels = vec![RelationProfile::default(); 3];
        rels[0].subproperty_of = Some(RelationId(1));
        rels[1].inverse_of = Some(RelationId(2));
        rels[2].inverse_of = Some(RelationId(1));
        rels[2].flags.insert(Characteristic::Functional);
        let f = effective_flags(&rels, RelationId(0));
        assert!(f.contains(Characteristic::InverseFunctional));
        assert!(!f.contains(Characteristic::Functional));
    }

    #[test]
    fn deterministic() {
        let cfg = GeneratorConfig::default();
        assert_eq!(build(&cfg, 5).0, build(&cfg, 5).0);
    }
}
