//! Class hierarchy generation.
//!
//! Builds a chain reaching `max_depth` first, then attaches the remaining
//! classes one at a time under the parent that brings the running average
//! depth and inheritance ratio closest to their targets (occasionally a
//! random parent instead). A local search then re-parents whole subtrees
//! while that brings max depth, average depth and inheritance ratio closer
//! to target without moving any of them away. Finally disjoint class pairs
//! are declared until the requested proportion of classes takes part in one.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{validate_config, GeneratorConfig};
use crate::error::Error;
use crate::rng::{stage_rng, Stream};
use crate::schema::{ClassHierarchy, ClassId, HierarchyMetrics};

/// Fraction of classes left unplaced below which random placement stops.
pub const RANDOMNESS_CUTOFF: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementMode {
    DepthChain,
    Random,
    TargetDriven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub class: ClassId,
    pub parent: Option<ClassId>,
    pub mode: PlacementMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassGenTrace {
    /// Placement order; `parent` is the final parent after refinement.
    pub placements: Vec<Placement>,
    /// Subtree moves made by the refinement pass.
    pub refinement_moves: usize,
    pub metrics: HierarchyMetrics,
    pub warnings: Vec<String>,
}

impl ClassGenTrace {
    pub fn random_placements(&self) -> usize {
        self.placements
            .iter()
            .filter(|p| p.mode == PlacementMode::Random)
            .count()
    }
}

pub fn generate_class_hierarchy(
    cfg: &GeneratorConfig,
    seed: u64,
) -> Result<(ClassHierarchy, ClassGenTrace), Error> {
    let report = validate_config(cfg);
    if !report.is_ok() {
        return Err(Error::InvalidConfig(report));
    }
    let mut rng = stage_rng(seed, Stream::Classes);
    let mut builder = Builder::new(cfg);
    builder.place_all(&mut rng);
    let refinement_moves = builder.refine();
    let mut warnings = Vec::new();
    add_disjointness(&mut builder.h, cfg.avg_disjointness, &mut rng, &mut warnings);

    let metrics = builder.h.metrics().expect("num_classes > 0");
    if metrics.max_depth != cfg.max_depth {
        warnings.push(format!(
            "max depth {} instead of {}",
            metrics.max_depth, cfg.max_depth
        ));
    }
    if (metrics.avg_depth - cfg.avg_depth).abs() > 0.1 {
        warnings.push(format!(
            "average depth {:.3} instead of {}",
            metrics.avg_depth, cfg.avg_depth
        ));
    }
    if cfg.max_depth > 1
        && (metrics.inheritance_ratio - cfg.inheritance_ratio).abs() > 0.1 * cfg.inheritance_ratio
    {
        warnings.push(format!(
            "inheritance ratio {:.3} instead of {}",
            metrics.inheritance_ratio, cfg.inheritance_ratio
        ));
    }
    let trace = ClassGenTrace {
        placements: builder.placements,
        refinement_moves,
        metrics,
        warnings,
    };
    Ok((builder.h, trace))
}

/// Running statistics kept in step with the hierarchy under construction.
struct Builder<'a> {
    cfg: &'a GeneratorConfig,
    h: ClassHierarchy,
    placements: Vec<Placement>,
    depth_sum: u64,
    with_parent: usize,
    with_child: usize,
}

impl<'a> Builder<'a> {
    fn new(cfg: &'a GeneratorConfig) -> Self {
        Builder {
            cfg,
            h: ClassHierarchy::new(),
            placements: Vec::with_capacity(cfg.num_classes),
            depth_sum: 0,
            with_parent: 0,
            with_child: 0,
        }
    }

    fn attach(&mut self, parent: Option<ClassId>, mode: PlacementMode) {
        if let Some(p) = parent {
            self.with_parent += 1;
            if self.h.children(p).is_empty() {
                self.with_child += 1;
            }
        }
        let class = self.h.push_class(parent).expect("parent exists");
        self.depth_sum += self.h.depth(class) as u64;
        self.placements.push(Placement {
            class,
            parent,
            mode,
        });
    }

    fn place_all(&mut self, rng: &mut ChaCha8Rng) {
        let n = self.cfg.num_classes;
        let chain = n.min(self.cfg.max_depth as usize);
        let mut prev = None;
        for _ in 0..chain {
            self.attach(prev, PlacementMode::DepthChain);
            prev = Some(ClassId::from_index(self.h.len() - 1));
        }
        while self.h.len() < n {
            let unplaced = n - self.h.len();
            let random_allowed = unplaced as f64 > RANDOMNESS_CUTOFF * n as f64;
            let roll: f64 = rng.gen();
            if random_allowed && roll < self.cfg.random_placement_prob {
                let candidates = self.candidates();
                let parent = *candidates.choose(rng).expect("root is always a candidate");
                self.attach(parent, PlacementMode::Random);
            } else {
                let parent = self.best_parent();
                self.attach(parent, PlacementMode::TargetDriven);
            }
        }
    }

    /// Root plus every class that can still take a child.
    fn candidates(&self) -> Vec<Option<ClassId>> {
        std::iter::once(None)
            .chain(
                self.h
                    .classes()
                    .filter(|c| self.h.depth(*c) < self.cfg.max_depth)
                    .map(Some),
            )
            .collect()
    }

    /// Distance to both targets in class units: how many depth levels the
    /// hierarchy is off its average-depth target, plus how many subclass
    /// links it is off the inheritance-ratio target. Averages would let a
    /// single link swamp many small depth changes.
    fn cost_if(&self, parent: Option<ClassId>) -> f64 {
        let n = (self.h.len() + 1) as f64;
        let (depth, with_parent, with_child) = match parent {
            None => (1, self.with_parent, self.with_child),
            Some(p) => (
                self.h.depth(p) + 1,
                self.with_parent + 1,
                self.with_child + usize::from(self.h.children(p).is_empty()),
            ),
        };
        let depth_gap = (self.depth_sum + depth as u64) as f64 - self.cfg.avg_depth * n;
        let link_gap = with_parent as f64 - self.cfg.inheritance_ratio * with_child as f64;
        depth_gap.abs() + link_gap.abs()
    }

    /// Greedy choice; ties go to the root, then to the lowest class id.
    fn best_parent(&self) -> Option<ClassId> {
        let mut best = None;
        let mut best_cost = self.cost_if(None);
        for c in self.h.classes() {
            if self.h.depth(c) >= self.cfg.max_depth {
                continue;
            }
            let cost = self.cost_if(Some(c));
            if cost < best_cost - 1e-12 {
                best_cost = cost;
                best = Some(c);
            }
        }
        best
    }
}

/// Per-class shape figures for a parent map whose ids need not be ordered.
struct Shape {
    depth: Vec<u32>,
    size: Vec<usize>,
    /// Levels from the class down to its deepest descendant, itself included.
    height: Vec<u32>,
    children: Vec<usize>,
}

impl Shape {
    fn of(parents: &[Option<usize>]) -> Shape {
        let n = parents.len();
        let depth: Vec<u32> = (0..n)
            .map(|i| {
                let mut d = 1;
                let mut cur = parents[i];
                while let Some(p) = cur {
                    d += 1;
                    cur = parents[p];
                }
                d
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by_key(|&i| std::cmp::Reverse(depth[i]));
        let mut size = vec![1usize; n];
        let mut height = vec![1u32; n];
        let mut children = vec![0usize; n];
        for i in order {
            if let Some(p) = parents[i] {
                size[p] += size[i];
                height[p] = height[p].max(height[i] + 1);
                children[p] += 1;
            }
        }
        Shape {
            depth,
            size,
            height,
            children,
        }
    }
}

/// Distances to the three structural targets; smaller is better.
type Gaps = [f64; 3];

fn dominates(a: &Gaps, b: &Gaps) -> bool {
    const EPS: f64 = 1e-12;
    a.iter().zip(b).all(|(x, y)| *x <= y + EPS) && a.iter().zip(b).any(|(x, y)| *x < y - EPS)
}

impl Builder<'_> {
    fn gaps(&self, max_depth: u32, depth_sum: usize, with_parent: usize, with_child: usize) -> Gaps {
        let n = self.h.len() as f64;
        let ratio = if with_child == 0 {
            0.0
        } else {
            with_parent as f64 / with_child as f64
        };
        [
            (max_depth as f64 - self.cfg.max_depth as f64).abs(),
            (depth_sum as f64 / n - self.cfg.avg_depth).abs(),
            (ratio - self.cfg.inheritance_ratio).abs(),
        ]
    }

    /// Moves subtrees under new parents while some target gets closer and
    /// none gets further; stops at a hierarchy no single move improves.
    /// Returns the number of moves made.
    fn refine(&mut self) -> usize {
        let max_allowed = self.cfg.max_depth;
        let mut parents: Vec<Option<usize>> =
            self.h.parents().iter().map(|p| p.map(ClassId::index)).collect();
        let n = parents.len();
        let mut moves = 0;
        'search: loop {
            let s = Shape::of(&parents);
            let depth_sum: usize = s.depth.iter().map(|&d| d as usize).sum();
            let with_parent = parents.iter().filter(|p| p.is_some()).count();
            let with_child = s.children.iter().filter(|&&c| c > 0).count();
            let max_depth = s.depth.iter().copied().max().unwrap_or(0);
            let current = self.gaps(max_depth, depth_sum, with_parent, with_child);
            if current == [0.0; 3] {
                break;
            }
            let in_subtree = |root: usize, mut c: usize| loop {
                if c == root {
                    return true;
                }
                match parents[c] {
                    Some(p) => c = p,
                    None => return false,
                }
            };
            for i in 0..n {
                let outside_max = (0..n)
                    .filter(|&j| !in_subtree(i, j))
                    .map(|j| s.depth[j])
                    .max()
                    .unwrap_or(0);
                let old = parents[i];
                for p in std::iter::once(None).chain((0..n).map(Some)) {
                    if p == old || p.is_some_and(|p| in_subtree(i, p)) {
                        continue;
                    }
                    let new_depth = p.map_or(1, |p| s.depth[p] + 1);
                    let bottom = new_depth + s.height[i] - 1;
                    if bottom > max_allowed {
                        continue;
                    }
                    let sum = depth_sum + new_depth as usize * s.size[i]
                        - s.depth[i] as usize * s.size[i];
                    let wp = with_parent + usize::from(p.is_some()) - usize::from(old.is_some());
                    let wc = with_child + usize::from(p.is_some_and(|p| s.children[p] == 0))
                        - usize::from(old.is_some_and(|o| s.children[o] == 1));
                    let gaps = self.gaps(outside_max.max(bottom), sum, wp, wc);
                    if dominates(&gaps, &current) {
                        parents[i] = p;
                        moves += 1;
                        continue 'search;
                    }
                }
            }
            break;
        }
        if moves > 0 {
            let ids: Vec<Option<ClassId>> =
                parents.iter().map(|p| p.map(ClassId::from_index)).collect();
            self.h = ClassHierarchy::from_parents(&ids).expect("moves keep a forest");
            for pl in &mut self.placements {
                pl.parent = ids[pl.class.index()];
            }
        }
        moves
    }
}

fn add_disjointness(
    h: &mut ClassHierarchy,
    target: f64,
    rng: &mut ChaCha8Rng,
    warnings: &mut Vec<String>,
) {
    let n = h.len();
    let wanted = (target * n as f64).round() as usize;
    let mut in_pair = vec![false; n];
    let mut count = 0usize;
    while count < wanted {
        let need = wanted - count;
        let fresh_fresh = legal_pairs(h, &in_pair, 2);
        let fresh_used = legal_pairs(h, &in_pair, 1);
        let pool = if need >= 2 && !fresh_fresh.is_empty() {
            fresh_fresh
        } else if !fresh_used.is_empty() {
            fresh_used
        } else {
            Vec::new()
        };
        let Some(&(a, b)) = pool.choose(rng) else {
            warnings.push(format!(
                "only {count} of {wanted} classes could be made disjoint"
            ));
            break;
        };
        h.add_disjoint(a, b).expect("pair checked legal");
        for c in [a, b] {
            if !in_pair[c.index()] {
                in_pair[c.index()] = true;
                count += 1;
            }
        }
    }
}

/// Legal pairs introducing exactly `fresh` classes not yet in any pair.
fn legal_pairs(h: &ClassHierarchy, in_pair: &[bool], fresh: usize) -> Vec<(ClassId, ClassId)> {
    let mut out = Vec::new();
    for a in h.classes() {
        for b in h.classes().skip(a.index() + 1) {
            let new = usize::from(!in_pair[a.index()]) + usize::from(!in_pair[b.index()]);
            if new != fresh {
                continue;
            }
            if h.is_ancestor(a, b) || h.is_ancestor(b, a) || h.disjoint(a, b) {
                continue;
            }
            out.push((a, b));
        }
    }
    out
}
