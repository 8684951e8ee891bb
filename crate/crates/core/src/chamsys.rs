//! Plain chamber systems over dense node ids: adjacency partitions per
//! index, galleries, deterministic shortest galleries, gallery homotopy, and
//! spanning trees. The opposition pairs of a twin building form one.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::building::{BuildingSpace, Chamber};
use crate::coxeter::Gen;
use crate::twin::{Sign, TwinSpace};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChamberSystemError {
    EmptySystem,
    NotAPartition { index: Gen, node: u32, reason: &'static str },
}

impl fmt::Display for ChamberSystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChamberSystemError::EmptySystem => write!(f, "chamber system needs nodes"),
            ChamberSystemError::NotAPartition { index, node, reason } => {
                write!(f, "classes for {index} do not partition the nodes at {node}: {reason}")
            }
        }
    }
}

impl core::error::Error for ChamberSystemError {}

/// Adjacency structure: for each index, a partition of the nodes into
/// classes; two distinct nodes are adjacent when some index puts them in a
/// common class. Singleton classes are allowed.
#[derive(Debug, Clone)]
pub struct ChamberSystem {
    n: usize,
    /// Per index: classes sorted internally and by first node.
    classes: Vec<Vec<Vec<u32>>>,
    /// node * rank + index -> class position.
    class_of: Vec<u32>,
}

impl ChamberSystem {
    pub fn new(n: usize, partitions: Vec<Vec<Vec<u32>>>) -> Result<Self, ChamberSystemError> {
        if n == 0 {
            return Err(ChamberSystemError::EmptySystem);
        }
        let rank = partitions.len();
        let mut classes = Vec::with_capacity(rank);
        let mut class_of = vec![u32::MAX; n * rank];
        for (gi, listed) in partitions.into_iter().enumerate() {
            let index = Gen(gi as u16);
            let mut sorted: Vec<Vec<u32>> = listed
                .into_iter()
                .map(|mut class| {
                    class.sort_unstable();
                    class.dedup();
                    class
                })
                .collect();
            sorted.retain(|class| !class.is_empty());
            sorted.sort_unstable_by_key(|class| class[0]);
            for (ci, class) in sorted.iter().enumerate() {
                for &node in class {
                    if node as usize >= n {
                        return Err(ChamberSystemError::NotAPartition {
                            index,
                            node,
                            reason: "node id out of range",
                        });
                    }
                    let slot = &mut class_of[node as usize * rank + gi];
                    if *slot != u32::MAX {
                        return Err(ChamberSystemError::NotAPartition {
                            index,
                            node,
                            reason: "node in two classes",
                        });
                    }
                    *slot = ci as u32;
                }
            }
            if let Some(node) = (0..n).find(|&c| class_of[c * rank + gi] == u32::MAX) {
                return Err(ChamberSystemError::NotAPartition {
                    index,
                    node: node as u32,
                    reason: "node in no class",
                });
            }
            classes.push(sorted);
        }
        Ok(ChamberSystem { n, classes, class_of })
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.classes.len()
    }

    pub fn indices(&self) -> impl Iterator<Item = Gen> {
        (0..self.rank() as u16).map(Gen)
    }

    /// The class of the given index containing the node (sorted).
    #[inline]
    pub fn class(&self, index: Gen, node: u32) -> &[u32] {
        let ci = self.class_of[node as usize * self.rank() + index.index()];
        &self.classes[index.index()][ci as usize]
    }

    pub fn classes(&self, index: Gen) -> &[Vec<u32>] {
        &self.classes[index.index()]
    }

    #[inline]
    pub fn adjacent(&self, index: Gen, a: u32, b: u32) -> bool {
        a != b && self.class(index, a).binary_search(&b).is_ok()
    }

    /// Shortest gallery from a to b, deterministic: among all shortest
    /// galleries it takes, at every step, the least (index, node) move whose
    /// target lies on some shortest continuation. With building panels this
    /// realizes the lexicographically least reduced word of the distance.
    pub fn find_gallery(&self, a: u32, b: u32) -> Option<Gallery> {
        self.find_gallery_typed(a, b, None)
    }

    /// As find_gallery, stepping only along the allowed indices.
    pub fn find_gallery_within(&self, a: u32, b: u32, allowed: &[Gen]) -> Option<Gallery> {
        self.find_gallery_typed(a, b, Some(allowed))
    }

    fn allowed_indices(&self, allowed: Option<&[Gen]>) -> Vec<Gen> {
        match allowed {
            None => self.indices().collect(),
            Some(list) => {
                let mut v: Vec<Gen> = list.to_vec();
                v.sort_unstable();
                v.dedup();
                v
            }
        }
    }

    fn find_gallery_typed(&self, a: u32, b: u32, allowed: Option<&[Gen]>) -> Option<Gallery> {
        let idx = self.allowed_indices(allowed);
        // Distance-to-target field, then a greedy descent from the source.
        let mut dist = vec![u32::MAX; self.n];
        dist[b as usize] = 0;
        let mut queue = VecDeque::new();
        queue.push_back(b);
        while let Some(u) = queue.pop_front() {
            if u == a {
                break;
            }
            for &s in &idx {
                for &v in self.class(s, u) {
                    if dist[v as usize] == u32::MAX {
                        dist[v as usize] = dist[u as usize] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        if dist[a as usize] == u32::MAX {
            return None;
        }
        let mut nodes = vec![a];
        let mut types = Vec::new();
        let mut u = a;
        while u != b {
            let du = dist[u as usize];
            let mut step: Option<(Gen, u32)> = None;
            for &s in &idx {
                for &v in self.class(s, u) {
                    if v != u && dist[v as usize] == du - 1 && step.is_none_or(|t| (s, v) < t) {
                        step = Some((s, v));
                    }
                }
            }
            let (s, v) = step.expect("distance field admits a descent");
            nodes.push(v);
            types.push(s);
            u = v;
        }
        Some(Gallery { nodes, types })
    }

    /// True when the gallery's stated steps are genuine adjacencies.
    pub fn is_gallery(&self, g: &Gallery) -> bool {
        g.nodes.len() == g.types.len() + 1
            && !g.nodes.is_empty()
            && g.steps().all(|(u, s, v)| self.adjacent(s, u, v))
    }

    /// Breadth-first spanning tree from the root, visiting indices and
    /// class members in ascending order; non-tree adjacency edges are
    /// reported once each, endpoints ascending.
    pub fn spanning_tree(&self, root: u32) -> SpanningTree {
        let mut parent = vec![None; self.n];
        let mut seen = vec![false; self.n];
        let mut order = vec![root];
        seen[root as usize] = true;
        let mut head = 0;
        let mut non_tree = Vec::new();
        while head < order.len() {
            let u = order[head];
            head += 1;
            for s in self.indices() {
                for &v in self.class(s, u) {
                    if v == u {
                        continue;
                    }
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        parent[v as usize] = Some((u, s));
                        order.push(v);
                    } else if parent[v as usize].is_none_or(|(p, ps)| (p, ps) != (u, s))
                        && parent[u as usize].is_none_or(|(p, ps)| (p, ps) != (v, s))
                        && u < v
                    {
                        non_tree.push((u, v, s));
                    }
                }
            }
        }
        non_tree.sort_unstable();
        SpanningTree { root, parent, order, non_tree }
    }

    /// Gallery homotopy in one elementary move: after removing a common
    /// prefix and suffix, both middles must run inside one rank <= 2 index
    /// set (equal galleries are trivially homotopic).
    pub fn elementary_homotopy_check(&self, a: &Gallery, b: &Gallery) -> bool {
        if !self.is_gallery(a) || !self.is_gallery(b) {
            return false;
        }
        if a.nodes.first() != b.nodes.first() || a.nodes.last() != b.nodes.last() {
            return false;
        }
        let mut pre = 0;
        while pre < a.types.len()
            && pre < b.types.len()
            && a.nodes[pre + 1] == b.nodes[pre + 1]
            && a.types[pre] == b.types[pre]
        {
            pre += 1;
        }
        let mut suf = 0;
        while suf + pre < a.types.len()
            && suf + pre < b.types.len()
            && a.nodes[a.nodes.len() - 2 - suf] == b.nodes[b.nodes.len() - 2 - suf]
            && a.types[a.types.len() - 1 - suf] == b.types[b.types.len() - 1 - suf]
        {
            suf += 1;
        }
        let mut middle_types: BTreeSet<Gen> = BTreeSet::new();
        middle_types.extend(&a.types[pre..a.types.len() - suf]);
        middle_types.extend(&b.types[pre..b.types.len() - suf]);
        middle_types.len() <= 2
    }

    /// Contracts a closed gallery to its basepoint by moves that strictly
    /// shorten it: a segment whose step types span at most two indices is
    /// replaced by the deterministic shortest gallery between its endpoints
    /// (a closed such segment vanishes). Exhausting the move closure is not
    /// a proof that no null homotopy exists, since length-preserving moves
    /// are outside the move set; the outcome says which happened.
    pub fn null_homotopy_search(&self, g: &Gallery, budget: usize) -> Homotopy {
        assert_eq!(
            g.nodes.first(),
            g.nodes.last(),
            "null homotopy applies to closed galleries"
        );
        if !self.is_gallery(g) {
            panic!("input is not a gallery");
        }
        let mut queue = VecDeque::new();
        let mut paths: BTreeMap<Gallery, Vec<ContractionMove>> = BTreeMap::new();
        paths.insert(g.clone(), Vec::new());
        queue.push_back(g.clone());
        let mut expanded = 0usize;
        while let Some(cur) = queue.pop_front() {
            if cur.is_empty() {
                return Homotopy::Contractible {
                    moves: paths.remove(&cur).unwrap_or_default(),
                };
            }
            if expanded >= budget {
                return Homotopy::NoWithinBudget;
            }
            expanded += 1;
            let n = cur.types.len();
            for i in 0..n {
                let mut span: BTreeSet<Gen> = BTreeSet::new();
                for j in i + 1..=n {
                    span.insert(cur.types[j - 1]);
                    if span.len() > 2 {
                        break;
                    }
                    let allowed: Vec<Gen> = span.iter().copied().collect();
                    let (from, to) = (cur.nodes[i], cur.nodes[j]);
                    let Some(repl) = self.find_gallery_within(from, to, &allowed) else {
                        continue;
                    };
                    if repl.len() >= j - i {
                        continue;
                    }
                    let mut next_nodes = cur.nodes[..i].to_vec();
                    next_nodes.extend_from_slice(&repl.nodes);
                    next_nodes.extend_from_slice(&cur.nodes[j + 1..]);
                    let mut next_types = cur.types[..i].to_vec();
                    next_types.extend_from_slice(&repl.types);
                    next_types.extend_from_slice(&cur.types[j..]);
                    let next = Gallery { nodes: next_nodes, types: next_types };
                    if !paths.contains_key(&next) {
                        let mut trail = paths[&cur].clone();
                        trail.push(ContractionMove { at: i, old_len: j - i, new_len: repl.len() });
                        paths.insert(next.clone(), trail);
                        queue.push_back(next);
                    }
                }
            }
        }
        Homotopy::MoveClosureExhausted
    }
}

/// A walk whose i-th step joins nodes[i] to nodes[i+1] within the class of
/// types[i].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Gallery {
    pub nodes: Vec<u32>,
    pub types: Vec<Gen>,
}

impl Gallery {
    pub fn trivial(node: u32) -> Gallery {
        Gallery { nodes: vec![node], types: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.nodes.first() == self.nodes.last()
    }

    pub fn steps(&self) -> impl Iterator<Item = (u32, Gen, u32)> + '_ {
        (0..self.types.len()).map(|i| (self.nodes[i], self.types[i], self.nodes[i + 1]))
    }

    pub fn reversed(&self) -> Gallery {
        Gallery {
            nodes: self.nodes.iter().rev().copied().collect(),
            types: self.types.iter().rev().copied().collect(),
        }
    }

    /// Joins two galleries sharing an endpoint.
    pub fn concat(&self, other: &Gallery) -> Gallery {
        assert_eq!(self.nodes.last(), other.nodes.first());
        let mut nodes = self.nodes.clone();
        nodes.extend_from_slice(&other.nodes[1..]);
        let mut types = self.types.clone();
        types.extend_from_slice(&other.types);
        Gallery { nodes, types }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContractionMove {
    pub at: usize,
    pub old_len: usize,
    pub new_len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Homotopy {
    Contractible { moves: Vec<ContractionMove> },
    NoWithinBudget,
    MoveClosureExhausted,
}

#[derive(Debug, Clone)]
pub struct SpanningTree {
    pub root: u32,
    /// BFS parent and the index of the tree edge, None at the root.
    pub parent: Vec<Option<(u32, Gen)>>,
    /// Discovery order; tree edges are (parent[v], v) for v in order[1..].
    pub order: Vec<u32>,
    /// Adjacency edges outside the tree, (low, high, index), sorted.
    pub non_tree: Vec<(u32, u32, Gen)>,
}

impl SpanningTree {
    pub fn is_spanning(&self) -> bool {
        self.order.len() == self.parent.len()
    }
}

/// The chamber system with one node per panel of a building.
pub fn from_building(b: &BuildingSpace) -> ChamberSystem {
    let partitions = b
        .group()
        .matrix()
        .gens()
        .map(|s| {
            b.panels(s)
                .iter()
                .map(|class| class.iter().map(|c| c.0).collect())
                .collect()
        })
        .collect();
    ChamberSystem::new(b.n_chambers(), partitions).expect("panels partition the chambers")
}

/// The opposition chamber system of a twin building: nodes are the opposite
/// pairs (sorted by plus then minus chamber), and two pairs are s-adjacent
/// when both components are s-equal-or-adjacent on their own sides.
#[derive(Debug)]
pub struct OppSystem {
    pairs: Vec<(Chamber, Chamber)>,
    system: ChamberSystem,
}

impl OppSystem {
    pub fn new(tw: &TwinSpace) -> OppSystem {
        let mut pairs = Vec::new();
        for x in tw.building(Sign::Plus).chambers() {
            for &y in tw.opposites(Sign::Plus, x) {
                pairs.push((x, y));
            }
        }
        pairs.sort_unstable();
        let rank = tw.group().rank();
        let mut partitions = vec![Vec::new(); rank];
        for (gi, partition) in partitions.iter_mut().enumerate() {
            let s = Gen(gi as u16);
            let mut by_panels: BTreeMap<(Chamber, Chamber), Vec<u32>> = BTreeMap::new();
            for (pi, &(x, y)) in pairs.iter().enumerate() {
                let key = (
                    tw.building(Sign::Plus).panel(s, x)[0],
                    tw.building(Sign::Minus).panel(s, y)[0],
                );
                by_panels.entry(key).or_default().push(pi as u32);
            }
            partition.extend(by_panels.into_values());
        }
        let system = ChamberSystem::new(pairs.len(), partitions)
            .expect("product panels partition the opposite pairs");
        OppSystem { pairs, system }
    }

    pub fn pairs(&self) -> &[(Chamber, Chamber)] {
        &self.pairs
    }

    pub fn system(&self) -> &ChamberSystem {
        &self.system
    }

    pub fn node_of(&self, pair: (Chamber, Chamber)) -> Option<u32> {
        self.pairs.binary_search(&pair).ok().map(|i| i as u32)
    }

    pub fn pair_of(&self, node: u32) -> (Chamber, Chamber) {
        self.pairs[node as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn building_galleries_realize_least_reduced_words() {
        let b = fixtures::fano_building();
        let sys = from_building(&b);
        let g = b.group().clone();
        for x in b.chambers() {
            for y in b.chambers() {
                let gal = sys.find_gallery(x.0, y.0).unwrap();
                assert!(sys.is_gallery(&gal));
                assert_eq!(gal.nodes[0], x.0);
                assert_eq!(*gal.nodes.last().unwrap(), y.0);
                let w = b.dist(x, y);
                assert_eq!(gal.len() as u32, g.len(w));
                // The step types must be the canonical word of the distance.
                assert_eq!(gal.types, g.word(w));
            }
        }
    }

    #[test]
    fn restricted_galleries_stay_inside_residues() {
        let b = fixtures::cube_building();
        let sys = from_building(&b);
        // Within axes {0, 2} only digit-1 positions stay fixed; node 20 has
        // digits (2, 0, 2), reachable from (0, 0, 0) in two moves.
        let gal = sys
            .find_gallery_within(0, 20, &[Gen(0), Gen(2)])
            .unwrap();
        assert_eq!(gal.len(), 2);
        assert!(sys.find_gallery_within(0, 13, &[Gen(0), Gen(2)]).is_none());
    }

    #[test]
    fn spanning_tree_counts_on_the_fano_system() {
        let b = fixtures::fano_building();
        let sys = from_building(&b);
        let tree = sys.spanning_tree(0);
        assert!(tree.is_spanning());
        assert_eq!(tree.order.len(), 21);
        // 21 chambers, 2 panels each of size 3: 42 adjacency edges total.
        assert_eq!(tree.non_tree.len(), 42 - 20);
        for &(u, v, s) in &tree.non_tree {
            assert!(u < v);
            assert!(sys.adjacent(s, u, v));
        }
    }

    #[test]
    fn elementary_homotopy_accepts_rank_two_rewrites_only() {
        let b = fixtures::cube_building();
        let sys = from_building(&b);
        // From 000 to 110 two ways around the axes-(0,1) square.
        let a = Gallery { nodes: vec![0, 9, 12], types: vec![Gen(0), Gen(1)] };
        let c = Gallery { nodes: vec![0, 3, 12], types: vec![Gen(1), Gen(0)] };
        assert!(sys.is_gallery(&a) && sys.is_gallery(&c));
        assert!(sys.elementary_homotopy_check(&a, &c));
        // Three indices in the stripped middles: not elementary.
        let d = Gallery {
            nodes: vec![0, 9, 12, 13],
            types: vec![Gen(0), Gen(1), Gen(2)],
        };
        let e = Gallery {
            nodes: vec![0, 1, 4, 13],
            types: vec![Gen(2), Gen(1), Gen(0)],
        };
        assert!(sys.is_gallery(&d) && sys.is_gallery(&e));
        assert!(!sys.elementary_homotopy_check(&d, &e));
        // Different endpoints never compare.
        assert!(!sys.elementary_homotopy_check(&a, &d));
    }

    #[test]
    fn closed_galleries_contract_on_small_systems() {
        let fano = fixtures::fano_building();
        let sys = from_building(&fano);
        let there = sys.find_gallery(0, 20).unwrap();
        let back = sys.find_gallery(20, 0).unwrap();
        let loop_gallery = there.concat(&back);
        assert!(loop_gallery.is_closed());
        match sys.null_homotopy_search(&loop_gallery, 10_000) {
            Homotopy::Contractible { moves } => assert!(!moves.is_empty()),
            other => panic!("expected contraction, got {other:?}"),
        }
        assert_eq!(
            sys.null_homotopy_search(&loop_gallery, 0),
            Homotopy::NoWithinBudget
        );

        let cube = fixtures::cube_building();
        let csys = from_building(&cube);
        // Walk a 2-face of the cube complex and close up.
        let square = Gallery {
            nodes: vec![0, 9, 12, 3, 0],
            types: vec![Gen(0), Gen(1), Gen(0), Gen(1)],
        };
        assert!(csys.is_gallery(&square));
        assert!(matches!(
            csys.null_homotopy_search(&square, 10_000),
            Homotopy::Contractible { .. }
        ));
        assert!(matches!(
            csys.null_homotopy_search(&Gallery::trivial(5), 10),
            Homotopy::Contractible { moves } if moves.is_empty()
        ));
    }

    #[test]
    fn opposition_system_of_the_cube_double() {
        let tw = fixtures::cube_double();
        let opp = OppSystem::new(&tw);
        assert_eq!(opp.pairs().len(), 216);
        let sys = opp.system();
        let tree = sys.spanning_tree(0);
        assert!(tree.is_spanning());
        assert_eq!(tree.order.len(), 216);
        // Connected with eccentricity at most 3 from every node.
        for start in 0..216u32 {
            let mut dist = vec![u32::MAX; 216];
            let mut queue = VecDeque::from([start]);
            dist[start as usize] = 0;
            while let Some(u) = queue.pop_front() {
                for s in sys.indices() {
                    for &v in sys.class(s, u) {
                        if dist[v as usize] == u32::MAX {
                            dist[v as usize] = dist[u as usize] + 1;
                            queue.push_back(v);
                        }
                    }
                }
            }
            assert!(dist.iter().all(|&d| d <= 3));
        }
    }

    #[test]
    fn opposition_adjacency_needs_both_components() {
        let tw = fixtures::fano_double();
        let opp = OppSystem::new(&tw);
        assert_eq!(opp.pairs().len(), 21 * 8);
        let sys = opp.system();
        assert!(sys
            .indices()
            .all(|s| sys.classes(s).iter().map(|c| c.len()).sum::<usize>() == 168));
        for s in sys.indices() {
            for node in 0..168u32 {
                let (x, y) = opp.pair_of(node);
                for &other in sys.class(s, node) {
                    let (x2, y2) = opp.pair_of(other);
                    let plus_ok = x == x2
                        || tw.building(Sign::Plus).panel(s, x).binary_search(&x2).is_ok();
                    let minus_ok = y == y2
                        || tw.building(Sign::Minus).panel(s, y).binary_search(&y2).is_ok();
                    assert!(plus_ok && minus_ok);
                }
            }
        }
        let tiny = fixtures::rank1_double(3);
        let topp = OppSystem::new(&tiny);
        assert_eq!(topp.pairs().len(), 6);
        assert!(topp.node_of((Chamber(0), Chamber(1))).is_some());
        assert!(topp.node_of((Chamber(0), Chamber(0))).is_none());
    }
}
