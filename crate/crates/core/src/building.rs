//! Buildings as W-metric chamber sets: distance reconstruction, axiom
//! validation, residues, projections, foundations, apartments.

use alloc::collections::VecDeque;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::coxeter::{CoxeterGroup, Elem, Gen};

/// Dense 0-based chamber id within one building.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chamber(pub u32);

impl Chamber {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Chamber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axiom {
    Bu1,
    Bu2,
    Bu3,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::Bu1 => write!(f, "Bu1"),
            Axiom::Bu2 => write!(f, "Bu2"),
            Axiom::Bu3 => write!(f, "Bu3"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildingError {
    NoChambers,
    MalformedPanels {
        gen: Gen,
        chamber: Chamber,
        reason: &'static str,
    },
    /// A listed panel with fewer than two chambers.
    PanelTooSmall { gen: Gen, chamber: Chamber },
    /// The panel graph does not induce a single well-defined W-distance.
    InconsistentDistance {
        x: Chamber,
        y: Chamber,
        note: &'static str,
    },
    AxiomViolation {
        axiom: Axiom,
        x: Chamber,
        y: Chamber,
        z: Option<Chamber>,
        s: Option<Gen>,
    },
    GateNotUnique { from: Chamber, in_residue_of: Chamber },
    NotInResidue { chamber: Chamber },
}

impl fmt::Display for BuildingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildingError::NoChambers => write!(f, "building must have at least one chamber"),
            BuildingError::MalformedPanels { gen, chamber, reason } => {
                write!(f, "malformed {gen}-panels at {chamber}: {reason}")
            }
            BuildingError::PanelTooSmall { gen, chamber } => {
                write!(f, "listed {gen}-panel at {chamber} has fewer than two chambers")
            }
            BuildingError::InconsistentDistance { x, y, note } => {
                write!(f, "inconsistent distance between {x} and {y}: {note}")
            }
            BuildingError::AxiomViolation { axiom, x, y, z, s } => {
                write!(f, "axiom {axiom} fails at x={x}, y={y}")?;
                if let Some(z) = z {
                    write!(f, ", z={z}")?;
                }
                if let Some(s) = s {
                    write!(f, ", s={s}")?;
                }
                Ok(())
            }
            BuildingError::GateNotUnique { from, in_residue_of } => {
                write!(f, "projection of {from} to the residue of {in_residue_of} is not unique")
            }
            BuildingError::NotInResidue { chamber } => {
                write!(f, "{chamber} does not belong to the given residue")
            }
        }
    }
}

impl core::error::Error for BuildingError {}

/// J-residue: the sorted chamber set {y : delta(x, y) in <J>} for some x.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    jtype: Vec<Gen>,
    chambers: Vec<Chamber>,
}

impl Residue {
    pub fn jtype(&self) -> &[Gen] {
        &self.jtype
    }

    pub fn chambers(&self) -> &[Chamber] {
        &self.chambers
    }

    pub fn rank(&self) -> usize {
        self.jtype.len()
    }

    pub fn contains(&self, x: Chamber) -> bool {
        self.chambers.binary_search(&x).is_ok()
    }
}

/// Validated building: immutable panel partitions plus the full distance table.
#[derive(Debug)]
pub struct BuildingSpace {
    group: Arc<CoxeterGroup>,
    n: usize,
    /// Per generator: the full panel partition (implicit singletons included),
    /// classes sorted internally and by first chamber.
    panels: Vec<Vec<Vec<Chamber>>>,
    /// chamber * rank + gen -> index into panels[gen].
    panel_of: Vec<u32>,
    /// n * n row-major Weyl distance, by element id.
    dist: Vec<u32>,
}

/// Builds the distance table from the panel partitions by breadth-first
/// closure and checks (Bu1)-(Bu3) exhaustively. A chamber omitted from a
/// generator's listing sits in an implicit singleton panel, which is already
/// a (Bu3) counterexample and is reported as one; a listed class of size < 2
/// is a structural error instead.
pub fn validate_building(
    group: Arc<CoxeterGroup>,
    n_chambers: usize,
    listed_panels: &[Vec<Vec<Chamber>>],
) -> Result<BuildingSpace, BuildingError> {
    let rank = group.rank();
    if n_chambers == 0 {
        return Err(BuildingError::NoChambers);
    }
    if listed_panels.len() != rank {
        return Err(BuildingError::MalformedPanels {
            gen: Gen(listed_panels.len() as u16),
            chamber: Chamber(0),
            reason: "one panel list required per generator",
        });
    }

    let mut panels: Vec<Vec<Vec<Chamber>>> = Vec::with_capacity(rank);
    let mut panel_of = vec![u32::MAX; n_chambers * rank];
    for (gi, listed) in listed_panels.iter().enumerate() {
        let gen = Gen(gi as u16);
        let mut classes: Vec<Vec<Chamber>> = Vec::new();
        for class in listed {
            let mut class = class.clone();
            class.sort_unstable();
            class.dedup();
            let Some(&first) = class.first() else {
                return Err(BuildingError::MalformedPanels {
                    gen,
                    chamber: Chamber(0),
                    reason: "empty panel listed",
                });
            };
            if class.len() < 2 {
                return Err(BuildingError::PanelTooSmall { gen, chamber: first });
            }
            for &c in &class {
                if c.index() >= n_chambers {
                    return Err(BuildingError::MalformedPanels {
                        gen,
                        chamber: c,
                        reason: "chamber id out of range",
                    });
                }
                if panel_of[c.index() * rank + gi] != u32::MAX {
                    return Err(BuildingError::MalformedPanels {
                        gen,
                        chamber: c,
                        reason: "chamber listed in two panels",
                    });
                }
                panel_of[c.index() * rank + gi] = classes.len() as u32;
            }
            classes.push(class);
        }
        for c in 0..n_chambers {
            if panel_of[c * rank + gi] == u32::MAX {
                // An uncovered chamber forms a singleton panel, which already
                // falsifies (Bu3): no z with delta(c, z) = s can exist.
                return Err(BuildingError::AxiomViolation {
                    axiom: Axiom::Bu3,
                    x: Chamber(c as u32),
                    y: Chamber(c as u32),
                    z: None,
                    s: Some(gen),
                });
            }
        }
        // Reindex classes by first chamber for a deterministic layout.
        let mut order: Vec<usize> = (0..classes.len()).collect();
        order.sort_unstable_by_key(|&i| classes[i][0]);
        let mut relabel = vec![0u32; classes.len()];
        for (new, &old) in order.iter().enumerate() {
            relabel[old] = new as u32;
        }
        for c in 0..n_chambers {
            let slot = &mut panel_of[c * rank + gi];
            *slot = relabel[*slot as usize];
        }
        let mut sorted = vec![Vec::new(); classes.len()];
        for (old, class) in classes.into_iter().enumerate() {
            sorted[relabel[old] as usize] = class;
        }
        panels.push(sorted);
    }

    let space = BuildingSpace {
        group,
        n: n_chambers,
        panels,
        panel_of,
        dist: Vec::new(),
    };
    let dist = space.reconstruct_distance()?;
    let space = BuildingSpace { dist, ..space };
    space.check_axioms()?;
    Ok(space)
}

impl BuildingSpace {
    fn reconstruct_distance(&self) -> Result<Vec<u32>, BuildingError> {
        let g = &self.group;
        let n = self.n;
        let mut dist = vec![u32::MAX; n * n];
        let mut queue = VecDeque::new();
        for x in 0..n {
            let row = &mut dist[x * n..(x + 1) * n];
            row[x] = Elem::IDENTITY.0;
            queue.clear();
            queue.push_back(Chamber(x as u32));
            while let Some(y) = queue.pop_front() {
                let w = Elem(row[y.index()]);
                for s in g.matrix().gens() {
                    let ws = g.right_mul(w, s);
                    for &z in self.panel(s, y) {
                        if z == y {
                            continue;
                        }
                        if row[z.index()] == u32::MAX {
                            if g.len(ws) != g.len(w) + 1 {
                                return Err(BuildingError::InconsistentDistance {
                                    x: Chamber(x as u32),
                                    y: z,
                                    note: "first gallery found is not reduced",
                                });
                            }
                            row[z.index()] = ws.0;
                            queue.push_back(z);
                        } else if g.len(Elem(row[z.index()])) == g.len(w) + 1
                            && row[z.index()] != ws.0
                        {
                            return Err(BuildingError::InconsistentDistance {
                                x: Chamber(x as u32),
                                y: z,
                                note: "two minimal galleries yield different elements",
                            });
                        }
                    }
                }
            }
            if let Some(y) = row.iter().position(|&d| d == u32::MAX) {
                return Err(BuildingError::InconsistentDistance {
                    x: Chamber(x as u32),
                    y: Chamber(y as u32),
                    note: "no gallery connects the chambers",
                });
            }
        }
        Ok(dist)
    }

    fn check_axioms(&self) -> Result<(), BuildingError> {
        let g = &self.group;
        let n = self.n;
        let d = |x: usize, y: usize| Elem(self.dist[x * n + y]);

        for x in 0..n {
            for y in 0..n {
                if (d(x, y) == Elem::IDENTITY) != (x == y) {
                    return Err(BuildingError::AxiomViolation {
                        axiom: Axiom::Bu1,
                        x: Chamber(x as u32),
                        y: Chamber(y as u32),
                        z: None,
                        s: None,
                    });
                }
                if d(y, x) != g.inv(d(x, y)) {
                    return Err(BuildingError::InconsistentDistance {
                        x: Chamber(x as u32),
                        y: Chamber(y as u32),
                        note: "distance is not inverse-symmetric",
                    });
                }
                // Length-one distances must be panel edges and vice versa.
                let e = d(x, y);
                if g.len(e) == 1 {
                    let s = g.word(e)[0];
                    if self.panel_index(s, Chamber(x as u32))
                        != self.panel_index(s, Chamber(y as u32))
                    {
                        return Err(BuildingError::InconsistentDistance {
                            x: Chamber(x as u32),
                            y: Chamber(y as u32),
                            note: "generator-valued distance without a panel edge",
                        });
                    }
                }
            }
        }
        for s in g.matrix().gens() {
            for class in &self.panels[s.index()] {
                for &y in class {
                    for &z in class {
                        if y != z && g.word(d(y.index(), z.index())) != [s] {
                            return Err(BuildingError::InconsistentDistance {
                                x: y,
                                y: z,
                                note: "panel edge without generator-valued distance",
                            });
                        }
                    }
                }
            }
        }

        // (Bu2) over every pair against every adjacency edge.
        for x in 0..n {
            for y in 0..n {
                let w = d(x, y);
                for s in g.matrix().gens() {
                    let ws = g.right_mul(w, s);
                    let ascent = g.len(ws) > g.len(w);
                    for &z in self.panel(s, Chamber(y as u32)) {
                        if z.index() == y {
                            continue;
                        }
                        let got = d(x, z.index());
                        if (got != w && got != ws) || (ascent && got != ws) {
                            return Err(BuildingError::AxiomViolation {
                                axiom: Axiom::Bu2,
                                x: Chamber(x as u32),
                                y: Chamber(y as u32),
                                z: Some(z),
                                s: Some(s),
                            });
                        }
                    }
                }
            }
        }

        // (Bu3): one-step extension always exists.
        for x in 0..n {
            for y in 0..n {
                let w = d(x, y);
                for s in g.matrix().gens() {
                    let ws = g.right_mul(w, s);
                    let found = self
                        .panel(s, Chamber(y as u32))
                        .iter()
                        .any(|&z| z.index() != y && d(x, z.index()) == ws);
                    if !found {
                        return Err(BuildingError::AxiomViolation {
                            axiom: Axiom::Bu3,
                            x: Chamber(x as u32),
                            y: Chamber(y as u32),
                            z: None,
                            s: Some(s),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<CoxeterGroup> {
        &self.group
    }

    pub fn n_chambers(&self) -> usize {
        self.n
    }

    pub fn chambers(&self) -> impl Iterator<Item = Chamber> {
        (0..self.n as u32).map(Chamber)
    }

    /// Weyl distance from the reconstructed table.
    #[inline]
    pub fn dist(&self, x: Chamber, y: Chamber) -> Elem {
        Elem(self.dist[x.index() * self.n + y.index()])
    }

    /// Numerical gallery distance l(delta(x, y)).
    #[inline]
    pub fn gallery_len(&self, x: Chamber, y: Chamber) -> u32 {
        self.group.len(self.dist(x, y))
    }

    #[inline]
    fn panel_index(&self, s: Gen, x: Chamber) -> u32 {
        self.panel_of[x.index() * self.group.rank() + s.index()]
    }

    /// The s-panel through x, as a sorted chamber slice.
    #[inline]
    pub fn panel(&self, s: Gen, x: Chamber) -> &[Chamber] {
        &self.panels[s.index()][self.panel_index(s, x) as usize]
    }

    /// All s-panels, sorted by first chamber.
    pub fn panels(&self, s: Gen) -> &[Vec<Chamber>] {
        &self.panels[s.index()]
    }

    /// Ok when every panel has at least three chambers; otherwise a thin witness.
    pub fn thickness_check(&self) -> Result<(), (Gen, Chamber)> {
        for s in self.group.matrix().gens() {
            for class in &self.panels[s.index()] {
                if class.len() < 3 {
                    return Err((s, class[0]));
                }
            }
        }
        Ok(())
    }

    /// The J-residue containing x: {y : delta(x, y) in <J>}.
    pub fn residue_of(&self, x: Chamber, j: &[Gen]) -> Residue {
        let mut jtype: Vec<Gen> = j.to_vec();
        jtype.sort_unstable();
        jtype.dedup();
        let mask = self.group.gen_mask(&jtype);
        let chambers = self
            .chambers()
            .filter(|&y| self.group.in_parabolic(self.dist(x, y), mask))
            .collect();
        Residue { jtype, chambers }
    }

    /// Gate of a residue: the unique chamber of r nearest to x. The gate law
    /// delta(x, y) = delta(x, gate) * delta(gate, y) holds in a validated
    /// building and is asserted in debug builds.
    pub fn project_to_residue(&self, x: Chamber, r: &Residue) -> Result<Chamber, BuildingError> {
        let rep = *r.chambers().first().ok_or(BuildingError::NotInResidue {
            chamber: x,
        })?;
        let mut gate = rep;
        let mut best = self.gallery_len(x, rep);
        let mut tied = false;
        for &y in &r.chambers()[1..] {
            let len = self.gallery_len(x, y);
            if len < best {
                best = len;
                gate = y;
                tied = false;
            } else if len == best {
                tied = true;
            }
        }
        if tied {
            return Err(BuildingError::GateNotUnique {
                from: x,
                in_residue_of: rep,
            });
        }
        debug_assert!(r.chambers().iter().all(|&y| {
            self.dist(x, y) == self.group.mul(self.dist(x, gate), self.dist(gate, y))
        }));
        Ok(gate)
    }

    /// Foundation E_k(x): the union of the rank <= k residues containing x,
    /// i.e. chambers whose distance from x has support of size <= k.
    pub fn foundation(&self, x: Chamber, k: usize) -> Vec<Chamber> {
        self.chambers()
            .filter(|&y| {
                (self.group.support_mask(self.dist(x, y)).count_ones() as usize) <= k
            })
            .collect()
    }

    /// True iff sigma is thin, convex, and chamber-bijective with W from
    /// each of its chambers.
    pub fn apartment_check(&self, sigma: &[Chamber]) -> bool {
        let mut sigma: Vec<Chamber> = sigma.to_vec();
        sigma.sort_unstable();
        sigma.dedup();
        if sigma.is_empty() || sigma.len() != self.group.order() {
            return false;
        }
        let inside = |c: Chamber| sigma.binary_search(&c).is_ok();
        for &c in &sigma {
            // Thin: exactly one companion per panel.
            for s in self.group.matrix().gens() {
                let companions = self
                    .panel(s, c)
                    .iter()
                    .filter(|&&z| z != c && inside(z))
                    .count();
                if companions != 1 {
                    return false;
                }
            }
            // Bijective onto W: distances from c are pairwise distinct.
            let mut seen = vec![false; self.group.order()];
            for &y in &sigma {
                let e = self.dist(c, y);
                if seen[e.index()] {
                    return false;
                }
                seen[e.index()] = true;
            }
            // Convex: gates of panels meeting sigma stay inside.
            for &d in &sigma {
                for s in self.group.matrix().gens() {
                    let panel = self.panel(s, d);
                    let gate = panel
                        .iter()
                        .copied()
                        .min_by_key(|&z| (self.gallery_len(c, z), z.0))
                        .expect("panels are nonempty");
                    if !inside(gate) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use alloc::vec;

    #[test]
    fn rank1_building_is_a_single_panel() {
        let b = fixtures::rank1_building(3);
        assert_eq!(b.n_chambers(), 3);
        let s = Gen(0);
        for x in b.chambers() {
            for y in b.chambers() {
                let expect = if x == y { &[][..] } else { &[s][..] };
                assert_eq!(b.group().word(b.dist(x, y)), expect);
            }
        }
        assert!(b.thickness_check().is_ok());
        assert_eq!(b.foundation(Chamber(0), 0), vec![Chamber(0)]);
        assert_eq!(b.foundation(Chamber(0), 1).len(), 3);
    }

    #[test]
    fn thin_polygon_is_a_building_and_an_apartment() {
        let b = fixtures::polygon_building(3);
        assert_eq!(b.n_chambers(), 6);
        // Opposite corners of the hexagon sit at the longest element.
        let w0 = b.group().longest_element(&[Gen(0), Gen(1)]);
        assert_eq!(b.dist(Chamber(0), Chamber(3)), w0);
        let all: Vec<Chamber> = b.chambers().collect();
        assert!(b.apartment_check(&all));
        assert!(!b.apartment_check(&all[..5]));
        // Thin panels are flagged by the thickness check.
        assert_eq!(b.thickness_check(), Err((Gen(0), Chamber(0))));
    }

    #[test]
    fn square_panel_graph_needs_commuting_bond() {
        let panels = vec![
            vec![vec![Chamber(0), Chamber(1)], vec![Chamber(2), Chamber(3)]],
            vec![vec![Chamber(1), Chamber(2)], vec![Chamber(3), Chamber(0)]],
        ];
        // With bond 2 the 4-cycle is the apartment of A1 x A1.
        let ok = validate_building(fixtures::dihedral_group(2), 4, &panels).unwrap();
        assert_eq!(ok.gallery_len(Chamber(0), Chamber(2)), 2);
        assert!(ok.apartment_check(&ok.chambers().collect::<Vec<_>>()));
        // With bond 3 the two minimal galleries around the square disagree.
        let err = validate_building(fixtures::dihedral_group(3), 4, &panels).unwrap_err();
        assert!(matches!(err, BuildingError::InconsistentDistance { .. }), "{err}");
    }

    #[test]
    fn fano_distances_match_incidence_classification() {
        let b = fixtures::fano_building();
        let flags = fixtures::fano_flags();
        let lines = fixtures::fano_lines();
        assert_eq!(b.n_chambers(), 21);
        assert!(b.thickness_check().is_ok());
        let mut opposite_counts = [0usize; 21];
        let w0 = b.group().longest_element(&[Gen(0), Gen(1)]);
        for (i, &fa) in flags.iter().enumerate() {
            for (j, &fb) in flags.iter().enumerate() {
                let expect = fixtures::fano_expected_word(&lines, fa, fb);
                let got = b.dist(Chamber(i as u32), Chamber(j as u32));
                assert_eq!(b.group().word(got), &expect[..], "flags {fa:?} {fb:?}");
                if got == w0 {
                    opposite_counts[i] += 1;
                }
            }
        }
        // q^3 = 8 opposite chambers for each flag in the order-2 plane.
        assert!(opposite_counts.iter().all(|&c| c == 8));
    }

    #[test]
    fn fano_projection_gates_through_the_shared_point() {
        let b = fixtures::fano_building();
        let flags = fixtures::fano_flags();
        // x = (p, l); project to the point-varying residue of a line m with
        // p on m but m != l: the gate is the flag (p, m).
        for (ci, &(p, l)) in flags.iter().enumerate() {
            for (cj, &(q, m)) in flags.iter().enumerate() {
                if l == m || q != p {
                    continue;
                }
                let r = b.residue_of(Chamber(cj as u32), &[Gen(0)]);
                assert_eq!(r.chambers().len(), 3);
                let gate = b.project_to_residue(Chamber(ci as u32), &r).unwrap();
                assert_eq!(gate, Chamber(cj as u32), "gate must be ({p}, line {m})");
            }
        }
    }

    #[test]
    fn fano_residues_have_projective_sizes() {
        let b = fixtures::fano_building();
        let x = Chamber(0);
        assert_eq!(b.residue_of(x, &[]).chambers(), &[x]);
        assert_eq!(b.residue_of(x, &[Gen(0)]).chambers().len(), 3);
        assert_eq!(b.residue_of(x, &[Gen(1)]).chambers().len(), 3);
        assert_eq!(b.residue_of(x, &[Gen(0), Gen(1)]).chambers().len(), 21);
        assert_eq!(b.foundation(x, 1).len(), 5);
        assert_eq!(b.foundation(x, 2).len(), 21);
    }

    #[test]
    fn cube_building_distances_and_foundations() {
        let b = fixtures::cube_building();
        assert_eq!(b.n_chambers(), 27);
        let g = b.group().clone();
        for x in b.chambers() {
            for y in b.chambers() {
                // Differing digits, most significant first, commute.
                let mut word = Vec::new();
                for (axis, stride) in [(0u16, 9u32), (1, 3), (2, 1)] {
                    if (x.0 / stride) % 3 != (y.0 / stride) % 3 {
                        word.push(Gen(axis));
                    }
                }
                assert_eq!(b.dist(x, y), g.fold(word));
            }
        }
        let c = Chamber(0);
        assert_eq!(b.foundation(c, 0).len(), 1);
        assert_eq!(b.foundation(c, 1).len(), 7);
        assert_eq!(b.foundation(c, 2).len(), 19);
        assert_eq!(b.foundation(c, 3).len(), 27);
        // The digit-(0|1) subcube is an apartment; a corner swap breaks it.
        let mut sigma = Vec::new();
        for a in 0..2u32 {
            for b2 in 0..2u32 {
                for c2 in 0..2u32 {
                    sigma.push(Chamber(a * 9 + b2 * 3 + c2));
                }
            }
        }
        assert!(b.apartment_check(&sigma));
        sigma[7] = Chamber(26);
        assert!(!b.apartment_check(&sigma));
    }

    #[test]
    fn unlisted_chamber_reports_a_one_step_extension_failure() {
        let mut panels = fixtures::fano_panels();
        // Unlist chamber 0 from its line panel.
        for class in &mut panels[0] {
            class.retain(|&c| c != Chamber(0));
        }
        let err = validate_building(fixtures::a2_group(), 21, &panels).unwrap_err();
        assert_eq!(
            err,
            BuildingError::AxiomViolation {
                axiom: Axiom::Bu3,
                x: Chamber(0),
                y: Chamber(0),
                z: None,
                s: Some(Gen(0)),
            }
        );
    }

    #[test]
    fn structural_panel_errors_are_reported_first() {
        let g = fixtures::dihedral_group(3);
        let small = vec![
            vec![vec![Chamber(0)], vec![Chamber(1), Chamber(2), Chamber(3)]],
            vec![vec![Chamber(0), Chamber(1)], vec![Chamber(2), Chamber(3)]],
        ];
        assert_eq!(
            validate_building(g.clone(), 4, &small).unwrap_err(),
            BuildingError::PanelTooSmall { gen: Gen(0), chamber: Chamber(0) }
        );
        let overlapping = vec![
            vec![vec![Chamber(0), Chamber(1)], vec![Chamber(1), Chamber(2)]],
            vec![vec![Chamber(0), Chamber(1), Chamber(2)]],
        ];
        assert!(matches!(
            validate_building(g.clone(), 3, &overlapping).unwrap_err(),
            BuildingError::MalformedPanels { reason: "chamber listed in two panels", .. }
        ));
        let out_of_range = vec![
            vec![vec![Chamber(0), Chamber(7)]],
            vec![vec![Chamber(0), Chamber(1)]],
        ];
        assert!(matches!(
            validate_building(g, 2, &out_of_range).unwrap_err(),
            BuildingError::MalformedPanels { reason: "chamber id out of range", .. }
        ));
    }

    #[test]
    fn disconnected_panel_graph_is_rejected() {
        let panels = vec![vec![
            vec![Chamber(0), Chamber(1)],
            vec![Chamber(2), Chamber(3)],
        ]];
        let err = validate_building(fixtures::rank1_group(), 4, &panels).unwrap_err();
        assert!(matches!(
            err,
            BuildingError::InconsistentDistance { note: "no gallery connects the chambers", .. }
        ));
    }
}
