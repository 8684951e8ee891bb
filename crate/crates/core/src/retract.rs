//! Retractions of a twin building onto a fixed apartment, the
//! opposite-descent step, and the gallery constructions built from them.
//!
//! Two retractions are provided. The codistance-indexed retraction is
//! anchored at a single base chamber `c` together with an apartment of the
//! base's own half containing `c`; it sends a chamber `x` of the other half
//! to the unique apartment chamber whose distance from `c` equals the
//! codistance from `c` to `x`. The distance-indexed retraction is anchored
//! at an opposite pair and indexes into the pair's twin apartment by the
//! distance from the anchor instead. Both land in the apartment, both fix
//! the expected base data, and on the twin apartments used here both pair
//! every chamber with an opposite one - a fact the graph constructor checks
//! rather than assumes.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::building::{BuildingError, Chamber};
use crate::chamsys::{from_building, Gallery};
use crate::coxeter::Gen;
use crate::twin::{Sign, TwinError, TwinSpace};

/// Failures of the retraction constructors and descent operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RetractError {
    /// A stated precondition of the operation fails on the given input.
    PreconditionViolated { what: &'static str },
    /// A retraction paired a chamber with a non-opposite image.
    PairNotOpposite { x: Chamber, image: Chamber },
    /// A retraction sent an adjacent pair to a non-adjacent pair.
    NotAdjacencyPreserving { x: Chamber, y: Chamber, s: Gen },
    /// A route chamber pairs differently under the pivot-anchored
    /// retraction than under the given one.
    RouteMismatch {
        u: Chamber,
        got: Chamber,
        expected: Chamber,
    },
    /// One of the four panel-projection identities fails.
    ProjectionMismatch {
        s: Gen,
        y: Chamber,
        note: &'static str,
    },
    Building(BuildingError),
    Twin(TwinError),
}

impl fmt::Display for RetractError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetractError::PreconditionViolated { what } => {
                write!(f, "precondition violated: {what}")
            }
            RetractError::PairNotOpposite { x, image } => {
                write!(f, "retraction pairs {x} with non-opposite image {image}")
            }
            RetractError::NotAdjacencyPreserving { x, y, s } => {
                write!(
                    f,
                    "retraction breaks {}-adjacency of {x} and {y}",
                    s.0
                )
            }
            RetractError::RouteMismatch { u, got, expected } => {
                write!(
                    f,
                    "route chamber {u} pairs with {got} but the pivot-anchored retraction gives {expected}"
                )
            }
            RetractError::ProjectionMismatch { s, y, note } => {
                write!(
                    f,
                    "projection identity fails on the {}-panel at {y}: {note}",
                    s.0
                )
            }
            RetractError::Building(e) => write!(f, "{e}"),
            RetractError::Twin(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for RetractError {}

impl From<BuildingError> for RetractError {
    fn from(e: BuildingError) -> Self {
        RetractError::Building(e)
    }
}

impl From<TwinError> for RetractError {
    fn from(e: TwinError) -> Self {
        RetractError::Twin(e)
    }
}

fn pre(what: &'static str) -> RetractError {
    RetractError::PreconditionViolated { what }
}

/// Codistance-indexed retraction: anchored at a base chamber `c` and an
/// apartment `sigma` of the base's half containing `c`, it sends each
/// chamber `x` of the other half to the unique `z` in `sigma` with
/// `delta(c, z) = delta*(c, x)`.
#[derive(Debug, Clone)]
pub struct PiRetraction {
    /// Sign of the domain half (the half being retracted).
    eps: Sign,
    /// Base chamber, in the opposite half.
    base: Chamber,
    /// The target apartment, sorted.
    sigma: Vec<Chamber>,
    /// Group element id -> apartment chamber at that distance from `base`.
    index: Vec<Chamber>,
}

/// Builds the codistance-indexed retraction of the `eps` half onto the
/// apartment `sigma` of the other half, anchored at `base` in `sigma`.
pub fn pi_retraction(
    tw: &TwinSpace,
    eps: Sign,
    base: Chamber,
    sigma: &[Chamber],
) -> Result<PiRetraction, RetractError> {
    let co = eps.flip();
    let b = tw.building(co);
    let mut sigma: Vec<Chamber> = sigma.to_vec();
    sigma.sort_unstable();
    sigma.dedup();
    if !sigma.contains(&base) {
        return Err(pre("the base chamber must lie in the apartment"));
    }
    if !b.apartment_check(&sigma) {
        return Err(pre("the target set is not an apartment"));
    }
    let index = index_by_distance(tw, co, base, &sigma);
    Ok(PiRetraction {
        eps,
        base,
        sigma,
        index,
    })
}

impl PiRetraction {
    pub fn domain_sign(&self) -> Sign {
        self.eps
    }

    pub fn base(&self) -> Chamber {
        self.base
    }

    pub fn sigma(&self) -> &[Chamber] {
        &self.sigma
    }

    /// Image of a domain chamber: the apartment chamber whose distance from
    /// the base equals the chamber's codistance from the base.
    pub fn retract(&self, tw: &TwinSpace, x: Chamber) -> Chamber {
        self.index[tw.codist(self.eps.flip(), self.base, x).0 as usize]
    }
}

/// Distance-indexed retraction: anchored at an opposite pair
/// `(anchor, base)` with `anchor` in the domain half, it sends each domain
/// chamber `x` to the unique `z` in the pair's twin-apartment half through
/// `base` with `delta(base, z) = delta(anchor, x)`.
#[derive(Debug, Clone)]
pub struct OmegaRetraction {
    /// Sign of the domain half.
    eps: Sign,
    /// Anchor chamber, in the domain half.
    anchor: Chamber,
    /// Base chamber, opposite the anchor.
    base: Chamber,
    /// The target apartment half, sorted.
    sigma: Vec<Chamber>,
    /// Group element id -> apartment chamber at that distance from `base`.
    index: Vec<Chamber>,
}

/// Builds the distance-indexed retraction of the `eps` half onto the
/// opposite-side half of the twin apartment spanned by `(anchor, base)`.
pub fn omega_retraction(
    tw: &TwinSpace,
    eps: Sign,
    anchor: Chamber,
    base: Chamber,
) -> Result<OmegaRetraction, RetractError> {
    if !tw.is_opposite(eps, anchor, base) {
        return Err(pre("the anchor and base chambers must be opposite"));
    }
    let apt = match eps {
        Sign::Plus => tw.twin_apartment(anchor, base)?,
        Sign::Minus => tw.twin_apartment(base, anchor)?,
    };
    let sigma = match eps {
        Sign::Plus => apt.minus,
        Sign::Minus => apt.plus,
    };
    let co = eps.flip();
    assert!(
        tw.building(co).apartment_check(&sigma),
        "a twin-apartment half of a validated twin building is an apartment"
    );
    let index = index_by_distance(tw, co, base, &sigma);
    Ok(OmegaRetraction {
        eps,
        anchor,
        base,
        sigma,
        index,
    })
}

impl OmegaRetraction {
    pub fn domain_sign(&self) -> Sign {
        self.eps
    }

    pub fn anchor(&self) -> Chamber {
        self.anchor
    }

    pub fn base(&self) -> Chamber {
        self.base
    }

    pub fn sigma(&self) -> &[Chamber] {
        &self.sigma
    }

    /// Image of a domain chamber: the apartment chamber whose distance from
    /// the base equals the chamber's distance from the anchor.
    pub fn retract(&self, tw: &TwinSpace, x: Chamber) -> Chamber {
        self.index[tw.dist_in(self.eps, self.anchor, x).0 as usize]
    }
}

/// Tabulates an apartment by distance from a base chamber inside it. The
/// apartment axioms make this a bijection onto the group.
fn index_by_distance(tw: &TwinSpace, side: Sign, base: Chamber, sigma: &[Chamber]) -> Vec<Chamber> {
    let b = tw.building(side);
    let order = tw.group().order();
    let mut index = vec![Chamber(u32::MAX); order];
    for &z in sigma {
        let w = b.dist(base, z).0 as usize;
        assert!(
            index[w].0 == u32::MAX,
            "distance from a chamber of an apartment separates its chambers"
        );
        index[w] = z;
    }
    assert!(
        index.iter().all(|z| z.0 != u32::MAX),
        "an apartment realizes every group element as a distance"
    );
    index
}

/// Either retraction, for operations that accept both.
#[derive(Debug, Clone)]
pub enum Retraction {
    Codistance(PiRetraction),
    Distance(OmegaRetraction),
}

impl Retraction {
    pub fn domain_sign(&self) -> Sign {
        match self {
            Retraction::Codistance(r) => r.domain_sign(),
            Retraction::Distance(r) => r.domain_sign(),
        }
    }

    pub fn retract(&self, tw: &TwinSpace, x: Chamber) -> Chamber {
        match self {
            Retraction::Codistance(r) => r.retract(tw, x),
            Retraction::Distance(r) => r.retract(tw, x),
        }
    }
}

/// The graph of a retraction: every domain chamber paired with its image.
/// The constructor hard-checks that every pair is opposite and that the
/// pairing preserves adjacency, so the graph is a sub-chamber-system of the
/// opposition system isomorphic to the domain half.
#[derive(Debug)]
pub struct RetractionGraph {
    eps: Sign,
    images: Vec<Chamber>,
    system: crate::chamsys::ChamberSystem,
}

pub fn retraction_graph(tw: &TwinSpace, r: &Retraction) -> Result<RetractionGraph, RetractError> {
    let eps = r.domain_sign();
    let b = tw.building(eps);
    let bm = tw.building(eps.flip());
    let mut images = Vec::with_capacity(b.n_chambers());
    for x in b.chambers() {
        let image = r.retract(tw, x);
        if !tw.is_opposite(eps, x, image) {
            return Err(RetractError::PairNotOpposite { x, image });
        }
        images.push(image);
    }
    for s in (0..b.group().rank()).map(|i| Gen(i as u16)) {
        for class in b.panels(s) {
            for (i, &x) in class.iter().enumerate() {
                for &y in &class[i + 1..] {
                    let (ix, iy) = (images[x.index()], images[y.index()]);
                    if ix != iy && !bm.panel(s, ix).contains(&iy) {
                        return Err(RetractError::NotAdjacencyPreserving { x, y, s });
                    }
                }
            }
        }
    }
    Ok(RetractionGraph {
        eps,
        images,
        system: from_building(b),
    })
}

impl RetractionGraph {
    pub fn domain_sign(&self) -> Sign {
        self.eps
    }

    pub fn image(&self, x: Chamber) -> Chamber {
        self.images[x.index()]
    }

    pub fn pair(&self, x: Chamber) -> (Chamber, Chamber) {
        (x, self.images[x.index()])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Chamber, Chamber)> + '_ {
        self.images
            .iter()
            .enumerate()
            .map(|(i, &im)| (Chamber(i as u32), im))
    }

    /// The domain half as a chamber system; node ids are chamber indices,
    /// and the pairing transports its panels into the opposition system.
    pub fn system(&self) -> &crate::chamsys::ChamberSystem {
        &self.system
    }
}

/// One opposite-descent step. The input gallery `d_0, ..., d_{k+1}` lives in
/// the `eps` half, starts opposite `c`, its numerical codistance from `c`
/// rises `0, 1, ..., k` along the interior, and fails to rise at the last
/// chamber `d`. The step produces `(x', z)` with `x'` opposite `c`,
/// `delta*(c, z) = delta(d_0, z) = delta(x', z)`, and the gallery distance
/// from `x'` to `d` strictly below `k + 1`. Free choices resolve to the
/// least chamber id.
pub fn descent_step(
    tw: &TwinSpace,
    eps: Sign,
    c: Chamber,
    gallery: &[Chamber],
) -> Result<(Chamber, Chamber), RetractError> {
    let co = eps.flip();
    if gallery.len() < 2 {
        return Err(pre("the gallery needs at least two chambers"));
    }
    let k = gallery.len() - 2;
    let x = gallery[0];
    let d = gallery[k + 1];
    let b = tw.building(eps);
    let g = tw.group();
    for pair in gallery.windows(2) {
        if pair[0] == pair[1] || g.len(b.dist(pair[0], pair[1])) != 1 {
            return Err(pre(
                "consecutive gallery chambers must be distinct and panel-adjacent",
            ));
        }
    }
    for (i, &di) in gallery.iter().enumerate().take(k + 1) {
        if tw.colen(co, c, di) != i as u32 {
            return Err(pre(
                "the codistance profile must rise by one along the interior",
            ));
        }
    }
    if tw.colen(co, c, d) > k as u32 {
        return Err(pre(
            "the final chamber must not continue the rising codistance profile",
        ));
    }
    let dk = gallery[k];
    let w = b.dist(x, dk);
    let s = g.word(b.dist(dk, d))[0];
    let ws = g.right_mul(w, s);
    let (z, target) = if g.len(ws) < g.len(w) {
        // The far end of the profile already descends: reuse it as the
        // witness and land beside `d` one letter shorter.
        (dk, ws)
    } else {
        // The profile stalls: the witness is the panel chamber at maximal
        // codistance from `c`.
        let panel = b.residue_of(d, &[s]);
        (tw.cross_project(co, c, &panel)?, w)
    };
    let xp = b
        .chambers()
        .find(|&u| b.dist(u, d) == target)
        .expect("a building realizes every group element as a distance to a fixed chamber");
    // The postconditions follow from the input profile; checking them here
    // keeps a faulty table from producing a silently wrong step.
    assert!(tw.is_opposite(co, c, xp));
    assert_eq!(tw.codist(co, c, z), b.dist(x, z));
    assert_eq!(b.dist(x, z), b.dist(xp, z));
    assert!(b.gallery_len(xp, d) <= k as u32);
    Ok((xp, z))
}

/// Connects two chambers opposite `c` through chambers opposite `c`: given
/// `x, y` in the `eps` half both opposite `c`, returns
/// `x = x_0, ..., x_k = y` all opposite `c` and witnesses `z_1, ..., z_k`
/// with `delta*(c, z_l) = delta(x_{l-1}, z_l) = delta(x_l, z_l)`. The
/// number of steps never exceeds the gallery distance from `x` to `y`; each
/// round walks the canonical gallery toward `y`, takes its longest rising
/// codistance prefix, and applies one descent step.
pub fn connecting_sequence(
    tw: &TwinSpace,
    eps: Sign,
    c: Chamber,
    x: Chamber,
    y: Chamber,
) -> Result<(Vec<Chamber>, Vec<Chamber>), RetractError> {
    let co = eps.flip();
    if !tw.is_opposite(co, c, x) || !tw.is_opposite(co, c, y) {
        return Err(pre("both endpoints must be opposite the base chamber"));
    }
    let b = tw.building(eps);
    let sys = from_building(b);
    let bound = b.gallery_len(x, y);
    let mut xs = vec![x];
    let mut zs = Vec::new();
    let mut cur = x;
    while cur != y {
        let gal = sys
            .find_gallery(cur.0, y.0)
            .expect("a building is gallery-connected");
        let nodes: Vec<Chamber> = gal.nodes.iter().map(|&u| Chamber(u)).collect();
        let mut k = 0;
        while k + 1 < nodes.len() && tw.colen(co, c, nodes[k + 1]) == (k + 1) as u32 {
            k += 1;
        }
        // The profile must break before the far end, which is opposite `c`.
        assert!(k + 1 < nodes.len());
        let (xp, z) = descent_step(tw, eps, c, &nodes[..=k + 1])?;
        assert!(
            b.gallery_len(xp, y) < b.gallery_len(cur, y),
            "each descent step moves strictly closer to the far endpoint"
        );
        xs.push(xp);
        zs.push(z);
        cur = xp;
    }
    assert!(zs.len() as u32 <= bound);
    Ok((xs, zs))
}

/// A gallery in the opposition system, stored as chamber pairs with the
/// panel type of each step taken on the first component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OppGallery {
    pub pairs: Vec<(Chamber, Chamber)>,
    pub types: Vec<Gen>,
}

impl OppGallery {
    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }
}

/// Joins `(x, c)` to `(y, c)` inside the opposition system through a pivot
/// `z` satisfying `delta(x, z) = delta*(c, z) = delta(y, z)`: concatenates
/// the canonical galleries `x -> z -> y` and pairs every route chamber with
/// its image under the given codistance-indexed retraction. Every pair on
/// the route is verified to be opposite, to agree with the distance-indexed
/// retraction anchored at the pivot pair, and to step through adjacent
/// pairs; the endpoints pair with the base chamber itself.
pub fn omega_gallery_join(
    tw: &TwinSpace,
    pi: &PiRetraction,
    x: Chamber,
    y: Chamber,
    z: Chamber,
) -> Result<OppGallery, RetractError> {
    let eps = pi.domain_sign();
    let co = eps.flip();
    let c = pi.base();
    if !tw.is_opposite(co, c, x) || !tw.is_opposite(co, c, y) {
        return Err(pre("both endpoints must be opposite the base chamber"));
    }
    let b = tw.building(eps);
    if b.dist(x, z) != tw.codist(co, c, z) || b.dist(y, z) != tw.codist(co, c, z) {
        return Err(pre(
            "the pivot's distance from both endpoints must equal its codistance from the base",
        ));
    }
    let sys = from_building(b);
    let first = sys
        .find_gallery(x.0, z.0)
        .expect("a building is gallery-connected");
    let second = sys
        .find_gallery(z.0, y.0)
        .expect("a building is gallery-connected");
    let route: Gallery = first.concat(&second);
    let pairs: Vec<(Chamber, Chamber)> = route
        .nodes
        .iter()
        .map(|&u| {
            let u = Chamber(u);
            (u, pi.retract(tw, u))
        })
        .collect();
    let pivot_image = pi.retract(tw, z);
    if !tw.is_opposite(eps, z, pivot_image) {
        return Err(RetractError::PairNotOpposite {
            x: z,
            image: pivot_image,
        });
    }
    let om = omega_retraction(tw, eps, z, pivot_image)?;
    for &(u, v) in &pairs {
        if !tw.is_opposite(eps, u, v) {
            return Err(RetractError::PairNotOpposite { x: u, image: v });
        }
        let expected = om.retract(tw, u);
        if expected != v {
            return Err(RetractError::RouteMismatch {
                u,
                got: v,
                expected,
            });
        }
    }
    let bm = tw.building(co);
    for (i, &s) in route.types.iter().enumerate() {
        let (_, vi) = pairs[i];
        let (_, vj) = pairs[i + 1];
        if vi != vj && !bm.panel(s, vi).contains(&vj) {
            return Err(RetractError::NotAdjacencyPreserving {
                x: pairs[i].0,
                y: pairs[i + 1].0,
                s,
            });
        }
    }
    assert_eq!(pairs.first().copied(), Some((x, c)));
    assert_eq!(pairs.last().copied(), Some((y, c)));
    Ok(OppGallery {
        pairs,
        types: route.types,
    })
}

/// The four-projection panel law for a distance-indexed retraction: on the
/// `s`-panel through `rep` in the domain half, the gate toward the anchor
/// and the common image of the non-gate chambers project onto one another
/// in all four directions - the anchor projects onto the gate within the
/// panel and onto the image within the image's panel, and gate and image
/// cross-project onto each other.
pub fn four_projection_check(
    tw: &TwinSpace,
    om: &OmegaRetraction,
    s: Gen,
    rep: Chamber,
) -> Result<(), RetractError> {
    let eps = om.domain_sign();
    let co = eps.flip();
    let b = tw.building(eps);
    let bm = tw.building(co);
    let panel = b.residue_of(rep, &[s]);
    let anchor = om.anchor();
    let gate = b.project_to_residue(anchor, &panel)?;
    let gate_len = b.gallery_len(anchor, gate);
    for &y in panel.chambers() {
        if y == gate {
            continue;
        }
        if b.gallery_len(anchor, y) != gate_len + 1 {
            return Err(RetractError::ProjectionMismatch {
                s,
                y,
                note: "a non-gate panel chamber is not one step past the gate",
            });
        }
        let image = om.retract(tw, y);
        let q = bm.residue_of(image, &[s]);
        if tw.cross_project(eps, anchor, &q)? != image {
            return Err(RetractError::ProjectionMismatch {
                s,
                y,
                note: "the anchor does not cross-project onto the image",
            });
        }
        if tw.cross_project(co, image, &panel)? != gate {
            return Err(RetractError::ProjectionMismatch {
                s,
                y,
                note: "the image does not cross-project back onto the gate",
            });
        }
        if tw.cross_project(eps, gate, &q)? != image {
            return Err(RetractError::ProjectionMismatch {
                s,
                y,
                note: "the gate does not cross-project onto the image",
            });
        }
    }
    Ok(())
}
