//! Partial isometries between twin buildings and the extension machinery:
//! admissibility, unions, projection transport across opposite residues,
//! foundation extension, single-step transport between adjacent opposite
//! pairs, gallery transport over the opposition system, consistent families
//! over connected pair sets, and the staged gluing pipeline that grows a
//! seed isometry on a foundation-plus-opposite-chamber domain to one
//! defined on a whole half plus the opposite foundation.
//!
//! Extension steps are realized by constrained backtracking that exhausts
//! the search tree: existence and uniqueness of each local extension are
//! *checked*, not assumed, and a zero or multiple count aborts with a
//! witness. A projection-based forcing accelerator is available for the
//! single-step transport; its output is cross-checkable against the raw
//! search.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::building::{BuildingError, Chamber, Residue};
use crate::coxeter::Gen;
use crate::retract::{
    connecting_sequence, omega_gallery_join, pi_retraction, retraction_graph, RetractError,
    Retraction,
};
use crate::twin::{Sign, SignedChamber, TwinError, TwinSpace};

/// Failures of isometry construction, extension, and transport.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IsomError {
    /// Two domain chambers share one image.
    NotInjective {
        a: SignedChamber,
        b: SignedChamber,
        image: SignedChamber,
    },
    /// A pair maps across signs.
    SignViolation {
        x: SignedChamber,
        image: SignedChamber,
    },
    /// A domain pair changes its distance or codistance.
    DistanceViolation { x: SignedChamber, y: SignedChamber },
    /// A required chamber is missing from the map's domain.
    NotInDomain { x: SignedChamber },
    /// Two maps being united share a domain or image chamber.
    DomainOverlap { at: SignedChamber, in_image: bool },
    /// A chamber of the second map fails the admissibility test against
    /// the first.
    AdmissibilityFailure { z: SignedChamber },
    /// The two residues handed to projection transport are not opposite.
    NotOppositeResidues,
    /// The extension search exhausted its tree without a completion; the
    /// witness is the deepest variable the search could not pass.
    NoExtension { at: SignedChamber },
    /// The extension search found two completions; the witness chamber
    /// receives two distinct images.
    MultipleExtensions {
        at: SignedChamber,
        first: SignedChamber,
        second: SignedChamber,
    },
    /// Two transported local isometries disagree on their shared domain.
    InconsistentTransport {
        a: (Chamber, Chamber),
        b: (Chamber, Chamber),
        at: SignedChamber,
    },
    /// A local isometry disagrees with the assembled half-isometry.
    FamilyDisagreement {
        index: (Chamber, Chamber),
        at: SignedChamber,
    },
    /// The assembled half-isometry sends a chamber opposite z to a chamber
    /// not opposite the image of z.
    OppositionNotPreserved { x: Chamber, z: Chamber },
    /// A stated precondition of the operation fails on the given input.
    PreconditionViolated { what: &'static str },
    Retract(RetractError),
    Twin(TwinError),
    Building(BuildingError),
}

impl fmt::Display for IsomError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsomError::NotInjective { a, b, image } => {
                write!(f, "{a} and {b} both map to {image}")
            }
            IsomError::SignViolation { x, image } => {
                write!(f, "{x} maps across signs to {image}")
            }
            IsomError::DistanceViolation { x, y } => {
                write!(f, "the pair ({x}, {y}) changes its distance")
            }
            IsomError::NotInDomain { x } => write!(f, "{x} is not in the domain"),
            IsomError::DomainOverlap { at, in_image } => {
                if *in_image {
                    write!(f, "{at} lies in both images")
                } else {
                    write!(f, "{at} lies in both domains")
                }
            }
            IsomError::AdmissibilityFailure { z } => {
                write!(f, "({z}, its image) is not admissible for the other map")
            }
            IsomError::NotOppositeResidues => write!(f, "the residues are not opposite"),
            IsomError::NoExtension { at } => {
                write!(f, "no extension exists; the search stalled at {at}")
            }
            IsomError::MultipleExtensions { at, first, second } => {
                write!(f, "two extensions exist: {at} can map to {first} or {second}")
            }
            IsomError::InconsistentTransport { a, b, at } => write!(
                f,
                "transports to ({}, {}) and ({}, {}) disagree at {at}",
                a.0, a.1, b.0, b.1
            ),
            IsomError::FamilyDisagreement { index, at } => write!(
                f,
                "the local isometry at ({}, {}) disagrees with the assembled map at {at}",
                index.0, index.1
            ),
            IsomError::OppositionNotPreserved { x, z } => write!(
                f,
                "the image of {x} is not opposite the image of {z}"
            ),
            IsomError::PreconditionViolated { what } => {
                write!(f, "precondition violated: {what}")
            }
            IsomError::Retract(e) => write!(f, "{e}"),
            IsomError::Twin(e) => write!(f, "{e}"),
            IsomError::Building(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for IsomError {}

impl From<RetractError> for IsomError {
    fn from(e: RetractError) -> Self {
        IsomError::Retract(e)
    }
}

impl From<TwinError> for IsomError {
    fn from(e: TwinError) -> Self {
        IsomError::Twin(e)
    }
}

impl From<BuildingError> for IsomError {
    fn from(e: BuildingError) -> Self {
        IsomError::Building(e)
    }
}

fn pre(what: &'static str) -> IsomError {
    IsomError::PreconditionViolated { what }
}

/// A validated partial isometry between two twin buildings: a finite,
/// injective, sign-preserving map that preserves every distance and
/// codistance among its domain chambers.
#[derive(Debug, Clone)]
pub struct PartialIsometry {
    source: Arc<TwinSpace>,
    target: Arc<TwinSpace>,
    map: BTreeMap<SignedChamber, SignedChamber>,
    inv: BTreeMap<SignedChamber, SignedChamber>,
}

/// Builds and fully validates a partial isometry from explicit pairs:
/// injectivity, sign preservation, and distance/codistance preservation
/// over every domain pair (quadratic in the domain size).
pub fn make_isometry(
    source: &Arc<TwinSpace>,
    target: &Arc<TwinSpace>,
    pairs: &[(SignedChamber, SignedChamber)],
) -> Result<PartialIsometry, IsomError> {
    if source.group().matrix() != target.group().matrix() {
        return Err(pre("the source and target type matrices differ"));
    }
    let mut map = BTreeMap::new();
    let mut inv: BTreeMap<SignedChamber, SignedChamber> = BTreeMap::new();
    for &(x, y) in pairs {
        if x.ch.index() >= source.building(x.sign).n_chambers()
            || y.ch.index() >= target.building(y.sign).n_chambers()
        {
            return Err(pre("a pair names a chamber outside its building"));
        }
        if x.sign != y.sign {
            return Err(IsomError::SignViolation { x, image: y });
        }
        if let Some(&old) = map.get(&x) {
            if old != y {
                return Err(pre("a domain chamber appears twice with different images"));
            }
            continue;
        }
        if let Some(&other) = inv.get(&y) {
            return Err(IsomError::NotInjective {
                a: other,
                b: x,
                image: y,
            });
        }
        map.insert(x, y);
        inv.insert(y, x);
    }
    let dom: Vec<(SignedChamber, SignedChamber)> = map.iter().map(|(&k, &v)| (k, v)).collect();
    for (i, &(x, fx)) in dom.iter().enumerate() {
        for &(y, fy) in &dom[i..] {
            if source.sdist(x, y) != target.sdist(fx, fy) {
                return Err(IsomError::DistanceViolation { x, y });
            }
        }
    }
    Ok(PartialIsometry {
        source: Arc::clone(source),
        target: Arc::clone(target),
        map,
        inv,
    })
}

impl PartialIsometry {
    pub fn source(&self) -> &Arc<TwinSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<TwinSpace> {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn image(&self, x: SignedChamber) -> Option<SignedChamber> {
        self.map.get(&x).copied()
    }

    pub fn preimage(&self, y: SignedChamber) -> Option<SignedChamber> {
        self.inv.get(&y).copied()
    }

    pub fn contains(&self, x: SignedChamber) -> bool {
        self.map.contains_key(&x)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (SignedChamber, SignedChamber)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }

    pub fn domain(&self) -> impl Iterator<Item = SignedChamber> + '_ {
        self.map.keys().copied()
    }

    /// True when the two maps have identical pair sets.
    pub fn same_mapping(&self, other: &PartialIsometry) -> bool {
        self.map == other.map
    }

    /// Restriction to the keys in `keep`; every kept key must be present.
    pub fn restrict(&self, keep: &[SignedChamber]) -> Result<PartialIsometry, IsomError> {
        let mut pairs = Vec::with_capacity(keep.len());
        for &k in keep {
            let v = self.image(k).ok_or(IsomError::NotInDomain { x: k })?;
            pairs.push((k, v));
        }
        make_isometry(&self.source, &self.target, &pairs)
    }
}

/// True iff adjoining the pair (y, y') keeps the map an isometry: the signs
/// match and every domain chamber keeps its distance (or codistance) to y.
pub fn admissible_check(phi: &PartialIsometry, y: SignedChamber, yp: SignedChamber) -> bool {
    if y.sign != yp.sign {
        return false;
    }
    phi.pairs()
        .all(|(x, fx)| phi.source.sdist(x, y) == phi.target.sdist(fx, yp))
}

/// Union of two partial isometries with disjoint domains and images; every
/// pair of the second must be admissible for the first. The union is
/// revalidated from scratch.
pub fn union_isometries(
    phi: &PartialIsometry,
    psi: &PartialIsometry,
) -> Result<PartialIsometry, IsomError> {
    if !Arc::ptr_eq(&phi.source, &psi.source) || !Arc::ptr_eq(&phi.target, &psi.target) {
        return Err(pre("the two maps must share their source and target"));
    }
    for (z, zi) in psi.pairs() {
        if phi.contains(z) {
            return Err(IsomError::DomainOverlap {
                at: z,
                in_image: false,
            });
        }
        if phi.preimage(zi).is_some() {
            return Err(IsomError::DomainOverlap {
                at: zi,
                in_image: true,
            });
        }
    }
    for (z, zi) in psi.pairs() {
        if !admissible_check(phi, z, zi) {
            return Err(IsomError::AdmissibilityFailure { z });
        }
    }
    let pairs: Vec<_> = phi.pairs().chain(psi.pairs()).collect();
    make_isometry(&phi.source, &phi.target, &pairs)
}

/// Transports a chamber of one residue of an opposite pair through a map
/// known on the other residue: the image is the cross-projection into the
/// image residue of the image of the chamber's cross-projection. Whenever
/// the chamber itself is in the domain, the result provably equals its
/// direct image, which is asserted.
pub fn cross_transport(
    phi: &PartialIsometry,
    r_plus: &Residue,
    r_minus: &Residue,
    x: SignedChamber,
) -> Result<SignedChamber, IsomError> {
    let src = &phi.source;
    let tgt = &phi.target;
    if r_plus.jtype() != r_minus.jtype() {
        return Err(IsomError::NotOppositeResidues);
    }
    if src.opposite_residue(Sign::Plus, r_plus).chambers() != r_minus.chambers() {
        return Err(IsomError::NotOppositeResidues);
    }
    let (r_own, r_other) = match x.sign {
        Sign::Plus => (r_plus, r_minus),
        Sign::Minus => (r_minus, r_plus),
    };
    if !r_own.contains(x.ch) {
        return Err(pre("the chamber must lie in the residue of its sign"));
    }
    let gate = src.cross_project(x.sign, x.ch, r_other)?;
    let gate_image = phi
        .image(SignedChamber::new(x.sign.flip(), gate))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::new(x.sign.flip(), gate),
        })?;
    let own_rep = r_own.chambers()[0];
    let own_rep_image = phi
        .image(SignedChamber::new(x.sign, own_rep))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::new(x.sign, own_rep),
        })?;
    let r_own_image = tgt
        .building(x.sign)
        .residue_of(own_rep_image.ch, r_own.jtype());
    let result = tgt.cross_project(x.sign.flip(), gate_image.ch, &r_own_image)?;
    if let Some(direct) = phi.image(x) {
        assert_eq!(
            direct.ch, result,
            "projection transport must reproduce the direct image"
        );
    }
    Ok(SignedChamber::new(x.sign, result))
}

/// The rank-two foundation of an opposite pair as a signed domain: the
/// plus-side foundation of the plus chamber and the minus-side foundation
/// of the minus chamber, ascending.
pub fn foundation_domain(tw: &TwinSpace, pair: (Chamber, Chamber)) -> Vec<SignedChamber> {
    let mut dom: Vec<SignedChamber> = tw
        .building(Sign::Plus)
        .foundation(pair.0, 2)
        .into_iter()
        .map(SignedChamber::plus)
        .collect();
    dom.extend(
        tw.building(Sign::Minus)
            .foundation(pair.1, 2)
            .into_iter()
            .map(SignedChamber::minus),
    );
    dom.sort_unstable();
    dom
}

/// Outcome of an exhaustive completion search.
enum Completion {
    Unique(Vec<(SignedChamber, SignedChamber)>),
    NoSolution { at: SignedChamber },
    Multiple(IsomError),
}

struct Search<'a> {
    src: &'a TwinSpace,
    tgt: &'a TwinSpace,
    vars: &'a [SignedChamber],
    assigned: Vec<(SignedChamber, SignedChamber)>,
    n_fixed: usize,
    solutions: Vec<Vec<SignedChamber>>,
    cap: usize,
    deepest: usize,
}

impl Search<'_> {
    /// Depth-first search over the variables in order, trying target
    /// chambers of the matching sign in ascending id order; a candidate
    /// must preserve distance and codistance to every chamber assigned so
    /// far. Returns true once `cap` solutions are collected.
    fn dfs(&mut self, depth: usize) -> bool {
        if depth > self.deepest {
            self.deepest = depth;
        }
        if depth == self.vars.len() {
            let images = self.assigned[self.n_fixed..]
                .iter()
                .map(|&(_, v)| v)
                .collect();
            self.solutions.push(images);
            return self.solutions.len() >= self.cap;
        }
        let var = self.vars[depth];
        let n = self.tgt.building(var.sign).n_chambers();
        for id in 0..n {
            let cand = SignedChamber::new(var.sign, Chamber(id as u32));
            let ok = self
                .assigned
                .iter()
                .all(|&(x, fx)| self.src.sdist(x, var) == self.tgt.sdist(fx, cand));
            if !ok {
                continue;
            }
            self.assigned.push((var, cand));
            let stop = self.dfs(depth + 1);
            self.assigned.pop();
            if stop {
                return true;
            }
        }
        false
    }
}

/// Runs the exhaustive completion search and classifies the result.
fn search_completions(
    src: &TwinSpace,
    tgt: &TwinSpace,
    fixed: &[(SignedChamber, SignedChamber)],
    vars: &[SignedChamber],
) -> Completion {
    let mut search = Search {
        src,
        tgt,
        vars,
        assigned: fixed.to_vec(),
        n_fixed: fixed.len(),
        solutions: Vec::new(),
        cap: 2,
        deepest: 0,
    };
    search.dfs(0);
    match search.solutions.len() {
        0 => Completion::NoSolution {
            at: vars[search.deepest.min(vars.len().saturating_sub(1))],
        },
        1 => {
            let images = search.solutions.pop().unwrap();
            Completion::Unique(vars.iter().copied().zip(images).collect())
        }
        _ => {
            let a = &search.solutions[0];
            let b = &search.solutions[1];
            let i = (0..vars.len())
                .find(|&i| a[i] != b[i])
                .expect("two recorded solutions must differ somewhere");
            Completion::Multiple(IsomError::MultipleExtensions {
                at: vars[i],
                first: a[i],
                second: b[i],
            })
        }
    }
}

/// Enumerates isometries extending `fixed` over the given variables, up to
/// `cap` of them, each fully validated. The boolean reports whether the
/// search tree was exhausted (false means the cap was hit).
pub fn enumerate_isometries(
    src: &Arc<TwinSpace>,
    tgt: &Arc<TwinSpace>,
    fixed: &[(SignedChamber, SignedChamber)],
    vars: &[SignedChamber],
    cap: usize,
) -> Result<(Vec<PartialIsometry>, bool), IsomError> {
    let mut search = Search {
        src,
        tgt,
        vars,
        assigned: fixed.to_vec(),
        n_fixed: fixed.len(),
        solutions: Vec::new(),
        cap: cap.max(1),
        deepest: 0,
    };
    let capped = search.dfs(0);
    let mut out = Vec::with_capacity(search.solutions.len());
    for images in &search.solutions {
        let pairs: Vec<_> = fixed
            .iter()
            .copied()
            .chain(vars.iter().copied().zip(images.iter().copied()))
            .collect();
        out.push(make_isometry(src, tgt, &pairs)?);
    }
    Ok((out, !capped))
}

/// Extends a seed isometry defined on the plus-side foundation of `c_plus`
/// together with the single minus chamber `c_minus` (an opposite pair) to
/// the minus-side foundation of `c_minus`, by exhaustive backtracking. The
/// completion is required to exist and be unique; zero or several
/// completions abort with a witness, since either contradicts the extension
/// theory on a valid thick twin.
pub fn extend_foundation_pair(
    phi: &PartialIsometry,
    c_plus: Chamber,
    c_minus: Chamber,
) -> Result<PartialIsometry, IsomError> {
    let src = &phi.source;
    let tgt = &phi.target;
    if !src.is_opposite(Sign::Plus, c_plus, c_minus) {
        return Err(pre("the base chambers must be opposite"));
    }
    let cp = phi
        .image(SignedChamber::plus(c_plus))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::plus(c_plus),
        })?;
    let cm = phi
        .image(SignedChamber::minus(c_minus))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::minus(c_minus),
        })?;
    if !tgt.is_opposite(Sign::Plus, cp.ch, cm.ch) {
        return Err(pre("the image base chambers must be opposite"));
    }
    for x in src.building(Sign::Plus).foundation(c_plus, 2) {
        if !phi.contains(SignedChamber::plus(x)) {
            return Err(IsomError::NotInDomain {
                x: SignedChamber::plus(x),
            });
        }
    }
    let fixed: Vec<_> = phi.pairs().collect();
    let vars: Vec<SignedChamber> = src
        .building(Sign::Minus)
        .foundation(c_minus, 2)
        .into_iter()
        .map(SignedChamber::minus)
        .filter(|v| !phi.contains(*v))
        .collect();
    match search_completions(src, tgt, &fixed, &vars) {
        Completion::Unique(assigned) => {
            let pairs: Vec<_> = fixed.into_iter().chain(assigned).collect();
            make_isometry(src, tgt, &pairs)
        }
        Completion::NoSolution { at } => Err(IsomError::NoExtension { at }),
        Completion::Multiple(e) => Err(e),
    }
}

/// Fixpoint forcing by projection transport: for every rank-two residue
/// pair around the opposite pair `d` (these cover the whole rank-two
/// foundation), an undetermined chamber whose cross-projection into the
/// partner residue already has an image receives its forced image through
/// the image residues; cross-projections between opposite residues are
/// inverse bijections and commute with isometries, so the forced value is
/// the only possible one, and a forced value violating a known constraint
/// proves no extension exists.
fn force_by_projection(
    src: &TwinSpace,
    tgt: &TwinSpace,
    d: (Chamber, Chamber),
    d_image: (Chamber, Chamber),
    known: &mut BTreeMap<SignedChamber, SignedChamber>,
    vars: &[SignedChamber],
) -> Result<(), IsomError> {
    let rank = src.group().rank();
    let mut jtypes: Vec<Vec<Gen>> = Vec::new();
    for i in 0..rank {
        for j in i + 1..rank {
            jtypes.push([Gen(i as u16), Gen(j as u16)].to_vec());
        }
    }
    let wanted: alloc::collections::BTreeSet<SignedChamber> = vars.iter().copied().collect();
    loop {
        let mut progress = false;
        for j in &jtypes {
            let r_p = src.building(Sign::Plus).residue_of(d.0, j);
            let r_m = src.building(Sign::Minus).residue_of(d.1, j);
            let r_p_img = tgt.building(Sign::Plus).residue_of(d_image.0, j);
            let r_m_img = tgt.building(Sign::Minus).residue_of(d_image.1, j);
            for eps in [Sign::Plus, Sign::Minus] {
                let (own, other, own_img) = match eps {
                    Sign::Plus => (&r_p, &r_m, &r_p_img),
                    Sign::Minus => (&r_m, &r_p, &r_m_img),
                };
                for &x in own.chambers() {
                    let key = SignedChamber::new(eps, x);
                    if known.contains_key(&key) || !wanted.contains(&key) {
                        continue;
                    }
                    let gate = src.cross_project(eps, x, other)?;
                    let gate_key = SignedChamber::new(eps.flip(), gate);
                    let Some(&gate_img) = known.get(&gate_key) else {
                        continue;
                    };
                    let forced = tgt.cross_project(eps.flip(), gate_img.ch, own_img)?;
                    let cand = SignedChamber::new(eps, forced);
                    // The projection law makes this the only possible
                    // image, so a conflict here proves unextendability.
                    let ok = known
                        .iter()
                        .all(|(&a, &fa)| src.sdist(a, key) == tgt.sdist(fa, cand));
                    if !ok {
                        return Err(IsomError::NoExtension { at: key });
                    }
                    known.insert(key, cand);
                    progress = true;
                }
            }
        }
        if !progress {
            return Ok(());
        }
    }
}

fn step_extend_impl(
    phi: &PartialIsometry,
    c_pair: (Chamber, Chamber),
    d_pair: (Chamber, Chamber),
    use_forcing: bool,
) -> Result<PartialIsometry, IsomError> {
    let src = &phi.source;
    let tgt = &phi.target;
    if !src.is_opposite(Sign::Plus, c_pair.0, c_pair.1) || !src.is_opposite(Sign::Plus, d_pair.0, d_pair.1)
    {
        return Err(pre("both anchor pairs must be opposite"));
    }
    let dp = phi
        .image(SignedChamber::plus(d_pair.0))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::plus(d_pair.0),
        })?;
    let dm = phi
        .image(SignedChamber::minus(d_pair.1))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::minus(d_pair.1),
        })?;
    let d_image = (dp.ch, dm.ch);
    if !tgt.is_opposite(Sign::Plus, d_image.0, d_image.1) {
        return Err(pre("the image of the step pair must be opposite"));
    }
    let dom = foundation_domain(src, d_pair);
    let mut known: BTreeMap<SignedChamber, SignedChamber> = BTreeMap::new();
    for &k in &dom {
        if let Some(v) = phi.image(k) {
            known.insert(k, v);
        }
    }
    let vars_all: Vec<SignedChamber> = dom.iter().copied().filter(|k| !phi.contains(*k)).collect();
    if use_forcing {
        force_by_projection(src, tgt, d_pair, d_image, &mut known, &vars_all)?;
    }
    let fixed: Vec<_> = known.iter().map(|(&k, &v)| (k, v)).collect();
    let vars: Vec<SignedChamber> = vars_all
        .into_iter()
        .filter(|k| !known.contains_key(k))
        .collect();
    let pairs = match search_completions(src, tgt, &fixed, &vars) {
        Completion::Unique(assigned) => fixed.into_iter().chain(assigned).collect::<Vec<_>>(),
        Completion::NoSolution { at } => return Err(IsomError::NoExtension { at }),
        Completion::Multiple(e) => return Err(e),
    };
    make_isometry(src, tgt, &pairs)
}

/// Transports a local isometry from the foundation of one opposite pair to
/// the foundation of an adjacent (or equal) one: the result is the unique
/// isometry on the new foundation agreeing with the old map on the overlap.
/// Both components of the step pair must already have images. Uses the
/// projection-forcing accelerator; `step_extend_raw` is the pure search.
pub fn step_extend(
    phi: &PartialIsometry,
    c_pair: (Chamber, Chamber),
    d_pair: (Chamber, Chamber),
) -> Result<PartialIsometry, IsomError> {
    step_extend_impl(phi, c_pair, d_pair, true)
}

/// As `step_extend`, but by raw exhaustive backtracking with no forcing;
/// used to cross-check the accelerated path.
pub fn step_extend_raw(
    phi: &PartialIsometry,
    c_pair: (Chamber, Chamber),
    d_pair: (Chamber, Chamber),
) -> Result<PartialIsometry, IsomError> {
    step_extend_impl(phi, c_pair, d_pair, false)
}

/// Folds single-step transport along a gallery of opposite pairs starting
/// at `c_pair`; returns the image of the final pair and the transported
/// isometry on its foundation. An empty gallery returns the seed unchanged.
pub fn gallery_transport(
    phi: &PartialIsometry,
    c_pair: (Chamber, Chamber),
    gallery: &[(Chamber, Chamber)],
    raw: bool,
) -> Result<((Chamber, Chamber), PartialIsometry), IsomError> {
    if let Some(&first) = gallery.first() {
        if first != c_pair {
            return Err(pre("the gallery must start at the anchor pair"));
        }
    }
    let mut cur_pair = c_pair;
    let mut cur = phi.clone();
    for &next in gallery.iter().skip(1) {
        cur = if raw {
            step_extend_raw(&cur, cur_pair, next)?
        } else {
            step_extend(&cur, cur_pair, next)?
        };
        cur_pair = next;
    }
    let ip = cur
        .image(SignedChamber::plus(cur_pair.0))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::plus(cur_pair.0),
        })?;
    let im = cur
        .image(SignedChamber::minus(cur_pair.1))
        .ok_or(IsomError::NotInDomain {
            x: SignedChamber::minus(cur_pair.1),
        })?;
    Ok(((ip.ch, im.ch), cur))
}

/// A consistent family of local isometries indexed by a connected set of
/// opposite pairs: one local isometry per index, adjacent indices agreeing
/// on the overlap of their foundations.
#[derive(Debug)]
pub struct IsometryFamily {
    indices: Vec<(Chamber, Chamber)>,
    images: Vec<(Chamber, Chamber)>,
    locals: Vec<PartialIsometry>,
    non_tree_edges: usize,
}

impl IsometryFamily {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[(Chamber, Chamber)] {
        &self.indices
    }

    pub fn image_of(&self, i: usize) -> (Chamber, Chamber) {
        self.images[i]
    }

    pub fn local(&self, i: usize) -> &PartialIsometry {
        &self.locals[i]
    }

    pub fn position(&self, pair: (Chamber, Chamber)) -> Option<usize> {
        self.indices.binary_search(&pair).ok()
    }

    /// Number of adjacency edges outside the spanning tree whose agreement
    /// was checked during construction.
    pub fn checked_edges(&self) -> usize {
        self.non_tree_edges
    }
}

/// True when two opposite pairs are adjacent in the opposition system:
/// distinct, with both components equal or adjacent along one common type.
fn pairs_adjacent(tw: &TwinSpace, p: (Chamber, Chamber), q: (Chamber, Chamber)) -> bool {
    if p == q {
        return false;
    }
    let bp = tw.building(Sign::Plus);
    let bm = tw.building(Sign::Minus);
    (0..tw.group().rank()).map(|i| Gen(i as u16)).any(|s| {
        (p.0 == q.0 || bp.panel(s, p.0).contains(&q.0))
            && (p.1 == q.1 || bm.panel(s, p.1).contains(&q.1))
    })
}

/// Transports a seed isometry over a connected set of opposite pairs:
/// breadth-first spanning tree from the seed's pair, one step transport
/// per tree edge, then an agreement check of the two local isometries
/// across every non-tree adjacency edge (the empirical stand-in for simple
/// connectedness of the index set). Any disagreement is fatal.
pub fn transport_family(
    phi: &PartialIsometry,
    c_pair: (Chamber, Chamber),
    subset: &[(Chamber, Chamber)],
    raw: bool,
) -> Result<IsometryFamily, IsomError> {
    let src = &phi.source;
    let mut indices: Vec<(Chamber, Chamber)> = subset.to_vec();
    indices.sort_unstable();
    indices.dedup();
    let root = indices
        .binary_search(&c_pair)
        .map_err(|_| pre("the seed pair must belong to the index set"))?;
    let m = indices.len();
    for &k in &foundation_domain(src, c_pair) {
        if !phi.contains(k) {
            return Err(IsomError::NotInDomain { x: k });
        }
    }
    let mut adjacency: Vec<Vec<usize>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = Vec::new();
        for j in 0..m {
            if i != j && pairs_adjacent(src, indices[i], indices[j]) {
                row.push(j);
            }
        }
        adjacency.push(row);
    }
    let mut locals: Vec<Option<PartialIsometry>> = (0..m).map(|_| None).collect();
    locals[root] = Some(phi.restrict(&foundation_domain(src, c_pair))?);
    let mut order = Vec::with_capacity(m);
    order.push(root);
    let mut tree_edge: Vec<Option<usize>> = (0..m).map(|_| None).collect();
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        for &j in &adjacency[i] {
            if locals[j].is_none() && j != root {
                tree_edge[j] = Some(i);
                let parent = locals[i].as_ref().expect("parent local is built");
                let transported = if raw {
                    step_extend_raw(parent, indices[i], indices[j])?
                } else {
                    step_extend(parent, indices[i], indices[j])?
                };
                locals[j] = Some(transported);
                order.push(j);
            }
        }
    }
    if order.len() != m {
        return Err(pre("the index set must be connected in the opposition system"));
    }
    let locals: Vec<PartialIsometry> = locals.into_iter().map(|l| l.unwrap()).collect();
    let mut non_tree_edges = 0;
    for i in 0..m {
        for &j in &adjacency[i] {
            if j < i || tree_edge[j] == Some(i) || tree_edge[i] == Some(j) {
                continue;
            }
            non_tree_edges += 1;
            for (k, v) in locals[i].pairs() {
                if let Some(other) = locals[j].image(k) {
                    if other != v {
                        return Err(IsomError::InconsistentTransport {
                            a: indices[i],
                            b: indices[j],
                            at: k,
                        });
                    }
                }
            }
        }
    }
    let images = locals
        .iter()
        .zip(&indices)
        .map(|(l, &(p, q))| {
            let ip = l.image(SignedChamber::plus(p)).expect("index in own foundation");
            let im = l.image(SignedChamber::minus(q)).expect("index in own foundation");
            (ip.ch, im.ch)
        })
        .collect();
    Ok(IsometryFamily {
        indices,
        images,
        locals,
        non_tree_edges,
    })
}

/// Assembles the plus-half isometry from a family indexed by the pairs of
/// a retraction graph: every plus chamber appears in exactly one index
/// pair, its image is taken from that pair's local isometry, and the
/// result is validated as a full isometry of the plus half; every local
/// isometry must agree with the assembled map on its plus-side domain.
pub fn build_phi_plus(family: &IsometryFamily) -> Result<PartialIsometry, IsomError> {
    if family.is_empty() {
        return Err(pre("the family must not be empty"));
    }
    let src = &family.locals[0].source;
    let tgt = &family.locals[0].target;
    let n = src.building(Sign::Plus).n_chambers();
    if family.len() != n
        || family
            .indices
            .iter()
            .enumerate()
            .any(|(i, &(p, _))| p.index() != i)
    {
        return Err(pre(
            "the family must be indexed by every plus chamber exactly once",
        ));
    }
    let mut pairs = Vec::with_capacity(n);
    for (i, local) in family.locals.iter().enumerate() {
        let x = SignedChamber::plus(family.indices[i].0);
        let img = local.image(x).ok_or(IsomError::NotInDomain { x })?;
        pairs.push((x, img));
    }
    let phi_plus = make_isometry(src, tgt, &pairs)?;
    for (i, local) in family.locals.iter().enumerate() {
        for (k, v) in local.pairs() {
            if k.sign == Sign::Plus && phi_plus.image(k) != Some(v) {
                return Err(IsomError::FamilyDisagreement {
                    index: family.indices[i],
                    at: k,
                });
            }
        }
    }
    Ok(phi_plus)
}

/// One named checkpoint of the gluing pipeline.
#[derive(Debug, Clone)]
pub struct StageCheck {
    pub name: &'static str,
    pub info: String,
}

/// Result of the gluing pipeline: the extended isometry on the whole plus
/// half together with the minus-side foundation, plus the stage log.
#[derive(Debug)]
pub struct MainExtensionOutcome {
    pub result: PartialIsometry,
    pub stages: Vec<StageCheck>,
}

/// Grows a seed isometry, defined on the plus foundation of `c_plus`
/// together with the opposite chamber `c_minus`, to an isometry defined on
/// the entire plus half together with the minus foundation of `c_minus`.
///
/// Stages: (1) unique extension to the minus foundation; (2) anchoring of
/// the codistance-indexed retraction on the twin apartment of the base
/// pair; (3) transport of the local isometry over the retraction graph
/// with cross-edge agreement checks; (4) assembly and validation of the
/// plus-half isometry; (5) reconciliation of the minus foundation across
/// every chamber opposite the minus base, by transporting along
/// opposition galleries built from connecting sequences and verifying the
/// transported maps against the family; (6) an opposition-preservation
/// check followed by the admissibility-checked union, revalidated over the
/// full output domain.
///
/// Global uniqueness of the result is deliberately not asserted - only the
/// local extension steps carry uniqueness guarantees.
pub fn main_extension(
    phi: &PartialIsometry,
    c_plus: Chamber,
    c_minus: Chamber,
) -> Result<MainExtensionOutcome, IsomError> {
    let src = Arc::clone(&phi.source);
    let tgt = Arc::clone(&phi.target);
    let rank = src.group().rank();
    if rank < 3 {
        return Err(pre("the gluing pipeline needs rank at least three"));
    }
    let matrix = src.group().matrix();
    for i in 0..rank {
        for j in 0..rank {
            if matrix.entry(Gen(i as u16), Gen(j as u16)) == 0 {
                return Err(pre("the gluing pipeline needs a two-spherical type"));
            }
        }
    }
    for tw in [&src, &tgt] {
        for eps in [Sign::Plus, Sign::Minus] {
            if tw.building(eps).thickness_check().is_err() {
                return Err(pre("the gluing pipeline needs thick buildings"));
            }
        }
    }
    let mut stages = Vec::new();

    // Stage 1: complete the seed on the minus foundation, uniquely.
    let phi0 = extend_foundation_pair(phi, c_plus, c_minus)?;
    let minus_foundation: Vec<Chamber> = src.building(Sign::Minus).foundation(c_minus, 2);
    stages.push(StageCheck {
        name: "foundation-pair-extension",
        info: format!(
            "unique completion on {} minus-foundation chambers",
            minus_foundation.len()
        ),
    });

    // Stage 2: anchor the codistance-indexed retraction on the twin
    // apartment of the base pair and build its checked graph.
    let apartment = src.twin_apartment(c_plus, c_minus)?;
    let pi = pi_retraction(&src, Sign::Plus, c_minus, &apartment.minus)?;
    let graph = retraction_graph(&src, &Retraction::Codistance(pi.clone()))?;
    let graph_pairs: Vec<(Chamber, Chamber)> = graph.pairs().collect();
    stages.push(StageCheck {
        name: "retraction-anchoring",
        info: format!(
            "apartment half of {} chambers; opposition graph on {} pairs",
            apartment.minus.len(),
            graph_pairs.len()
        ),
    });

    // Stage 3: transport the local isometry over the whole graph.
    let family = transport_family(&phi0, (c_plus, c_minus), &graph_pairs, false)?;
    stages.push(StageCheck {
        name: "graph-transport",
        info: format!(
            "{} tree transports, each a unique completion; {} cross-edge agreements",
            family.len() - 1,
            family.checked_edges()
        ),
    });

    // Stage 4: assemble and validate the plus-half isometry.
    let phi_plus = build_phi_plus(&family)?;
    stages.push(StageCheck {
        name: "plus-half-assembly",
        info: format!("validated isometry on {} plus chambers", phi_plus.len()),
    });

    // Stage 5: the minus foundation must come out the same from every
    // chamber opposite the minus base; walk connecting sequences and
    // transport along the joining opposition galleries to verify.
    let anchors = src.opposites(Sign::Minus, c_minus).to_vec();
    let x0 = anchors[0];
    let pos0 = family
        .position((x0, c_minus))
        .ok_or(pre("the retraction graph must contain every opposite anchor"))?;
    let mut joins = 0usize;
    for &y in &anchors[1..] {
        let (xs, zs) = connecting_sequence(&src, Sign::Plus, c_minus, x0, y)?;
        for (l, &z) in zs.iter().enumerate() {
            let join = omega_gallery_join(&src, &pi, xs[l], xs[l + 1], z)?;
            let start = family
                .position((xs[l], c_minus))
                .ok_or(pre("a connecting station is missing from the graph"))?;
            let (_, transported) =
                gallery_transport(family.local(start), (xs[l], c_minus), &join.pairs, false)?;
            let end = family
                .position((xs[l + 1], c_minus))
                .ok_or(pre("a connecting station is missing from the graph"))?;
            if !transported.same_mapping(family.local(end)) {
                let at = transported
                    .pairs()
                    .find(|&(k, v)| family.local(end).image(k) != Some(v))
                    .map(|(k, _)| k)
                    .unwrap_or(SignedChamber::minus(c_minus));
                return Err(IsomError::InconsistentTransport {
                    a: (xs[l], c_minus),
                    b: (xs[l + 1], c_minus),
                    at,
                });
            }
            joins += 1;
        }
    }
    let minus_keys: Vec<SignedChamber> = minus_foundation
        .iter()
        .map(|&z| SignedChamber::minus(z))
        .collect();
    let phi_minus = family.local(pos0).restrict(&minus_keys)?;
    for &x in &anchors {
        let p = family
            .position((x, c_minus))
            .ok_or(pre("the retraction graph must contain every opposite anchor"))?;
        for &k in &minus_keys {
            if family.local(p).image(k) != phi_minus.image(k) {
                return Err(IsomError::InconsistentTransport {
                    a: (x0, c_minus),
                    b: (x, c_minus),
                    at: k,
                });
            }
        }
    }
    stages.push(StageCheck {
        name: "minus-foundation-agreement",
        info: format!(
            "{} opposite anchors reconciled through {} gallery joins",
            anchors.len(),
            joins
        ),
    });

    // Stage 6: opposition preservation, then the admissibility-checked
    // union, revalidated over the full output domain.
    let mut opposition_checks = 0usize;
    for (z, zi) in phi_minus.pairs() {
        for &x in src.opposites(Sign::Minus, z.ch) {
            let img = phi_plus
                .image(SignedChamber::plus(x))
                .ok_or(IsomError::NotInDomain {
                    x: SignedChamber::plus(x),
                })?;
            if !tgt.is_opposite(Sign::Minus, zi.ch, img.ch) {
                return Err(IsomError::OppositionNotPreserved { x, z: z.ch });
            }
            opposition_checks += 1;
        }
    }
    let result = union_isometries(&phi_plus, &phi_minus)?;
    stages.push(StageCheck {
        name: "opposition-gluing",
        info: format!(
            "{} opposition checks; union validated over {} chambers",
            opposition_checks,
            result.len()
        ),
    });

    Ok(MainExtensionOutcome { result, stages })
}
