//! Twin buildings: a pair of buildings over one Coxeter system linked by a
//! W-valued codistance, with opposition, cross projections, twin apartments,
//! and the residue-opposition laws.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::building::{validate_building, BuildingError, BuildingSpace, Chamber, Residue};
use crate::coxeter::{CoxeterGroup, Elem, Gen};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    #[inline]
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sign::Plus => write!(f, "+"),
            Sign::Minus => write!(f, "-"),
        }
    }
}

/// A chamber tagged with the half of the twin building it lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedChamber {
    pub sign: Sign,
    pub ch: Chamber,
}

impl SignedChamber {
    pub fn new(sign: Sign, ch: Chamber) -> Self {
        SignedChamber { sign, ch }
    }

    pub fn plus(ch: Chamber) -> Self {
        SignedChamber { sign: Sign::Plus, ch }
    }

    pub fn minus(ch: Chamber) -> Self {
        SignedChamber { sign: Sign::Minus, ch }
    }
}

impl fmt::Display for SignedChamber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sign, self.ch)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwinAxiom {
    Tw1,
    Tw2,
    Tw3,
}

impl fmt::Display for TwinAxiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwinAxiom::Tw1 => write!(f, "Tw1"),
            TwinAxiom::Tw2 => write!(f, "Tw2"),
            TwinAxiom::Tw3 => write!(f, "Tw3"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TwinError {
    Building(BuildingError),
    /// The two halves are not buildings over the same Coxeter matrix.
    GroupMismatch,
    CostarShape { reason: &'static str },
    AxiomViolation {
        axiom: TwinAxiom,
        x: SignedChamber,
        y: SignedChamber,
        z: Option<SignedChamber>,
        s: Option<Gen>,
    },
    CrossGateNotUnique {
        from: SignedChamber,
        in_residue_of: SignedChamber,
    },
    ResidueOpposition {
        note: &'static str,
        u: SignedChamber,
        v: Option<SignedChamber>,
    },
    NotOpposite { x: SignedChamber, y: SignedChamber },
}

impl fmt::Display for TwinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwinError::Building(e) => write!(f, "underlying building: {e}"),
            TwinError::GroupMismatch => {
                write!(f, "the two halves use different Coxeter matrices")
            }
            TwinError::CostarShape { reason } => write!(f, "malformed codistance: {reason}"),
            TwinError::AxiomViolation { axiom, x, y, z, s } => {
                write!(f, "axiom {axiom} fails at x={x}, y={y}")?;
                if let Some(z) = z {
                    write!(f, ", z={z}")?;
                }
                if let Some(s) = s {
                    write!(f, ", s={s}")?;
                }
                Ok(())
            }
            TwinError::CrossGateNotUnique { from, in_residue_of } => write!(
                f,
                "cross projection of {from} into the residue of {in_residue_of} is not unique"
            ),
            TwinError::ResidueOpposition { note, u, v } => {
                write!(f, "residue opposition fails at u={u}")?;
                if let Some(v) = v {
                    write!(f, ", v={v}")?;
                }
                write!(f, ": {note}")
            }
            TwinError::NotOpposite { x, y } => write!(f, "{x} and {y} are not opposite"),
        }
    }
}

impl core::error::Error for TwinError {}

impl From<BuildingError> for TwinError {
    fn from(e: BuildingError) -> Self {
        TwinError::Building(e)
    }
}

/// Sorted plus- and minus-halves of the twin apartment spanned by an
/// opposite pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwinApartment {
    pub plus: Vec<Chamber>,
    pub minus: Vec<Chamber>,
}

/// Validated twin building: two halves plus both codistance tables and the
/// precomputed opposition lists.
#[derive(Debug)]
pub struct TwinSpace {
    plus: Arc<BuildingSpace>,
    minus: Arc<BuildingSpace>,
    /// n_plus x n_minus row-major: codistance from a plus chamber.
    pm: Vec<u32>,
    /// n_minus x n_plus row-major: codistance from a minus chamber.
    mp: Vec<u32>,
    opp_from_plus: Vec<Vec<Chamber>>,
    opp_from_minus: Vec<Vec<Chamber>>,
}

/// The opposition involution s -> w0 s w0 of a (finite) Coxeter system.
pub fn diagram_flip(g: &CoxeterGroup) -> Vec<Gen> {
    let all: Vec<Gen> = g.matrix().gens().collect();
    let w0 = g.longest_element(&all);
    all.iter()
        .map(|&s| {
            let conj = g.mul(g.mul(w0, g.fold([s])), w0);
            debug_assert_eq!(g.len(conj), 1);
            g.word(conj)[0]
        })
        .collect()
}

/// Twins a building with itself: the minus half is the same chamber complex
/// with panel types permuted by the opposition involution, and the
/// codistance is delta*(x, y) = delta_plus(x, y) * w0. The result is fully
/// revalidated rather than trusted.
pub fn spherical_double(plus: Arc<BuildingSpace>) -> Result<TwinSpace, TwinError> {
    let g = plus.group().clone();
    let all: Vec<Gen> = g.matrix().gens().collect();
    let w0 = g.longest_element(&all);
    let flip = diagram_flip(&g);

    let mut flipped_panels = vec![Vec::new(); g.rank()];
    for s in g.matrix().gens() {
        flipped_panels[flip[s.index()].index()] = plus.panels(s).to_vec();
    }
    let minus = Arc::new(validate_building(
        g.clone(),
        plus.n_chambers(),
        &flipped_panels,
    )?);

    let n = plus.n_chambers();
    let mut pm = vec![0u32; n * n];
    let mut mp = vec![0u32; n * n];
    for x in 0..n {
        for y in 0..n {
            let d = plus.dist(Chamber(x as u32), Chamber(y as u32));
            pm[x * n + y] = g.mul(d, w0).0;
            mp[y * n + x] = g.mul(w0, g.inv(d)).0;
        }
    }
    validate_twin(plus, minus, pm, mp)
}

/// Checks (Tw1)-(Tw3) exhaustively against the two distance tables and the
/// given codistance tables, then freezes the opposition lists.
pub fn validate_twin(
    plus: Arc<BuildingSpace>,
    minus: Arc<BuildingSpace>,
    pm: Vec<u32>,
    mp: Vec<u32>,
) -> Result<TwinSpace, TwinError> {
    if plus.group().matrix().rows() != minus.group().matrix().rows() {
        return Err(TwinError::GroupMismatch);
    }
    let g = plus.group().clone();
    let np = plus.n_chambers();
    let nm = minus.n_chambers();
    if pm.len() != np * nm {
        return Err(TwinError::CostarShape {
            reason: "plus-to-minus table has the wrong shape",
        });
    }
    if mp.len() != nm * np {
        return Err(TwinError::CostarShape {
            reason: "minus-to-plus table has the wrong shape",
        });
    }
    if pm.iter().chain(mp.iter()).any(|&e| e as usize >= g.order()) {
        return Err(TwinError::CostarShape {
            reason: "codistance entry is not a group element",
        });
    }

    let space = TwinSpace {
        plus,
        minus,
        pm,
        mp,
        opp_from_plus: Vec::new(),
        opp_from_minus: Vec::new(),
    };

    for x in 0..np {
        for y in 0..nm {
            let xc = SignedChamber::plus(Chamber(x as u32));
            let yc = SignedChamber::minus(Chamber(y as u32));
            let there = Elem(space.pm[x * nm + y]);
            let back = Elem(space.mp[y * np + x]);
            if back != g.inv(there) {
                return Err(TwinError::AxiomViolation {
                    axiom: TwinAxiom::Tw1,
                    x: xc,
                    y: yc,
                    z: None,
                    s: None,
                });
            }
        }
    }

    for eps in Sign::BOTH {
        let partner = space.building(eps.flip());
        for x in space.building(eps).chambers() {
            for y in partner.chambers() {
                let w = space.codist(eps, x, y);
                for s in g.matrix().gens() {
                    let ws = g.right_mul(w, s);
                    let descent = g.len(ws) < g.len(w);
                    let mut found = false;
                    for &z in partner.panel(s, y) {
                        if z == y {
                            continue;
                        }
                        let got = space.codist(eps, x, z);
                        if got == ws {
                            found = true;
                        } else if descent {
                            return Err(TwinError::AxiomViolation {
                                axiom: TwinAxiom::Tw2,
                                x: SignedChamber::new(eps, x),
                                y: SignedChamber::new(eps.flip(), y),
                                z: Some(SignedChamber::new(eps.flip(), z)),
                                s: Some(s),
                            });
                        }
                    }
                    if !found {
                        return Err(TwinError::AxiomViolation {
                            axiom: TwinAxiom::Tw3,
                            x: SignedChamber::new(eps, x),
                            y: SignedChamber::new(eps.flip(), y),
                            z: None,
                            s: Some(s),
                        });
                    }
                }
            }
        }
    }

    let mut space = space;
    space.opp_from_plus = (0..np)
        .map(|x| {
            (0..nm)
                .filter(|&y| space.pm[x * nm + y] == Elem::IDENTITY.0)
                .map(|y| Chamber(y as u32))
                .collect()
        })
        .collect();
    space.opp_from_minus = (0..nm)
        .map(|y| {
            (0..np)
                .filter(|&x| space.mp[y * np + x] == Elem::IDENTITY.0)
                .map(|x| Chamber(x as u32))
                .collect()
        })
        .collect();
    Ok(space)
}

impl TwinSpace {
    pub fn group(&self) -> &Arc<CoxeterGroup> {
        self.plus.group()
    }

    pub fn building(&self, eps: Sign) -> &Arc<BuildingSpace> {
        match eps {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Raw plus-to-minus codistance table (row-major by plus chamber).
    pub fn costar_plus_minus(&self) -> &[u32] {
        &self.pm
    }

    /// Raw minus-to-plus codistance table (row-major by minus chamber).
    pub fn costar_minus_plus(&self) -> &[u32] {
        &self.mp
    }

    /// The same twin building viewed with the two halves exchanged: the
    /// codistance tables and opposition lists trade places. The axioms are
    /// symmetric in the halves, so the swap of a validated twin is valid.
    pub fn swapped(&self) -> TwinSpace {
        TwinSpace {
            plus: Arc::clone(&self.minus),
            minus: Arc::clone(&self.plus),
            pm: self.mp.clone(),
            mp: self.pm.clone(),
            opp_from_plus: self.opp_from_minus.clone(),
            opp_from_minus: self.opp_from_plus.clone(),
        }
    }

    /// Codistance delta*(x, y) for x in the eps half and y in the other.
    #[inline]
    pub fn codist(&self, eps: Sign, x: Chamber, y: Chamber) -> Elem {
        match eps {
            Sign::Plus => Elem(self.pm[x.index() * self.minus.n_chambers() + y.index()]),
            Sign::Minus => Elem(self.mp[x.index() * self.plus.n_chambers() + y.index()]),
        }
    }

    /// Numerical codistance l(delta*(x, y)).
    #[inline]
    pub fn colen(&self, eps: Sign, x: Chamber, y: Chamber) -> u32 {
        self.group().len(self.codist(eps, x, y))
    }

    /// Distance within the eps half.
    #[inline]
    pub fn dist_in(&self, eps: Sign, x: Chamber, y: Chamber) -> Elem {
        self.building(eps).dist(x, y)
    }

    /// Merged two-signed distance: the half distance on equal signs, the
    /// codistance on mixed signs.
    #[inline]
    pub fn sdist(&self, a: SignedChamber, b: SignedChamber) -> Elem {
        if a.sign == b.sign {
            self.dist_in(a.sign, a.ch, b.ch)
        } else {
            self.codist(a.sign, a.ch, b.ch)
        }
    }

    #[inline]
    pub fn is_opposite(&self, eps: Sign, x: Chamber, y: Chamber) -> bool {
        self.codist(eps, x, y) == Elem::IDENTITY
    }

    /// Chambers of the opposite half opposite to x, ascending.
    pub fn opposites(&self, eps: Sign, x: Chamber) -> &[Chamber] {
        match eps {
            Sign::Plus => &self.opp_from_plus[x.index()],
            Sign::Minus => &self.opp_from_minus[x.index()],
        }
    }

    /// Projection of x (eps half) into a spherical residue r of the other
    /// half: the unique chamber of r at maximal codistance length. The
    /// additivity law delta*(x, y) = delta*(x, gate) * delta(gate, y) is
    /// asserted in debug builds.
    pub fn cross_project(&self, eps: Sign, x: Chamber, r: &Residue) -> Result<Chamber, TwinError> {
        let rep = r.chambers()[0];
        let mut gate = rep;
        let mut best = self.colen(eps, x, rep);
        let mut tied = false;
        for &y in &r.chambers()[1..] {
            let len = self.colen(eps, x, y);
            if len > best {
                best = len;
                gate = y;
                tied = false;
            } else if len == best {
                tied = true;
            }
        }
        if tied {
            return Err(TwinError::CrossGateNotUnique {
                from: SignedChamber::new(eps, x),
                in_residue_of: SignedChamber::new(eps.flip(), rep),
            });
        }
        debug_assert!(r.chambers().iter().all(|&y| {
            self.codist(eps, x, y)
                == self
                    .group()
                    .mul(self.codist(eps, x, gate), self.dist_in(eps.flip(), gate, y))
        }));
        Ok(gate)
    }

    /// The twin apartment spanned by an opposite pair (x plus, y minus):
    /// each half collects the chambers whose distance to its base equals
    /// their codistance to the other base.
    pub fn twin_apartment(&self, x: Chamber, y: Chamber) -> Result<TwinApartment, TwinError> {
        if !self.is_opposite(Sign::Plus, x, y) {
            return Err(TwinError::NotOpposite {
                x: SignedChamber::plus(x),
                y: SignedChamber::minus(y),
            });
        }
        let plus = self
            .plus
            .chambers()
            .filter(|&z| self.plus.dist(z, x) == self.codist(Sign::Plus, z, y))
            .collect();
        let minus = self
            .minus
            .chambers()
            .filter(|&z| self.minus.dist(z, y) == self.codist(Sign::Minus, z, x))
            .collect();
        Ok(TwinApartment { plus, minus })
    }

    /// The residue of the opposite half opposite to r: located through the
    /// least opposite pair, which (Tw3) guarantees to exist.
    pub fn opposite_residue(&self, eps: Sign, r: &Residue) -> Residue {
        let (_, v) = r
            .chambers()
            .iter()
            .find_map(|&u| self.opposites(eps, u).first().map(|&v| (u, v)))
            .expect("a validated twin building has an opposite for every chamber");
        self.building(eps.flip()).residue_of(v, r.jtype())
    }

    /// Opposition laws for a pair of same-type spherical residues containing
    /// opposite chambers: opposition restricts to them, codistances stay in
    /// the parabolic, and the two cross projections are inverse bijections
    /// matching the longest-element codistance.
    pub fn residue_opposition_check(
        &self,
        rplus: &Residue,
        rminus: &Residue,
    ) -> Result<(), TwinError> {
        if rplus.jtype() != rminus.jtype() {
            return Err(TwinError::ResidueOpposition {
                note: "residue types differ",
                u: SignedChamber::plus(rplus.chambers()[0]),
                v: Some(SignedChamber::minus(rminus.chambers()[0])),
            });
        }
        let g = self.group();
        let jmask = g.gen_mask(rplus.jtype());
        let rj = g.longest_element(rplus.jtype());

        for &u in rplus.chambers() {
            if !rminus.chambers().iter().any(|&v| self.is_opposite(Sign::Plus, u, v)) {
                return Err(TwinError::ResidueOpposition {
                    note: "no opposite chamber in the partner residue",
                    u: SignedChamber::plus(u),
                    v: None,
                });
            }
        }
        for &v in rminus.chambers() {
            if !rplus.chambers().iter().any(|&u| self.is_opposite(Sign::Minus, v, u)) {
                return Err(TwinError::ResidueOpposition {
                    note: "no opposite chamber in the partner residue",
                    u: SignedChamber::minus(v),
                    v: None,
                });
            }
        }

        for &u in rplus.chambers() {
            for &v in rminus.chambers() {
                if !g.in_parabolic(self.codist(Sign::Plus, u, v), jmask) {
                    return Err(TwinError::ResidueOpposition {
                        note: "codistance leaves the residue type",
                        u: SignedChamber::plus(u),
                        v: Some(SignedChamber::minus(v)),
                    });
                }
            }
        }

        for &u in rplus.chambers() {
            let gate = self.cross_project(Sign::Plus, u, rminus)?;
            if self.codist(Sign::Plus, u, gate) != rj {
                return Err(TwinError::ResidueOpposition {
                    note: "cross gate is not at the longest codistance",
                    u: SignedChamber::plus(u),
                    v: Some(SignedChamber::minus(gate)),
                });
            }
            for &v in rminus.chambers() {
                if (self.codist(Sign::Plus, u, v) == rj) != (v == gate) {
                    return Err(TwinError::ResidueOpposition {
                        note: "longest codistance away from the gate",
                        u: SignedChamber::plus(u),
                        v: Some(SignedChamber::minus(v)),
                    });
                }
            }
            let back = self.cross_project(Sign::Minus, gate, rplus)?;
            if back != u {
                return Err(TwinError::ResidueOpposition {
                    note: "cross projections are not mutually inverse",
                    u: SignedChamber::plus(u),
                    v: Some(SignedChamber::minus(gate)),
                });
            }
        }
        Ok(())
    }
}
