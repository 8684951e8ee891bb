//! The verification suite: a fixed battery of behavior-named checks run
//! against a twin, each producing one record with a pass flag, the scope
//! actually covered, an optional failure witness, and wall time. Reports
//! are deterministic given the twin, the level, and the seed.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use twinbuildings::building::{validate_building, BuildingSpace, Chamber};
use twinbuildings::chamsys::{from_building, ChamberSystem, OppSystem};
use twinbuildings::coxeter::Gen;
use twinbuildings::isom::{
    build_phi_plus, foundation_domain, gallery_transport, make_isometry, transport_family,
    PartialIsometry,
};
use twinbuildings::retract::{
    connecting_sequence, descent_step, four_projection_check, omega_retraction, pi_retraction,
    retraction_graph, Retraction,
};
use twinbuildings::twin::{validate_twin, Sign, TwinSpace};

/// How hard the quantified checks work: `Exhaustive` covers every instance,
/// `Sampled` draws seeded random witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Exhaustive,
    Sampled,
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(Level::Exhaustive),
            "sampled" => Ok(Level::Sampled),
            other => Err(format!(
                "unknown level \"{other}\" (expected \"exhaustive\" or \"sampled\")"
            )),
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Exhaustive => write!(f, "exhaustive"),
            Level::Sampled => write!(f, "sampled"),
        }
    }
}

/// What a check actually covered. Seeded checks report `Sampled` even at
/// the exhaustive level, with the draw count and the derived seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Exhaustive,
    Sampled { witnesses: u64, seed: u64 },
}

/// One check's outcome.
#[derive(Debug, Clone)]
pub struct CheckRecord {
    pub tag: &'static str,
    pub scope: Scope,
    pub pass: bool,
    pub witness: Option<String>,
    pub millis: u128,
}

/// The full battery's outcome, records sorted by tag.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub level: Level,
    pub rng_seed: u64,
    pub records: Vec<CheckRecord>,
}

impl SuiteReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    /// Canonical JSON rendering, one check per line, keys alphabetical.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n\"checks\": [");
        for (i, r) in self.records.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n{");
            out.push_str(&format!("\"millis\": {}, ", r.millis));
            out.push_str(&format!("\"pass\": {}, ", r.pass));
            match r.scope {
                Scope::Exhaustive => out.push_str("\"scope\": \"exhaustive\", "),
                Scope::Sampled { seed, .. } => {
                    out.push_str(&format!("\"scope\": \"sampled\", \"seed\": {seed}, "));
                }
            }
            out.push_str(&format!("\"tag\": {}", json_string(r.tag)));
            if let Some(w) = &r.witness {
                out.push_str(&format!(", \"witness\": {}", json_string(w)));
            }
            if let Scope::Sampled { witnesses, .. } = r.scope {
                out.push_str(&format!(", \"witnesses\": {witnesses}"));
            }
            out.push('}');
        }
        out.push_str(&format!("\n],\n\"level\": \"{}\",\n", self.level));
        out.push_str(&format!("\"pass\": {},\n", self.pass()));
        out.push_str(&format!("\"rng\": {}\n}}\n", self.rng_seed));
        out
    }
}

pub(crate) fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Derives a per-check seed so each check's draws are independent of the
/// order checks run in.
fn tag_seed(rng_seed: u64, tag: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for b in tag.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h ^ rng_seed
}

/// Number of seeded draws for quantified checks run at the sampled level.
const SAMPLED_WITNESSES: u64 = 10_000;
/// Closed-route cap at the sampled level.
const SAMPLED_CLOSED_ROUTES: u64 = 60;
/// Instances for the descent and connecting-sequence checks.
const DESCENT_INSTANCES: u64 = 100;
/// Instances for the out-and-back transport check.
const OUT_AND_BACK_INSTANCES: u64 = 50;

struct Ctx {
    tw: Arc<TwinSpace>,
    level: Level,
    rng_seed: u64,
}

impl Ctx {
    fn rng(&self, tag: &str) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(tag_seed(self.rng_seed, tag))
    }

    fn sampled_scope(&self, tag: &str, witnesses: u64) -> Scope {
        Scope::Sampled {
            witnesses,
            seed: tag_seed(self.rng_seed, tag),
        }
    }
}

type Check = fn(&Ctx) -> (Scope, Result<(), String>);

/// Every check in the battery, by tag, already sorted.
pub const CHECK_TAGS: [&str; 12] = [
    "axioms-building-minus",
    "axioms-building-plus",
    "axioms-twin",
    "connecting-sequence",
    "descent-step",
    "four-projection",
    "residue-opposition",
    "retraction-codistance",
    "retraction-distance",
    "transport-closed-rank-two",
    "transport-family-graphs",
    "transport-out-and-back",
];

fn check_fn(tag: &str) -> Option<Check> {
    Some(match tag {
        "axioms-building-minus" => check_axioms_building_minus,
        "axioms-building-plus" => check_axioms_building_plus,
        "axioms-twin" => check_axioms_twin,
        "connecting-sequence" => check_connecting_sequence,
        "descent-step" => check_descent_step,
        "four-projection" => check_four_projection,
        "residue-opposition" => check_residue_opposition,
        "retraction-codistance" => check_retraction_codistance,
        "retraction-distance" => check_retraction_distance,
        "transport-closed-rank-two" => check_transport_closed_rank_two,
        "transport-family-graphs" => check_transport_family_graphs,
        "transport-out-and-back" => check_transport_out_and_back,
        _ => return None,
    })
}

/// Runs one named check; `None` for an unknown tag.
pub fn run_single_check(
    tw: &Arc<TwinSpace>,
    tag: &str,
    level: Level,
    rng_seed: u64,
) -> Option<CheckRecord> {
    let f = check_fn(tag)?;
    let tag = CHECK_TAGS.iter().find(|&&t| t == tag)?;
    let ctx = Ctx {
        tw: Arc::clone(tw),
        level,
        rng_seed,
    };
    let start = Instant::now();
    let (scope, outcome) = f(&ctx);
    Some(CheckRecord {
        tag,
        scope,
        pass: outcome.is_ok(),
        witness: outcome.err(),
        millis: start.elapsed().as_millis(),
    })
}

/// Runs the full battery and returns the records sorted by tag.
pub fn run_verification(tw: &Arc<TwinSpace>, level: Level, rng_seed: u64) -> SuiteReport {
    let records = CHECK_TAGS
        .iter()
        .map(|tag| run_single_check(tw, tag, level, rng_seed).expect("all listed tags run"))
        .collect();
    SuiteReport {
        level,
        rng_seed,
        records,
    }
}

// ---------------------------------------------------------------------
// Axiom checks: rebuild each structure from its raw data and revalidate.
// ---------------------------------------------------------------------

fn revalidate_building(b: &Arc<BuildingSpace>) -> Result<(), String> {
    let rank = b.group().rank();
    let panels: Vec<Vec<Vec<Chamber>>> = (0..rank)
        .map(|s| b.panels(Gen(s as u16)).to_vec())
        .collect();
    validate_building(Arc::clone(b.group()), b.n_chambers(), &panels)
        .map(|_| ())
        .map_err(|e| e.to_string())
}

fn check_axioms_building_plus(ctx: &Ctx) -> (Scope, Result<(), String>) {
    (
        Scope::Exhaustive,
        revalidate_building(ctx.tw.building(Sign::Plus)),
    )
}

fn check_axioms_building_minus(ctx: &Ctx) -> (Scope, Result<(), String>) {
    (
        Scope::Exhaustive,
        revalidate_building(ctx.tw.building(Sign::Minus)),
    )
}

fn check_axioms_twin(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tw = &ctx.tw;
    let outcome = validate_twin(
        Arc::clone(tw.building(Sign::Plus)),
        Arc::clone(tw.building(Sign::Minus)),
        tw.costar_plus_minus().to_vec(),
        tw.costar_minus_plus().to_vec(),
    )
    .map(|_| ())
    .map_err(|e| e.to_string());
    (Scope::Exhaustive, outcome)
}

// ---------------------------------------------------------------------
// Residue opposition: every opposite residue pair of rank at most two.
// ---------------------------------------------------------------------

fn low_rank_types(rank: usize) -> Vec<Vec<Gen>> {
    let mut out = Vec::new();
    for i in 0..rank {
        out.push(vec![Gen(i as u16)]);
    }
    for i in 0..rank {
        for j in (i + 1)..rank {
            out.push(vec![Gen(i as u16), Gen(j as u16)]);
        }
    }
    out
}

fn check_residue_opposition(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tw = &ctx.tw;
    let b = tw.building(Sign::Plus);
    let mut outcome = Ok(());
    'outer: for j in low_rank_types(tw.group().rank()) {
        let mut seen = std::collections::BTreeSet::new();
        for x in b.chambers() {
            let r = b.residue_of(x, &j);
            if !seen.insert(r.chambers()[0]) {
                continue;
            }
            let rm = tw.opposite_residue(Sign::Plus, &r);
            if let Err(e) = tw.residue_opposition_check(&r, &rm) {
                outcome = Err(e.to_string());
                break 'outer;
            }
        }
    }
    (Scope::Exhaustive, outcome)
}

// ---------------------------------------------------------------------
// Retraction laws.
// ---------------------------------------------------------------------

/// All opposite pairs (plus chamber, minus chamber), ascending.
fn opposite_pairs(tw: &TwinSpace) -> Vec<(Chamber, Chamber)> {
    let mut pairs = Vec::new();
    for x in tw.building(Sign::Plus).chambers() {
        for &y in tw.opposites(Sign::Plus, x) {
            pairs.push((x, y));
        }
    }
    pairs
}

fn random_opposite_pair(tw: &TwinSpace, rng: &mut ChaCha20Rng) -> (Chamber, Chamber) {
    let np = tw.building(Sign::Plus).n_chambers() as u32;
    loop {
        let x = Chamber(rng.random_range(0..np));
        let ops = tw.opposites(Sign::Plus, x);
        if !ops.is_empty() {
            return (x, ops[rng.random_range(0..ops.len())]);
        }
    }
}

/// The codistance-indexed retraction laws at one base pair and one domain
/// chamber: the image is opposite, it sits at the distance from the base
/// given by the domain chamber's codistance, and panel mates map to equal
/// or panel-adjacent images.
fn pi_laws_at(
    tw: &TwinSpace,
    base: (Chamber, Chamber),
    x: Chamber,
    gens: &[Gen],
) -> Result<(), String> {
    let apt = tw.twin_apartment(base.0, base.1).map_err(|e| e.to_string())?;
    let pi = pi_retraction(tw, Sign::Plus, base.1, &apt.minus).map_err(|e| e.to_string())?;
    let bp = tw.building(Sign::Plus);
    let bm = tw.building(Sign::Minus);
    let px = pi.retract(tw, x);
    if !tw.is_opposite(Sign::Plus, x, px) {
        return Err(format!(
            "base {base:?}: image of {x} under the codistance retraction is not opposite"
        ));
    }
    if bm.dist(base.1, px) != tw.codist(Sign::Minus, base.1, x) {
        return Err(format!(
            "base {base:?}: the codistance retraction misplaces {x} in the apartment"
        ));
    }
    for &s in gens {
        for &y in bp.panel(s, x) {
            if y == x {
                continue;
            }
            let py = pi.retract(tw, y);
            if py != px && !bm.panel(s, px).contains(&py) {
                return Err(format!(
                    "base {base:?}: the codistance retraction breaks {s}-adjacency at {x},{y}"
                ));
            }
        }
    }
    Ok(())
}

fn check_retraction_codistance(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "retraction-codistance";
    let tw = &ctx.tw;
    let gens: Vec<Gen> = (0..tw.group().rank()).map(|i| Gen(i as u16)).collect();
    match ctx.level {
        Level::Exhaustive => {
            for base in opposite_pairs(tw) {
                for x in tw.building(Sign::Plus).chambers() {
                    if let Err(e) = pi_laws_at(tw, base, x, &gens) {
                        return (Scope::Exhaustive, Err(e));
                    }
                }
            }
            (Scope::Exhaustive, Ok(()))
        }
        Level::Sampled => {
            let mut rng = ctx.rng(tag);
            let np = tw.building(Sign::Plus).n_chambers() as u32;
            for _ in 0..SAMPLED_WITNESSES {
                let base = random_opposite_pair(tw, &mut rng);
                let x = Chamber(rng.random_range(0..np));
                let s = gens[rng.random_range(0..gens.len())];
                if let Err(e) = pi_laws_at(tw, base, x, &[s]) {
                    return (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Err(e));
                }
            }
            (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Ok(()))
        }
    }
}

/// The distance-indexed retraction laws at one base pair and one domain
/// chamber: the base maps to its opposite anchor partner, images are
/// opposite, membership of the anchor in the spanned apartment is
/// reflected by the distance-codistance equation, the image sits at the
/// distance from the opposite base given by the domain distance from the
/// anchor, and panel mates map to equal or panel-adjacent images.
fn omega_laws_at(
    tw: &TwinSpace,
    base: (Chamber, Chamber),
    x: Chamber,
    gens: &[Gen],
) -> Result<(), String> {
    let om = omega_retraction(tw, Sign::Plus, base.0, base.1).map_err(|e| e.to_string())?;
    let bp = tw.building(Sign::Plus);
    let bm = tw.building(Sign::Minus);
    if om.retract(tw, base.0) != base.1 {
        return Err(format!(
            "base {base:?}: the distance retraction moves the anchor off the base"
        ));
    }
    let wx = om.retract(tw, x);
    if !tw.is_opposite(Sign::Plus, x, wx) {
        return Err(format!(
            "base {base:?}: image of {x} under the distance retraction is not opposite"
        ));
    }
    if bm.dist(base.1, wx) != bp.dist(base.0, x) {
        return Err(format!(
            "base {base:?}: the distance retraction misplaces {x} in the apartment"
        ));
    }
    if bp.dist(base.0, x) != tw.codist(Sign::Plus, base.0, wx) {
        return Err(format!(
            "base {base:?}: anchor membership fails for {x} under the distance retraction"
        ));
    }
    for &s in gens {
        for &y in bp.panel(s, x) {
            if y == x {
                continue;
            }
            let wy = om.retract(tw, y);
            if wy != wx && !bm.panel(s, wx).contains(&wy) {
                return Err(format!(
                    "base {base:?}: the distance retraction breaks {s}-adjacency at {x},{y}"
                ));
            }
        }
    }
    Ok(())
}

fn check_retraction_distance(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "retraction-distance";
    let tw = &ctx.tw;
    let gens: Vec<Gen> = (0..tw.group().rank()).map(|i| Gen(i as u16)).collect();
    match ctx.level {
        Level::Exhaustive => {
            for base in opposite_pairs(tw) {
                for x in tw.building(Sign::Plus).chambers() {
                    if let Err(e) = omega_laws_at(tw, base, x, &gens) {
                        return (Scope::Exhaustive, Err(e));
                    }
                }
            }
            (Scope::Exhaustive, Ok(()))
        }
        Level::Sampled => {
            let mut rng = ctx.rng(tag);
            let np = tw.building(Sign::Plus).n_chambers() as u32;
            for _ in 0..SAMPLED_WITNESSES {
                let base = random_opposite_pair(tw, &mut rng);
                let x = Chamber(rng.random_range(0..np));
                let s = gens[rng.random_range(0..gens.len())];
                if let Err(e) = omega_laws_at(tw, base, x, &[s]) {
                    return (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Err(e));
                }
            }
            (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Ok(()))
        }
    }
}

fn check_four_projection(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "four-projection";
    let tw = &ctx.tw;
    let rank = tw.group().rank();
    match ctx.level {
        Level::Exhaustive => {
            for base in opposite_pairs(tw) {
                let om = match omega_retraction(tw, Sign::Plus, base.0, base.1) {
                    Ok(om) => om,
                    Err(e) => return (Scope::Exhaustive, Err(e.to_string())),
                };
                for si in 0..rank {
                    let s = Gen(si as u16);
                    for class in tw.building(Sign::Plus).panels(s) {
                        if let Err(e) = four_projection_check(tw, &om, s, class[0]) {
                            return (
                                Scope::Exhaustive,
                                Err(format!("base {base:?}: {e}")),
                            );
                        }
                    }
                }
            }
            (Scope::Exhaustive, Ok(()))
        }
        Level::Sampled => {
            let mut rng = ctx.rng(tag);
            let np = tw.building(Sign::Plus).n_chambers() as u32;
            for _ in 0..SAMPLED_WITNESSES {
                let base = random_opposite_pair(tw, &mut rng);
                let om = match omega_retraction(tw, Sign::Plus, base.0, base.1) {
                    Ok(om) => om,
                    Err(e) => {
                        return (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Err(e.to_string()))
                    }
                };
                let s = Gen(rng.random_range(0..rank) as u16);
                let rep = Chamber(rng.random_range(0..np));
                if let Err(e) = four_projection_check(tw, &om, s, rep) {
                    return (
                        ctx.sampled_scope(tag, SAMPLED_WITNESSES),
                        Err(format!("base {base:?}: {e}")),
                    );
                }
            }
            (ctx.sampled_scope(tag, SAMPLED_WITNESSES), Ok(()))
        }
    }
}

// ---------------------------------------------------------------------
// Descent steps and connecting sequences.
// ---------------------------------------------------------------------

/// Walks the canonical gallery from `x` toward `y` and cuts it at the first
/// chamber whose numerical codistance from `c` stops rising one per step.
fn rising_prefix_gallery(
    tw: &TwinSpace,
    sys: &ChamberSystem,
    c: Chamber,
    x: Chamber,
    y: Chamber,
) -> Vec<Chamber> {
    let gallery = sys
        .find_gallery(x.0, y.0)
        .expect("buildings are gallery-connected");
    let mut out = Vec::new();
    for (i, &node) in gallery.nodes.iter().enumerate() {
        out.push(Chamber(node));
        if tw.colen(Sign::Minus, c, Chamber(node)) != i as u32 {
            break;
        }
    }
    out
}

fn check_descent_step(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "descent-step";
    let tw = &ctx.tw;
    let scope = ctx.sampled_scope(tag, DESCENT_INSTANCES);
    let mut rng = ctx.rng(tag);
    let bp = tw.building(Sign::Plus);
    let bm = tw.building(Sign::Minus);
    let sys = from_building(bp);
    let nm = bm.n_chambers() as u32;
    for _ in 0..DESCENT_INSTANCES {
        let c = Chamber(rng.random_range(0..nm));
        let ops = tw.opposites(Sign::Minus, c);
        if ops.len() < 2 {
            continue;
        }
        let x = ops[rng.random_range(0..ops.len())];
        let y = loop {
            let y = ops[rng.random_range(0..ops.len())];
            if y != x {
                break y;
            }
        };
        let gallery = rising_prefix_gallery(tw, &sys, c, x, y);
        if gallery.len() < 2 {
            continue;
        }
        let k = gallery.len() - 2;
        let d = *gallery.last().unwrap();
        let (xp, z) = match descent_step(tw, Sign::Plus, c, &gallery) {
            Ok(v) => v,
            Err(e) => return (scope, Err(format!("c={c}, gallery {gallery:?}: {e}"))),
        };
        if !tw.is_opposite(Sign::Minus, c, xp) {
            return (scope, Err(format!("c={c}: descent output {xp} is not opposite")));
        }
        if tw.codist(Sign::Minus, c, z) != bp.dist(x, z)
            || bp.dist(x, z) != bp.dist(xp, z)
        {
            return (
                scope,
                Err(format!("c={c}: descent witness {z} fails its distance equations")),
            );
        }
        if bp.gallery_len(xp, d) > k as u32 {
            return (
                scope,
                Err(format!(
                    "c={c}: descent output {xp} is not closer than {k} steps to {d}"
                )),
            );
        }
    }
    (scope, Ok(()))
}

fn check_connecting_sequence(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "connecting-sequence";
    let tw = &ctx.tw;
    let scope = ctx.sampled_scope(tag, DESCENT_INSTANCES);
    let mut rng = ctx.rng(tag);
    let bp = tw.building(Sign::Plus);
    let nm = tw.building(Sign::Minus).n_chambers() as u32;
    for _ in 0..DESCENT_INSTANCES {
        let c = Chamber(rng.random_range(0..nm));
        let ops = tw.opposites(Sign::Minus, c);
        if ops.len() < 2 {
            continue;
        }
        let x = ops[rng.random_range(0..ops.len())];
        let y = ops[rng.random_range(0..ops.len())];
        let (xs, zs) = match connecting_sequence(tw, Sign::Plus, c, x, y) {
            Ok(v) => v,
            Err(e) => return (scope, Err(format!("c={c}, x={x}, y={y}: {e}"))),
        };
        let mut bad = xs.first() != Some(&x) || xs.last() != Some(&y);
        bad |= xs.len() != zs.len() + 1;
        bad |= xs.iter().any(|&v| !tw.is_opposite(Sign::Minus, c, v));
        for (l, &z) in zs.iter().enumerate() {
            bad |= tw.codist(Sign::Minus, c, z) != bp.dist(xs[l], z);
            bad |= bp.dist(xs[l], z) != bp.dist(xs[l + 1], z);
        }
        bad |= zs.len() as u32 > bp.gallery_len(x, y);
        if bad {
            return (
                scope,
                Err(format!(
                    "c={c}, x={x}, y={y}: connecting sequence {xs:?} / {zs:?} violates a postcondition"
                )),
            );
        }
    }
    (scope, Ok(()))
}

// ---------------------------------------------------------------------
// Transport checks over the opposition system.
// ---------------------------------------------------------------------

fn identity_on_foundation(
    tw: &Arc<TwinSpace>,
    pair: (Chamber, Chamber),
) -> Result<PartialIsometry, String> {
    let dom = foundation_domain(tw, pair);
    let pairs: Vec<_> = dom.iter().map(|&k| (k, k)).collect();
    make_isometry(tw, tw, &pairs).map_err(|e| e.to_string())
}

fn check_transport_out_and_back(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "transport-out-and-back";
    let tw = &ctx.tw;
    let scope = ctx.sampled_scope(tag, OUT_AND_BACK_INSTANCES);
    let mut rng = ctx.rng(tag);
    let opp = OppSystem::new(tw);
    let sys = opp.system();
    let rank = tw.group().rank();
    let n = opp.pairs().len() as u32;
    if n == 0 {
        return (scope, Err("the twin has no opposite pairs".to_string()));
    }
    for _ in 0..OUT_AND_BACK_INSTANCES {
        let start = rng.random_range(0..n);
        let mut nodes = vec![start];
        let steps = rng.random_range(1..=3u32);
        for _ in 0..steps {
            let v = *nodes.last().unwrap();
            let s = Gen(rng.random_range(0..rank) as u16);
            let class = sys.class(s, v);
            let others: Vec<u32> = class.iter().copied().filter(|&w| w != v).collect();
            if others.is_empty() {
                continue;
            }
            nodes.push(others[rng.random_range(0..others.len())]);
        }
        let mut route = nodes.clone();
        route.extend(nodes.iter().rev().skip(1));
        let pairs: Vec<(Chamber, Chamber)> =
            route.iter().map(|&v| opp.pair_of(v)).collect();
        let base = pairs[0];
        let seed = match identity_on_foundation(tw, base) {
            Ok(s) => s,
            Err(e) => return (scope, Err(e)),
        };
        match gallery_transport(&seed, base, &pairs, false) {
            Ok((end, transported)) => {
                if end != base || !transported.same_mapping(&seed) {
                    return (
                        scope,
                        Err(format!(
                            "route {route:?} does not transport the identity back to itself"
                        )),
                    );
                }
            }
            Err(e) => return (scope, Err(format!("route {route:?}: {e}"))),
        }
    }
    (scope, Ok(()))
}

/// Enumerates closed routes from `start` using only the two given panel
/// types, of length 2..=`max_len`, that do not revisit the start chamber
/// internally and that are lexicographically no larger than their own
/// reversal. Any closed route through the start decomposes into primitive
/// loops, and transport along a reversed route is the inverse of transport
/// along the route (walking out and back along any path restores the
/// seed), so trivial holonomy on these representatives forces trivial
/// holonomy on every closed route of the same length bound. Enumeration
/// order is deterministic; `cap` truncates.
fn primitive_closed_routes(
    sys: &ChamberSystem,
    types: (Gen, Gen),
    start: u32,
    max_len: usize,
    cap: Option<u64>,
) -> (Vec<Vec<u32>>, bool) {
    struct Walk<'a> {
        sys: &'a ChamberSystem,
        types: (Gen, Gen),
        start: u32,
        max_len: usize,
        cap: Option<u64>,
        stack: Vec<u32>,
        routes: Vec<Vec<u32>>,
        complete: bool,
    }
    impl Walk<'_> {
        fn truncated(&mut self) -> bool {
            if self.cap.is_some_and(|c| self.routes.len() as u64 >= c) {
                self.complete = false;
                return true;
            }
            false
        }
        fn dfs(&mut self) {
            if self.truncated() {
                return;
            }
            let v = *self.stack.last().unwrap();
            for s in [self.types.0, self.types.1] {
                for i in 0..self.sys.class(s, v).len() {
                    let w = self.sys.class(s, v)[i];
                    if w == v {
                        continue;
                    }
                    if w == self.start {
                        if self.stack.len() >= 2 {
                            let mut route = self.stack.clone();
                            route.push(self.start);
                            let mut reversed = route.clone();
                            reversed.reverse();
                            if route <= reversed {
                                self.routes.push(route);
                                if self.truncated() {
                                    return;
                                }
                            }
                        }
                        continue;
                    }
                    if self.stack.len() < self.max_len {
                        self.stack.push(w);
                        self.dfs();
                        self.stack.pop();
                        if !self.complete {
                            return;
                        }
                    }
                }
            }
        }
    }
    let mut walk = Walk {
        sys,
        types,
        start,
        max_len,
        cap,
        stack: vec![start],
        routes: Vec::new(),
        complete: true,
    };
    walk.dfs();
    (walk.routes, walk.complete)
}

fn check_transport_closed_rank_two(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tag = "transport-closed-rank-two";
    let tw = &ctx.tw;
    let opp = OppSystem::new(tw);
    let sys = opp.system();
    let rank = tw.group().rank();
    if opp.pairs().is_empty() {
        return (Scope::Exhaustive, Err("the twin has no opposite pairs".to_string()));
    }
    let base = opp.pairs()[0];
    let start = opp.node_of(base).unwrap();
    let seed = match identity_on_foundation(tw, base) {
        Ok(s) => s,
        Err(e) => return (Scope::Exhaustive, Err(e)),
    };
    let cap = match ctx.level {
        Level::Exhaustive => None,
        Level::Sampled => Some(SAMPLED_CLOSED_ROUTES),
    };
    let mut checked: u64 = 0;
    let mut truncated = false;
    for i in 0..rank {
        for j in (i + 1)..rank {
            let remaining = cap.map(|c| c.saturating_sub(checked));
            if remaining == Some(0) {
                truncated = true;
                break;
            }
            let (routes, complete) = primitive_closed_routes(
                sys,
                (Gen(i as u16), Gen(j as u16)),
                start,
                6,
                remaining,
            );
            truncated |= !complete;
            for route in &routes {
                let pairs: Vec<(Chamber, Chamber)> =
                    route.iter().map(|&v| opp.pair_of(v)).collect();
                checked += 1;
                match gallery_transport(&seed, base, &pairs, false) {
                    Ok((end, transported)) => {
                        if end != base || !transported.same_mapping(&seed) {
                            let scope = if truncated {
                                ctx.sampled_scope(tag, checked)
                            } else {
                                Scope::Exhaustive
                            };
                            return (
                                scope,
                                Err(format!("closed route {route:?} has nontrivial holonomy")),
                            );
                        }
                    }
                    Err(e) => {
                        let scope = if truncated {
                            ctx.sampled_scope(tag, checked)
                        } else {
                            Scope::Exhaustive
                        };
                        return (scope, Err(format!("closed route {route:?}: {e}")));
                    }
                }
            }
        }
    }
    let scope = if truncated {
        ctx.sampled_scope(tag, checked)
    } else {
        Scope::Exhaustive
    };
    (scope, Ok(()))
}

fn check_transport_family_graphs(ctx: &Ctx) -> (Scope, Result<(), String>) {
    let tw = &ctx.tw;
    let opp = OppSystem::new(tw);
    if opp.pairs().is_empty() {
        return (Scope::Exhaustive, Err("the twin has no opposite pairs".to_string()));
    }
    let base = opp.pairs()[0];
    let seed = match identity_on_foundation(tw, base) {
        Ok(s) => s,
        Err(e) => return (Scope::Exhaustive, Err(e)),
    };
    let apt = match tw.twin_apartment(base.0, base.1) {
        Ok(a) => a,
        Err(e) => return (Scope::Exhaustive, Err(e.to_string())),
    };
    let graphs: [(&str, Result<Retraction, _>); 2] = [
        (
            "codistance",
            pi_retraction(tw, Sign::Plus, base.1, &apt.minus).map(Retraction::Codistance),
        ),
        (
            "distance",
            omega_retraction(tw, Sign::Plus, base.0, base.1).map(Retraction::Distance),
        ),
    ];
    for (name, retraction) in graphs {
        let retraction = match retraction {
            Ok(r) => r,
            Err(e) => return (Scope::Exhaustive, Err(format!("{name} graph: {e}"))),
        };
        let graph = match retraction_graph(tw, &retraction) {
            Ok(g) => g,
            Err(e) => return (Scope::Exhaustive, Err(format!("{name} graph: {e}"))),
        };
        let indices: Vec<(Chamber, Chamber)> = graph.pairs().collect();
        if !indices.contains(&base) {
            return (
                Scope::Exhaustive,
                Err(format!("{name} graph: the base pair {base:?} is not a graph pair")),
            );
        }
        let family = match transport_family(&seed, base, &indices, false) {
            Ok(f) => f,
            Err(e) => return (Scope::Exhaustive, Err(format!("{name} graph: {e}"))),
        };
        if let Err(e) = build_phi_plus(&family) {
            return (Scope::Exhaustive, Err(format!("{name} graph: {e}")));
        }
    }
    (Scope::Exhaustive, Ok(()))
}
