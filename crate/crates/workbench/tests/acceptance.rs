//! Acceptance battery: one test per release gate, each line of the test
//! report being one gate's pass/fail verdict. The gates exercise the
//! catalog end to end: axiom validation, residue opposition, retraction
//! laws, descent machinery, transport coherence, exhaustive seed
//! enumeration with pipeline extension, global uniqueness, and fault
//! injection through the file layer.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::Value;

use twinbuildings::building::Chamber;
use twinbuildings::isom::{enumerate_isometries, main_extension, make_isometry, PartialIsometry};
use twinbuildings::twin::{spherical_double, Sign, SignedChamber, TwinSpace};
use twinbuildings_workbench::catalog::{generate_building, pg32_geometry, CatalogId};
use twinbuildings_workbench::format::{decode_twin, encode_twin, DecodeError};
use twinbuildings_workbench::suite::{run_single_check, CheckRecord, Level, Scope};

// ---------------------------------------------------------------------
// Shared fixtures
// ---------------------------------------------------------------------

fn double_of(id: &str) -> Arc<TwinSpace> {
    let id: CatalogId = id.parse().unwrap();
    Arc::new(spherical_double(Arc::new(generate_building(&id))).unwrap())
}

fn rank1_double() -> Arc<TwinSpace> {
    static T: OnceLock<Arc<TwinSpace>> = OnceLock::new();
    Arc::clone(T.get_or_init(|| double_of("rank1(3)")))
}

fn fano_double() -> Arc<TwinSpace> {
    static T: OnceLock<Arc<TwinSpace>> = OnceLock::new();
    Arc::clone(T.get_or_init(|| double_of("fano")))
}

fn cube_double() -> Arc<TwinSpace> {
    static T: OnceLock<Arc<TwinSpace>> = OnceLock::new();
    Arc::clone(T.get_or_init(|| double_of("prod(rank1(3),rank1(3),rank1(3))")))
}

fn pg32_double() -> Arc<TwinSpace> {
    static T: OnceLock<Arc<TwinSpace>> = OnceLock::new();
    Arc::clone(T.get_or_init(|| double_of("pg32")))
}

/// Chamber 0 together with its least opposite, the battery's canonical
/// base pair.
fn base_pair(tw: &TwinSpace) -> (Chamber, Chamber) {
    let c_plus = Chamber(0);
    let c_minus = tw.opposites(Sign::Plus, c_plus)[0];
    (c_plus, c_minus)
}

/// The seed domain: the plus-side rank-two foundation of the plus base
/// plus the minus base itself.
fn seed_domain(tw: &TwinSpace, pair: (Chamber, Chamber)) -> Vec<SignedChamber> {
    let mut dom: Vec<SignedChamber> = tw
        .building(Sign::Plus)
        .foundation(pair.0, 2)
        .into_iter()
        .map(SignedChamber::plus)
        .collect();
    dom.push(SignedChamber::minus(pair.1));
    dom
}

/// Seed pairs induced by a chamber permutation applied on both halves.
fn seed_pairs_by_map(domain: &[SignedChamber], map: &[Chamber]) -> Vec<(SignedChamber, SignedChamber)> {
    domain
        .iter()
        .map(|&k| (k, SignedChamber::new(k.sign, map[k.ch.0 as usize])))
        .collect()
}

fn expect_pass(name: &str, record: &CheckRecord) {
    assert!(
        record.pass,
        "{name}/{}: {}",
        record.tag,
        record.witness.as_deref().unwrap_or("no witness")
    );
}

// ---------------------------------------------------------------------
// Gate 1: building and twin axioms, exhaustively, across the catalog.
// ---------------------------------------------------------------------

#[test]
fn gate1_axioms_hold_exhaustively_across_the_catalog() {
    let t0 = Instant::now();
    let doubles = [
        ("rank1(3)", rank1_double()),
        ("fano", fano_double()),
        ("cube", cube_double()),
        ("pg32", pg32_double()),
    ];
    for (name, tw) in &doubles {
        for tag in ["axioms-building-plus", "axioms-building-minus", "axioms-twin"] {
            let r = run_single_check(tw, tag, Level::Exhaustive, 0).unwrap();
            assert_eq!(r.scope, Scope::Exhaustive);
            expect_pass(name, &r);
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs <= 120.0, "axiom validation took {secs:.1} s, over the 120 s budget");
    println!(
        "PASS gate 1: both halves and the opposition data revalidate on all four catalog doubles ({secs:.1} s, budget 120 s)"
    );
}

// ---------------------------------------------------------------------
// Gate 2: residue opposition laws on the plane and space doubles.
// ---------------------------------------------------------------------

#[test]
fn gate2_residue_opposition_laws_hold_on_plane_and_space_doubles() {
    let t0 = Instant::now();
    for (name, tw) in [("fano", fano_double()), ("pg32", pg32_double())] {
        let r = run_single_check(&tw, "residue-opposition", Level::Exhaustive, 0).unwrap();
        assert_eq!(r.scope, Scope::Exhaustive);
        expect_pass(name, &r);
    }
    println!(
        "PASS gate 2: projection laws hold over every opposite residue pair of rank at most two on the plane and space doubles ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Gate 3: retraction laws, exhaustive on the cube, sampled on the space.
// ---------------------------------------------------------------------

#[test]
fn gate3_retraction_laws_exhaustive_on_cube_sampled_on_space() {
    let t0 = Instant::now();
    let cube = cube_double();
    for tag in ["retraction-codistance", "retraction-distance", "four-projection"] {
        let r = run_single_check(&cube, tag, Level::Exhaustive, 0).unwrap();
        assert_eq!(r.scope, Scope::Exhaustive, "{tag} must cover every base pair and chamber");
        expect_pass("cube", &r);
    }
    let pg32 = pg32_double();
    for tag in ["retraction-codistance", "retraction-distance", "four-projection"] {
        let r = run_single_check(&pg32, tag, Level::Sampled, 0).unwrap();
        match r.scope {
            Scope::Sampled { witnesses, .. } => assert_eq!(witnesses, 10_000),
            other => panic!("{tag} on pg32 should be sampled, got {other:?}"),
        }
        expect_pass("pg32", &r);
    }
    println!(
        "PASS gate 3: both retraction laws and the four-projection panel law hold on every cube instance and on 10000 seeded space instances ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Gate 4: descent steps and connecting sequences on seeded instances.
// ---------------------------------------------------------------------

#[test]
fn gate4_descent_and_connecting_postconditions_hold_on_seeded_instances() {
    let t0 = Instant::now();
    for (name, tw) in [("cube", cube_double()), ("pg32", pg32_double())] {
        for tag in ["descent-step", "connecting-sequence"] {
            let r = run_single_check(&tw, tag, Level::Exhaustive, 0).unwrap();
            match r.scope {
                Scope::Sampled { witnesses, .. } => assert_eq!(witnesses, 100),
                other => panic!("{tag} should report its 100 seeded instances, got {other:?}"),
            }
            expect_pass(name, &r);
        }
    }
    println!(
        "PASS gate 4: descent steps and connecting sequences meet their postconditions, including the step-count bound, on 100 seeded instances per check on both doubles ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Gate 5: transport coherence over the opposition system.
// ---------------------------------------------------------------------

#[test]
fn gate5_transport_is_path_independent_on_catalog_doubles() {
    let t0 = Instant::now();
    for (name, tw) in [("cube", cube_double()), ("pg32", pg32_double())] {
        let r = run_single_check(&tw, "transport-out-and-back", Level::Exhaustive, 0).unwrap();
        match r.scope {
            Scope::Sampled { witnesses, .. } => assert_eq!(witnesses, 50),
            other => panic!("out-and-back should report 50 seeded routes, got {other:?}"),
        }
        expect_pass(name, &r);
        let r = run_single_check(&tw, "transport-family-graphs", Level::Exhaustive, 0).unwrap();
        assert_eq!(r.scope, Scope::Exhaustive);
        expect_pass(name, &r);
    }
    let cube = cube_double();
    let r = run_single_check(&cube, "transport-closed-rank-two", Level::Exhaustive, 0).unwrap();
    assert_eq!(
        r.scope,
        Scope::Exhaustive,
        "the closed-route check must cover every representative up to length six"
    );
    expect_pass("cube", &r);
    println!(
        "PASS gate 5: out-and-back transports restore their seeds, every closed rank-two route of length at most six on the cube acts trivially, and both retraction graphs transport with zero inconsistent cross edges ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Gate 6: every cube seed isometry extends through the pipeline.
// ---------------------------------------------------------------------

#[test]
fn gate6_every_cube_seed_isometry_extends_through_the_pipeline() {
    let t0 = Instant::now();
    let tw = cube_double();
    let (c_plus, c_minus) = base_pair(&tw);
    let dom = seed_domain(&tw, (c_plus, c_minus));
    assert_eq!(dom.len(), 20);
    let (seeds, exhausted) = enumerate_isometries(&tw, &tw, &[], &dom, 500).unwrap();
    assert!(exhausted, "the seed enumeration must exhaust its search tree");
    assert_eq!(
        seeds.len(),
        216,
        "the cube seed census is the full product of per-factor permutation choices"
    );
    for (i, seed) in seeds.iter().enumerate() {
        let out = main_extension(seed, c_plus, c_minus)
            .unwrap_or_else(|e| panic!("seed {i} failed to extend: {e}"));
        assert_eq!(out.result.len(), 27 + 19);
        assert_eq!(out.stages.len(), 6);
        for (k, v) in seed.pairs() {
            assert_eq!(out.result.image(k), Some(v), "seed {i} disagrees with its extension");
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs <= 300.0, "cube extension sweep took {secs:.1} s, over the 300 s budget");
    println!(
        "PASS gate 6: all 216 cube seed isometries extend to validated 46-chamber isometries with full pairwise revalidation ({secs:.1} s, budget 300 s)"
    );
}

// ---------------------------------------------------------------------
// Gate 7: space seeds extend, including a duality-twisted one.
// ---------------------------------------------------------------------

struct SeedCase {
    name: &'static str,
    target: Arc<TwinSpace>,
    pairs: Vec<(SignedChamber, SignedChamber)>,
}

/// The six space seeds: identity, two collineation-induced, one
/// duality-twisted onto the swapped twin, and two found by backtracking
/// from fixed base images.
fn pg32_seed_cases() -> Vec<SeedCase> {
    let tw = pg32_double();
    let (c_plus, c_minus) = base_pair(&tw);
    let dom = seed_domain(&tw, (c_plus, c_minus));
    let geo = pg32_geometry();
    let identity: Vec<Chamber> = (0..315).map(Chamber).collect();
    // Basis swap e0 <-> e1 and a shear e0 -> e0 + e1.
    let swap = geo.collineation([2, 1, 4, 8]);
    let shear = geo.collineation([3, 2, 4, 8]);
    let dual = geo.duality();
    let swapped = Arc::new(tw.swapped());
    let mut cases = vec![
        SeedCase {
            name: "identity",
            target: Arc::clone(&tw),
            pairs: seed_pairs_by_map(&dom, &identity),
        },
        SeedCase {
            name: "collineation-basis-swap",
            target: Arc::clone(&tw),
            pairs: seed_pairs_by_map(&dom, &swap),
        },
        SeedCase {
            name: "collineation-shear",
            target: Arc::clone(&tw),
            pairs: seed_pairs_by_map(&dom, &shear),
        },
        SeedCase {
            name: "duality-twisted",
            target: swapped,
            pairs: seed_pairs_by_map(&dom, &dual),
        },
    ];
    // Backtracking-generated seeds: fix fresh base images and search for a
    // completion of the rest of the seed domain.
    let taken: Vec<Chamber> = vec![c_plus, swap[0], shear[0]];
    let fresh: Vec<Chamber> = (1..315)
        .map(Chamber)
        .filter(|c| !taken.contains(c))
        .take(2)
        .collect();
    for (k, &t) in fresh.iter().enumerate() {
        let u = tw.opposites(Sign::Plus, t)[0];
        let fixed = vec![
            (SignedChamber::plus(c_plus), SignedChamber::plus(t)),
            (SignedChamber::minus(c_minus), SignedChamber::minus(u)),
        ];
        let vars: Vec<SignedChamber> = dom
            .iter()
            .copied()
            .filter(|&x| x != SignedChamber::plus(c_plus) && x != SignedChamber::minus(c_minus))
            .collect();
        let (sols, _) = enumerate_isometries(&tw, &tw, &fixed, &vars, 1).unwrap();
        assert!(
            !sols.is_empty(),
            "no seed completion found for base image {t}"
        );
        cases.push(SeedCase {
            name: if k == 0 { "search-first" } else { "search-second" },
            target: Arc::clone(&tw),
            pairs: sols[0].pairs().collect(),
        });
    }
    cases
}

#[test]
fn gate7_space_seeds_extend_including_a_duality_twisted_one() {
    let tw = pg32_double();
    let (c_plus, c_minus) = base_pair(&tw);
    let cases = pg32_seed_cases();
    assert!(cases.len() >= 5);
    assert!(cases.iter().any(|c| c.name == "duality-twisted"));
    for case in &cases {
        let t0 = Instant::now();
        let seed = make_isometry(&tw, &case.target, &case.pairs)
            .unwrap_or_else(|e| panic!("{}: seed invalid: {e}", case.name));
        let out = main_extension(&seed, c_plus, c_minus)
            .unwrap_or_else(|e| panic!("{}: extension failed: {e}", case.name));
        assert_eq!(out.result.len(), 315 + 43);
        for (k, v) in seed.pairs() {
            assert_eq!(out.result.image(k), Some(v), "{}: extension disagrees with its seed", case.name);
        }
        let secs = t0.elapsed().as_secs_f64();
        assert!(
            secs <= 120.0,
            "{}: extension took {secs:.1} s, over the 120 s per-seed budget",
            case.name
        );
        println!(
            "      space seed {}: extended to 358 chambers with full pairwise revalidation ({secs:.1} s, budget 120 s)",
            case.name
        );
    }
    println!(
        "PASS gate 7: {} space seeds extend through the pipeline, including two collineation-induced seeds, a duality-twisted seed onto the swapped twin, and two search-generated seeds",
        cases.len()
    );
}

// ---------------------------------------------------------------------
// Gate 8: the extension of each seed is globally unique.
// ---------------------------------------------------------------------

#[test]
fn gate8_extension_search_exhausts_and_finds_exactly_one_completion_per_seed() {
    let t0 = Instant::now();
    // Cube: all 216 seeds.
    let tw = cube_double();
    let (c_plus, c_minus) = base_pair(&tw);
    let dom = seed_domain(&tw, (c_plus, c_minus));
    let (seeds, exhausted) = enumerate_isometries(&tw, &tw, &[], &dom, 500).unwrap();
    assert!(exhausted);
    let all: Vec<SignedChamber> = tw
        .building(Sign::Plus)
        .chambers()
        .map(SignedChamber::plus)
        .chain(tw.building(Sign::Minus).chambers().map(SignedChamber::minus))
        .collect();
    for (i, seed) in seeds.iter().enumerate() {
        let fixed: Vec<_> = seed.pairs().collect();
        let vars: Vec<SignedChamber> = all.iter().copied().filter(|&k| !seed.contains(k)).collect();
        let (full, complete) = enumerate_isometries(&tw, &tw, &fixed, &vars, 2).unwrap();
        assert!(complete, "seed {i}: global completion search must exhaust");
        assert_eq!(full.len(), 1, "seed {i}: global completion must be unique");
        let out = main_extension(seed, c_plus, c_minus).unwrap();
        for (k, v) in out.result.pairs() {
            assert_eq!(full[0].image(k), Some(v), "seed {i}: pipeline output differs from the unique completion");
        }
    }
    // Space: every gate-7 seed.
    let pg = pg32_double();
    let (p_plus, p_minus) = base_pair(&pg);
    for case in pg32_seed_cases() {
        let seed = make_isometry(&pg, &case.target, &case.pairs).unwrap();
        let all: Vec<SignedChamber> = pg
            .building(Sign::Plus)
            .chambers()
            .map(SignedChamber::plus)
            .chain(pg.building(Sign::Minus).chambers().map(SignedChamber::minus))
            .collect();
        let fixed: Vec<_> = seed.pairs().collect();
        let vars: Vec<SignedChamber> = all.into_iter().filter(|&k| !seed.contains(k)).collect();
        let (full, complete) = enumerate_isometries(&pg, &case.target, &fixed, &vars, 2).unwrap();
        assert!(complete, "{}: global completion search must exhaust", case.name);
        assert_eq!(full.len(), 1, "{}: global completion must be unique", case.name);
        let out = main_extension(&seed, p_plus, p_minus).unwrap();
        for (k, v) in out.result.pairs() {
            assert_eq!(
                full[0].image(k),
                Some(v),
                "{}: pipeline output differs from the unique completion",
                case.name
            );
        }
    }
    println!(
        "PASS gate 8: for all 216 cube seeds and all 6 space seeds the whole-twin completion search exhausts with exactly one solution, the pipeline output matches it, and no multiple-completion abort ever fired ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Gate 9: fault injection through the file layer.
// ---------------------------------------------------------------------

/// Deletes one chamber from one panel class of the named half, in place.
fn delete_panel_edge(doc: &mut Value, half: &str, rng: &mut ChaCha20Rng) {
    let panels = doc[half]["panels"].as_object_mut().unwrap();
    let keys: Vec<String> = panels.keys().cloned().collect();
    let key = &keys[rng.random_range(0..keys.len())];
    let classes = panels[key].as_array_mut().unwrap();
    let ci = rng.random_range(0..classes.len());
    let class = classes[ci].as_array_mut().unwrap();
    let ei = rng.random_range(0..class.len());
    class.remove(ei);
}

/// Multiplies one opposition-table word by an extra generator, in place.
fn corrupt_costar_entry(doc: &mut Value, rng: &mut ChaCha20Rng) {
    let table = doc["costar"]["table"].as_array_mut().unwrap();
    let ri = rng.random_range(0..table.len());
    let row = table[ri].as_array_mut().unwrap();
    let wi = rng.random_range(0..row.len());
    let word = row[wi].as_array_mut().unwrap();
    word.push(Value::from(0));
}

#[test]
fn gate9_corrupted_files_fail_validation_naming_the_broken_law() {
    let t0 = Instant::now();
    let doubles = [
        ("rank1(3)", rank1_double()),
        ("fano", fano_double()),
        ("cube", cube_double()),
        ("pg32", pg32_double()),
    ];
    for (oi, (name, tw)) in doubles.iter().enumerate() {
        let text = encode_twin(tw);
        let mut rng = ChaCha20Rng::seed_from_u64(900 + oi as u64);
        for case in 0..3u32 {
            let mut doc: Value = serde_json::from_str(&text).unwrap();
            // A deleted panel edge may surface as a malformed-panel
            // complaint or as a building/twin axiom failure, depending on
            // whether the shrunken class still partitions the chambers.
            let expect_fragment: &[&str] = match case {
                0 => {
                    delete_panel_edge(&mut doc, "plus", &mut rng);
                    &["panel", "Bu", "Tw"]
                }
                1 => {
                    corrupt_costar_entry(&mut doc, &mut rng);
                    &["Tw", "opposition", "costar"]
                }
                _ => {
                    delete_panel_edge(&mut doc, "minus", &mut rng);
                    &["panel", "Bu", "Tw"]
                }
            };
            let corrupted = serde_json::to_string(&doc).unwrap();
            match decode_twin(&corrupted) {
                Err(DecodeError::Content(c)) => {
                    let msg = c.0;
                    assert!(
                        expect_fragment.iter().any(|f| msg.contains(f)),
                        "{name} case {case}: report \"{msg}\" does not name the broken law"
                    );
                    assert!(
                        msg.chars().any(|ch| ch.is_ascii_digit()),
                        "{name} case {case}: report \"{msg}\" carries no witness"
                    );
                }
                Err(DecodeError::Format(f)) => {
                    panic!("{name} case {case}: corruption misread as a format problem: {f}")
                }
                Ok(_) => panic!("{name} case {case}: corrupted file validated"),
            }
        }
    }
    println!(
        "PASS gate 9: all 12 seeded corruptions (a deleted panel edge or a corrupted opposition entry, 3 per catalog double) fail validation with a report naming the broken law and a witness ({:.1} s)",
        t0.elapsed().as_secs_f64()
    );
}

// ---------------------------------------------------------------------
// Sanity on the canonical identity of extended outputs.
// ---------------------------------------------------------------------

/// The identity seed's extension is the identity on its whole domain -
/// a direct corollary worth pinning since every gate above builds on it.
#[test]
fn identity_seeds_extend_to_identity_restrictions() {
    for tw in [cube_double(), pg32_double()] {
        let (c_plus, c_minus) = base_pair(&tw);
        let dom = seed_domain(&tw, (c_plus, c_minus));
        let pairs: Vec<_> = dom.iter().map(|&k| (k, k)).collect();
        let seed: PartialIsometry = make_isometry(&tw, &tw, &pairs).unwrap();
        let out = main_extension(&seed, c_plus, c_minus).unwrap();
        for (k, v) in out.result.pairs() {
            assert_eq!(k, v, "the identity seed must extend to the identity");
        }
    }
}
