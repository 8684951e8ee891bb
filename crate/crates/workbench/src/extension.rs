//! Driving the gluing pipeline from files: infer the base pair from a
//! seed's domain, run the pipeline, and render the stage log as a report.

use std::collections::BTreeSet;
use std::sync::Arc;

use twinbuildings::building::Chamber;
use twinbuildings::isom::{main_extension, make_isometry, MainExtensionOutcome, PartialIsometry};
use twinbuildings::twin::{Sign, SignedChamber, TwinSpace};

use crate::suite::json_string;

/// Recovers the base pair from a seed's domain: the minus side must be a
/// single chamber, and the plus side must be exactly the rank-two
/// foundation of a unique plus chamber.
pub fn infer_bases(
    src: &TwinSpace,
    pairs: &[(SignedChamber, SignedChamber)],
) -> Result<(Chamber, Chamber), String> {
    let minus: BTreeSet<Chamber> = pairs
        .iter()
        .filter(|(a, _)| a.sign == Sign::Minus)
        .map(|(a, _)| a.ch)
        .collect();
    let plus: Vec<Chamber> = pairs
        .iter()
        .filter(|(a, _)| a.sign == Sign::Plus)
        .map(|(a, _)| a.ch)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if minus.len() != 1 {
        return Err(format!(
            "the seed domain must contain exactly one minus chamber, found {}",
            minus.len()
        ));
    }
    let c_minus = *minus.iter().next().unwrap();
    let bp = src.building(Sign::Plus);
    let candidates: Vec<Chamber> = bp
        .chambers()
        .filter(|&c| bp.foundation(c, 2) == plus)
        .collect();
    match candidates.as_slice() {
        [c] => Ok((*c, c_minus)),
        [] => Err("no plus chamber has the seed's plus domain as its foundation".to_string()),
        many => Err(format!(
            "the seed's plus domain is the foundation of {} chambers",
            many.len()
        )),
    }
}

/// Validates the seed pairs as a partial isometry, infers the base pair,
/// and runs the gluing pipeline. All failures come back as strings so the
/// caller can report them uniformly.
pub fn run_extension(
    src: &Arc<TwinSpace>,
    tgt: &Arc<TwinSpace>,
    seed_pairs: &[(SignedChamber, SignedChamber)],
) -> Result<(PartialIsometry, MainExtensionOutcome), String> {
    let seed = make_isometry(src, tgt, seed_pairs).map_err(|e| format!("seed: {e}"))?;
    let (c_plus, c_minus) = infer_bases(src, seed_pairs)?;
    if !src.is_opposite(Sign::Plus, c_plus, c_minus) {
        return Err(format!(
            "the inferred base chambers {c_plus} and {c_minus} are not opposite"
        ));
    }
    let outcome = main_extension(&seed, c_plus, c_minus).map_err(|e| e.to_string())?;
    Ok((seed, outcome))
}

/// Canonical JSON for an extension run: pair count, pass flag, and the
/// stage log; failures carry the error text and whatever the caller knows.
pub fn extension_report_json(outcome: &Result<(PartialIsometry, MainExtensionOutcome), String>) -> String {
    match outcome {
        Ok((_, out)) => {
            let mut s = String::from("{\n");
            s.push_str(&format!("\"pairs\": {},\n", out.result.len()));
            s.push_str("\"pass\": true,\n\"stages\": [");
            for (i, st) in out.stages.iter().enumerate() {
                if i > 0 {
                    s.push(',');
                }
                s.push_str(&format!(
                    "\n{{\"info\": {}, \"name\": {}}}",
                    json_string(&st.info),
                    json_string(st.name)
                ));
            }
            s.push_str("\n]\n}\n");
            s
        }
        Err(e) => format!(
            "{{\n\"error\": {},\n\"pass\": false\n}}\n",
            json_string(e)
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{generate_building, CatalogId};
    use twinbuildings::twin::spherical_double;

    fn cube_twin() -> Arc<TwinSpace> {
        let id: CatalogId = "prod(rank1(3),rank1(3),rank1(3))".parse().unwrap();
        Arc::new(spherical_double(Arc::new(generate_building(&id))).unwrap())
    }

    #[test]
    fn base_inference_recovers_the_seed_pair() {
        let tw = cube_twin();
        let c_plus = Chamber(0);
        let c_minus = tw.opposites(Sign::Plus, c_plus)[0];
        let mut pairs: Vec<(SignedChamber, SignedChamber)> = tw
            .building(Sign::Plus)
            .foundation(c_plus, 2)
            .into_iter()
            .map(|c| (SignedChamber::plus(c), SignedChamber::plus(c)))
            .collect();
        pairs.push((SignedChamber::minus(c_minus), SignedChamber::minus(c_minus)));
        assert_eq!(infer_bases(&tw, &pairs), Ok((c_plus, c_minus)));
        // Two minus chambers make the base ambiguous.
        let mut two = pairs.clone();
        two.push((SignedChamber::minus(Chamber(1)), SignedChamber::minus(Chamber(1))));
        assert!(infer_bases(&tw, &two).is_err());
        // A truncated plus domain matches no chamber's foundation.
        let truncated: Vec<_> = pairs[1..].to_vec();
        assert!(infer_bases(&tw, &truncated).is_err());
    }

    #[test]
    fn the_identity_seed_extends_and_reports_its_stages() {
        let tw = cube_twin();
        let c_plus = Chamber(0);
        let c_minus = tw.opposites(Sign::Plus, c_plus)[0];
        let mut pairs: Vec<(SignedChamber, SignedChamber)> = tw
            .building(Sign::Plus)
            .foundation(c_plus, 2)
            .into_iter()
            .map(|c| (SignedChamber::plus(c), SignedChamber::plus(c)))
            .collect();
        pairs.push((SignedChamber::minus(c_minus), SignedChamber::minus(c_minus)));
        let outcome = run_extension(&tw, &tw, &pairs);
        let (_, out) = outcome.as_ref().expect("the identity seed extends");
        assert_eq!(out.result.len(), 27 + 19);
        assert_eq!(out.stages.len(), 6);
        let json = extension_report_json(&outcome);
        assert!(json.contains("\"pass\": true"));
        assert!(json.contains("\"pairs\": 46"));
        assert!(json.contains("foundation-pair-extension"));
    }
}
