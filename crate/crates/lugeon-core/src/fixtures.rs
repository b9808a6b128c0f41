//! Bundled rule bases used as synthetic ground truth and in examples.

use crate::data::{FeatureSelection, SyntheticSpec};
use crate::nfis::{MembershipFunction, TskRule, TskRuleBase};

/// The bundled four-rule permeability model, shipped as JSON. Its premises
/// overlap broadly over the sampling box below, which makes the blended
/// surface smooth enough for desk-scale recovery experiments.
pub const REFERENCE_RULES_JSON: &str = include_str!("../fixtures/reference_rules.json");

pub fn reference_rulebase() -> TskRuleBase {
    TskRuleBase::from_json(REFERENCE_RULES_JSON).expect("bundled rule base parses")
}

/// Sampling box matched to the reference rule base, aligned with the default
/// feature selection (z, section_length, rqd, twr).
pub fn reference_input_ranges() -> Vec<(f64, f64)> {
    vec![(1452.0, 1492.0), (1.2, 2.4), (0.0, 15.0), (2.0, 4.0)]
}

/// Synthetic-spec builder over the reference model and its sampling box.
pub fn reference_synthetic_spec(n_records: usize, noise_sigma: f64, seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        generator: reference_rulebase(),
        selection: FeatureSelection::default(),
        n_records,
        noise_sigma,
        input_ranges: reference_input_ranges(),
        seed,
    }
}

/// A premise layout over the same consequents where the two active rules
/// trade off along the rqd axis: predicted lugeon decreases as rqd rises
/// anywhere on z in [1150, 1210] x rqd in [0, 100] at section_length 5 and
/// twr 3. Rules 2 and 3 are parked far below rqd = 0 so their firing
/// strengths vanish.
pub fn monotone_rqd_rulebase() -> TskRuleBase {
    let conseq = [
        vec![-38.4240, 0.0186, 14.2825, -0.0657, 11.6620],
        vec![-117.691, 0.0928, 7.1981, 2.9592, 2.4851],
        vec![42.4835, -0.0274, -8.0836, 8.00694, 11.4711],
        vec![138.4553, -0.2195, 98.0854, -0.0816, 20.0027],
    ];
    let rqd_premises = [
        MembershipFunction::gaussian(100.0, 40.0),
        MembershipFunction::gaussian(-80.0, 8.0),
        MembershipFunction::gaussian(-80.0, 8.0),
        MembershipFunction::gaussian(0.0, 25.0),
    ];
    let rules = conseq
        .into_iter()
        .zip(rqd_premises)
        .map(|(consequent, rqd_mf)| TskRule {
            premises: vec![
                MembershipFunction::gaussian(1180.0, 60.0),
                MembershipFunction::gaussian(5.0, 3.0),
                rqd_mf,
                MembershipFunction::gaussian(3.0, 2.0),
            ],
            consequent,
        })
        .collect();
    TskRuleBase::new(
        vec!["z".into(), "section_length".into(), "rqd".into(), "twr".into()],
        rules,
    )
}
