//! Brute-force oracles for the acceptance suite, written from first
//! principles and independent of the library's algorithms.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use lugeon_core::nfis::{MembershipFunction, MfKind, TskRule, TskRuleBase};
use lugeon_core::rst::DecisionTable;

pub fn random_table(
    rng: &mut ChaCha8Rng,
    n_objects: usize,
    n_attrs: usize,
    max_value: u8,
) -> DecisionTable {
    let cond: Vec<Vec<u8>> = (0..n_objects)
        .map(|_| (0..n_attrs).map(|_| rng.random_range(1..=max_value)).collect())
        .collect();
    let dec: Vec<u8> = (0..n_objects).map(|_| rng.random_range(1..=max_value)).collect();
    DecisionTable::new(
        (0..n_objects).map(|i| format!("o{i}")).collect(),
        (0..n_attrs).map(|i| format!("a{i}")).collect(),
        "d".into(),
        cond,
        dec,
    )
    .unwrap()
}

/// Same-class test by direct pairwise comparison.
pub fn same_class(table: &DecisionTable, attrs: &[usize], a: usize, b: usize) -> bool {
    attrs.iter().all(|&j| table.condition(a, j) == table.condition(b, j))
}

/// Set-comprehension lower approximation.
pub fn lower_oracle(table: &DecisionTable, attrs: &[usize], x: &[bool]) -> Vec<usize> {
    let n = table.n_objects();
    (0..n)
        .filter(|&obj| (0..n).all(|o| !same_class(table, attrs, obj, o) || x[o]))
        .collect()
}

/// Set-comprehension upper approximation.
pub fn upper_oracle(table: &DecisionTable, attrs: &[usize], x: &[bool]) -> Vec<usize> {
    let n = table.n_objects();
    (0..n)
        .filter(|&obj| (0..n).any(|o| same_class(table, attrs, obj, o) && x[o]))
        .collect()
}

/// Attribute indices where two objects differ (empty for equal-decision
/// pairs in the decision-relative variant).
pub fn matrix_entry_oracle(
    table: &DecisionTable,
    i: usize,
    j: usize,
    decision_relative: bool,
) -> Vec<usize> {
    if decision_relative && table.decision(i) == table.decision(j) {
        return Vec::new();
    }
    (0..table.n_attributes())
        .filter(|&a| table.condition(i, a) != table.condition(j, a))
        .collect()
}

/// Minimal attribute subsets preserving the discernibility the full set
/// provides, by exhaustive subset enumeration over object pairs.
pub fn reducts_oracle(table: &DecisionTable, decision_relative: bool) -> Vec<u32> {
    let m = table.n_attributes();
    let n = table.n_objects();
    let separates = |attrs: u32, i: usize, j: usize| -> bool {
        (0..m).any(|a| attrs & (1 << a) != 0 && table.condition(i, a) != table.condition(j, a))
    };
    let full: u32 = (1 << m) - 1;
    let mut super_reducts: Vec<u32> = Vec::new();
    'subset: for s in 0..=full {
        for i in 0..n {
            for j in 0..i {
                if decision_relative && table.decision(i) == table.decision(j) {
                    continue;
                }
                if separates(full, i, j) && !separates(s, i, j) {
                    continue 'subset;
                }
            }
        }
        super_reducts.push(s);
    }
    let mut minimal: Vec<u32> = super_reducts
        .iter()
        .copied()
        .filter(|&s| !super_reducts.iter().any(|&t| t != s && t & s == t))
        .collect();
    minimal.sort_by_key(|s| (s.count_ones(), *s));
    minimal
}

pub fn random_rulebase(rng: &mut ChaCha8Rng, n_inputs: usize, max_rules: usize) -> TskRuleBase {
    let m = rng.random_range(1..=max_rules);
    let rules = (0..m)
        .map(|_| {
            let premises = (0..n_inputs)
                .map(|_| {
                    let c = rng.random_range(-2.0..=2.0);
                    let sigma = rng.random_range(0.05..=2.0);
                    if rng.random_bool(0.5) {
                        MembershipFunction::gaussian(c, sigma)
                    } else {
                        MembershipFunction::bell(c, sigma, rng.random_range(0.5..=3.0))
                    }
                })
                .collect();
            let consequent = (0..=n_inputs).map(|_| rng.random_range(-5.0..=5.0)).collect();
            TskRule { premises, consequent }
        })
        .collect();
    TskRuleBase::new((0..n_inputs).map(|i| format!("x{}", i + 1)).collect(), rules)
}

/// Sum of squared errors with the rule base's own forward pass.
pub fn sse(rb: &TskRuleBase, x: &[Vec<f64>], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = rb.eval(xi).unwrap() - yi;
            e * e
        })
        .sum()
}

/// Premise-parameter coordinates: (rule, input, which), which 0 = c,
/// 1 = sigma, 2 = b (bell only).
pub fn premise_coordinates(rb: &TskRuleBase) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for (k, rule) in rb.rules.iter().enumerate() {
        for (j, mf) in rule.premises.iter().enumerate() {
            out.push((k, j, 0));
            out.push((k, j, 1));
            if mf.kind == MfKind::GeneralizedBell {
                out.push((k, j, 2));
            }
        }
    }
    out
}

pub fn premise_param(rb: &mut TskRuleBase, coord: (usize, usize, usize)) -> &mut f64 {
    let mf = &mut rb.rules[coord.0].premises[coord.1];
    match coord.2 {
        0 => &mut mf.c,
        1 => &mut mf.sigma,
        _ => &mut mf.b,
    }
}
