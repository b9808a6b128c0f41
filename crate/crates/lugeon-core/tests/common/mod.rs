//! Independent brute-force oracles shared by the property and acceptance
//! suites. Everything here recomputes results from first principles and must
//! stay decoupled from the library's own algorithms.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use lugeon_core::nfis::{MembershipFunction, MfKind, TskRule, TskRuleBase};
use lugeon_core::rst::DecisionTable;

/// Random decision table with n_objects x n_attrs condition values and
/// decisions, all drawn from 1..=max_value.
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

/// Pairwise-comparison partition: same class iff equal on every attribute
/// index in `attrs`. Classes ordered by smallest member.
pub fn partition_oracle(table: &DecisionTable, attrs: &[usize]) -> Vec<Vec<usize>> {
    let n = table.n_objects();
    let same = |a: usize, b: usize| attrs.iter().all(|&j| table.condition(a, j) == table.condition(b, j));
    let mut assigned = vec![false; n];
    let mut classes = Vec::new();
    for i in 0..n {
        if assigned[i] {
            continue;
        }
        let mut class = vec![i];
        assigned[i] = true;
        for (j, flag) in assigned.iter_mut().enumerate().skip(i + 1) {
            if !*flag && same(i, j) {
                class.push(j);
                *flag = true;
            }
        }
        classes.push(class);
    }
    classes
}

/// Set-comprehension lower approximation over the oracle partition.
pub fn lower_oracle(table: &DecisionTable, attrs: &[usize], x: &[usize]) -> Vec<usize> {
    let classes = partition_oracle(table, attrs);
    let mut out = Vec::new();
    for obj in 0..table.n_objects() {
        let class = classes.iter().find(|c| c.contains(&obj)).unwrap();
        if class.iter().all(|o| x.contains(o)) {
            out.push(obj);
        }
    }
    out
}

/// Set-comprehension upper approximation over the oracle partition.
pub fn upper_oracle(table: &DecisionTable, attrs: &[usize], x: &[usize]) -> Vec<usize> {
    let classes = partition_oracle(table, attrs);
    let mut out = Vec::new();
    for obj in 0..table.n_objects() {
        let class = classes.iter().find(|c| c.contains(&obj)).unwrap();
        if class.iter().any(|o| x.contains(o)) {
            out.push(obj);
        }
    }
    out
}

/// Element-wise discernibility entry: attribute indices where the two
/// objects differ (empty for equal-decision pairs in the relative variant).
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

/// Brute-force reducts by a route independent of the discernibility
/// function: a subset is a super-reduct iff it separates every object pair
/// that the full attribute set separates (restricted to different-decision
/// pairs in the relative variant); reducts are the minimal ones.
pub fn reducts_oracle(table: &DecisionTable, decision_relative: bool) -> Vec<Vec<usize>> {
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
        .filter(|&s| {
            !super_reducts
                .iter()
                .any(|&t| t != s && t & s == t)
        })
        .collect();
    minimal.sort_by_key(|s| (s.count_ones(), *s));
    minimal
        .into_iter()
        .map(|s| (0..m).filter(|&a| s & (1 << a) != 0).collect())
        .collect()
}

/// Random rule base: 1..=max_rules rules over `n_inputs` inputs, mixing
/// gaussian and bell membership functions with bounded parameters.
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

/// Central finite difference of a scalar function.
pub fn central_diff<F: FnMut(f64) -> f64>(mut f: F, at: f64, h: f64) -> f64 {
    (f(at + h) - f(at - h)) / (2.0 * h)
}

/// Sum of squared errors of a rule base over a dataset.
pub fn sse(rb: &TskRuleBase, x: &[Vec<f64>], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(xi, yi)| {
            let e = rb.eval(xi).unwrap() - yi;
            e * e
        })
        .sum()
}

/// All premise parameters of a rule base as (rule, input, which) coordinates;
/// `which` is 0 = c, 1 = sigma, 2 = b. Bell premises expose all three,
/// gaussian ones only c and sigma.
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

/// Reads or writes one premise parameter by coordinate.
pub fn premise_param(rb: &mut TskRuleBase, coord: (usize, usize, usize)) -> &mut f64 {
    let mf = &mut rb.rules[coord.0].premises[coord.1];
    match coord.2 {
        0 => &mut mf.c,
        1 => &mut mf.sigma,
        _ => &mut mf.b,
    }
}
