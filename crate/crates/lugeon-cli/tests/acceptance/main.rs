//! Acceptance suite. Each criterion prints one `A# PASS/FAIL` line with the
//! measured quantities; run with `--nocapture` to see them all.

mod oracles;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lugeon_core::data::{generate_synthetic, split_train_test, Dataset};
use lugeon_core::fixtures;
use lugeon_core::nfis::{gradient_step_premises, lse_consequents};
use lugeon_core::pipeline::{run_close_open, PipelineConfig};
use lugeon_core::rst::{
    discernibility_function, discernibility_matrix, extract_decision_rules, lower_approx, reducts,
    upper_approx, DecisionTable, NON_DETERMINISTIC,
};
use lugeon_core::som::{extract_crisp_granules, init_som, quantization_error, train_som, TrainSchedule};

fn report(id: &str, ok: bool, detail: &str) {
    println!("{id} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn a1_dataset() -> Dataset {
    generate_synthetic(&fixtures::reference_synthetic_spec(789, 0.5, 123)).unwrap()
}

#[test]
fn a1_tsk_recovery_on_synthetic_data() {
    let started = Instant::now();
    let data = a1_dataset();
    let cfg = PipelineConfig::default(); // n = 1, k = 3, max 4 rules, threshold 23
    let (best, _) = run_close_open(&data, &cfg).expect("pipeline finds a feasible model");

    // independent held-out RMSE on the same split the pipeline used
    let (_, test) = split_train_test(&data, &cfg.split).unwrap();
    let samples = test.raw_samples();
    let mut sum_sq = 0.0;
    for (x, y) in samples.x.iter().zip(&samples.y) {
        let e = best.rulebase.eval(x).unwrap() - y;
        sum_sq += e * e;
    }
    let rmse = (sum_sq / samples.len() as f64).sqrt();
    let elapsed = started.elapsed().as_secs_f64();

    let ok = best.n_rules <= 4 && rmse <= 3.0 * 0.5 && elapsed <= 60.0;
    report(
        "A1",
        ok,
        &format!(
            "{} rules (<= 4), held-out RMSE {rmse:.4} (<= 1.5), {elapsed:.1}s (<= 60s)",
            best.n_rules
        ),
    );
}

#[test]
fn a2_tsk_output_is_convex_combination() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let mut violations = 0usize;
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let n_inputs = rng.random_range(1..=4);
        let rb = oracles::random_rulebase(&mut rng, n_inputs, 5);
        let x: Vec<f64> = (0..n_inputs).map(|_| rng.random_range(-3.0..=3.0)).collect();
        let out = rb.eval_detailed(&x).unwrap();
        let consequents: Vec<f64> =
            rb.rules.iter().map(|r| r.consequent_eval(&x).unwrap()).collect();
        let lo = consequents.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = consequents.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let excess = (lo - out.value).max(out.value - hi);
        worst = worst.max(excess);
        if excess > 1e-9 {
            violations += 1;
        }
    }
    report(
        "A2",
        violations == 0,
        &format!("0 of 10000 trials outside [min f, max f] (worst excess {worst:.2e}, tol 1e-9)"),
    );
}

#[test]
fn a3_analytic_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let h = 1e-5;
    let probe_lr = 1e-6;
    let mut max_rel = 0.0f64;
    for _ in 0..100 {
        let n_inputs = rng.random_range(1..=3);
        let rb = oracles::random_rulebase(&mut rng, n_inputs, 3);
        let n_records = 30;
        let x: Vec<Vec<f64>> = (0..n_records)
            .map(|_| (0..n_inputs).map(|_| rng.random_range(-2.0..=2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n_records).map(|_| rng.random_range(-10.0..=10.0)).collect();
        let data = lugeon_core::data::Samples {
            input_names: rb.input_names.clone(),
            target_name: "y".into(),
            x: x.clone(),
            y: y.clone(),
            weight: vec![1.0; n_records],
        };
        // the update is exactly theta - lr * grad, so one tiny step recovers
        // the analytic gradient of the SSE
        let stepped = gradient_step_premises(&rb, &data, probe_lr).unwrap();
        for coord in oracles::premise_coordinates(&rb) {
            let mut before = rb.clone();
            let mut after = stepped.clone();
            let theta0 = *oracles::premise_param(&mut before, coord);
            let theta1 = *oracles::premise_param(&mut after, coord);
            let analytic = (theta0 - theta1) / probe_lr;
            let fd = {
                let mut plus = rb.clone();
                *oracles::premise_param(&mut plus, coord) += h;
                let mut minus = rb.clone();
                *oracles::premise_param(&mut minus, coord) -= h;
                (oracles::sse(&plus, &x, &y) - oracles::sse(&minus, &x, &y)) / (2.0 * h)
            };
            // relative to the gradient scale, floored at 1 to keep
            // near-zero gradients from dividing by noise
            let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1.0);
            max_rel = max_rel.max(rel);
        }
    }
    report(
        "A3",
        max_rel <= 1e-4,
        &format!("max relative gradient error {max_rel:.3e} over 100 configs (tol 1e-4)"),
    );
}

#[test]
fn a4_lse_is_first_order_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4);
    let mut worst_drop = 0.0f64;
    for _ in 0..100 {
        let n_inputs = rng.random_range(1..=3);
        let rb = oracles::random_rulebase(&mut rng, n_inputs, 3);
        let n_records = 50;
        let x: Vec<Vec<f64>> = (0..n_records)
            .map(|_| (0..n_inputs).map(|_| rng.random_range(-2.0..=2.0)).collect())
            .collect();
        let y: Vec<f64> = x
            .iter()
            .map(|xi| xi.iter().sum::<f64>() + rng.random_range(-1.0..=1.0))
            .collect();
        let data = lugeon_core::data::Samples {
            input_names: rb.input_names.clone(),
            target_name: "y".into(),
            x: x.clone(),
            y: y.clone(),
            weight: vec![1.0; n_records],
        };
        let fitted = lse_consequents(&rb, &data).unwrap();
        let base = oracles::sse(&fitted, &x, &y);
        for _ in 0..20 {
            // random perturbation of all consequent weights, norm 1e-3
            let mut delta: Vec<Vec<f64>> = fitted
                .rules
                .iter()
                .map(|r| r.consequent.iter().map(|_| rng.random_range(-1.0..=1.0)).collect())
                .collect();
            let norm: f64 = delta
                .iter()
                .flatten()
                .map(|d| d * d)
                .sum::<f64>()
                .sqrt();
            for row in &mut delta {
                for d in row {
                    *d *= 1e-3 / norm;
                }
            }
            let mut perturbed = fitted.clone();
            for (rule, drow) in perturbed.rules.iter_mut().zip(&delta) {
                for (p, d) in rule.consequent.iter_mut().zip(drow) {
                    *p += d;
                }
            }
            let drop = base - oracles::sse(&perturbed, &x, &y);
            worst_drop = worst_drop.max(drop);
        }
    }
    report(
        "A4",
        worst_drop <= 1e-9,
        &format!("largest SSE reduction under 1e-3 perturbations: {worst_drop:.3e} (tol 1e-9)"),
    );
}

#[test]
fn a5_rst_matches_brute_force_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
    let mut checked_tables = 0usize;
    for _ in 0..1000 {
        let n_objects = rng.random_range(2..=8);
        let n_attrs = rng.random_range(1..=4);
        let table = oracles::random_table(&mut rng, n_objects, n_attrs, 3);
        let names: Vec<String> = table.attributes().to_vec();

        // every nonempty attribute subset
        for b_mask in 1u32..(1 << n_attrs) {
            let attr_idx: Vec<usize> = (0..n_attrs).filter(|&a| b_mask & (1 << a) != 0).collect();
            let b_names: Vec<String> = attr_idx.iter().map(|&a| names[a].clone()).collect();

            // object subsets: exhaustive when small, sampled otherwise
            let subsets: Vec<u32> = if n_objects <= 6 {
                (0..(1u32 << n_objects)).collect()
            } else {
                let mut s: Vec<u32> = vec![0, (1 << n_objects) - 1];
                s.extend((0..16).map(|_| rng.random_range(0..(1u32 << n_objects))));
                s
            };
            for x_mask in subsets {
                let inside: Vec<bool> = (0..n_objects).map(|o| x_mask & (1 << o) != 0).collect();
                let x: Vec<usize> = (0..n_objects).filter(|&o| inside[o]).collect();
                let lower = lower_approx(&table, &b_names, &x).unwrap();
                let upper = upper_approx(&table, &b_names, &x).unwrap();
                assert_eq!(lower, oracles::lower_oracle(&table, &attr_idx, &inside));
                assert_eq!(upper, oracles::upper_oracle(&table, &attr_idx, &inside));
                // duality: lower(X) = U \ upper(U \ X)
                let comp: Vec<usize> = (0..n_objects).filter(|&o| !inside[o]).collect();
                let upper_comp = upper_approx(&table, &b_names, &comp).unwrap();
                let dual: Vec<usize> =
                    (0..n_objects).filter(|o| !upper_comp.contains(o)).collect();
                assert_eq!(lower, dual);
                // monotonicity against the full attribute set
                let lower_full = lower_approx(&table, &names, &x).unwrap();
                let upper_full = upper_approx(&table, &names, &x).unwrap();
                assert!(lower.iter().all(|o| lower_full.contains(o)));
                assert!(upper_full.iter().all(|o| upper.contains(o)));
            }
        }

        for relative in [false, true] {
            let matrix = discernibility_matrix(&table, relative);
            for i in 0..n_objects {
                for j in 0..n_objects {
                    let expect = if i == j {
                        Vec::new()
                    } else {
                        oracles::matrix_entry_oracle(&table, i, j, relative)
                    };
                    let got: Vec<usize> = matrix.entry(i, j).indices().collect();
                    assert_eq!(got, expect, "entry ({i},{j}), relative {relative}");
                }
            }
            let formula = discernibility_function(&matrix);
            let got: Vec<u32> = {
                let mut v: Vec<u32> =
                    reducts(&formula, n_attrs).unwrap().iter().map(|s| s.0).collect();
                v.sort_by_key(|s| (s.count_ones(), *s));
                v
            };
            assert_eq!(got, oracles::reducts_oracle(&table, relative));
        }
        checked_tables += 1;
    }
    report(
        "A5",
        checked_tables == 1000,
        &format!("{checked_tables} random tables matched all brute-force oracles exactly"),
    );
}

#[test]
fn a6_reference_consequents_at_origin() {
    let rb = fixtures::reference_rulebase();
    let origin = [0.0; 4];
    let got: Vec<f64> = rb
        .rules
        .iter()
        .map(|r| r.consequent_eval(&origin).unwrap())
        .collect();
    let expect = [-38.4240, -117.691, 42.4835, 138.4553];
    let ok = got.len() == 4 && got.iter().zip(&expect).all(|(a, b)| a == b);
    report("A6", ok, &format!("consequents at origin = {got:?} (exact)"));
}

#[test]
fn a7_som_scale_check() {
    let started = Instant::now();
    let data = a1_dataset().normalize().unwrap();
    let samples = data.samples();
    let grid = init_som(10, 15, 4, &samples, 7).unwrap();
    let untrained_qe = quantization_error(&grid, &samples).unwrap();
    let schedule = TrainSchedule::defaults_for(10, 15, 7); // 500 epochs
    let trained = train_som(&grid, &samples, &schedule).unwrap();
    let trained_qe = quantization_error(&trained, &samples).unwrap();
    let granules = extract_crisp_granules(&trained, &samples).unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    let ok = trained_qe < untrained_qe && granules.len() <= 150 && elapsed <= 30.0;
    report(
        "A7",
        ok,
        &format!(
            "QE {untrained_qe:.4} -> {trained_qe:.4} (strictly lower), {} granules (<= 150), {elapsed:.1}s (<= 30s)",
            granules.len()
        ),
    );
}

#[test]
fn a8_cmd_run_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/run_reference.toml");
    let mut outputs = Vec::new();
    for name in ["first", "second"] {
        let out_dir = dir.path().join(name);
        let out = Command::new(env!("CARGO_BIN_EXE_lugeon"))
            .args(["run", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .expect("binary runs");
        assert_eq!(
            out.status.code(),
            Some(0),
            "run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        outputs.push(out_dir);
    }
    let mut identical = true;
    let mut detail = Vec::new();
    for file in ["rules.txt", "box.csv", "grid.csv"] {
        let a = fs::read(outputs[0].join(file)).unwrap();
        let b = fs::read(outputs[1].join(file)).unwrap();
        identical &= a == b;
        detail.push(format!("{file} {} bytes", a.len()));
    }
    report(
        "A8",
        identical,
        &format!("two runs byte-identical ({})", detail.join(", ")),
    );
}

#[test]
fn a9_rst_rule_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA9);
    let mut consistent_objects = 0usize;
    let mut tables = 0usize;
    for _ in 0..200 {
        let n_objects = rng.random_range(3..=8);
        let n_attrs = rng.random_range(1..=4);
        // consistent table: the decision is a function of the conditions
        let cond: Vec<Vec<u8>> = (0..n_objects)
            .map(|_| (0..n_attrs).map(|_| rng.random_range(1..=3)).collect())
            .collect();
        let dec: Vec<u8> = cond
            .iter()
            .map(|row| {
                let h: u32 = row.iter().enumerate().map(|(i, &v)| (i as u32 + 1) * v as u32).sum();
                (h % 5) as u8 + 1
            })
            .collect();
        let table = DecisionTable::new(
            (0..n_objects).map(|i| format!("o{i}")).collect(),
            (0..n_attrs).map(|i| format!("a{i}")).collect(),
            "d".into(),
            cond.clone(),
            dec.clone(),
        )
        .unwrap();
        let names: Vec<String> = table.attributes().to_vec();
        let rules = extract_decision_rules(&table, &names).unwrap();
        assert!(rules.iter().all(|r| r.decision != NON_DETERMINISTIC));
        for obj in 0..n_objects {
            let values: std::collections::BTreeMap<String, u8> = names
                .iter()
                .enumerate()
                .map(|(a, name)| (name.clone(), table.condition(obj, a)))
                .collect();
            assert_eq!(
                lugeon_core::rst::classify(&rules, &values),
                table.decision(obj),
                "object {obj} must replay exactly"
            );
            consistent_objects += 1;
        }

        // inject inconsistent duplicates and check exactly those classes flip
        let n_inject = rng.random_range(1..=2.min(n_objects));
        let mut cond2 = cond.clone();
        let mut dec2 = dec.clone();
        let mut poisoned: Vec<Vec<u8>> = Vec::new();
        for _ in 0..n_inject {
            let victim = rng.random_range(0..n_objects);
            cond2.push(cond[victim].clone());
            dec2.push(if dec[victim] == 5 { 1 } else { dec[victim] + 1 });
            poisoned.push(cond[victim].clone());
        }
        let table2 = DecisionTable::new(
            (0..cond2.len()).map(|i| format!("o{i}")).collect(),
            (0..n_attrs).map(|i| format!("a{i}")).collect(),
            "d".into(),
            cond2.clone(),
            dec2,
        )
        .unwrap();
        let rules2 = extract_decision_rules(&table2, &names).unwrap();
        for rule in &rules2 {
            let rule_cond: Vec<u8> = rule.conditions.iter().map(|(_, v)| *v).collect();
            let is_poisoned = poisoned.contains(&rule_cond);
            assert_eq!(
                rule.decision == NON_DETERMINISTIC,
                is_poisoned,
                "conditions {rule_cond:?}: only injected classes may be non-deterministic"
            );
        }
        tables += 1;
    }
    report(
        "A9",
        tables == 200,
        &format!(
            "{consistent_objects} objects replayed exactly over {tables} tables; injected inconsistencies flagged 6"
        ),
    );
}
