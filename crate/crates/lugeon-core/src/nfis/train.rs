//! Rule-base construction and hybrid training: subtractive clustering for
//! the initial premises, least squares for the linear consequents, batch
//! gradient descent for the premise parameters.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::data::Samples;
use crate::error::{Error, Result};
use crate::nfis::{MembershipFunction, MfKind, TskRule, TskRuleBase, FIRING_UNDERFLOW};

/// Subtractive-clustering constants (accept/reject ratios and the squash
/// factor applied to the potential-reduction radius).
const ACCEPT_RATIO: f64 = 0.5;
const REJECT_RATIO: f64 = 0.15;
const SQUASH: f64 = 1.5;

/// Hybrid-training settings. `influence_radius` is consumed when the rule
/// base is initialized from clusters; it is carried here so one config
/// describes a whole fit.
#[derive(Debug, Clone)]
pub struct HybridTrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub influence_radius: f64,
    pub checking_data: Option<Samples>,
}

impl Default for HybridTrainConfig {
    fn default() -> Self {
        HybridTrainConfig {
            epochs: 30,
            lr: 2e-5,
            influence_radius: 1.0,
            checking_data: None,
        }
    }
}

impl HybridTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.lr.is_finite() || self.lr <= 0.0 {
            return Err(Error::InvalidConfig("lr must be > 0".into()));
        }
        if !(self.influence_radius > 0.0 && self.influence_radius <= 1.0) {
            return Err(Error::InvalidConfig(
                "influence_radius must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Chiu-style subtractive clustering on data scaled to [0, 1] per feature.
/// Returns at least one center; ties resolve to the lowest record index.
pub fn subtractive_cluster(data: &Samples, radius: f64) -> Result<Vec<Vec<f64>>> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(radius > 0.0 && radius <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "influence radius must lie in (0, 1], got {radius}"
        )));
    }
    let n = data.len();
    let alpha = 4.0 / (radius * radius);
    let beta = 4.0 / (SQUASH * radius * SQUASH * radius);

    let dist_sq = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
    };

    let mut potential: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (-alpha * dist_sq(&data.x[i], &data.x[j])).exp())
                .sum()
        })
        .collect();

    let argmax = |p: &[f64]| -> (usize, f64) {
        let mut best = 0;
        for i in 1..p.len() {
            if p[i] > p[best] {
                best = i;
            }
        }
        (best, p[best])
    };

    let (first, first_potential) = argmax(&potential);
    let mut centers: Vec<usize> = vec![first];

    'outer: loop {
        // squash potentials around the most recent center
        let last = *centers.last().unwrap();
        let p_last = potential[last];
        let anchor = data.x[last].clone();
        for (p, x) in potential.iter_mut().zip(&data.x) {
            *p -= p_last * (-beta * dist_sq(x, &anchor)).exp();
        }
        loop {
            let (cand, p_star) = argmax(&potential);
            if p_star > ACCEPT_RATIO * first_potential {
                centers.push(cand);
                break;
            } else if p_star < REJECT_RATIO * first_potential {
                break 'outer;
            } else {
                // gray zone: accept when far enough from accepted centers
                let d_min = centers
                    .iter()
                    .map(|&c| dist_sq(&data.x[cand], &data.x[c]).sqrt())
                    .fold(f64::INFINITY, f64::min);
                if d_min / radius + p_star / first_potential >= 1.0 {
                    centers.push(cand);
                    break;
                }
                potential[cand] = 0.0;
                if potential.iter().all(|&p| p <= 0.0) {
                    break 'outer;
                }
            }
        }
        if centers.len() >= n {
            break;
        }
    }
    Ok(centers.into_iter().map(|i| data.x[i].clone()).collect())
}

/// Builds one rule per cluster center: gaussian premises centered on the
/// cluster with sigma = radius * feature_range / sqrt(8), zero consequents
/// (set afterwards by `lse_consequents`). Centers are in the units of `data`.
pub fn init_rulebase_from_clusters(
    centers: &[Vec<f64>],
    data: &Samples,
    radius: f64,
) -> Result<TskRuleBase> {
    if centers.is_empty() {
        return Err(Error::EmptyInput);
    }
    let dim = data.dim();
    let bounds = data.bounds();
    let sigmas: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| (radius * (hi - lo) / 8f64.sqrt()).max(1e-6))
        .collect();
    let mut rules = Vec::with_capacity(centers.len());
    for center in centers {
        if center.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: center.len() });
        }
        let premises = center
            .iter()
            .zip(&sigmas)
            .map(|(&c, &s)| MembershipFunction::gaussian(c, s))
            .collect();
        rules.push(TskRule { premises, consequent: vec![0.0; dim + 1] });
    }
    Ok(TskRuleBase::new(data.input_names.clone(), rules))
}

/// Regression design for the consequent fit: one row per record holding, for
/// each rule k, the normalized firing strength times [1, x_1, .., x_n].
/// Records whose total firing strength underflows use a one-hot row on the
/// strongest rule, matching the forward-pass fallback.
pub fn lse_design_matrix(rb: &TskRuleBase, data: &Samples) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let n = rb.n_inputs();
    let m = rb.n_rules();
    let cols = m * (n + 1);
    let mut rows = Vec::with_capacity(data.len());
    for x in &data.x {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut w = Vec::with_capacity(m);
        for rule in &rb.rules {
            w.push(rule.firing_strength(x)?);
        }
        let total: f64 = w.iter().sum();
        let wbar: Vec<f64> = if total < FIRING_UNDERFLOW {
            let mut best = 0;
            for k in 1..m {
                if w[k] > w[best] {
                    best = k;
                }
            }
            (0..m).map(|k| if k == best { 1.0 } else { 0.0 }).collect()
        } else {
            w.iter().map(|wk| wk / total).collect()
        };
        let mut row = Vec::with_capacity(cols);
        for &wk in &wbar {
            row.push(wk);
            for &xj in x {
                row.push(wk * xj);
            }
        }
        rows.push(row);
    }
    Ok((rows, data.y.clone()))
}

/// Least-squares fit of all consequent weights, solved through the normal
/// equations with a ridge fallback (lambda = 1e-8) on rank deficiency.
/// Rows are weighted by `data.weight`, so granules count by occupancy.
pub fn lse_consequents(rb: &TskRuleBase, data: &Samples) -> Result<TskRuleBase> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (rows, targets) = lse_design_matrix(rb, data)?;
    let cols = rows[0].len();
    let mut ata = DMatrix::<f64>::zeros(cols, cols);
    let mut aty = DVector::<f64>::zeros(cols);
    for (row, (&y, &wt)) in rows.iter().zip(targets.iter().zip(&data.weight)) {
        for i in 0..cols {
            let wi = wt * row[i];
            aty[i] += wi * y;
            for j in i..cols {
                ata[(i, j)] += wi * row[j];
            }
        }
    }
    for i in 0..cols {
        for j in 0..i {
            ata[(i, j)] = ata[(j, i)];
        }
    }
    let theta = match Cholesky::new(ata.clone()) {
        Some(chol) => chol.solve(&aty),
        None => {
            let mut ridged = ata;
            for i in 0..cols {
                ridged[(i, i)] += 1e-8;
            }
            Cholesky::new(ridged)
                .ok_or(Error::SingularSystem)?
                .solve(&aty)
        }
    };
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    let n = rb.n_inputs();
    let mut out = rb.clone();
    for (k, rule) in out.rules.iter_mut().enumerate() {
        rule.consequent = theta.as_slice()[k * (n + 1)..(k + 1) * (n + 1)].to_vec();
    }
    Ok(out)
}

/// One batch gradient-descent step on the (weighted) sum of squared errors
/// with respect to every premise parameter (c, sigma, b), using exact
/// analytic gradients of the weighted-average forward pass. Sigma and b are
/// clamped to at least 1e-6 after the step. Records whose total firing
/// strength underflows are skipped: the fallback branch is not differentiable.
pub fn gradient_step_premises(rb: &TskRuleBase, data: &Samples, lr: f64) -> Result<TskRuleBase> {
    if !lr.is_finite() || lr <= 0.0 {
        return Err(Error::InvalidConfig("lr must be > 0".into()));
    }
    let n = rb.n_inputs();
    let m = rb.n_rules();
    let mut grad_c = vec![vec![0.0; n]; m];
    let mut grad_s = vec![vec![0.0; n]; m];
    let mut grad_b = vec![vec![0.0; n]; m];

    let mut mu = vec![vec![0.0; n]; m];
    let mut w = vec![0.0; m];
    let mut f = vec![0.0; m];

    for (x, (&y, &wt)) in data.x.iter().zip(data.y.iter().zip(&data.weight)) {
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        for k in 0..m {
            let rule = &rb.rules[k];
            let mut prod = 1.0;
            for j in 0..n {
                let d = rule.premises[j].eval(x[j]);
                mu[k][j] = d;
                prod *= d;
            }
            w[k] = prod;
            f[k] = rule.consequent_eval(x)?;
        }
        let total: f64 = w.iter().sum();
        if total < FIRING_UNDERFLOW {
            continue;
        }
        let y_hat = w.iter().zip(&f).map(|(wk, fk)| wk * fk).sum::<f64>() / total;
        let err = 2.0 * wt * (y_hat - y);
        for k in 0..m {
            let common = err * (f[k] - y_hat) / total;
            for j in 0..n {
                // product of the other premise degrees
                let mut excl = 1.0;
                for (l, &d) in mu[k].iter().enumerate() {
                    if l != j {
                        excl *= d;
                    }
                }
                let scale = common * excl;
                let (dc, ds, db) = mf_partials(&rb.rules[k].premises[j], x[j]);
                grad_c[k][j] += scale * dc;
                grad_s[k][j] += scale * ds;
                grad_b[k][j] += scale * db;
            }
        }
    }

    let mut out = rb.clone();
    for k in 0..m {
        for j in 0..n {
            let mf = &mut out.rules[k].premises[j];
            mf.c -= lr * grad_c[k][j];
            mf.sigma = (mf.sigma - lr * grad_s[k][j]).max(1e-6);
            mf.b = (mf.b - lr * grad_b[k][j]).max(1e-6);
        }
    }
    Ok(out)
}

/// Partial derivatives of the membership degree with respect to (c, sigma, b).
fn mf_partials(mf: &MembershipFunction, x: f64) -> (f64, f64, f64) {
    let u = (x - mf.c) / mf.sigma;
    match mf.kind {
        MfKind::Gaussian => {
            let d = (-0.5 * u * u).exp();
            let dc = d * u / mf.sigma;
            let ds = d * u * u / mf.sigma;
            (finite_or_zero(dc), finite_or_zero(ds), 0.0)
        }
        MfKind::GeneralizedBell => {
            let t = u.abs().powf(2.0 * mf.b);
            let mu = 1.0 / (1.0 + t);
            if u == 0.0 || t == 0.0 {
                return (0.0, 0.0, 0.0);
            }
            let mu2 = mu * mu;
            let dc = mu2 * (2.0 * mf.b / mf.sigma) * u.signum() * u.abs().powf(2.0 * mf.b - 1.0);
            let ds = mu2 * (2.0 * mf.b / mf.sigma) * t;
            let db = -mu2 * 2.0 * t * u.abs().ln();
            (finite_or_zero(dc), finite_or_zero(ds), finite_or_zero(db))
        }
    }
}

fn finite_or_zero(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Hybrid training: a least-squares consequent fit, then per epoch a premise
/// gradient step followed by a fresh consequent fit. Returns the model with
/// the lowest error level, measured on `checking_data` when provided and on
/// the training data otherwise. `epochs = 0` yields the pure LSE model.
pub fn train_hybrid(
    rb: &TskRuleBase,
    train: &Samples,
    cfg: &HybridTrainConfig,
) -> Result<(TskRuleBase, f64)> {
    cfg.validate()?;
    let check = cfg.checking_data.as_ref().unwrap_or(train);
    let mut current = lse_consequents(rb, train)?;
    let mut best_err = super::error_level(&current, check)?;
    let mut best = current.clone();
    for _ in 0..cfg.epochs {
        current = gradient_step_premises(&current, train, cfg.lr)?;
        current = lse_consequents(&current, train)?;
        let e = super::error_level(&current, check)?;
        if e < best_err {
            best_err = e;
            best = current.clone();
        }
    }
    Ok((best, best_err))
}
