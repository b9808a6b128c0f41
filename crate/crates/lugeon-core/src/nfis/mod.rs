//! Takagi-Sugeno-Kang neuro-fuzzy inference: membership functions, rule
//! bases, the weighted-average forward pass, and hybrid training (least
//! squares on the linear consequents, gradient descent on the premises).

mod train;

pub use train::{
    gradient_step_premises, init_rulebase_from_clusters, lse_consequents, lse_design_matrix,
    subtractive_cluster, train_hybrid, HybridTrainConfig,
};

use serde::{Deserialize, Serialize};

use crate::data::Samples;
use crate::error::{Error, Result};

/// Total firing strength below this threshold triggers the max-rule fallback.
pub const FIRING_UNDERFLOW: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MfKind {
    Gaussian,
    GeneralizedBell,
}

/// A one-dimensional membership function with center `c`, width `sigma` and
/// shape exponent `b` (ignored for the gaussian kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipFunction {
    pub kind: MfKind,
    pub c: f64,
    pub sigma: f64,
    #[serde(default = "default_b")]
    pub b: f64,
}

fn default_b() -> f64 {
    1.0
}

impl MembershipFunction {
    pub fn gaussian(c: f64, sigma: f64) -> Self {
        MembershipFunction { kind: MfKind::Gaussian, c, sigma, b: 1.0 }
    }

    pub fn bell(c: f64, sigma: f64, b: f64) -> Self {
        MembershipFunction { kind: MfKind::GeneralizedBell, c, sigma, b }
    }

    /// Membership degree in (0, 1]; exactly 1 at x = c.
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.c) / self.sigma;
        match self.kind {
            MfKind::Gaussian => (-0.5 * u * u).exp(),
            MfKind::GeneralizedBell => 1.0 / (1.0 + u.abs().powf(2.0 * self.b)),
        }
    }
}

/// One TSK rule: a premise per input and an affine consequent.
/// `consequent[0]` is the constant term, `consequent[1..]` the per-input
/// linear weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TskRule {
    pub premises: Vec<MembershipFunction>,
    pub consequent: Vec<f64>,
}

impl TskRule {
    /// Product of the premise degrees over all inputs.
    pub fn firing_strength(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self
            .premises
            .iter()
            .zip(x)
            .map(|(mf, &v)| mf.eval(v))
            .product())
    }

    /// Affine consequent value.
    pub fn consequent_eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(self.consequent[0]
            + self
                .consequent[1..]
                .iter()
                .zip(x)
                .map(|(p, v)| p * v)
                .sum::<f64>())
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.premises.len() {
            return Err(Error::DimensionMismatch {
                expected: self.premises.len(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Output of the detailed forward pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TskOutput {
    pub value: f64,
    /// True when the total firing strength underflowed and the consequent of
    /// the strongest rule was returned instead of the weighted average.
    pub underflow: bool,
}

/// A complete rule base over named inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TskRuleBase {
    pub input_names: Vec<String>,
    pub rules: Vec<TskRule>,
}

impl TskRuleBase {
    pub fn new(input_names: Vec<String>, rules: Vec<TskRule>) -> Self {
        TskRuleBase { input_names, rules }
    }

    pub fn n_inputs(&self) -> usize {
        self.input_names.len()
    }

    pub fn n_rules(&self) -> usize {
        self.rules.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            return Err(Error::InvalidConfig("rule base has no rules".into()));
        }
        let n = self.n_inputs();
        for (k, rule) in self.rules.iter().enumerate() {
            if rule.premises.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: rule.premises.len() });
            }
            if rule.consequent.len() != n + 1 {
                return Err(Error::DimensionMismatch {
                    expected: n + 1,
                    got: rule.consequent.len(),
                });
            }
            for mf in &rule.premises {
                let finite = mf.sigma.is_finite() && mf.b.is_finite() && mf.c.is_finite();
                if !finite || mf.sigma <= 0.0 || mf.b <= 0.0 {
                    return Err(Error::InvalidConfig(format!(
                        "rule {k}: premise parameters must be finite with sigma > 0 and b > 0"
                    )));
                }
            }
            if rule.consequent.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "rule {k}: consequent weights must be finite"
                )));
            }
        }
        Ok(())
    }

    /// Firing-strength-weighted average of the rule consequents.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok(self.eval_detailed(x)?.value)
    }

    /// Forward pass that also reports the underflow fallback. When the total
    /// firing strength drops below `FIRING_UNDERFLOW` the weighted average is
    /// undefined, so the consequent of the strongest rule is returned.
    pub fn eval_detailed(&self, x: &[f64]) -> Result<TskOutput> {
        if x.len() != self.n_inputs() {
            return Err(Error::DimensionMismatch { expected: self.n_inputs(), got: x.len() });
        }
        let mut total = 0.0;
        let mut weighted = 0.0;
        let mut max_w = f64::NEG_INFINITY;
        let mut max_idx = 0;
        for (k, rule) in self.rules.iter().enumerate() {
            let w = rule.firing_strength(x)?;
            if w > max_w {
                max_w = w;
                max_idx = k;
            }
            total += w;
            weighted += w * rule.consequent_eval(x)?;
        }
        if total < FIRING_UNDERFLOW {
            return Ok(TskOutput {
                value: self.rules[max_idx].consequent_eval(x)?,
                underflow: true,
            });
        }
        Ok(TskOutput { value: weighted / total, underflow: false })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule base serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rb: TskRuleBase =
            serde_json::from_str(text).map_err(|e| Error::MalformedModel(e.to_string()))?;
        rb.validate()?;
        Ok(rb)
    }
}

/// Root-mean-square error of the rule base over a dataset, in target units.
pub fn error_level(rb: &TskRuleBase, data: &Samples) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum_sq = 0.0;
    for (x, &y) in data.x.iter().zip(&data.y) {
        let e = rb.eval(x)? - y;
        sum_sq += e * e;
    }
    Ok((sum_sq / data.len() as f64).sqrt())
}
