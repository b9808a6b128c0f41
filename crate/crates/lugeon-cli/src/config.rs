//! TOML configuration schemas for the `run` and `synth` commands.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use lugeon_core::data::{
    generate_synthetic, parse_borehole_csv, Dataset, Field, FeatureSelection, SplitSpec,
    SyntheticSpec,
};
use lugeon_core::nfis::{MfKind, TskRule, TskRuleBase};
use lugeon_core::pipeline::{GridSpec, PipelineConfig, SweepAxis};

use crate::CliError;

/// Top-level schema of a `run` configuration file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataSection,
    #[serde(default)]
    pub pipeline: PipelineSection,
    #[serde(default)]
    pub split: Option<SplitSpec>,
    #[serde(default)]
    pub rst: RstSection,
    #[serde(default)]
    pub grid: Option<GridSection>,
}

/// Input data: a borehole CSV or an inline synthetic recipe.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct PipelineSection {
    pub n_random_inits: Option<usize>,
    pub max_iterations: Option<usize>,
    pub max_rules: Option<usize>,
    pub error_threshold: Option<f64>,
    pub som_sizes: Option<Vec<(usize, usize)>>,
    pub radius_schedule: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub threshold_relaxation: Option<f64>,
    pub som_epochs: Option<usize>,
    pub som_radius_end: Option<f64>,
    pub nfis_epochs: Option<usize>,
    pub nfis_lr: Option<f64>,
    pub mf_kind: Option<MfKind>,
    pub normalize_for_som: Option<bool>,
    pub train_on_granules: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RstSection {
    pub levels: usize,
}

impl Default for RstSection {
    fn default() -> Self {
        RstSection { levels: 5 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub axis1: AxisSection,
    pub axis2: AxisSection,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub feature: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl GridSection {
    pub fn to_spec(&self) -> GridSpec {
        GridSpec {
            axis1: SweepAxis {
                feature: self.axis1.feature.clone(),
                min: self.axis1.min,
                max: self.axis1.max,
                steps: self.axis1.steps,
            },
            axis2: SweepAxis {
                feature: self.axis2.feature.clone(),
                min: self.axis2.min,
                max: self.axis2.max,
                steps: self.axis2.steps,
            },
            fixed: self.fixed.iter().map(|(k, v)| (k.clone(), *v)).collect(),
        }
    }
}

/// Synthetic-data recipe; also the whole schema of a `synth` config file.
/// The ground truth comes from `rulebase = "reference"` (the bundled model),
/// `rulebase_file = "model.json"`, or inline `[[rules]]` tables.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_records: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    #[serde(default)]
    pub features: Option<Vec<String>>,
    #[serde(default)]
    pub target: Option<String>,
    #[serde(default)]
    pub rulebase: Option<String>,
    #[serde(default)]
    pub rulebase_file: Option<String>,
    #[serde(default)]
    pub rules: Option<Vec<TskRule>>,
    /// Sampling interval per selected feature, keyed by feature name.
    pub ranges: BTreeMap<String, (f64, f64)>,
}

impl SyntheticConfig {
    pub fn to_spec(&self, base_dir: &Path) -> Result<SyntheticSpec, CliError> {
        let selection = self.selection()?;
        let generator = self.generator(base_dir, &selection)?;
        let mut input_ranges = Vec::with_capacity(selection.features.len());
        for field in &selection.features {
            let range = self.ranges.get(field.name()).ok_or_else(|| {
                CliError::config(format!("missing sampling range for `{}`", field.name()))
            })?;
            input_ranges.push(*range);
        }
        Ok(SyntheticSpec {
            generator,
            selection,
            n_records: self.n_records,
            noise_sigma: self.noise_sigma,
            input_ranges,
            seed: self.seed,
        })
    }

    fn selection(&self) -> Result<FeatureSelection, CliError> {
        let mut selection = FeatureSelection::default();
        if let Some(names) = &self.features {
            selection.features = names
                .iter()
                .map(|n| {
                    Field::from_name(n)
                        .ok_or_else(|| CliError::config(format!("unknown feature `{n}`")))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(name) = &self.target {
            selection.target = Field::from_name(name)
                .ok_or_else(|| CliError::config(format!("unknown target `{name}`")))?;
        }
        Ok(selection)
    }

    fn generator(
        &self,
        base_dir: &Path,
        selection: &FeatureSelection,
    ) -> Result<TskRuleBase, CliError> {
        let sources = [
            self.rulebase.is_some(),
            self.rulebase_file.is_some(),
            self.rules.is_some(),
        ];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(CliError::config(
                "specify exactly one of rulebase, rulebase_file or inline rules".into(),
            ));
        }
        if let Some(name) = &self.rulebase {
            if name != "reference" {
                return Err(CliError::config(format!(
                    "unknown bundled rulebase `{name}` (only \"reference\" ships with the tool)"
                )));
            }
            return Ok(lugeon_core::fixtures::reference_rulebase());
        }
        if let Some(file) = &self.rulebase_file {
            let path = base_dir.join(file);
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
            return TskRuleBase::from_json(&text)
                .map_err(|e| CliError::config(format!("{}: {e}", path.display())));
        }
        let rb = TskRuleBase::new(selection.feature_names(), self.rules.clone().unwrap());
        rb.validate()
            .map_err(|e| CliError::config(format!("inline rules: {e}")))?;
        Ok(rb)
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn pipeline_config(&self, seed_override: Option<u64>) -> PipelineConfig {
        let d = PipelineConfig::default();
        let p = &self.pipeline;
        PipelineConfig {
            n_random_inits: p.n_random_inits.unwrap_or(d.n_random_inits),
            max_iterations: p.max_iterations.unwrap_or(d.max_iterations),
            max_rules: p.max_rules.unwrap_or(d.max_rules),
            error_threshold: p.error_threshold.unwrap_or(d.error_threshold),
            som_sizes: p.som_sizes.clone().unwrap_or(d.som_sizes),
            radius_schedule: p.radius_schedule.clone().unwrap_or(d.radius_schedule),
            split: self.split.unwrap_or(d.split),
            seed: seed_override.or(p.seed).unwrap_or(d.seed),
            threshold_relaxation: p.threshold_relaxation.unwrap_or(d.threshold_relaxation),
            som_epochs: p.som_epochs.unwrap_or(d.som_epochs),
            som_radius_end: p.som_radius_end.unwrap_or(d.som_radius_end),
            nfis_epochs: p.nfis_epochs.unwrap_or(d.nfis_epochs),
            nfis_lr: p.nfis_lr.unwrap_or(d.nfis_lr),
            mf_kind: p.mf_kind.unwrap_or(d.mf_kind),
            normalize_for_som: p.normalize_for_som.unwrap_or(d.normalize_for_som),
            train_on_granules: p.train_on_granules.unwrap_or(d.train_on_granules),
        }
    }

    /// Loads the configured dataset, reading or synthesizing as requested.
    /// Returns the dataset and the input paths it came from.
    pub fn load_dataset(&self, base_dir: &Path) -> Result<(Dataset, Vec<String>), CliError> {
        match (&self.data.csv, &self.data.synthetic) {
            (Some(csv), None) => {
                let path = base_dir.join(csv);
                let text = fs::read_to_string(&path).map_err(|e| {
                    CliError::config(format!("cannot read {}: {e}", path.display()))
                })?;
                let dataset = parse_borehole_csv(&text).map_err(CliError::data)?;
                if dataset.is_empty() {
                    return Err(CliError::Data("input CSV has no data rows".into()));
                }
                Ok((dataset, vec![path.display().to_string()]))
            }
            (None, Some(synth)) => {
                let spec = synth.to_spec(base_dir)?;
                let dataset = generate_synthetic(&spec).map_err(CliError::data)?;
                Ok((dataset, vec!["<synthetic>".into()]))
            }
            _ => Err(CliError::config(
                "the [data] section needs exactly one of `csv` or `synthetic`".into(),
            )),
        }
    }
}

pub fn parse_synth_config(text: &str) -> Result<SyntheticConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
}
