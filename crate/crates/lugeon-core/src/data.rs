//! Borehole data model: CSV ingestion, train/test splitting, min-max
//! normalization and a seeded synthetic generator.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nfis::TskRuleBase;

/// The named fields of a borehole record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    BoreholeId,
    X,
    Y,
    Z,
    SectionLength,
    Rqd,
    Twr,
    Lugeon,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::BoreholeId,
        Field::X,
        Field::Y,
        Field::Z,
        Field::SectionLength,
        Field::Rqd,
        Field::Twr,
        Field::Lugeon,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::BoreholeId => "borehole_id",
            Field::X => "x",
            Field::Y => "y",
            Field::Z => "z",
            Field::SectionLength => "section_length",
            Field::Rqd => "rqd",
            Field::Twr => "twr",
            Field::Lugeon => "lugeon",
        }
    }

    pub fn from_name(name: &str) -> Option<Field> {
        Field::ALL.iter().copied().find(|f| f.name() == name)
    }

    /// Ordinal fields take integer values only.
    pub fn is_ordinal(self) -> bool {
        matches!(self, Field::Twr)
    }
}

/// One water-pressure-test interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoreholeRecord {
    pub borehole_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub section_length: f64,
    pub rqd: f64,
    pub twr: u8,
    pub lugeon: f64,
}

impl BoreholeRecord {
    /// Checks the ingestion invariants. Returns the offending field and a
    /// reason on failure. Synthetic records bypass this check: their target
    /// is a model output and may fall outside the physical range.
    pub fn validate(&self) -> std::result::Result<(), (Field, String)> {
        for (f, v) in [
            (Field::X, self.x),
            (Field::Y, self.y),
            (Field::Z, self.z),
            (Field::SectionLength, self.section_length),
            (Field::Rqd, self.rqd),
            (Field::Lugeon, self.lugeon),
        ] {
            if !v.is_finite() {
                return Err((f, "value is not finite".into()));
            }
        }
        if self.section_length <= 0.0 {
            return Err((Field::SectionLength, "must be > 0".into()));
        }
        if !(0.0..=100.0).contains(&self.rqd) {
            return Err((Field::Rqd, "must lie in [0, 100]".into()));
        }
        if !(1..=5).contains(&self.twr) {
            return Err((Field::Twr, "must lie in {1..5}".into()));
        }
        if self.lugeon < 0.0 {
            return Err((Field::Lugeon, "must be >= 0".into()));
        }
        Ok(())
    }

    /// Numeric value of a field; `twr` is widened to f64.
    pub fn value(&self, field: Field) -> f64 {
        match field {
            Field::BoreholeId => f64::NAN,
            Field::X => self.x,
            Field::Y => self.y,
            Field::Z => self.z,
            Field::SectionLength => self.section_length,
            Field::Rqd => self.rqd,
            Field::Twr => f64::from(self.twr),
            Field::Lugeon => self.lugeon,
        }
    }

    fn set_value(&mut self, field: Field, v: f64) {
        match field {
            Field::BoreholeId => {}
            Field::X => self.x = v,
            Field::Y => self.y = v,
            Field::Z => self.z = v,
            Field::SectionLength => self.section_length = v,
            Field::Rqd => self.rqd = v,
            Field::Twr => self.twr = v as u8,
            Field::Lugeon => self.lugeon = v,
        }
    }
}

impl Default for BoreholeRecord {
    fn default() -> Self {
        BoreholeRecord {
            borehole_id: String::new(),
            x: 0.0,
            y: 0.0,
            z: 0.0,
            section_length: 1.0,
            rqd: 50.0,
            twr: 3,
            lugeon: 0.0,
        }
    }
}

/// Which fields form the condition vector and which is the target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub features: Vec<Field>,
    pub target: Field,
}

impl Default for FeatureSelection {
    /// Condition vector (z, section_length, rqd, twr) predicting lugeon.
    fn default() -> Self {
        FeatureSelection {
            features: vec![Field::Z, Field::SectionLength, Field::Rqd, Field::Twr],
            target: Field::Lugeon,
        }
    }
}

impl FeatureSelection {
    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name().to_string()).collect()
    }
}

/// Per-feature affine map onto [0, 1], stored so it can be inverted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    /// (min, width) per selected feature; width > 0.
    pub per_feature: Vec<(f64, f64)>,
}

impl Normalization {
    pub fn fit(records: &[BoreholeRecord], selection: &FeatureSelection) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut per_feature = Vec::with_capacity(selection.features.len());
        for &f in &selection.features {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in records {
                let v = r.value(f);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let width = hi - lo;
            if width <= 0.0 {
                return Err(Error::DegenerateFeature(f.name().to_string()));
            }
            per_feature.push((lo, width));
        }
        Ok(Normalization { per_feature })
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.per_feature)
            .map(|(v, (lo, w))| (v - lo) / w)
            .collect()
    }

    pub fn invert(&self, scaled: &[f64]) -> Vec<f64> {
        scaled
            .iter()
            .zip(&self.per_feature)
            .map(|(v, (lo, w))| lo + v * w)
            .collect()
    }
}

/// An ordered collection of borehole records plus the feature selection and
/// an optional fitted normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub records: Vec<BoreholeRecord>,
    pub selection: FeatureSelection,
    pub normalization: Option<Normalization>,
}

impl Dataset {
    pub fn new(records: Vec<BoreholeRecord>, selection: FeatureSelection) -> Self {
        Dataset {
            records,
            selection,
            normalization: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Fits a min-max normalization on this dataset's selected features.
    /// The target is left unscaled.
    pub fn normalize(&self) -> Result<Dataset> {
        let norm = Normalization::fit(&self.records, &self.selection)?;
        Ok(Dataset {
            records: self.records.clone(),
            selection: self.selection.clone(),
            normalization: Some(norm),
        })
    }

    /// Reuses a normalization fitted elsewhere (typically on the train split).
    pub fn with_normalization(&self, norm: Normalization) -> Dataset {
        Dataset {
            records: self.records.clone(),
            selection: self.selection.clone(),
            normalization: Some(norm),
        }
    }

    /// Numeric view of the selected features and target. The stored
    /// normalization, when present, is applied to the features.
    pub fn samples(&self) -> Samples {
        let mut s = self.raw_samples();
        if let Some(norm) = &self.normalization {
            for row in &mut s.x {
                *row = norm.apply(row);
            }
        }
        s
    }

    /// Numeric view in raw units, ignoring any stored normalization.
    pub fn raw_samples(&self) -> Samples {
        let x = self
            .records
            .iter()
            .map(|r| self.selection.features.iter().map(|&f| r.value(f)).collect())
            .collect();
        let y = self
            .records
            .iter()
            .map(|r| r.value(self.selection.target))
            .collect();
        Samples {
            input_names: self.selection.feature_names(),
            target_name: self.selection.target.name().to_string(),
            x,
            y,
            weight: vec![1.0; self.records.len()],
        }
    }
}

/// A numeric feature/target table used by the model-fitting modules.
/// `weight` counts how many raw records back each row (1 for raw data,
/// the mapped-record count for crisp granules).
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    pub input_names: Vec<String>,
    pub target_name: String,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub weight: Vec<f64>,
}

impl Samples {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.input_names.len()
    }

    /// Per-feature (min, max) over all rows.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        let dim = self.dim();
        let mut b = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for row in &self.x {
            for (j, &v) in row.iter().enumerate() {
                b[j].0 = b[j].0.min(v);
                b[j].1 = b[j].1.max(v);
            }
        }
        b
    }

    /// Min-max scales every feature onto [0, 1] and returns the scaled copy
    /// plus the per-feature (min, width) used. Zero-width features are left
    /// at 0.5 with width recorded as 0.
    pub fn normalized01(&self) -> (Samples, Vec<(f64, f64)>) {
        let bounds = self.bounds();
        let maps: Vec<(f64, f64)> = bounds.iter().map(|&(lo, hi)| (lo, hi - lo)).collect();
        let mut out = self.clone();
        for row in &mut out.x {
            for (j, v) in row.iter_mut().enumerate() {
                let (lo, w) = maps[j];
                *v = if w > 0.0 { (*v - lo) / w } else { 0.5 };
            }
        }
        (out, maps)
    }
}

/// How to divide a dataset into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Splits by a seeded uniform permutation. Record order inside each side
/// follows the original file order.
pub fn split_train_test(data: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let n = data.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let train_n = (spec.train_fraction * n as f64).round() as usize;
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    indices.shuffle(&mut rng);
    let mut train_idx: Vec<usize> = indices[..train_n].to_vec();
    let mut test_idx: Vec<usize> = indices[train_n..].to_vec();
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    let pick = |idx: &[usize]| Dataset {
        records: idx.iter().map(|&i| data.records[i].clone()).collect(),
        selection: data.selection.clone(),
        normalization: data.normalization.clone(),
    };
    Ok((pick(&train_idx), pick(&test_idx)))
}

/// One rejected CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowIssue {
    pub line: usize,
    pub field: String,
    pub reason: String,
}

/// Outcome of a lenient parse: the accepted rows plus everything rejected.
#[derive(Debug, Clone)]
pub struct CsvReport {
    pub dataset: Dataset,
    pub rejected: Vec<RowIssue>,
    pub warnings: Vec<String>,
}

/// Strict parse: any invalid row is an error.
pub fn parse_borehole_csv(text: &str) -> Result<Dataset> {
    let report = parse_borehole_csv_report(text)?;
    if let Some(issue) = report.rejected.first() {
        return Err(Error::RowParse {
            line: issue.line,
            field: issue.field.clone(),
            reason: issue.reason.clone(),
        });
    }
    Ok(report.dataset)
}

/// Lenient parse: collects rejected rows instead of failing. Unknown extra
/// columns are ignored with a warning. A file with a header and no data rows
/// yields an empty dataset; a file with no header at all is `EmptyInput`.
pub fn parse_borehole_csv_report(text: &str) -> Result<CsvReport> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::InvalidConfig(format!("unreadable header: {e}")))?
        .clone();

    let mut warnings = Vec::new();
    let mut col_of = Vec::with_capacity(Field::ALL.len());
    for field in Field::ALL {
        match headers.iter().position(|h| h == field.name()) {
            Some(i) => col_of.push(i),
            None => return Err(Error::MissingColumn(field.name().to_string())),
        }
    }
    for h in headers.iter() {
        if Field::from_name(h).is_none() {
            warnings.push(format!("ignoring unknown column `{h}`"));
        }
    }

    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (row_no, row) in reader.records().enumerate() {
        let line = row_no + 2; // header is line 1
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                rejected.push(RowIssue {
                    line,
                    field: String::new(),
                    reason: format!("unreadable row: {e}"),
                });
                continue;
            }
        };
        match parse_row(&row, &col_of, line) {
            Ok(rec) => records.push(rec),
            Err(issue) => rejected.push(issue),
        }
    }
    Ok(CsvReport {
        dataset: Dataset::new(records, FeatureSelection::default()),
        rejected,
        warnings,
    })
}

fn parse_row(
    row: &csv::StringRecord,
    col_of: &[usize],
    line: usize,
) -> std::result::Result<BoreholeRecord, RowIssue> {
    let cell = |field: Field| -> std::result::Result<&str, RowIssue> {
        row.get(col_of[Field::ALL.iter().position(|&f| f == field).unwrap()])
            .ok_or_else(|| RowIssue {
                line,
                field: field.name().to_string(),
                reason: "missing cell".to_string(),
            })
    };
    let num = |field: Field| -> std::result::Result<f64, RowIssue> {
        let s = cell(field)?;
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| RowIssue {
                line,
                field: field.name().to_string(),
                reason: format!("`{s}` is not a finite number"),
            })
    };

    let twr_text = cell(Field::Twr)?;
    let twr: u8 = twr_text.parse().map_err(|_| RowIssue {
        line,
        field: Field::Twr.name().to_string(),
        reason: format!("`{twr_text}` is not an integer class"),
    })?;

    let rec = BoreholeRecord {
        borehole_id: cell(Field::BoreholeId)?.to_string(),
        x: num(Field::X)?,
        y: num(Field::Y)?,
        z: num(Field::Z)?,
        section_length: num(Field::SectionLength)?,
        rqd: num(Field::Rqd)?,
        twr,
        lugeon: num(Field::Lugeon)?,
    };
    rec.validate().map_err(|(field, reason)| RowIssue {
        line,
        field: field.name().to_string(),
        reason,
    })?;
    Ok(rec)
}

/// Serializes with the canonical column order. Floats use the shortest
/// representation that round-trips, so parse-serialize-parse is exact.
pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::from("borehole_id,x,y,z,section_length,rqd,twr,lugeon\n");
    for r in &data.records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.borehole_id, r.x, r.y, r.z, r.section_length, r.rqd, r.twr, r.lugeon
        ));
    }
    out
}

/// Granule export in the borehole CSV schema plus a `granule_weight` column.
/// The granule features must be named after record fields; everything else
/// takes the field defaults.
pub fn granules_to_csv(granules: &Samples) -> Result<String> {
    let fields: Vec<Field> = granules
        .input_names
        .iter()
        .map(|n| Field::from_name(n).ok_or_else(|| Error::UnknownAttribute(n.clone())))
        .collect::<Result<_>>()?;
    let target = Field::from_name(&granules.target_name)
        .ok_or_else(|| Error::UnknownAttribute(granules.target_name.clone()))?;
    let mut out =
        String::from("borehole_id,x,y,z,section_length,rqd,twr,lugeon,granule_weight\n");
    for (i, row) in granules.x.iter().enumerate() {
        let mut rec = BoreholeRecord {
            borehole_id: format!("g{}", i + 1),
            ..BoreholeRecord::default()
        };
        for (&f, &v) in fields.iter().zip(row) {
            rec.set_value(f, v);
        }
        // granule twr is a codebook average; keep the fractional value
        let twr_text = fields
            .iter()
            .zip(row)
            .find(|(f, _)| **f == Field::Twr)
            .map(|(_, &v)| format!("{v}"))
            .unwrap_or_else(|| format!("{}", rec.twr));
        rec.set_value(target, granules.y[i]);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            rec.borehole_id,
            rec.x,
            rec.y,
            rec.z,
            rec.section_length,
            rec.rqd,
            twr_text,
            rec.lugeon,
            granules.weight[i]
        ));
    }
    Ok(out)
}

/// Recipe for a synthetic dataset: a ground-truth rule base plus sampling
/// ranges. Stands in for field data that cannot be redistributed.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub generator: TskRuleBase,
    pub selection: FeatureSelection,
    pub n_records: usize,
    pub noise_sigma: f64,
    /// Closed interval per selected feature, aligned with `selection.features`.
    pub input_ranges: Vec<(f64, f64)>,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_records == 0 {
            return Err(Error::InvalidConfig("n_records must be > 0".into()));
        }
        if !self.noise_sigma.is_finite() || self.noise_sigma < 0.0 {
            return Err(Error::InvalidConfig("noise_sigma must be >= 0".into()));
        }
        if self.input_ranges.len() != self.selection.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.selection.features.len(),
                got: self.input_ranges.len(),
            });
        }
        if self.generator.n_inputs() != self.selection.features.len() {
            return Err(Error::DimensionMismatch {
                expected: self.selection.features.len(),
                got: self.generator.n_inputs(),
            });
        }
        for (i, &(lo, hi)) in self.input_ranges.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!(
                    "input range {i} is not a valid interval"
                )));
            }
        }
        self.generator.validate()?;
        Ok(())
    }
}

/// Draws inputs uniformly from the given ranges (ordinal features get integer
/// draws), evaluates the ground-truth rule base and adds Gaussian noise.
/// Deterministic for a fixed seed.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("validated sigma"))
    } else {
        None
    };
    let mut records = Vec::with_capacity(spec.n_records);
    for i in 0..spec.n_records {
        let mut rec = BoreholeRecord {
            borehole_id: format!("S{:04}", i + 1),
            ..BoreholeRecord::default()
        };
        let mut xs = Vec::with_capacity(spec.selection.features.len());
        for (j, &field) in spec.selection.features.iter().enumerate() {
            let (lo, hi) = spec.input_ranges[j];
            let v = if field.is_ordinal() {
                let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
                if a > b {
                    return Err(Error::InvalidConfig(format!(
                        "range [{lo}, {hi}] for ordinal `{}` contains no integer",
                        field.name()
                    )));
                }
                rng.random_range(a..=b) as f64
            } else if lo == hi {
                lo
            } else {
                rng.random_range(lo..=hi)
            };
            rec.set_value(field, v);
            xs.push(v);
        }
        let mut target = spec.generator.eval(&xs)?;
        if let Some(n) = &noise {
            target += n.sample(&mut rng);
        }
        rec.set_value(spec.selection.target, target);
        records.push(rec);
    }
    Ok(Dataset::new(records, spec.selection.clone()))
}
