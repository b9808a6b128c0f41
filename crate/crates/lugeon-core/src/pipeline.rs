//! The close-open granulation procedure: crisp granulation by SOM, fuzzy
//! granulation of the granules by a TSK system under a descending influence
//! radius, candidate bookkeeping in an aggregated box, and selection of the
//! simplest feasible model. Also the grid predictor and the rough-set branch.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{split_train_test, Dataset, SplitSpec};
use crate::error::{Error, Result};
use crate::nfis::{
    init_rulebase_from_clusters, subtractive_cluster, train_hybrid, HybridTrainConfig, MfKind,
    TskRuleBase,
};
use crate::rst::{
    discernibility_function, discernibility_matrix, extract_decision_rules, reducts,
    scale_samples_to_table, DecisionRule, DecisionTable,
};
use crate::som::{
    extract_crisp_granules, fit_discretizer, init_som, train_som, Discretizer1D, SomGrid,
    TrainSchedule,
};

/// The two feasibility criteria a candidate must meet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feasibility {
    pub max_rules: usize,
    pub error_threshold: f64,
}

impl Feasibility {
    pub fn accepts(&self, n_rules: usize, error: f64) -> bool {
        n_rules <= self.max_rules && error <= self.error_threshold
    }
}

/// Pipeline settings. The first four fields mirror the procedure's named
/// knobs: number of random initializations, iteration cap per candidate,
/// rule-count cap, and the error-level threshold in target units.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub n_random_inits: usize,
    pub max_iterations: usize,
    pub max_rules: usize,
    pub error_threshold: f64,
    pub som_sizes: Vec<(usize, usize)>,
    /// Strictly descending influence radii in (0, 1]; iteration i uses the
    /// i-th entry (the last one repeats if the schedule is shorter than
    /// `max_iterations`).
    pub radius_schedule: Vec<f64>,
    pub split: SplitSpec,
    pub seed: u64,
    /// Per-iteration multiplier on the error threshold; 1.0 keeps it fixed.
    pub threshold_relaxation: f64,
    pub som_epochs: usize,
    /// Final neighborhood radius of the SOM schedule. Small values park the
    /// codebook vectors on their cell centroids, which the granule targets
    /// assume.
    pub som_radius_end: f64,
    pub nfis_epochs: usize,
    pub nfis_lr: f64,
    pub mf_kind: MfKind,
    /// Train the SOM on min-max-normalized features (recommended).
    pub normalize_for_som: bool,
    /// Fit the fuzzy model on the crisp granules (the procedure's default);
    /// false fits on the raw training records instead, for ablation.
    pub train_on_granules: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            n_random_inits: 1,
            max_iterations: 3,
            max_rules: 4,
            error_threshold: 23.0,
            som_sizes: vec![(10, 15)],
            radius_schedule: vec![1.0, 0.8, 0.6],
            split: SplitSpec { train_fraction: 0.8, seed: 17 },
            seed: 42,
            threshold_relaxation: 1.0,
            som_epochs: 500,
            som_radius_end: 0.3,
            nfis_epochs: 30,
            nfis_lr: 2e-5,
            mf_kind: MfKind::Gaussian,
            normalize_for_som: true,
            train_on_granules: true,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_random_inits == 0 || self.max_iterations == 0 || self.max_rules == 0 {
            return Err(Error::InvalidConfig(
                "n_random_inits, max_iterations and max_rules must be >= 1".into(),
            ));
        }
        if !self.error_threshold.is_finite() || self.error_threshold <= 0.0 {
            return Err(Error::InvalidConfig("error_threshold must be > 0".into()));
        }
        if self.som_sizes.is_empty() {
            return Err(Error::InvalidConfig("som_sizes must be nonempty".into()));
        }
        if self.som_sizes.iter().any(|&(r, c)| r == 0 || c == 0) {
            return Err(Error::InvalidConfig("som sizes must be >= 1x1".into()));
        }
        if self.radius_schedule.is_empty() {
            return Err(Error::InvalidConfig("radius_schedule must be nonempty".into()));
        }
        for r in &self.radius_schedule {
            if !(*r > 0.0 && *r <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "influence radii must lie in (0, 1], got {r}"
                )));
            }
        }
        if !self.radius_schedule.windows(2).all(|w| w[1] < w[0]) {
            return Err(Error::InvalidConfig(
                "radius_schedule must be strictly descending".into(),
            ));
        }
        if !self.threshold_relaxation.is_finite() || self.threshold_relaxation <= 0.0 {
            return Err(Error::InvalidConfig("threshold_relaxation must be > 0".into()));
        }
        self.split.validate()?;
        Ok(())
    }

    pub fn feasibility(&self) -> Feasibility {
        Feasibility {
            max_rules: self.max_rules,
            error_threshold: self.error_threshold,
        }
    }

    fn radius_for(&self, iteration: usize) -> f64 {
        *self
            .radius_schedule
            .get(iteration)
            .unwrap_or_else(|| self.radius_schedule.last().unwrap())
    }

    fn threshold_for(&self, iteration: usize) -> f64 {
        self.error_threshold * self.threshold_relaxation.powi(iteration as i32)
    }
}

/// One row of a candidate's history.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub initialization: usize,
    pub iteration: usize,
    pub radius: f64,
    pub som_rows: usize,
    pub som_cols: usize,
    pub error_level: f64,
    pub n_rules: usize,
    pub feasible: bool,
}

/// A fitted (SOM, rule base) pair with its held-out error level and the
/// iteration history that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateModel {
    pub som: SomGrid,
    pub rulebase: TskRuleBase,
    pub error_level: f64,
    pub n_rules: usize,
    pub trace: Vec<IterationRecord>,
}

/// Archive of every candidate evaluated during a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregatedBox {
    pub candidates: Vec<CandidateModel>,
}

impl AggregatedBox {
    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// CSV of one row per candidate: its own (final) trace record.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("init,iteration,radius,som_rows,som_cols,n_rules,error_level,feasible\n");
        for cand in &self.candidates {
            let rec = cand.trace.last().expect("candidate has a trace");
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                rec.initialization,
                rec.iteration,
                rec.radius,
                rec.som_rows,
                rec.som_cols,
                rec.n_rules,
                rec.error_level,
                rec.feasible
            ));
        }
        out
    }
}

/// Runs the close-open procedure. For each initialization: draw a SOM size,
/// train it on the training split, extract crisp granules, then refine a
/// fuzzy model over up to `max_iterations` descending influence radii. Every
/// evaluated candidate lands in the aggregated box; an initialization stops
/// early once a candidate meets both feasibility criteria. Errors with
/// `NoFeasibleCandidate` (carrying the box) when nothing qualifies.
pub fn run_close_open(
    data: &Dataset,
    cfg: &PipelineConfig,
) -> Result<(CandidateModel, AggregatedBox)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (train, test) = split_train_test(data, &cfg.split)?;
    let train = if cfg.normalize_for_som { train.normalize()? } else { train };

    let train_norm = train.samples();
    let train_raw = train.raw_samples();
    let test_raw = test.raw_samples();
    // error level is measured on the held-out split when it is nonempty
    let checking = if test_raw.is_empty() { train_raw.clone() } else { test_raw };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut agg = AggregatedBox::default();

    for init in 0..cfg.n_random_inits {
        let (rows, cols) = cfg.som_sizes[rng.random_range(0..cfg.som_sizes.len())];
        let som_seed = rng.random::<u64>();
        let grid = init_som(rows, cols, train_norm.dim(), &train_norm, som_seed)?;
        let schedule = TrainSchedule {
            epochs: cfg.som_epochs,
            radius_end: cfg.som_radius_end,
            ..TrainSchedule::defaults_for(rows, cols, som_seed)
        };
        let grid = train_som(&grid, &train_norm, &schedule)?;

        // granules are extracted in SOM space, then mapped back to raw units
        // so the fuzzy model reports consequents in the data's own units
        let mut granules = extract_crisp_granules(&grid, &train_norm)?;
        if let Some(norm) = &train.normalization {
            for row in &mut granules.x {
                *row = norm.invert(row);
            }
        }
        let fit_data = if cfg.train_on_granules { &granules } else { &train_raw };

        let mut trace: Vec<IterationRecord> = Vec::new();
        for iteration in 0..cfg.max_iterations {
            let radius = cfg.radius_for(iteration);
            let (scaled, maps) = fit_data.normalized01();
            let centers_scaled = subtractive_cluster(&scaled, radius)?;
            let centers: Vec<Vec<f64>> = centers_scaled
                .iter()
                .map(|c| {
                    c.iter()
                        .zip(&maps)
                        .map(|(&v, &(lo, w))| if w > 0.0 { lo + v * w } else { lo })
                        .collect()
                })
                .collect();
            let mut rb = init_rulebase_from_clusters(&centers, fit_data, radius)?;
            if cfg.mf_kind == MfKind::GeneralizedBell {
                for rule in &mut rb.rules {
                    for mf in &mut rule.premises {
                        mf.kind = MfKind::GeneralizedBell;
                        mf.b = 2.0;
                    }
                }
            }
            let train_cfg = HybridTrainConfig {
                epochs: cfg.nfis_epochs,
                lr: cfg.nfis_lr,
                influence_radius: radius,
                checking_data: Some(checking.clone()),
            };
            let (rulebase, err) = train_hybrid(&rb, fit_data, &train_cfg)?;
            let n_rules = rulebase.n_rules();
            let feasible = n_rules <= cfg.max_rules && err <= cfg.threshold_for(iteration);
            trace.push(IterationRecord {
                initialization: init,
                iteration,
                radius,
                som_rows: rows,
                som_cols: cols,
                error_level: err,
                n_rules,
                feasible,
            });
            agg.candidates.push(CandidateModel {
                som: grid.clone(),
                rulebase,
                error_level: err,
                n_rules,
                trace: trace.clone(),
            });
            if feasible {
                break;
            }
        }
    }

    match select_best(&agg, &cfg.feasibility()) {
        Ok(best) => Ok((best, agg)),
        Err(Error::EmptyBox) => Err(Error::EmptyBox),
        Err(_) => Err(Error::NoFeasibleCandidate(Box::new(agg))),
    }
}

/// Among feasible candidates: fewest rules, then lowest error level, then
/// earliest position in the box. Returns an error when nothing is feasible;
/// `select_best_or_fallback` relaxes that to the lowest-error candidate.
pub fn select_best(agg: &AggregatedBox, criteria: &Feasibility) -> Result<CandidateModel> {
    if agg.is_empty() {
        return Err(Error::EmptyBox);
    }
    let feasible: Vec<&CandidateModel> = agg
        .candidates
        .iter()
        .filter(|c| criteria.accepts(c.n_rules, c.error_level))
        .collect();
    if feasible.is_empty() {
        return Err(Error::NoFeasibleCandidate(Box::new(agg.clone())));
    }
    let mut best = feasible[0];
    for cand in &feasible[1..] {
        if cand.n_rules < best.n_rules
            || (cand.n_rules == best.n_rules && cand.error_level < best.error_level)
        {
            best = cand;
        }
    }
    Ok(best.clone())
}

/// `select_best`, falling back to the lowest-error candidate when no
/// candidate is feasible.
pub fn select_best_or_fallback(agg: &AggregatedBox, criteria: &Feasibility) -> Result<CandidateModel> {
    match select_best(agg, criteria) {
        Ok(c) => Ok(c),
        Err(Error::EmptyBox) => Err(Error::EmptyBox),
        Err(_) => {
            let mut best = &agg.candidates[0];
            for cand in &agg.candidates[1..] {
                if cand.error_level < best.error_level {
                    best = cand;
                }
            }
            Ok(best.clone())
        }
    }
}

/// One swept input axis of a prediction grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub feature: String,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl SweepAxis {
    fn value_at(&self, i: usize) -> f64 {
        if self.steps == 1 {
            return self.min;
        }
        self.min + (self.max - self.min) * i as f64 / (self.steps - 1) as f64
    }
}

/// A dense 2-D sweep: two axes vary, every other input is fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub axis1: SweepAxis,
    pub axis2: SweepAxis,
    pub fixed: Vec<(String, f64)>,
}

/// One evaluated grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub a1: f64,
    pub a2: f64,
    pub prediction: f64,
    pub underflow: bool,
}

/// Evaluates the rule base over the Cartesian grid, axis1 outer and axis2
/// inner (row-major). Cells where the total firing strength underflowed are
/// flagged.
pub fn predict_grid(rb: &TskRuleBase, spec: &GridSpec) -> Result<Vec<GridCell>> {
    if spec.axis1.steps < 2 || spec.axis2.steps < 2 {
        return Err(Error::InvalidConfig("sweep resolutions must be >= 2".into()));
    }
    let find = |name: &str| -> Result<usize> {
        rb.input_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownAttribute(name.to_string()))
    };
    let i1 = find(&spec.axis1.feature)?;
    let i2 = find(&spec.axis2.feature)?;
    if i1 == i2 {
        return Err(Error::InvalidConfig("the two sweep axes must differ".into()));
    }
    let mut base = vec![f64::NAN; rb.n_inputs()];
    for (name, v) in &spec.fixed {
        base[find(name)?] = *v;
    }
    for (j, v) in base.iter().enumerate() {
        if j != i1 && j != i2 && !v.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "input `{}` is neither swept nor fixed",
                rb.input_names[j]
            )));
        }
    }
    let mut cells = Vec::with_capacity(spec.axis1.steps * spec.axis2.steps);
    let mut x = base;
    for i in 0..spec.axis1.steps {
        x[i1] = spec.axis1.value_at(i);
        for j in 0..spec.axis2.steps {
            x[i2] = spec.axis2.value_at(j);
            let out = rb.eval_detailed(&x)?;
            cells.push(GridCell {
                a1: x[i1],
                a2: x[i2],
                prediction: out.value,
                underflow: out.underflow,
            });
        }
    }
    Ok(cells)
}

/// CSV export of a prediction grid.
pub fn grid_to_csv(spec: &GridSpec, cells: &[GridCell]) -> String {
    let mut out = format!("{},{},prediction,underflow\n", spec.axis1.feature, spec.axis2.feature);
    for c in cells {
        out.push_str(&format!("{},{},{},{}\n", c.a1, c.a2, c.prediction, c.underflow));
    }
    out
}

/// Artifacts of the rough-set branch.
#[derive(Debug, Clone)]
pub struct RstBranch {
    pub table: DecisionTable,
    /// All decision-relative reducts, as attribute-name lists.
    pub reducts: Vec<Vec<String>>,
    /// Rules extracted over the first (smallest) reduct.
    pub rules: Vec<DecisionRule>,
    pub discretizers: Vec<Discretizer1D>,
    pub target_discretizer: Discretizer1D,
}

/// Scales every attribute and the target into symbolic levels with 1-D SOM
/// discretizers, builds the decision table, and extracts decision-relative
/// reducts plus the decision rules over the smallest reduct. Attributes with
/// fewer distinct values than `levels` get as many levels as they have.
pub fn run_rst_branch(data: &Dataset, levels: usize) -> Result<RstBranch> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let samples = data.raw_samples();
    let mut discretizers = Vec::with_capacity(samples.dim());
    for j in 0..samples.dim() {
        let column: Vec<f64> = samples.x.iter().map(|r| r[j]).collect();
        discretizers.push(fit_capped(&column, levels)?);
    }
    let target_discretizer = fit_capped(&samples.y, levels)?;
    let table = scale_samples_to_table(&samples, &discretizers, &target_discretizer)?;

    let matrix = discernibility_matrix(&table, true);
    let formula = discernibility_function(&matrix);
    let reduct_sets = reducts(&formula, table.n_attributes())?;
    let chosen = reduct_sets.first().copied().unwrap_or_default();
    let chosen_names = chosen.names(&table);
    let rules = extract_decision_rules(&table, &chosen_names)?;
    let reduct_names = reduct_sets.iter().map(|s| s.names(&table)).collect();
    Ok(RstBranch {
        table,
        reducts: reduct_names,
        rules,
        discretizers,
        target_discretizer,
    })
}

/// Fits a discretizer with at most `levels` levels, dropping to the number
/// of distinct values when the column is coarser than the level count.
fn fit_capped(values: &[f64], levels: usize) -> Result<Discretizer1D> {
    let mut distinct = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    distinct.dedup();
    let effective = levels.min(distinct.len()).max(1);
    if effective == distinct.len() {
        // the distinct values are their own centers
        return Ok(Discretizer1D { centers: distinct });
    }
    fit_discretizer(values, effective)
}
