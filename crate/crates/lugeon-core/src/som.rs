//! Kohonen self-organizing map: winner-takes-all competitive training on a
//! rectangular lattice, crisp-granule extraction, and a 1-D variant that
//! discretizes a scalar attribute into ordered symbolic levels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Samples;
use crate::error::{Error, Result};

/// A trained or untrained lattice of codebook vectors, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SomGrid {
    pub rows: usize,
    pub cols: usize,
    pub dim: usize,
    pub codebook: Vec<Vec<f64>>,
    pub trained_epochs: usize,
}

impl SomGrid {
    pub fn weights(&self, row: usize, col: usize) -> &[f64] {
        &self.codebook[row * self.cols + col]
    }

    pub fn n_neurons(&self) -> usize {
        self.rows * self.cols
    }
}

/// Exponential decay schedule for the learning rate and neighborhood radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSchedule {
    pub epochs: usize,
    pub lr_start: f64,
    pub lr_end: f64,
    pub radius_start: f64,
    pub radius_end: f64,
    pub seed: u64,
}

impl TrainSchedule {
    /// Default schedule for a grid of the given size: lr 0.5 -> 0.01,
    /// radius max(rows, cols)/2 -> 0.5, 500 epochs.
    pub fn defaults_for(rows: usize, cols: usize, seed: u64) -> Self {
        TrainSchedule {
            epochs: 500,
            lr_start: 0.5,
            lr_end: 0.01,
            radius_start: rows.max(cols) as f64 / 2.0,
            radius_end: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.epochs >= 1
            && self.lr_start > 0.0
            && self.lr_start <= 1.0
            && self.lr_end > 0.0
            && self.lr_end <= self.lr_start
            && self.radius_start > 0.0
            && self.radius_end > 0.0
            && self.radius_end <= self.radius_start;
        if !ok {
            return Err(Error::InvalidConfig(
                "schedule endpoints must decay monotonically and stay positive".into(),
            ));
        }
        Ok(())
    }

    fn lr_at(&self, epoch: usize) -> f64 {
        decay(self.lr_start, self.lr_end, epoch, self.epochs)
    }

    fn radius_at(&self, epoch: usize) -> f64 {
        decay(self.radius_start, self.radius_end, epoch, self.epochs)
    }
}

fn decay(start: f64, end: f64, epoch: usize, epochs: usize) -> f64 {
    let denom = epochs.saturating_sub(1).max(1) as f64;
    start * (end / start).powf(epoch as f64 / denom)
}

/// Codebook vectors drawn uniformly inside the per-feature data bounds.
pub fn init_som(rows: usize, cols: usize, dim: usize, data: &Samples, seed: u64) -> Result<SomGrid> {
    if rows == 0 || cols == 0 || dim == 0 {
        return Err(Error::InvalidConfig("grid dimensions must be >= 1".into()));
    }
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: data.dim() });
    }
    let bounds = data.bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let codebook = (0..rows * cols)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| if lo < hi { rng.random_range(lo..=hi) } else { lo })
                .collect()
        })
        .collect();
    Ok(SomGrid { rows, cols, dim, codebook, trained_epochs: 0 })
}

/// Best matching unit: argmin of the squared Euclidean distance over all
/// neurons, ties broken by the smaller (row, col) in row-major order.
pub fn find_bmu(grid: &SomGrid, x: &[f64]) -> Result<(usize, usize)> {
    if x.len() != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: x.len() });
    }
    let mut best = 0;
    let mut best_d = dist_sq(&grid.codebook[0], x);
    for (i, w) in grid.codebook.iter().enumerate().skip(1) {
        let d = dist_sq(w, x);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    Ok((best / grid.cols, best % grid.cols))
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Moves a codebook vector toward the input by `step` in [0, 1].
pub(crate) fn nudge(w: &mut [f64], x: &[f64], step: f64) {
    for (wi, &xi) in w.iter_mut().zip(x) {
        *wi += step * (xi - *wi);
    }
}

/// Competitive training with a Gaussian neighborhood over grid coordinates.
/// Presentation order is a fresh seeded permutation each epoch; the whole
/// procedure is deterministic for a fixed schedule.
pub fn train_som(grid: &SomGrid, data: &Samples, schedule: &TrainSchedule) -> Result<SomGrid> {
    schedule.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    if data.dim() != grid.dim {
        return Err(Error::DimensionMismatch { expected: grid.dim, got: data.dim() });
    }
    let mut out = grid.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(schedule.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..schedule.epochs {
        let lr = schedule.lr_at(epoch);
        let sigma = schedule.radius_at(epoch);
        let two_sigma_sq = 2.0 * sigma * sigma;
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &data.x[i];
            let (br, bc) = find_bmu(&out, x)?;
            for r in 0..out.rows {
                for c in 0..out.cols {
                    let dr = r as f64 - br as f64;
                    let dc = c as f64 - bc as f64;
                    let h = (-(dr * dr + dc * dc) / two_sigma_sq).exp();
                    nudge(&mut out.codebook[r * out.cols + c], x, lr * h);
                }
            }
        }
    }
    out.trained_epochs += schedule.epochs;
    Ok(out)
}

/// Mean Euclidean distance from each record to its best matching unit.
pub fn quantization_error(grid: &SomGrid, data: &Samples) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sum = 0.0;
    for x in &data.x {
        let (r, c) = find_bmu(grid, x)?;
        sum += dist_sq(grid.weights(r, c), x).sqrt();
    }
    Ok(sum / data.len() as f64)
}

/// Crisp granules: one output row per neuron that is the BMU of at least one
/// record. The granule's features are the codebook vector, its target the
/// mean target of the mapped records, its weight the mapped-record count.
/// Granules appear in row-major neuron order.
pub fn extract_crisp_granules(grid: &SomGrid, data: &Samples) -> Result<Samples> {
    if data.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n_neurons = grid.n_neurons();
    let mut sums = vec![0.0; n_neurons];
    let mut counts = vec![0usize; n_neurons];
    for (x, &y) in data.x.iter().zip(&data.y) {
        let (r, c) = find_bmu(grid, x)?;
        let idx = r * grid.cols + c;
        sums[idx] += y;
        counts[idx] += 1;
    }
    let mut out = Samples {
        input_names: data.input_names.clone(),
        target_name: data.target_name.clone(),
        x: Vec::new(),
        y: Vec::new(),
        weight: Vec::new(),
    };
    for idx in 0..n_neurons {
        if counts[idx] > 0 {
            out.x.push(grid.codebook[idx].clone());
            out.y.push(sums[idx] / counts[idx] as f64);
            out.weight.push(counts[idx] as f64);
        }
    }
    Ok(out)
}

/// Scalar discretizer built from a trained 1 x levels SOM: ascending centers
/// labelled 1 (lowest) through `levels` (highest).
#[derive(Debug, Clone, PartialEq)]
pub struct Discretizer1D {
    pub centers: Vec<f64>,
}

impl Discretizer1D {
    pub fn levels(&self) -> usize {
        self.centers.len()
    }

    /// Label of the nearest center in 1..=levels, ties to the lower label.
    pub fn apply(&self, v: f64) -> usize {
        let mut best = 0;
        let mut best_d = (v - self.centers[0]).abs();
        for (i, &c) in self.centers.iter().enumerate().skip(1) {
            let d = (v - c).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best + 1
    }
}

// fit_discretizer has no caller-facing seed; a fixed one keeps it repeatable.
const DISCRETIZER_SEED: u64 = 0xd15c;

/// Fits `levels` ordered centers to scalar values by training a 1 x levels
/// SOM, then sorting the codebook. Falls back to mid-quantiles of the
/// distinct values if training collapses two centers onto each other.
pub fn fit_discretizer(values: &[f64], levels: usize) -> Result<Discretizer1D> {
    if levels == 0 {
        return Err(Error::InvalidConfig("levels must be >= 1".into()));
    }
    let mut distinct: Vec<f64> = values.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    distinct.dedup();
    if distinct.len() < levels {
        return Err(Error::TooFewDistinctValues { needed: levels, found: distinct.len() });
    }
    let data = Samples {
        input_names: vec!["value".into()],
        target_name: "unused".into(),
        x: values.iter().map(|&v| vec![v]).collect(),
        y: vec![0.0; values.len()],
        weight: vec![1.0; values.len()],
    };
    let grid = init_som(1, levels, 1, &data, DISCRETIZER_SEED)?;
    let schedule = TrainSchedule {
        epochs: 120,
        lr_start: 0.5,
        lr_end: 0.01,
        radius_start: (levels as f64 / 2.0).max(1.0),
        radius_end: 0.25,
        seed: DISCRETIZER_SEED,
    };
    let trained = train_som(&grid, &data, &schedule)?;
    let mut centers: Vec<f64> = trained.codebook.iter().map(|w| w[0]).collect();
    centers.sort_by(|a, b| a.partial_cmp(b).expect("finite centers"));
    let strictly_ascending = centers.windows(2).all(|w| w[0] < w[1]);
    if !strictly_ascending {
        centers = (0..levels)
            .map(|i| quantile(&distinct, (i as f64 + 0.5) / levels as f64))
            .collect();
    }
    Ok(Discretizer1D { centers })
}

/// Linear-interpolated quantile of an ascending slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Codebook export: `row,col,w1..w_dim`, floats in shortest round-trip form.
pub fn codebook_to_csv(grid: &SomGrid) -> String {
    let mut out = String::from("row,col");
    for j in 0..grid.dim {
        out.push_str(&format!(",w{}", j + 1));
    }
    out.push('\n');
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            out.push_str(&format!("{r},{c}"));
            for w in grid.weights(r, c) {
                out.push_str(&format!(",{w}"));
            }
            out.push('\n');
        }
    }
    out
}

/// Parses the `codebook_to_csv` format back into a grid.
pub fn codebook_from_csv(text: &str) -> Result<SomGrid> {
    let mut lines = text.lines();
    let header = lines.next().ok_or(Error::EmptyInput)?;
    let dim = header.split(',').count().saturating_sub(2);
    if dim == 0 {
        return Err(Error::InvalidConfig("codebook header has no weight columns".into()));
    }
    let mut cells: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != dim + 2 {
            return Err(Error::RowParse {
                line: i + 2,
                field: String::new(),
                reason: format!("expected {} fields, got {}", dim + 2, parts.len()),
            });
        }
        let parse = |s: &str, field: &str| -> Result<f64> {
            s.parse().map_err(|_| Error::RowParse {
                line: i + 2,
                field: field.to_string(),
                reason: format!("`{s}` is not a number"),
            })
        };
        let row = parse(parts[0], "row")? as usize;
        let col = parse(parts[1], "col")? as usize;
        let mut w = Vec::with_capacity(dim);
        for (j, p) in parts[2..].iter().enumerate() {
            w.push(parse(p, &format!("w{}", j + 1))?);
        }
        cells.push((row, col, w));
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }
    let rows = cells.iter().map(|c| c.0).max().unwrap() + 1;
    let cols = cells.iter().map(|c| c.1).max().unwrap() + 1;
    if cells.len() != rows * cols {
        return Err(Error::InvalidConfig(format!(
            "codebook covers {} cells but the grid is {rows}x{cols}",
            cells.len()
        )));
    }
    let mut codebook = vec![Vec::new(); rows * cols];
    for (r, c, w) in cells {
        codebook[r * cols + c] = w;
    }
    Ok(SomGrid { rows, cols, dim, codebook, trained_epochs: 0 })
}
