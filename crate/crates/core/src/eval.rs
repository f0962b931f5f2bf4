//! 1-NN evaluation of learned projections and k-fold cross-validation with
//! a parameter grid.

use std::fmt;

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{ClassStats, Dataset};
use crate::discriminant::{clda_fit, lda_fit, CldaConfig, Projection, Ridge};
use crate::error::{Error, Result};
use crate::scatter::{projected_norms, ScatterPair};
use crate::synth::{add_gaussian_noise_inplace, derive_seed, NoiseSpec};

/// Default quantiles of the initial projected within-class norms used as
/// epsilon candidates.
pub const DEFAULT_QUANTILES: [f64; 6] = [0.5, 0.7, 0.8, 0.9, 0.95, 1.0];

/// Label of the Euclidean-nearest training column for each test column.
/// Ties go to the lowest training index.
pub fn nn_classify(
    train_proj: ArrayView2<'_, f64>,
    train_labels: &[usize],
    test_proj: ArrayView2<'_, f64>,
) -> Result<Vec<usize>> {
    if train_proj.ncols() == 0 {
        return Err(Error::EmptyTrainSet);
    }
    if train_proj.ncols() != train_labels.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} training columns but {} labels",
            train_proj.ncols(),
            train_labels.len()
        )));
    }
    if train_proj.nrows() != test_proj.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "train dimension {} differs from test dimension {}",
            train_proj.nrows(),
            test_proj.nrows()
        )));
    }
    let predictions = test_proj
        .axis_iter(Axis(1))
        .map(|t| {
            let mut best = (f64::INFINITY, 0);
            for (j, x) in train_proj.axis_iter(Axis(1)).enumerate() {
                let dist: f64 = x.iter().zip(t.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
                if dist < best.0 {
                    best = (dist, j);
                }
            }
            train_labels[best.1]
        })
        .collect();
    Ok(predictions)
}

/// Percentage of matching labels.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if truth.is_empty() {
        return 0.0;
    }
    let hits = predicted.iter().zip(truth).filter(|(a, b)| a == b).count();
    100.0 * hits as f64 / truth.len() as f64
}

/// Test-index sets of a k-fold partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Folds {
    pub test: Vec<Vec<usize>>,
    /// False when some class had fewer than `k` samples and the partition
    /// ignores classes.
    pub stratified: bool,
}

impl Folds {
    pub fn k(&self) -> usize {
        self.test.len()
    }

    /// Complement of fold `i` in `0..n`, ascending.
    pub fn train(&self, i: usize, n: usize) -> Vec<usize> {
        let mut mask = vec![true; n];
        for &j in &self.test[i] {
            mask[j] = false;
        }
        (0..n).filter(|&j| mask[j]).collect()
    }
}

/// Seeded k-fold split, stratified by class when every class has at least
/// `k` samples.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<Folds> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(Error::InvalidConfig(format!(
            "fold count must be in 2..={n}, got {k}"
        )));
    }
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut by_class = vec![Vec::new(); n_classes];
    for (j, &l) in labels.iter().enumerate() {
        by_class[l].push(j);
    }
    let stratified = by_class.iter().all(|members| members.len() >= k);
    let groups = if stratified {
        by_class
    } else {
        vec![(0..n).collect()]
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = vec![Vec::new(); k];
    // keep dealing where the previous class stopped so fold sizes stay even
    let mut next = 0;
    for mut members in groups {
        members.shuffle(&mut rng);
        for j in members {
            test[next].push(j);
            next = (next + 1) % k;
        }
    }
    for fold in &mut test {
        fold.sort_unstable();
    }
    Ok(Folds { test, stratified })
}

/// Per-feature affine map onto `[0, 1]` fitted on training columns. A
/// constant feature is shifted to 0 and left unscaled.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMax {
    pub min: Array1<f64>,
    pub scale: Array1<f64>,
}

impl MinMax {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let min = x.map_axis(Axis(1), |r| r.iter().copied().fold(f64::INFINITY, f64::min));
        let max = x.map_axis(Axis(1), |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        let scale = (&max - &min).mapv(|s| if s > 0.0 { s } else { 1.0 });
        Self { min, scale }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let min = self.min.view().insert_axis(Axis(1));
        let scale = self.scale.view().insert_axis(Axis(1));
        (&x - &min) / scale
    }
}

/// Linear-interpolation quantile of ascending `sorted`, `q` in `[0, 1]`.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Within-class norms projected on the first `d` coordinate axes.
pub fn initial_within_norms(data: &Dataset, d: usize) -> Result<Array1<f64>> {
    let n = data.n_features();
    if d == 0 || d > n {
        return Err(Error::InvalidConfig(format!("d must be in 1..={n}, got {d}")));
    }
    let pair = ScatterPair::build(data, &ClassStats::compute(data));
    let w0: Array2<f64> = Array2::eye(n).slice(s![.., ..d]).to_owned();
    projected_norms(w0.view(), pair.h_w.view())
}

/// Epsilon candidates from quantiles of the initial projected residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGrid {
    /// Ascending, without duplicates.
    pub values: Vec<f64>,
    /// A zero candidate was replaced by the zero guard.
    pub replaced_zero: bool,
}

pub fn epsilon_grid(
    data: &Dataset,
    d: usize,
    quantiles: &[f64],
    zero_guard: f64,
) -> Result<EpsilonGrid> {
    if let Some(q) = quantiles.iter().find(|&&q| !(q > 0.0 && q <= 1.0)) {
        return Err(Error::InvalidConfig(format!("quantile {q} outside (0, 1]")));
    }
    let mut norms = initial_within_norms(data, d)?.to_vec();
    norms.sort_by(f64::total_cmp);
    let mut replaced_zero = false;
    let mut values: Vec<f64> = quantiles
        .iter()
        .map(|&q| {
            let e = quantile_sorted(&norms, q);
            if e > 0.0 {
                e
            } else {
                replaced_zero = true;
                zero_guard
            }
        })
        .collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    Ok(EpsilonGrid {
        values,
        replaced_zero,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Lda,
    Clda,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lda => "LDA",
            Method::Clda => "CLDA",
        })
    }
}

/// How epsilon is chosen on each training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSpec {
    /// Quantile of the initial projected within-class norms.
    Quantile(f64),
    Fixed(f64),
}

impl fmt::Display for EpsilonSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonSpec::Quantile(q) => write!(f, "q{q}"),
            EpsilonSpec::Fixed(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub d: usize,
    /// Ignored by LDA.
    pub epsilon: Option<EpsilonSpec>,
}

/// `d` in `1..=min(n, c - 1)` for LDA; `d` in `1..=min(n, c)` crossed with
/// the quantiles for CLDA.
pub fn default_grid(method: Method, n_features: usize, n_classes: usize, quantiles: &[f64]) -> Vec<GridPoint> {
    match method {
        Method::Lda => (1..=n_features.min(n_classes.saturating_sub(1)))
            .map(|d| GridPoint { d, epsilon: None })
            .collect(),
        Method::Clda => (1..=n_features.min(n_classes))
            .flat_map(|d| {
                quantiles.iter().map(move |&q| GridPoint {
                    d,
                    epsilon: Some(EpsilonSpec::Quantile(q)),
                })
            })
            .collect(),
    }
}

/// Solver settings shared by every grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub ridge: Ridge,
    pub zero_guard: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        let c = CldaConfig::new(1.0, 1);
        Self {
            max_iter: c.max_iter,
            tol: c.tol,
            ridge: c.ridge,
            zero_guard: c.zero_guard,
        }
    }
}

/// Fits `method` at `point` on `train`. Returns the projection and the
/// epsilon actually used.
pub fn fit_point(
    train: &Dataset,
    method: Method,
    point: &GridPoint,
    opts: &SolverOptions,
) -> Result<(Projection, Option<f64>)> {
    match method {
        Method::Lda => Ok((lda_fit(train, point.d, opts.ridge)?, None)),
        Method::Clda => {
            let spec = point.epsilon.ok_or_else(|| {
                Error::InvalidConfig("capped LDA needs an epsilon specification".into())
            })?;
            let epsilon = match spec {
                EpsilonSpec::Fixed(e) => e,
                EpsilonSpec::Quantile(q) => {
                    epsilon_grid(train, point.d, &[q], opts.zero_guard)?.values[0]
                }
            };
            let cfg = CldaConfig {
                epsilon,
                d: point.d,
                max_iter: opts.max_iter,
                tol: opts.tol,
                ridge: opts.ridge,
                zero_guard: opts.zero_guard,
            };
            Ok((clda_fit(train, &cfg)?, Some(epsilon)))
        }
    }
}

fn score(
    proj: &Projection,
    train: &Dataset,
    test_x: ArrayView2<'_, f64>,
    test_labels: &[usize],
) -> Result<f64> {
    let tr = proj.project(train.features())?;
    let te = proj.project(test_x)?;
    let predicted = nn_classify(tr.view(), train.labels(), te.view())?;
    Ok(accuracy(&predicted, test_labels))
}

/// 1-NN test accuracy of `train`'s projection applied to `test`.
pub fn holdout_accuracy(
    train: &Dataset,
    test: &Dataset,
    method: Method,
    point: &GridPoint,
    opts: &SolverOptions,
) -> Result<(f64, Projection, Option<f64>)> {
    let (proj, eps) = fit_point(train, method, point, opts)?;
    let acc = score(&proj, train, test.features(), test.labels())?;
    Ok((acc, proj, eps))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub k: usize,
    pub seed: u64,
    pub method: Method,
    pub grid: Vec<GridPoint>,
    pub solver: SolverOptions,
    /// Rescale features to `[0, 1]` with training-fold statistics.
    pub normalize: bool,
    /// Pollution of the (normalized) training folds.
    pub noise: Option<NoiseSpec>,
}

impl CvConfig {
    pub fn new(method: Method, grid: Vec<GridPoint>, seed: u64) -> Self {
        Self {
            k: 10,
            seed,
            method,
            grid,
            solver: SolverOptions::default(),
            normalize: true,
            noise: None,
        }
    }
}

/// Mean cross-validated accuracy of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridScore {
    pub point: GridPoint,
    /// `None` if every fold failed.
    pub accuracy: Option<f64>,
    pub failed_folds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: Method,
    /// Mean of `per_fold`, in percent.
    pub accuracy: f64,
    pub per_fold: Vec<f64>,
    /// Sample standard deviation of `per_fold`.
    pub std_dev: f64,
    pub chosen: GridPoint,
    /// Epsilon used on each successful fold (CLDA only).
    pub epsilons: Vec<f64>,
    pub ridge: Ridge,
    pub stratified: bool,
    /// `(fold, error)` for folds of the chosen point that failed.
    pub failures: Vec<(usize, String)>,
    pub grid_scores: Vec<GridScore>,
    pub noise: Option<NoiseSpec>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let m = values.iter().sum::<f64>() / values.len() as f64;
    if values.len() < 2 {
        return (m, 0.0);
    }
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64;
    (m, var.sqrt())
}

type FoldOutcome = Result<(f64, Option<f64>)>;

fn run_fold(data: &Dataset, folds: &Folds, i: usize, cfg: &CvConfig) -> Result<Vec<FoldOutcome>> {
    let mut train = data.select(&folds.train(i, data.n_samples()))?;
    // a non-stratified test fold may miss classes, so it stays a bare matrix
    let mut test_x = data.features().select(Axis(1), &folds.test[i]);
    let test_labels: Vec<usize> = folds.test[i].iter().map(|&j| data.labels()[j]).collect();
    if cfg.normalize {
        let mm = MinMax::fit(train.features());
        train = train.with_features(mm.apply(train.features()))?;
        test_x = mm.apply(test_x.view());
    }
    if let Some(noise) = &cfg.noise {
        let mut x = train.features().to_owned();
        add_gaussian_noise_inplace(&mut x, &noise.with_seed(derive_seed(noise.seed, i as u64)))?;
        train = train.with_features(x)?;
    }
    Ok(cfg
        .grid
        .iter()
        .map(|point| {
            let (proj, eps) = fit_point(&train, cfg.method, point, &cfg.solver)?;
            let acc = score(&proj, &train, test_x.view(), &test_labels)?;
            Ok((acc, eps))
        })
        .collect())
}

/// Stratified k-fold CV over a parameter grid; reports the grid point with
/// the best mean accuracy (first in grid order on ties).
///
/// Folds run in parallel; results are reduced in fold order so the report
/// only depends on the inputs.
pub fn kfold_cv(data: &Dataset, cfg: &CvConfig) -> Result<EvalReport> {
    if cfg.grid.is_empty() {
        return Err(Error::InvalidConfig("parameter grid is empty".into()));
    }
    if let Some(noise) = &cfg.noise {
        noise.validate()?;
    }
    let folds = stratified_folds(data.labels(), cfg.k, cfg.seed)?;
    let outcomes: Vec<Vec<FoldOutcome>> = (0..folds.k())
        .into_par_iter()
        .map(|i| run_fold(data, &folds, i, cfg))
        .collect::<Result<_>>()?;

    let mut grid_scores = Vec::with_capacity(cfg.grid.len());
    let mut best: Option<(usize, f64)> = None;
    for (g, point) in cfg.grid.iter().enumerate() {
        let accs: Vec<f64> = outcomes
            .iter()
            .filter_map(|fold| fold[g].as_ref().ok().map(|(a, _)| *a))
            .collect();
        let failed = folds.k() - accs.len();
        let score = (!accs.is_empty()).then(|| mean_std(&accs).0);
        if let Some(m) = score {
            if best.is_none_or(|(_, b)| m > b) {
                best = Some((g, m));
            }
        }
        grid_scores.push(GridScore {
            point: *point,
            accuracy: score,
            failed_folds: failed,
        });
    }

    let Some((g, _)) = best else {
        let first = outcomes
            .iter()
            .find_map(|fold| fold[0].as_ref().err())
            .map_or_else(String::new, |e| e.to_string());
        return Err(Error::GridPointFailed(format!(
            "every fold of every grid point failed; first error: {first}"
        )));
    };
    let mut per_fold = Vec::new();
    let mut epsilons = Vec::new();
    let mut failures = Vec::new();
    for (i, fold) in outcomes.iter().enumerate() {
        match &fold[g] {
            Ok((acc, eps)) => {
                per_fold.push(*acc);
                epsilons.extend(eps);
            }
            Err(e) => failures.push((i, e.to_string())),
        }
    }
    let (accuracy, std_dev) = mean_std(&per_fold);
    Ok(EvalReport {
        method: cfg.method,
        accuracy,
        per_fold,
        std_dev,
        chosen: cfg.grid[g],
        epsilons,
        ridge: cfg.solver.ridge,
        stratified: folds.stratified,
        failures,
        grid_scores,
        noise: cfg.noise,
    })
}
