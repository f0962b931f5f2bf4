//! Classical LDA and capped `l_{2,1}`-norm LDA.
//!
//! Capped LDA minimizes
//!
//! ```text
//!   sum_l min(||W^T h_w[l]||, eps) / sum_i min(||W^T h_b[i]||, eps)
//! ```
//!
//! by alternating between the weights `F`, `G` at the current `W` and the
//! generalized eigenproblem `S_1 w = lambda S_2 w` built from them.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::dataset::{ClassStats, Dataset};
use crate::error::{Error, Result};
use crate::linalg::{gen_eig_spd, EigenPairs};
use crate::scatter::{clda_weights, projected_norms, weighted_scatters, ScatterPair};

/// Eigenpairs whose `S_1` Rayleigh quotient falls below this fraction of
/// `||S_1||_F` count as zero eigenvalues.
const NULL_RAYLEIGH_TOL: f64 = 1e-10;

/// Diagonal loading added to the right-hand scatter before factorization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ridge {
    /// `scale * tr(S) / n`.
    Relative(f64),
    Absolute(f64),
}

impl Ridge {
    pub fn resolve(&self, s: &Array2<f64>) -> f64 {
        match *self {
            Ridge::Relative(scale) => scale * s.diag().sum() / s.nrows().max(1) as f64,
            Ridge::Absolute(v) => v,
        }
    }

    fn validate(&self) -> Result<()> {
        let v = match *self {
            Ridge::Relative(v) | Ridge::Absolute(v) => v,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("ridge must be finite and >= 0, got {v}")))
        }
    }
}

impl Default for Ridge {
    fn default() -> Self {
        Ridge::Relative(1e-8)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CldaConfig {
    /// Cap on projected residual norms.
    pub epsilon: f64,
    /// Target dimension.
    pub d: usize,
    pub max_iter: usize,
    /// Relative change of the objective that counts as converged.
    pub tol: f64,
    pub ridge: Ridge,
    /// Lower clamp for residual norms inside the reciprocal weights.
    pub zero_guard: f64,
}

impl CldaConfig {
    pub fn new(epsilon: f64, d: usize) -> Self {
        Self {
            epsilon,
            d,
            max_iter: 50,
            tol: 1e-6,
            ridge: Ridge::default(),
            zero_guard: 1e-8,
        }
    }

    pub fn validate(&self, n_features: usize) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        if self.d == 0 || self.d > n_features {
            return Err(Error::InvalidConfig(format!(
                "d must be in 1..={n_features}, got {}",
                self.d
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol must be > 0, got {}", self.tol)));
        }
        if !(self.zero_guard > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "zero_guard must be > 0, got {}",
                self.zero_guard
            )));
        }
        self.ridge.validate()
    }
}

/// A learned `n x d` transformation plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub w: Array2<f64>,
    /// Objective at the initial `W` followed by one entry per update. For
    /// LDA a single Rayleigh ratio.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Some iteration had fewer than `d` nonzero eigenvalues and was padded
    /// with null-space directions.
    pub padded: bool,
    /// Iterations in which every between-class term was capped and the
    /// uncapped class weights were used instead.
    pub between_fallbacks: usize,
    /// Active (uncapped) within-class residuals per iteration.
    pub active_within: Vec<usize>,
    /// Active between-class terms per iteration.
    pub active_between: Vec<usize>,
}

impl Projection {
    pub fn n_features(&self) -> usize {
        self.w.nrows()
    }

    pub fn dim(&self) -> usize {
        self.w.ncols()
    }

    /// `W^T X` for an `n x m` block of column samples.
    pub fn project(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "projection expects {} rows, got {}",
                self.n_features(),
                x.nrows()
            )));
        }
        Ok(self.w.t().dot(&x))
    }

    pub fn project_vec(&self, x: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::ShapeMismatch(format!(
                "projection expects length {}, got {}",
                self.n_features(),
                x.len()
            )));
        }
        Ok(self.w.t().dot(&x))
    }

    fn from_w(w: Array2<f64>, trace: Vec<f64>) -> Self {
        Self {
            w,
            objective_trace: trace,
            iterations: 0,
            converged: true,
            padded: false,
            between_fallbacks: 0,
            active_within: Vec::new(),
            active_between: Vec::new(),
        }
    }
}

/// Numerator, denominator and ratio of the capped objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CldaObjective {
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

pub fn clda_objective(
    w: ArrayView2<'_, f64>,
    pair: &ScatterPair,
    epsilon: f64,
) -> Result<CldaObjective> {
    let numerator: f64 = projected_norms(w, pair.h_w.view())?
        .iter()
        .map(|r| r.min(epsilon))
        .sum();
    let denominator: f64 = projected_norms(w, pair.h_b.view())?
        .iter()
        .map(|r| r.min(epsilon))
        .sum();
    if denominator == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(CldaObjective {
        numerator,
        denominator,
        ratio: numerator / denominator,
    })
}

fn require_classes(data: &Dataset) -> Result<()> {
    if data.n_classes() < 2 {
        return Err(Error::InvalidConfig(format!(
            "discriminant analysis needs at least 2 classes, got {}",
            data.n_classes()
        )));
    }
    Ok(())
}

fn add_ridge(s: &Array2<f64>, ridge: f64) -> Array2<f64> {
    let mut b = s.clone();
    b.diag_mut().mapv_inplace(|v| v + ridge);
    b
}

fn frobenius_sq(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum()
}

/// Classical LDA: top-`d` eigenvectors of `S_b w = lambda (S_w + ridge I) w`.
pub fn lda_fit(data: &Dataset, d: usize, ridge: Ridge) -> Result<Projection> {
    require_classes(data)?;
    ridge.validate()?;
    let n = data.n_features();
    if d == 0 || d > n {
        return Err(Error::InvalidConfig(format!("d must be in 1..={n}, got {d}")));
    }
    let stats = ClassStats::compute(data);
    let pair = ScatterPair::build(data, &stats);
    let (sb, sw) = pair.classical_scatters();
    let b = add_ridge(&sw, ridge.resolve(&sw));
    let eig = gen_eig_spd(sb.view(), b.view()).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => Error::SingularWithinScatter,
        other => other,
    })?;

    let top = eig.values[n - 1];
    let available = eig
        .values
        .iter()
        .filter(|&&l| top > 0.0 && l > 1e-10 * top)
        .count();
    if d > available {
        return Err(Error::DimensionTooLarge {
            requested: d,
            available,
        });
    }
    let mut w = Array2::zeros((n, d));
    for k in 0..d {
        w.column_mut(k).assign(&eig.vectors.column(n - 1 - k));
    }
    let between = frobenius_sq(&w.t().dot(&pair.h_b));
    let within = frobenius_sq(&w.t().dot(&pair.h_w));
    let ratio = if within > 0.0 { between / within } else { f64::INFINITY };
    Ok(Projection::from_w(w, vec![ratio]))
}

/// Picks `d` eigenvectors of the smallest nonzero eigenvalues, padding with
/// the smallest null-space ones when fewer than `d` are nonzero.
fn select_smallest_nonzero(eig: &EigenPairs, s1: &Array2<f64>, d: usize) -> (Array2<f64>, bool) {
    let n = eig.len();
    let s1_norm = frobenius_sq(s1).sqrt();
    let is_nonzero = |k: usize| {
        let v = eig.vectors.column(k);
        let vv = v.dot(&v);
        let q = v.dot(&s1.dot(&v)) / vv;
        q > NULL_RAYLEIGH_TOL * s1_norm
    };
    let mut chosen: Vec<usize> = (0..n).filter(|&k| is_nonzero(k)).take(d).collect();
    let padded = chosen.len() < d;
    if padded {
        let extra: Vec<usize> = (0..n).filter(|k| !chosen.contains(k)).collect();
        chosen.extend(extra.into_iter().take(d - chosen.len()));
        chosen.sort_unstable();
    }
    let mut w = Array2::zeros((n, d));
    for (dst, &k) in chosen.iter().enumerate() {
        let v = eig.vectors.column(k);
        let norm = v.dot(&v).sqrt();
        w.column_mut(dst).assign(&(&v / norm));
    }
    (w, padded)
}

/// Capped `l_{2,1}`-norm LDA by iterative reweighting.
///
/// Starts from the first `d` columns of the identity. Each update solves
/// `S_1 w = lambda (S_2 + ridge I) w` and keeps the eigenvectors of the `d`
/// smallest nonzero eigenvalues, rescaled to unit length so `epsilon` keeps
/// the units of the input features. Stops when the objective changes by at
/// most `tol * max(1, previous)` or after `max_iter` updates.
pub fn clda_fit(data: &Dataset, cfg: &CldaConfig) -> Result<Projection> {
    require_classes(data)?;
    let n = data.n_features();
    cfg.validate(n)?;
    let stats = ClassStats::compute(data);
    let pair = ScatterPair::build(data, &stats);

    let mut w: Array2<f64> = Array2::eye(n).slice(s![.., ..cfg.d]).to_owned();
    let initial = match clda_objective(w.view(), &pair, cfg.epsilon) {
        Ok(obj) => obj.ratio,
        Err(Error::DegenerateDenominator) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let mut proj = Projection::from_w(w.clone(), vec![initial]);
    proj.converged = false;

    for _ in 0..cfg.max_iter {
        let mut wd = clda_weights(w.view(), &pair, cfg.epsilon, cfg.zero_guard)?;
        if wd.n_active_f() == 0 {
            return Err(Error::AllSamplesCapped);
        }
        proj.active_within.push(wd.n_active_f());
        proj.active_between.push(wd.n_active_g());
        if wd.n_active_g() == 0 {
            let rb = projected_norms(w.view(), pair.h_b.view())?;
            wd.g = rb.mapv(|r| 1.0 / r.max(cfg.zero_guard));
            proj.between_fallbacks += 1;
        }

        let (s1, s2) = weighted_scatters(&pair, &wd)?;
        let b = add_ridge(&s2, cfg.ridge.resolve(&s2));
        let eig = gen_eig_spd(s1.view(), b.view()).map_err(|e| match e {
            Error::NotPositiveDefinite { .. } => Error::SingularBetweenScatter,
            other => other,
        })?;
        let (next, padded) = select_smallest_nonzero(&eig, &s1, cfg.d);
        proj.padded |= padded;

        let obj = clda_objective(next.view(), &pair, cfg.epsilon)?.ratio;
        let prev = *proj.objective_trace.last().expect("trace starts non-empty");
        proj.objective_trace.push(obj);
        proj.iterations += 1;
        w = next;
        if (obj - prev).abs() <= cfg.tol * prev.max(1.0) {
            proj.converged = true;
            break;
        }
    }
    proj.w = w;
    Ok(proj)
}

/// Free-function form of [`Projection::project`].
pub fn project(p: &Projection, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    p.project(x)
}

/// Column-wise unit normalization helper used by callers that compare
/// directions.
pub fn unit_columns(w: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut out = w.to_owned();
    for mut col in out.axis_iter_mut(Axis(1)) {
        let norm = col.dot(&col).sqrt();
        if norm > 0.0 {
            col /= norm;
        }
    }
    out
}
