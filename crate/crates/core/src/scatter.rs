//! Centered class matrices, classical scatters and the reweighted scatters
//! used by the capped-norm solver.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::dataset::{ClassStats, Dataset};
use crate::error::{Error, Result};

/// Between-class and within-class centered matrices.
///
/// `h_b` is `n x c` with column `i` equal to `sqrt(N_i) (mean_i - mean)`.
/// `h_w` is `n x N` with columns `x - mean_{class(x)}`, ordered class-major
/// and by sample order within a class.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPair {
    pub h_b: Array2<f64>,
    pub h_w: Array2<f64>,
    /// Original sample index of each `h_w` column.
    pub sample_of_column: Vec<usize>,
    /// Class of each `h_w` column.
    pub class_of_column: Vec<usize>,
}

impl ScatterPair {
    pub fn build(data: &Dataset, stats: &ClassStats) -> Self {
        let n = data.n_features();
        let c = data.n_classes();
        let mut h_b = Array2::zeros((n, c));
        for i in 0..c {
            let scale = (stats.class_counts[i] as f64).sqrt();
            let col = (&stats.class_mean(i) - &stats.global_mean) * scale;
            h_b.column_mut(i).assign(&col);
        }

        let mut sample_of_column = Vec::with_capacity(data.n_samples());
        for i in 0..c {
            sample_of_column.extend(
                data.labels()
                    .iter()
                    .enumerate()
                    .filter(|(_, &l)| l == i)
                    .map(|(j, _)| j),
            );
        }
        let class_of_column: Vec<usize> =
            sample_of_column.iter().map(|&j| data.labels()[j]).collect();
        let mut h_w = Array2::zeros((n, data.n_samples()));
        for (col, (&j, &i)) in sample_of_column.iter().zip(&class_of_column).enumerate() {
            let centered = &data.sample(j) - &stats.class_mean(i);
            h_w.column_mut(col).assign(&centered);
        }
        Self {
            h_b,
            h_w,
            sample_of_column,
            class_of_column,
        }
    }

    pub fn n_samples(&self) -> usize {
        self.h_w.ncols()
    }

    /// `(S_b, S_w) = (H_b H_b^T / N, H_w H_w^T / N)`.
    pub fn classical_scatters(&self) -> (Array2<f64>, Array2<f64>) {
        let inv_n = 1.0 / self.n_samples() as f64;
        (
            self.h_b.dot(&self.h_b.t()) * inv_n,
            self.h_w.dot(&self.h_w.t()) * inv_n,
        )
    }
}

/// Convenience for `ScatterPair::build`.
pub fn build_centered(data: &Dataset, stats: &ClassStats) -> ScatterPair {
    ScatterPair::build(data, stats)
}

/// `||W^T m_j||_2` for every column `m_j`.
pub fn projected_norms(w: ArrayView2<'_, f64>, m: ArrayView2<'_, f64>) -> Result<Array1<f64>> {
    if w.nrows() != m.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "projection has {} rows, data has {}",
            w.nrows(),
            m.nrows()
        )));
    }
    let p = w.t().dot(&m);
    let norms = p.map_axis(Axis(0), |col| col.dot(&col).sqrt());
    if norms.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("projected norms"));
    }
    Ok(norms)
}

/// Diagonals of the sample weights `F` and class weights `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightDiag {
    /// One per `h_w` column.
    pub f: Array1<f64>,
    /// One per class.
    pub g: Array1<f64>,
    pub active_f: Vec<bool>,
    pub active_g: Vec<bool>,
}

impl WeightDiag {
    pub fn n_active_f(&self) -> usize {
        self.active_f.iter().filter(|&&a| a).count()
    }

    pub fn n_active_g(&self) -> usize {
        self.active_g.iter().filter(|&&a| a).count()
    }
}

fn capped_reciprocal(norms: &Array1<f64>, epsilon: f64, zero_guard: f64) -> (Array1<f64>, Vec<bool>) {
    let active: Vec<bool> = norms.iter().map(|&r| r <= epsilon).collect();
    let weights = norms
        .iter()
        .zip(&active)
        .map(|(&r, &a)| if a { 1.0 / r.max(zero_guard) } else { 0.0 })
        .collect();
    (weights, active)
}

/// Reweighting at the current projection: `1/max(r, guard)` for residuals
/// with `r <= epsilon`, zero otherwise.
pub fn clda_weights(
    w: ArrayView2<'_, f64>,
    pair: &ScatterPair,
    epsilon: f64,
    zero_guard: f64,
) -> Result<WeightDiag> {
    let rw = projected_norms(w, pair.h_w.view())?;
    let rb = projected_norms(w, pair.h_b.view())?;
    let (f, active_f) = capped_reciprocal(&rw, epsilon, zero_guard);
    let (g, active_g) = capped_reciprocal(&rb, epsilon, zero_guard);
    Ok(WeightDiag {
        f,
        g,
        active_f,
        active_g,
    })
}

/// `S_1 = H_w F H_w^T` and `S_2 = H_b G H_b^T`.
pub fn weighted_scatters(pair: &ScatterPair, wd: &WeightDiag) -> Result<(Array2<f64>, Array2<f64>)> {
    if wd.f.len() != pair.h_w.ncols() || wd.g.len() != pair.h_b.ncols() {
        return Err(Error::ShapeMismatch(format!(
            "weights ({}, {}) do not match columns ({}, {})",
            wd.f.len(),
            wd.g.len(),
            pair.h_w.ncols(),
            pair.h_b.ncols()
        )));
    }
    Ok((
        weighted_gram(pair.h_w.view(), &wd.f),
        weighted_gram(pair.h_b.view(), &wd.g),
    ))
}

fn weighted_gram(h: ArrayView2<'_, f64>, weights: &Array1<f64>) -> Array2<f64> {
    let scaled = &h * &weights.view().insert_axis(Axis(0));
    let mut s = scaled.dot(&h.t());
    // exact symmetry
    let n = s.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (s[[i, j]] + s[[j, i]]);
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    s
}
