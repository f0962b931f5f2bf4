//! Labelled sample matrices and per-class statistics.
//!
//! Samples are stored as matrix columns: a dataset with `n` features and `N`
//! samples holds an `n x N` feature matrix.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Feature matrix with dense class indices.
///
/// Class indices are `0..c`, assigned in order of first appearance of the
/// original label; the original labels are kept in `class_names`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
}

impl Dataset {
    /// Validates a raw matrix (`n x N`, samples as columns) and its labels.
    pub fn new<L: ToString>(features: Array2<f64>, labels: &[L]) -> Result<Self> {
        if features.ncols() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} sample columns but {} labels",
                features.ncols(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut class_names = Vec::new();
        let dense = labels
            .iter()
            .map(|l| {
                let key = l.to_string();
                *index.entry(key.clone()).or_insert_with(|| {
                    class_names.push(key);
                    class_names.len() - 1
                })
            })
            .collect();
        Self::from_parts(features, dense, class_names)
    }

    /// Builds a dataset from already dense indices `0..c`.
    pub fn from_parts(
        features: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        if features.ncols() != labels.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} sample columns but {} labels",
                features.ncols(),
                labels.len()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("features"));
        }
        let c = class_names.len();
        let mut counts = vec![0usize; c];
        for &l in &labels {
            if l >= c {
                return Err(Error::ShapeMismatch(format!(
                    "label index {l} out of range for {c} classes"
                )));
            }
            counts[l] += 1;
        }
        if let Some(empty) = counts.iter().position(|&k| k == 0) {
            return Err(Error::EmptyClass(empty));
        }
        Ok(Self {
            features,
            labels,
            class_names,
        })
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Feature dimension `n`.
    pub fn n_features(&self) -> usize {
        self.features.nrows()
    }

    /// Sample count `N`.
    pub fn n_samples(&self) -> usize {
        self.features.ncols()
    }

    /// Class count `c`.
    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    pub fn sample(&self, j: usize) -> ArrayView1<'_, f64> {
        self.features.column(j)
    }

    /// Sub-dataset of the given sample indices, keeping the class table.
    ///
    /// Fails with `EmptyClass` if a class is not represented.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let features = self.features.select(Axis(1), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Self::from_parts(features, labels, self.class_names.clone())
    }

    /// Same labels, new features of identical shape.
    pub fn with_features(&self, features: Array2<f64>) -> Result<Self> {
        if features.dim() != self.features.dim() {
            return Err(Error::ShapeMismatch(format!(
                "expected {:?}, got {:?}",
                self.features.dim(),
                features.dim()
            )));
        }
        Self::from_parts(features, self.labels.clone(), self.class_names.clone())
    }

    pub fn into_features(self) -> Array2<f64> {
        self.features
    }
}

/// Global mean, class means and class counts of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    pub global_mean: Array1<f64>,
    /// `n x c`, column `i` is the mean of class `i`.
    pub class_means: Array2<f64>,
    pub class_counts: Vec<usize>,
}

impl ClassStats {
    pub fn compute(data: &Dataset) -> Self {
        let n = data.n_features();
        let c = data.n_classes();
        let counts = data.class_counts();
        let mut sums = Array2::<f64>::zeros((n, c));
        for (j, &l) in data.labels().iter().enumerate() {
            let mut col = sums.column_mut(l);
            col += &data.sample(j);
        }
        let global_mean = sums.sum_axis(Axis(1)) / data.n_samples() as f64;
        let mut class_means = sums;
        for (i, mut col) in class_means.axis_iter_mut(Axis(1)).enumerate() {
            col /= counts[i] as f64;
        }
        Self {
            global_mean,
            class_means,
            class_counts: counts,
        }
    }

    pub fn class_mean(&self, i: usize) -> ArrayView1<'_, f64> {
        self.class_means.column(i)
    }
}
