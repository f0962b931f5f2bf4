//! Synthetic data: the horizontal/vertical strip problem with outliers, and
//! Gaussian feature pollution.
//!
//! All randomness comes from `ChaCha8Rng`. Independent sub-streams of one
//! user seed are obtained with [`derive_seed`].

use ndarray::{Array2, ArrayView1};
use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Points per class before the split.
pub const STRIP_POINTS: usize = 120;
/// Outliers appended to each training class.
pub const OUTLIERS_PER_CLASS: usize = 3;
/// Centre of the vertical strip on the x-axis.
pub const VERTICAL_OFFSET: f64 = 12.0;
const HORIZONTAL_OUTLIER: (f64, f64) = (-60.0, 20.0);
const VERTICAL_OUTLIER: (f64, f64) = (VERTICAL_OFFSET, 20.0);

/// Sub-seed for stream `stream` of `seed`: the first word of ChaCha8 keyed by
/// `seed` on stream `stream`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Gaussian pollution of a random subset of samples and features.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub feature_fraction: f64,
    pub sample_fraction: f64,
    pub variance: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(feature_fraction: f64, sample_fraction: f64, variance: f64, seed: u64) -> Result<Self> {
        let spec = Self {
            feature_fraction,
            sample_fraction,
            variance,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let frac_ok = |f: f64| f > 0.0 && f <= 1.0;
        if !frac_ok(self.feature_fraction) || !frac_ok(self.sample_fraction) {
            return Err(Error::InvalidConfig(format!(
                "noise fractions must lie in (0, 1], got features {} samples {}",
                self.feature_fraction, self.sample_fraction
            )));
        }
        if !(self.variance > 0.0 && self.variance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise variance must be > 0, got {}",
                self.variance
            )));
        }
        Ok(())
    }

    /// Same spec on another seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }

    fn count(fraction: f64, total: usize) -> usize {
        ((fraction * total as f64).ceil() as usize).min(total)
    }
}

/// Adds `N(0, variance)` to `ceil(ff * n)` random features of each of
/// `ceil(sf * N)` random samples of an `n x N` matrix, in place.
pub fn add_gaussian_noise_inplace(x: &mut Array2<f64>, spec: &NoiseSpec) -> Result<()> {
    spec.validate()?;
    let (n, big_n) = x.dim();
    if n == 0 || big_n == 0 {
        return Ok(());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.variance.sqrt())
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let n_samples = NoiseSpec::count(spec.sample_fraction, big_n);
    let n_feats = NoiseSpec::count(spec.feature_fraction, n);
    for j in index::sample(&mut rng, big_n, n_samples) {
        for i in index::sample(&mut rng, n, n_feats) {
            x[[i, j]] += normal.sample(&mut rng);
        }
    }
    Ok(())
}

/// Polluted copy of `data`; labels unchanged.
pub fn add_gaussian_noise(data: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    let mut x = data.features().to_owned();
    add_gaussian_noise_inplace(&mut x, spec)?;
    data.with_features(x)
}

fn strip(rng: &mut ChaCha8Rng, x: (f64, f64), y: (f64, f64)) -> Vec<[f64; 2]> {
    (0..STRIP_POINTS)
        .map(|_| [rng.random_range(x.0..=x.1), rng.random_range(y.0..=y.1)])
        .collect()
}

fn outliers(rng: &mut ChaCha8Rng, centre: (f64, f64)) -> Vec<[f64; 2]> {
    (0..OUTLIERS_PER_CLASS)
        .map(|_| {
            [
                centre.0 + rng.random_range(-1.0..=1.0),
                centre.1 + rng.random_range(-1.0..=1.0),
            ]
        })
        .collect()
}

fn to_dataset(points: &[[f64; 2]], labels: &[u8]) -> Dataset {
    let x = Array2::from_shape_fn((2, points.len()), |(i, j)| points[j][i]);
    Dataset::new(x, labels).expect("synthetic data is well formed")
}

/// Two-class strip problem, split half/half per class.
///
/// Class `1` is uniform on `[-10, 10] x [-0.5, 0.5]`, class `2` on
/// `[11.5, 12.5] x [-10, 10]`; the ideal projection is the x-axis. Three
/// outliers are appended to each training class, near `(-60, 20)` for class
/// `1` and `(12, 20)` for class `2`, which drags classical LDA off-axis.
/// Train has 126 samples, test 120, both ordered class 1 then class 2.
pub fn make_artificial(seed: u64) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let horizontal = strip(&mut rng, (-10.0, 10.0), (-0.5, 0.5));
    let vertical = strip(
        &mut rng,
        (VERTICAL_OFFSET - 0.5, VERTICAL_OFFSET + 0.5),
        (-10.0, 10.0),
    );

    let mut train = Vec::new();
    let mut train_labels = Vec::new();
    let mut test = Vec::new();
    let mut test_labels = Vec::new();
    for (label, points, centre) in [
        (1u8, &horizontal, HORIZONTAL_OUTLIER),
        (2u8, &vertical, VERTICAL_OUTLIER),
    ] {
        let mut order: Vec<usize> = (0..STRIP_POINTS).collect();
        order.shuffle(&mut rng);
        let (tr, te) = order.split_at(STRIP_POINTS / 2);
        let mut tr = tr.to_vec();
        let mut te = te.to_vec();
        tr.sort_unstable();
        te.sort_unstable();
        train.extend(tr.iter().map(|&k| points[k]));
        train.extend(outliers(&mut rng, centre));
        train_labels.extend(std::iter::repeat_n(label, tr.len() + OUTLIERS_PER_CLASS));
        test.extend(te.iter().map(|&k| points[k]));
        test_labels.extend(std::iter::repeat_n(label, te.len()));
    }
    (to_dataset(&train, &train_labels), to_dataset(&test, &test_labels))
}

/// Angle in degrees in `[0, 90]` between the line spanned by a 2-D
/// direction and the x-axis.
pub fn angle_to_x_axis_deg(w: ArrayView1<'_, f64>) -> f64 {
    w[1].abs().atan2(w[0].abs()).to_degrees()
}
