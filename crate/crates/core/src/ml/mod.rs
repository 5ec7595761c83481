//! Self-contained linear machine-learning stack: dense feature matrices,
//! standardization, principal component analysis, and linear support-vector
//! models trained by dual coordinate descent.  Everything is deterministic:
//! given the same inputs and seeds, every fit reproduces bit-identically.

pub mod pca;
pub mod scaler;
pub mod svm;

pub use pca::Pca;
pub use scaler::StandardScaler;
pub use svm::{LinearSvc, LinearSvr, SvcParams, SvrParams};

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::datagen::Dataset;
use crate::ehrhart::log_vector;
use crate::error::{Error, Result};

/// Dense row-major matrix of finite `f64` features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    rows: usize,
    cols: usize,
}

impl FeatureMatrix {
    /// Builds a matrix from row vectors, rejecting ragged or non-finite
    /// input.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParam("feature matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::InvalidParam("feature matrix needs at least one column".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidParam(format!(
                    "ragged feature rows: row 0 has {} entries, row {} has {}",
                    cols,
                    i,
                    row.len()
                )));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::InvalidParam(format!(
                        "non-finite feature value in row {}",
                        i
                    )));
                }
                data.push(v);
            }
        }
        Ok(FeatureMatrix { data, rows: rows.len(), cols })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// New matrix keeping the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix { data, rows: indices.len(), cols: self.cols }
    }

    pub(crate) fn from_flat(data: Vec<f64>, rows: usize, cols: usize) -> FeatureMatrix {
        debug_assert_eq!(data.len(), rows * cols);
        FeatureMatrix { data, rows, cols }
    }
}

/// How dilation counts become features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureKind {
    /// Counts cast to `f64` directly.
    Raw,
    /// Natural logarithm of each count (all counts are >= 1).
    Log,
}

/// Turns count vectors into a feature matrix, one row per vector.
pub fn counts_features(counts: &[Vec<BigInt>], kind: FeatureKind) -> Result<FeatureMatrix> {
    let rows: Result<Vec<Vec<f64>>> = counts
        .iter()
        .map(|c| match kind {
            FeatureKind::Raw => c
                .iter()
                .map(|y| {
                    let v = y.to_f64().unwrap_or(f64::INFINITY);
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(Error::InvalidParam("count too large for f64 features".into()))
                    }
                })
                .collect(),
            FeatureKind::Log => log_vector(c),
        })
        .collect();
    FeatureMatrix::from_rows(rows?)
}

/// Feature matrix of a dataset: row `i` holds the (raw or log) counts of
/// point `i`.
pub fn features(dataset: &Dataset, kind: FeatureKind) -> Result<FeatureMatrix> {
    let counts: Vec<Vec<BigInt>> = dataset.points.iter().map(|p| p.counts.clone()).collect();
    counts_features(&counts, kind)
}

/// Dimension label per dataset point.
pub fn dimension_labels(dataset: &Dataset) -> Vec<usize> {
    dataset.points.iter().map(|p| p.dim).collect()
}

/// Quasi-period label per dataset point (1 for lattice points).
pub fn quasi_period_labels(dataset: &Dataset) -> Vec<usize> {
    dataset.points.iter().map(|p| p.quasi_period.unwrap_or(1) as usize).collect()
}

/// Normalized-volume label per dataset point as `f64`.
pub fn volume_labels(dataset: &Dataset) -> Result<Vec<f64>> {
    dataset
        .points
        .iter()
        .map(|p| {
            let v = p.volume.to_f64().unwrap_or(f64::INFINITY);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidParam("volume too large for f64 label".into()))
            }
        })
        .collect()
}

/// A train/test partition of row indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn check_fraction(test_fraction: f64) -> Result<()> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParam("test_fraction must lie strictly between 0 and 1".into()));
    }
    Ok(())
}

/// Seeded uniform train/test split of `0..n`.
pub fn train_test_split(n: usize, test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    check_fraction(test_fraction)?;
    if n < 2 {
        return Err(Error::TooFewSamples { stratum: format!("need at least 2 samples, have {}", n) });
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let n_test = ((n as f64) * test_fraction).round().clamp(1.0, (n - 1) as f64) as usize;
    let test: Vec<usize> = indices[..n_test].to_vec();
    let train: Vec<usize> = indices[n_test..].to_vec();
    Ok(SplitIndices { train, test })
}

/// Seeded split that preserves class proportions: each label's indices are
/// shuffled and divided separately, and every class must land at least one
/// sample on each side.
pub fn stratified_split(labels: &[usize], test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    check_fraction(test_fraction)?;
    let mut by_class: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &y) in labels.iter().enumerate() {
        by_class.entry(y).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, mut idx) in by_class {
        if idx.len() < 2 {
            return Err(Error::TooFewSamples {
                stratum: format!("class {} has {} sample(s), need at least 2", label, idx.len()),
            });
        }
        idx.shuffle(&mut rng);
        let n_test =
            ((idx.len() as f64) * test_fraction).round().clamp(1.0, (idx.len() - 1) as f64) as usize;
        test.extend_from_slice(&idx[..n_test]);
        train.extend_from_slice(&idx[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Fraction of positions where prediction equals truth.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "prediction/truth length mismatch");
    assert!(!truth.is_empty(), "accuracy of an empty set is undefined");
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Confusion counts over the sorted union of labels seen in either slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    /// Sorted class labels indexing both axes (rows = truth, columns =
    /// prediction).
    pub labels: Vec<usize>,
    pub counts: Vec<Vec<usize>>,
}

pub fn confusion_matrix(predicted: &[usize], truth: &[usize]) -> ConfusionMatrix {
    assert_eq!(predicted.len(), truth.len(), "prediction/truth length mismatch");
    let mut labels: Vec<usize> = predicted.iter().chain(truth).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let pos = |l: usize| labels.binary_search(&l).expect("label present");
    let mut counts = vec![vec![0usize; labels.len()]; labels.len()];
    for (&p, &t) in predicted.iter().zip(truth) {
        counts[pos(t)][pos(p)] += 1;
    }
    ConfusionMatrix { labels, counts }
}

impl ConfusionMatrix {
    /// Rows rescaled to sum to one; a row with no support becomes all zeros.
    pub fn row_normalized(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: usize = row.iter().sum();
                if total == 0 {
                    vec![0.0; row.len()]
                } else {
                    row.iter().map(|&c| c as f64 / total as f64).collect()
                }
            })
            .collect()
    }
}

/// Coefficient of determination.  A constant truth vector scores 1 when the
/// predictions are exact and negative infinity otherwise.
pub fn r2_score(predicted: &[f64], truth: &[f64]) -> f64 {
    assert_eq!(predicted.len(), truth.len(), "prediction/truth length mismatch");
    assert!(!truth.is_empty(), "r2 of an empty set is undefined");
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_res: f64 = predicted.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// Roughly geometric grid of training-set sizes from `n_train / 16` up to
/// `n_train`, deduplicated and sorted.
pub fn learning_curve_sizes(n_train: usize, n_points: usize) -> Vec<usize> {
    assert!(n_train >= 2 && n_points >= 2, "learning curve needs >= 2 sizes and samples");
    let lo = (n_train / 16).max(2) as f64;
    let hi = n_train as f64;
    let mut sizes: Vec<usize> = (0..n_points)
        .map(|i| {
            let t = i as f64 / (n_points - 1) as f64;
            (lo * (hi / lo).powf(t)).round() as usize
        })
        .collect();
    sizes.sort_unstable();
    sizes.dedup();
    sizes
}

/// Evaluates a score at each training size: `eval(s)` must train on the
/// first `s` training rows and return a score on a fixed evaluation set.
pub fn learning_curve<F: FnMut(usize) -> f64>(sizes: &[usize], mut eval: F) -> Vec<(usize, f64)> {
    sizes.iter().map(|&s| (s, eval(s))).collect()
}
