//! Linear support-vector models trained by dual coordinate descent.
//!
//! Both the classifier and the regressor solve the L2-regularized,
//! L1-loss dual problem one coordinate at a time, keeping the primal
//! weight vector incrementally updated.  Training rows are first put into
//! a canonical order (sorted by features, then label), so fitted models
//! are bit-identical under any permutation of the input rows.

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Classifier hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SvcParams {
    /// Soft-margin penalty.
    pub c: f64,
    /// Stop when the projected-gradient spread of an epoch drops below this.
    pub tol: f64,
    pub max_epochs: usize,
    /// Seed for the per-epoch coordinate shuffle.
    pub seed: u64,
}

impl Default for SvcParams {
    fn default() -> Self {
        SvcParams { c: 1.0, tol: 1e-4, max_epochs: 1000, seed: 0 }
    }
}

/// Regressor hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SvrParams {
    pub c: f64,
    /// Half-width of the insensitive tube around the targets.
    pub epsilon: f64,
    /// Stop when the largest dual step of an epoch drops below `tol * c`.
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SvrParams {
    fn default() -> Self {
        SvrParams { c: 1.0, epsilon: 0.1, tol: 1e-6, max_epochs: 2000, seed: 0 }
    }
}

fn check_common(x: &FeatureMatrix, n_labels: usize, c: f64, tol: f64) -> Result<()> {
    if n_labels != x.rows() {
        return Err(Error::InvalidParam(format!(
            "{} rows but {} labels",
            x.rows(),
            n_labels
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidParam("penalty c must be positive and finite".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParam("tolerance must be positive".into()));
    }
    Ok(())
}

fn compare_rows(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y).expect("finite features") {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Bias-augmented dot product: `w` carries one extra trailing bias weight.
fn decision_value(w: &[f64], row: &[f64]) -> f64 {
    let mut acc = w[row.len()];
    for (wi, xi) in w.iter().zip(row) {
        acc += wi * xi;
    }
    acc
}

/// Solves the binary L1-loss SVM dual for labels in {-1, +1}.  Returns the
/// bias-augmented weight vector and whether the tolerance was reached.
fn train_binary(
    rows: &[&[f64]],
    y: &[f64],
    c: f64,
    tol: f64,
    max_epochs: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<f64>, bool) {
    let n = rows.len();
    let dim = rows[0].len();
    let mut w = vec![0.0; dim + 1];
    let mut alpha = vec![0.0; n];
    let q_diag: Vec<f64> =
        rows.iter().map(|r| 1.0 + r.iter().map(|x| x * x).sum::<f64>()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..max_epochs {
        order.shuffle(rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            let g = y[i] * decision_value(&w, rows[i]) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-14 {
                let next = (alpha[i] - g / q_diag[i]).clamp(0.0, c);
                let step = next - alpha[i];
                if step != 0.0 {
                    alpha[i] = next;
                    let scale = step * y[i];
                    for (wj, xj) in w.iter_mut().zip(rows[i]) {
                        *wj += scale * xj;
                    }
                    w[dim] += scale;
                }
            }
        }
        if pg_max - pg_min < tol {
            return (w, true);
        }
    }
    (w, false)
}

/// One-vs-rest linear classifier over `usize` labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvc {
    classes: Vec<usize>,
    /// One bias-augmented weight vector per class, aligned with `classes`.
    weights: Vec<Vec<f64>>,
    converged: bool,
}

impl LinearSvc {
    pub fn fit(x: &FeatureMatrix, labels: &[usize], params: &SvcParams) -> Result<LinearSvc> {
        check_common(x, labels.len(), params.c, params.tol)?;
        let mut classes: Vec<usize> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::InvalidParam("need at least two classes".into()));
        }
        // Canonical training order: independent of how the caller arranged
        // the rows.
        let mut order: Vec<usize> = (0..x.rows()).collect();
        order.sort_by(|&a, &b| {
            compare_rows(x.row(a), x.row(b)).then_with(|| labels[a].cmp(&labels[b]))
        });
        let rows: Vec<&[f64]> = order.iter().map(|&i| x.row(i)).collect();
        let sorted_labels: Vec<usize> = order.iter().map(|&i| labels[i]).collect();

        let mut weights = Vec::with_capacity(classes.len());
        let mut converged = true;
        for (k, &class) in classes.iter().enumerate() {
            let y: Vec<f64> =
                sorted_labels.iter().map(|&l| if l == class { 1.0 } else { -1.0 }).collect();
            let mut rng =
                ChaCha8Rng::seed_from_u64(params.seed ^ (k as u64).wrapping_mul(0x9E37_79B9));
            let (w, ok) =
                train_binary(&rows, &y, params.c, params.tol, params.max_epochs, &mut rng);
            converged &= ok;
            weights.push(w);
        }
        Ok(LinearSvc { classes, weights, converged })
    }

    /// Sorted class labels, aligned with [`LinearSvc::decision_row`].
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    /// Bias-augmented weight vectors, one per class.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    /// Whether every one-vs-rest subproblem reached its tolerance.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// One-vs-rest margins for a single row, aligned with `classes()`.
    pub fn decision_row(&self, row: &[f64]) -> Vec<f64> {
        self.weights.iter().map(|w| decision_value(w, row)).collect()
    }

    /// Predicted class per row: the class with the largest margin, ties
    /// broken toward the smaller label.
    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<usize>> {
        if x.cols() + 1 != self.weights[0].len() {
            return Err(Error::InvalidParam(format!(
                "classifier fitted on {} features, got {}",
                self.weights[0].len() - 1,
                x.cols()
            )));
        }
        Ok((0..x.rows())
            .map(|i| {
                let scores = self.decision_row(x.row(i));
                let mut best = 0;
                for (j, &s) in scores.iter().enumerate().skip(1) {
                    if s > scores[best] {
                        best = j;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

/// Linear epsilon-insensitive regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvr {
    /// Bias-augmented weight vector.
    weights: Vec<f64>,
    converged: bool,
}

impl LinearSvr {
    pub fn fit(x: &FeatureMatrix, targets: &[f64], params: &SvrParams) -> Result<LinearSvr> {
        check_common(x, targets.len(), params.c, params.tol)?;
        if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
            return Err(Error::InvalidParam("epsilon must be non-negative".into()));
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidParam("targets must be finite".into()));
        }
        let mut order: Vec<usize> = (0..x.rows()).collect();
        order.sort_by(|&a, &b| {
            compare_rows(x.row(a), x.row(b))
                .then_with(|| targets[a].partial_cmp(&targets[b]).expect("finite targets"))
        });
        let rows: Vec<&[f64]> = order.iter().map(|&i| x.row(i)).collect();
        let y: Vec<f64> = order.iter().map(|&i| targets[i]).collect();

        let n = rows.len();
        let dim = x.cols();
        let mut w = vec![0.0; dim + 1];
        let mut beta = vec![0.0; n];
        let q_diag: Vec<f64> =
            rows.iter().map(|r| 1.0 + r.iter().map(|v| v * v).sum::<f64>()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let mut epoch_order: Vec<usize> = (0..n).collect();
        let mut converged = false;
        for _ in 0..params.max_epochs {
            epoch_order.shuffle(&mut rng);
            let mut max_step: f64 = 0.0;
            for &i in &epoch_order {
                let g = decision_value(&w, rows[i]) - y[i];
                // Exact minimization of the coordinate objective
                // q/2 b^2 + (g - q beta_i) b + eps |b|  via soft threshold.
                let z = q_diag[i] * beta[i] - g;
                let shrunk = z.abs() - params.epsilon;
                let next = if shrunk > 0.0 {
                    (z.signum() * shrunk / q_diag[i]).clamp(-params.c, params.c)
                } else {
                    0.0
                };
                let step = next - beta[i];
                if step != 0.0 {
                    beta[i] = next;
                    for (wj, xj) in w.iter_mut().zip(rows[i]) {
                        *wj += step * xj;
                    }
                    w[dim] += step;
                }
                max_step = max_step.max(step.abs());
            }
            if max_step < params.tol * params.c {
                converged = true;
                break;
            }
        }
        Ok(LinearSvr { weights: w, converged })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn predict(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        if x.cols() + 1 != self.weights.len() {
            return Err(Error::InvalidParam(format!(
                "regressor fitted on {} features, got {}",
                self.weights.len() - 1,
                x.cols()
            )));
        }
        Ok((0..x.rows()).map(|i| decision_value(&self.weights, x.row(i))).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ml::{accuracy, r2_score};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    fn blobs(centers: &[(f64, f64)], per_class: usize, seed: u64) -> (FeatureMatrix, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (k, &(cx, cy)) in centers.iter().enumerate() {
            for _ in 0..per_class {
                rows.push(vec![cx + rng.gen_range(-1.0..1.0), cy + rng.gen_range(-1.0..1.0)]);
                labels.push(k + 2);
            }
        }
        (FeatureMatrix::from_rows(rows).unwrap(), labels)
    }

    #[test]
    fn separates_two_blobs() {
        let (x, y) = blobs(&[(-3.0, -3.0), (3.0, 3.0)], 60, 1);
        let (xt, yt) = blobs(&[(-3.0, -3.0), (3.0, 3.0)], 40, 2);
        let model = LinearSvc::fit(&x, &y, &SvcParams::default()).unwrap();
        assert!(model.converged());
        assert_eq!(accuracy(&model.predict(&x).unwrap(), &y), 1.0);
        assert_eq!(accuracy(&model.predict(&xt).unwrap(), &yt), 1.0);
        assert_eq!(model.classes(), &[2, 3]);
    }

    #[test]
    fn three_class_one_vs_rest() {
        let centers = [(-4.0, 0.0), (4.0, 0.0), (0.0, 6.0)];
        let (x, y) = blobs(&centers, 50, 3);
        let (xt, yt) = blobs(&centers, 30, 4);
        let model = LinearSvc::fit(&x, &y, &SvcParams::default()).unwrap();
        let acc = accuracy(&model.predict(&xt).unwrap(), &yt);
        assert!(acc >= 0.95, "holdout accuracy {}", acc);
    }

    #[test]
    fn fit_ignores_row_order() {
        let (x, y) = blobs(&[(-2.0, 1.0), (2.5, -1.0)], 40, 5);
        let (xt, _) = blobs(&[(-2.0, 1.0), (2.5, -1.0)], 25, 6);
        // Reverse is an adversarial permutation: every row moves.
        let perm: Vec<usize> = (0..x.rows()).rev().collect();
        let x_shuffled = x.select_rows(&perm);
        let y_shuffled: Vec<usize> = perm.iter().map(|&i| y[i]).collect();
        let a = LinearSvc::fit(&x, &y, &SvcParams::default()).unwrap();
        let b = LinearSvc::fit(&x_shuffled, &y_shuffled, &SvcParams::default()).unwrap();
        assert_eq!(a.weights(), b.weights(), "weights must be bit-identical");
        assert_eq!(a.predict(&xt).unwrap(), b.predict(&xt).unwrap());
    }

    #[test]
    fn svr_recovers_exact_linear_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let make = |rng: &mut ChaCha8Rng, n: usize| -> (FeatureMatrix, Vec<f64>) {
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            let y = rows.iter().map(|r| 2.0 * r[0] - 3.0 * r[1] + 7.0).collect();
            (FeatureMatrix::from_rows(rows).unwrap(), y)
        };
        let (x, y) = make(&mut rng, 80);
        let (xt, yt) = make(&mut rng, 40);
        let params = SvrParams { c: 1e4, epsilon: 1e-3, ..Default::default() };
        let model = LinearSvr::fit(&x, &y, &params).unwrap();
        let r2 = r2_score(&model.predict(&xt).unwrap(), &yt);
        assert!(r2 >= 1.0 - 1e-6, "holdout R^2 {}", r2);
        let w = model.weights();
        assert!((w[0] - 2.0).abs() < 0.01 && (w[1] + 3.0).abs() < 0.01 && (w[2] - 7.0).abs() < 0.01);
    }

    #[test]
    fn svr_fit_ignores_row_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> =
            (0..50).map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] - 0.5 * r[1] + rng.gen_range(-0.1..0.1)).collect();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let perm: Vec<usize> = (0..50).rev().collect();
        let x2 = x.select_rows(&perm);
        let y2: Vec<f64> = perm.iter().map(|&i| y[i]).collect();
        let a = LinearSvr::fit(&x, &y, &SvrParams::default()).unwrap();
        let b = LinearSvr::fit(&x2, &y2, &SvrParams::default()).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn rejects_invalid_input() {
        let (x, y) = blobs(&[(-1.0, 0.0), (1.0, 0.0)], 5, 10);
        let one_class = vec![2; y.len()];
        assert!(LinearSvc::fit(&x, &one_class, &SvcParams::default()).is_err());
        let short = &y[..5];
        assert!(LinearSvc::fit(&x, short, &SvcParams::default()).is_err());
        let bad_c = SvcParams { c: 0.0, ..Default::default() };
        assert!(LinearSvc::fit(&x, &y, &bad_c).is_err());
        let targets: Vec<f64> = (0..x.rows()).map(|i| i as f64).collect();
        let bad_eps = SvrParams { epsilon: -1.0, ..Default::default() };
        assert!(LinearSvr::fit(&x, &targets, &bad_eps).is_err());
        let model = LinearSvc::fit(&x, &y, &SvcParams::default()).unwrap();
        let wrong = FeatureMatrix::from_rows(vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(model.predict(&wrong).is_err());
    }
}
