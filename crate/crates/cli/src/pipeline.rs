//! Shared experiment plumbing: run configuration, feature pipelines, and
//! seeded hyperparameter tuning.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use ehrhart_core::ml::{
    accuracy, r2_score, stratified_split, train_test_split, FeatureMatrix, LinearSvc, LinearSvr,
    Pca, StandardScaler, SvcParams, SvrParams,
};

/// Settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    /// Highest dilation index kept as a feature; `None` uses the
    /// experiment's default.
    pub terms: Option<usize>,
    pub out: PathBuf,
    /// Enforce reported claims through the exit code: a run whose report has
    /// a failed claim exits 2 instead of 0.  Dataset sizes are unaffected;
    /// use `--config` overrides to shrink runs.
    pub check: bool,
    /// Free-form `key=value` overrides from `--config`.
    pub overrides: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn new(seed: u64, out: PathBuf) -> Self {
        RunConfig { seed, terms: None, out, check: false, overrides: BTreeMap::new() }
    }

    /// Parses repeated `key=value` command-line arguments.
    pub fn parse_overrides(pairs: &[String]) -> anyhow::Result<BTreeMap<String, String>> {
        let mut map = BTreeMap::new();
        for pair in pairs {
            let (key, value) = pair
                .split_once('=')
                .with_context(|| format!("--config expects key=value, got {:?}", pair))?;
            if key.trim().is_empty() {
                bail!("--config key must be non-empty in {:?}", pair);
            }
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(map)
    }

    /// The feature cutoff `T`: the explicit flag, else the experiment
    /// default.
    pub fn terms_or(&self, default: usize) -> usize {
        self.terms.unwrap_or(default)
    }

    fn parse_override<T: std::str::FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        match self.overrides.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| anyhow::anyhow!("config {}={:?} is not a valid value", key, raw)),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> anyhow::Result<usize> {
        Ok(self.parse_override(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> anyhow::Result<u64> {
        Ok(self.parse_override(key)?.unwrap_or(default))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> anyhow::Result<f64> {
        Ok(self.parse_override(key)?.unwrap_or(default))
    }

    /// Comma-separated integer list override, e.g. `dims=2,3,4`.
    pub fn u64_list_or(&self, key: &str, default: &[u64]) -> anyhow::Result<Vec<u64>> {
        match self.overrides.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| anyhow::anyhow!("config {}={:?} is not a list", key, raw))
                })
                .collect(),
        }
    }

    pub fn usize_list_or(&self, key: &str, default: &[usize]) -> anyhow::Result<Vec<usize>> {
        let def: Vec<u64> = default.iter().map(|&x| x as u64).collect();
        Ok(self.u64_list_or(key, &def)?.into_iter().map(|x| x as usize).collect())
    }
}

/// Feature-space reduction applied before scaling and the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Projection {
    /// Keep the features as they are.
    Full,
    /// Project onto this many principal components.
    Pca(usize),
    /// Rotate onto all principal axes that carry variance. Count feature
    /// vectors often span a much lower-dimensional space than their length
    /// suggests, so this clamps to the effective rank instead of insisting
    /// on a fixed component count.
    Rotation,
}

/// A projection plus scaler fitted on training rows.
#[derive(Debug, Clone)]
pub struct FittedPipeline {
    pca: Option<Pca>,
    scaler: StandardScaler,
}

/// Fits `projection -> scaler` on the training matrix and returns the
/// pipeline together with the transformed training rows.
pub fn fit_pipeline(
    x_train: &FeatureMatrix,
    projection: Projection,
) -> anyhow::Result<(FittedPipeline, FeatureMatrix)> {
    let (pca, projected) = match projection {
        Projection::Full => (None, x_train.clone()),
        Projection::Pca(k) => {
            let (pca, z) = Pca::fit_transform(x_train, k)?;
            (Some(pca), z)
        }
        Projection::Rotation => {
            let max = x_train.cols().min(x_train.rows().saturating_sub(1)).max(1);
            let pca = Pca::fit_up_to(x_train, max)?;
            let z = pca.transform(x_train)?;
            (Some(pca), z)
        }
    };
    let (scaler, scaled) = StandardScaler::fit_transform(&projected)?;
    Ok((FittedPipeline { pca, scaler }, scaled))
}

impl FittedPipeline {
    pub fn transform(&self, x: &FeatureMatrix) -> anyhow::Result<FeatureMatrix> {
        let projected = match &self.pca {
            Some(pca) => pca.transform(x)?,
            None => x.clone(),
        };
        Ok(self.scaler.transform(&projected)?)
    }
}

/// A classifier refitted at the best grid value.
#[derive(Debug)]
pub struct TunedSvc {
    pub model: LinearSvc,
    pub c: f64,
    pub validation_accuracy: f64,
}

/// Picks the penalty from `grid` by accuracy on a held-out half of the
/// training rows (ties go to the smaller penalty), then refits on all of
/// them.
pub fn tune_svc(
    x: &FeatureMatrix,
    y: &[usize],
    grid: &[f64],
    seed: u64,
) -> anyhow::Result<TunedSvc> {
    anyhow::ensure!(!grid.is_empty(), "empty penalty grid");
    let inner = stratified_split(y, 0.5, seed ^ 0xA5A5_5A5A)?;
    let x_fit = x.select_rows(&inner.train);
    let y_fit: Vec<usize> = inner.train.iter().map(|&i| y[i]).collect();
    let x_val = x.select_rows(&inner.test);
    let y_val: Vec<usize> = inner.test.iter().map(|&i| y[i]).collect();
    let mut best_c = grid[0];
    let mut best_acc = f64::NEG_INFINITY;
    for &c in grid {
        let params = svc_params(c, seed);
        let model = LinearSvc::fit(&x_fit, &y_fit, &params)?;
        let acc = accuracy(&model.predict(&x_val)?, &y_val);
        if acc > best_acc {
            best_acc = acc;
            best_c = c;
        }
    }
    let model = LinearSvc::fit(x, y, &svc_params(best_c, seed))?;
    Ok(TunedSvc { model, c: best_c, validation_accuracy: best_acc })
}

/// Experiment-grade penalty settings: a higher epoch cap than the library
/// default, so large-penalty grid points are limited by tolerance rather
/// than by the cap on all but the most correlated feature sets.
fn svc_params(c: f64, seed: u64) -> SvcParams {
    SvcParams { c, seed, max_epochs: 10_000, ..Default::default() }
}

/// A regressor refitted at the best grid value.
#[derive(Debug)]
pub struct TunedSvr {
    pub model: LinearSvr,
    pub c: f64,
    pub validation_r2: f64,
}

/// Same tuning scheme as [`tune_svc`], scored by validation R^2.
pub fn tune_svr(
    x: &FeatureMatrix,
    targets: &[f64],
    grid: &[f64],
    epsilon: f64,
    seed: u64,
) -> anyhow::Result<TunedSvr> {
    anyhow::ensure!(!grid.is_empty(), "empty penalty grid");
    let inner = train_test_split(x.rows(), 0.5, seed ^ 0xA5A5_5A5A)?;
    let x_fit = x.select_rows(&inner.train);
    let t_fit: Vec<f64> = inner.train.iter().map(|&i| targets[i]).collect();
    let x_val = x.select_rows(&inner.test);
    let t_val: Vec<f64> = inner.test.iter().map(|&i| targets[i]).collect();
    let mut best_c = grid[0];
    let mut best_r2 = f64::NEG_INFINITY;
    for &c in grid {
        let params = svr_params(c, epsilon, seed);
        let model = LinearSvr::fit(&x_fit, &t_fit, &params)?;
        let r2 = r2_score(&model.predict(&x_val)?, &t_val);
        if r2 > best_r2 {
            best_r2 = r2;
            best_c = c;
        }
    }
    let model = LinearSvr::fit(x, targets, &svr_params(best_c, epsilon, seed))?;
    Ok(TunedSvr { model, c: best_c, validation_r2: best_r2 })
}

fn svr_params(c: f64, epsilon: f64, seed: u64) -> SvrParams {
    SvrParams { c, epsilon, seed, max_epochs: 10_000, ..Default::default() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_parsing() {
        let map = RunConfig::parse_overrides(&[
            "per_class=50".to_string(),
            "dims = 2,3 ".to_string(),
        ])
        .unwrap();
        let mut cfg = RunConfig::new(0, PathBuf::from("out"));
        cfg.overrides = map;
        assert_eq!(cfg.usize_or("per_class", 10).unwrap(), 50);
        assert_eq!(cfg.usize_or("missing", 10).unwrap(), 10);
        assert_eq!(cfg.usize_list_or("dims", &[4]).unwrap(), vec![2, 3]);
        assert!(cfg.usize_or("dims", 1).is_err());
        assert!(RunConfig::parse_overrides(&["novalue".to_string()]).is_err());
    }

    #[test]
    fn terms_flag_beats_default() {
        let mut cfg = RunConfig::new(0, PathBuf::from("out"));
        assert_eq!(cfg.terms_or(100), 100);
        cfg.terms = Some(64);
        assert_eq!(cfg.terms_or(100), 64);
    }

    #[test]
    fn pipeline_projects_then_scales() {
        let x = FeatureMatrix::from_rows(vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.5],
            vec![3.0, 6.0, 9.0],
            vec![4.0, 8.0, 12.5],
        ])
        .unwrap();
        let (pipe, z) = fit_pipeline(&x, Projection::Pca(2)).unwrap();
        assert_eq!(z.cols(), 2);
        let again = pipe.transform(&x).unwrap();
        for i in 0..4 {
            for j in 0..2 {
                assert!((z.row(i)[j] - again.row(i)[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn svc_tuning_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                vec![s * (2.0 + (i % 7) as f64 * 0.1), s * (1.5 - (i % 5) as f64 * 0.1)]
            })
            .collect();
        let y: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let x = FeatureMatrix::from_rows(rows).unwrap();
        let a = tune_svc(&x, &y, &[0.1, 1.0, 10.0], 3).unwrap();
        let b = tune_svc(&x, &y, &[0.1, 1.0, 10.0], 3).unwrap();
        assert_eq!(a.c, b.c);
        assert_eq!(a.model.weights(), b.model.weights());
        assert!(a.validation_accuracy >= 0.9);
    }
}
