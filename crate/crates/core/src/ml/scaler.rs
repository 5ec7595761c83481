//! Per-column standardization to zero mean and unit variance.

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Column-wise scaler fitted on a training matrix and applied to any matrix
/// with the same width.  Columns with zero variance are shifted to zero and
/// left unscaled, so transforming never divides by zero.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardScaler {
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl StandardScaler {
    /// Fits means and population standard deviations of each column.
    pub fn fit(x: &FeatureMatrix) -> StandardScaler {
        let (n, d) = (x.rows(), x.cols());
        let mut means = vec![0.0; d];
        for i in 0..n {
            for (m, &v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut vars = vec![0.0; d];
        for i in 0..n {
            for j in 0..d {
                let c = x.row(i)[j] - means[j];
                vars[j] += c * c;
            }
        }
        let scales = vars
            .iter()
            .map(|&v| {
                let s = (v / n as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        StandardScaler { means, scales }
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_width(x)?;
        let mut data = Vec::with_capacity(x.rows() * x.cols());
        for i in 0..x.rows() {
            for j in 0..x.cols() {
                data.push((x.row(i)[j] - self.means[j]) / self.scales[j]);
            }
        }
        Ok(FeatureMatrix::from_flat(data, x.rows(), x.cols()))
    }

    pub fn fit_transform(x: &FeatureMatrix) -> Result<(StandardScaler, FeatureMatrix)> {
        let scaler = StandardScaler::fit(x);
        let z = scaler.transform(x)?;
        Ok((scaler, z))
    }

    /// Undoes [`StandardScaler::transform`].
    pub fn inverse_transform(&self, z: &FeatureMatrix) -> Result<FeatureMatrix> {
        self.check_width(z)?;
        let mut data = Vec::with_capacity(z.rows() * z.cols());
        for i in 0..z.rows() {
            for j in 0..z.cols() {
                data.push(z.row(i)[j] * self.scales[j] + self.means[j]);
            }
        }
        Ok(FeatureMatrix::from_flat(data, z.rows(), z.cols()))
    }

    fn check_width(&self, x: &FeatureMatrix) -> Result<()> {
        if x.cols() != self.means.len() {
            return Err(Error::InvalidParam(format!(
                "scaler fitted on {} columns, got {}",
                self.means.len(),
                x.cols()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, d: usize, seed: u64) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        FeatureMatrix::from_rows(
            (0..n).map(|_| (0..d).map(|_| rng.gen_range(-40.0..40.0)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn standardizes_columns() {
        let x = random_matrix(80, 6, 2);
        let (_, z) = StandardScaler::fit_transform(&x).unwrap();
        for j in 0..6 {
            let col: Vec<f64> = (0..80).map(|i| z.row(i)[j]).collect();
            let mean = col.iter().sum::<f64>() / 80.0;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 80.0;
            assert!(mean.abs() < 1e-12, "column {} mean {}", j, mean);
            assert!((var - 1.0).abs() < 1e-12, "column {} variance {}", j, var);
        }
    }

    #[test]
    fn round_trips_through_inverse() {
        let x = random_matrix(30, 4, 3);
        let (scaler, z) = StandardScaler::fit_transform(&x).unwrap();
        let back = scaler.inverse_transform(&z).unwrap();
        for i in 0..30 {
            for j in 0..4 {
                assert!((back.row(i)[j] - x.row(i)[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_columns_become_zero() {
        let x = FeatureMatrix::from_rows(vec![vec![7.0, 1.0], vec![7.0, 3.0], vec![7.0, 5.0]])
            .unwrap();
        let (scaler, z) = StandardScaler::fit_transform(&x).unwrap();
        for i in 0..3 {
            assert_eq!(z.row(i)[0], 0.0);
        }
        let back = scaler.inverse_transform(&z).unwrap();
        for i in 0..3 {
            assert_eq!(back.row(i)[0], 7.0);
        }
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let x = random_matrix(10, 3, 4);
        let scaler = StandardScaler::fit(&x);
        let wrong = random_matrix(5, 4, 5);
        assert!(scaler.transform(&wrong).is_err());
    }
}
