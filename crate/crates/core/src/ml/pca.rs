//! Principal component analysis via a cyclic Jacobi eigensolver.
//!
//! The covariance matrix is diagonalized directly when the feature count is
//! at most the sample count; otherwise the Gram matrix of the centered rows
//! is diagonalized instead and its eigenvectors are mapped back, which keeps
//! the eigenproblem no larger than the sample count.

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Fitted orthogonal projection onto the leading principal components.
#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    mean: Vec<f64>,
    /// Orthonormal component rows, strongest first.
    components: Vec<Vec<f64>>,
    /// Sample variance (denominator `n - 1`) captured by each component.
    explained_variance: Vec<f64>,
    total_variance: f64,
}

/// Diagonalizes a symmetric matrix in place by cyclic Jacobi rotations.
/// Returns eigenvalues (descending) and matching orthonormal eigenvectors
/// as rows.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.len();
    // Eigenvector matrix, kept column-aligned with a: v[i][j] is entry i of
    // the eigenvector tracking diagonal slot j.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = frob * 1e-14;
    const MAX_SWEEPS: usize = 128;
    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off <= tol {
            let mut pairs: Vec<(f64, Vec<f64>)> =
                (0..n).map(|j| (a[j][j], (0..n).map(|i| v[i][j]).collect())).collect();
            pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).expect("finite eigenvalues"));
            let values = pairs.iter().map(|p| p.0).collect();
            let vectors = pairs.into_iter().map(|p| p.1).collect();
            return Ok((values, vectors));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() <= tol / (n as f64) {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let app = a[p][p];
                let aqq = a[q][q];
                let apq = a[p][q];
                a[p][p] = app - t * apq;
                a[q][q] = aqq + t * apq;
                a[p][q] = 0.0;
                a[q][p] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[i][p];
                        let aiq = a[i][q];
                        a[i][p] = c * aip - s * aiq;
                        a[p][i] = a[i][p];
                        a[i][q] = s * aip + c * aiq;
                        a[q][i] = a[i][q];
                    }
                }
                for row in v.iter_mut() {
                    let vip = row[p];
                    let viq = row[q];
                    row[p] = c * vip - s * viq;
                    row[q] = s * vip + c * viq;
                }
            }
        }
    }
    Err(Error::NoConvergence { what: "Jacobi eigensolver".into() })
}

/// Flips each vector so its largest-magnitude entry (first on ties) is
/// positive, making fitted components independent of rotation history.
fn fix_signs(vectors: &mut [Vec<f64>]) {
    for vec in vectors {
        let mut best = 0;
        for (i, x) in vec.iter().enumerate() {
            if x.abs() > vec[best].abs() + 1e-12 {
                best = i;
            }
        }
        if vec[best] < 0.0 {
            for x in vec.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Extends `basis` (orthonormal rows of length `d`) to `target` vectors by
/// Gram-Schmidt over the canonical basis, skipping candidates that already
/// lie in the span. Deterministic, so repeated fits stay bit-identical.
fn complete_orthonormal(basis: &mut Vec<Vec<f64>>, target: usize, d: usize) {
    let mut e = 0;
    while basis.len() < target && e < d {
        let mut cand = vec![0.0; d];
        cand[e] = 1.0;
        e += 1;
        // Two orthogonalization passes keep the result orthonormal even
        // when the candidate is nearly inside the current span.
        for _ in 0..2 {
            for comp in basis.iter() {
                let dot: f64 = cand.iter().zip(comp).map(|(a, b)| a * b).sum();
                for (ci, cj) in cand.iter_mut().zip(comp) {
                    *ci -= dot * cj;
                }
            }
        }
        let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for v in &mut cand {
                *v /= norm;
            }
            basis.push(cand);
        }
    }
    debug_assert_eq!(basis.len(), target, "canonical basis must complete the span");
}

impl Pca {
    /// Fits `n_components` principal components of `x`. When the request
    /// exceeds the data's effective rank, the trailing components are a
    /// deterministic orthonormal completion with zero explained variance,
    /// so the fitted count always equals `n_components`.
    pub fn fit(x: &FeatureMatrix, n_components: usize) -> Result<Pca> {
        Self::fit_impl(x, n_components, false)
    }

    /// Fits at most `max_components` components, clamping the count to the
    /// data's effective rank. Use this for full rotations where the matrix
    /// may be rank-deficient (e.g. feature vectors drawn from a
    /// low-dimensional family) and zero-variance padding is unwanted.
    pub fn fit_up_to(x: &FeatureMatrix, max_components: usize) -> Result<Pca> {
        Self::fit_impl(x, max_components, true)
    }

    fn fit_impl(x: &FeatureMatrix, n_components: usize, clamp_to_rank: bool) -> Result<Pca> {
        let (n, d) = (x.rows(), x.cols());
        if n < 2 {
            return Err(Error::InvalidParam("PCA needs at least 2 rows".into()));
        }
        if n_components == 0 || n_components > d.min(n) {
            return Err(Error::InvalidParam(format!(
                "n_components must lie in 1..={} for a {}x{} matrix",
                d.min(n),
                n,
                d
            )));
        }
        let mut mean = vec![0.0; d];
        for i in 0..n {
            for (m, &val) in mean.iter_mut().zip(x.row(i)) {
                *m += val;
            }
        }
        for m in &mut mean {
            *m /= n as f64;
        }
        let centered: Vec<Vec<f64>> = (0..n)
            .map(|i| x.row(i).iter().zip(&mean).map(|(v, m)| v - m).collect())
            .collect();
        let total_variance = centered
            .iter()
            .map(|row| row.iter().map(|c| c * c).sum::<f64>())
            .sum::<f64>()
            / (n - 1) as f64;

        let (eigenvalues, mut components, n_keep) = if d <= n {
            // Scatter matrix X'X, d x d.
            let mut s = vec![vec![0.0; d]; d];
            for row in &centered {
                for j in 0..d {
                    for k in j..d {
                        s[j][k] += row[j] * row[k];
                    }
                }
            }
            for j in 0..d {
                for k in 0..j {
                    s[j][k] = s[k][j];
                }
            }
            let (values, vectors) = jacobi_eigen(s)?;
            let n_keep = if clamp_to_rank {
                let scale = values.first().copied().unwrap_or(0.0).max(1.0);
                let rank = values.iter().take_while(|&&v| v > scale * 1e-12).count();
                if rank == 0 {
                    return Err(Error::InvalidParam("data has no variance to rotate".into()));
                }
                n_components.min(rank)
            } else {
                n_components
            };
            (values, vectors, n_keep)
        } else {
            // Gram matrix XX', n x n; an eigenvector u with eigenvalue m
            // maps to the scatter eigenvector X'u / sqrt(m).
            let mut g = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in i..n {
                    let dot: f64 =
                        centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                    g[i][j] = dot;
                    g[j][i] = dot;
                }
            }
            let (values, vectors) = jacobi_eigen(g)?;
            let scale = values.first().copied().unwrap_or(0.0).max(1.0);
            let mut mapped = Vec::with_capacity(n_components);
            for (idx, u) in vectors.iter().enumerate().take(n_components) {
                if values[idx] <= scale * 1e-12 {
                    // Remaining eigenvalues are zero: the rank is exhausted.
                    break;
                }
                let norm = values[idx].sqrt();
                let mut comp = vec![0.0; d];
                for (row, &ui) in centered.iter().zip(u) {
                    for (cj, rj) in comp.iter_mut().zip(row) {
                        *cj += ui * rj / norm;
                    }
                }
                mapped.push(comp);
            }
            let n_keep = if clamp_to_rank {
                if mapped.is_empty() {
                    return Err(Error::InvalidParam("data has no variance to rotate".into()));
                }
                mapped.len()
            } else {
                // A request past the data's rank is still honored, matching
                // the scatter route: the missing directions are filled with
                // a deterministic orthonormal completion carrying zero
                // variance.
                complete_orthonormal(&mut mapped, n_components, d);
                n_components
            };
            (values, mapped, n_keep)
        };

        components.truncate(n_keep);
        fix_signs(&mut components);
        // Zero eigenvalues can come out of the solver as tiny negatives;
        // report them as exactly zero variance.
        let explained_variance: Vec<f64> =
            eigenvalues.iter().take(n_keep).map(|m| (m / (n - 1) as f64).max(0.0)).collect();
        Ok(Pca { mean, components, explained_variance, total_variance })
    }

    /// Projects rows onto the fitted components.
    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.cols() != self.mean.len() {
            return Err(Error::InvalidParam(format!(
                "PCA fitted on {} columns, got {}",
                self.mean.len(),
                x.cols()
            )));
        }
        let k = self.components.len();
        let mut data = Vec::with_capacity(x.rows() * k);
        for i in 0..x.rows() {
            let row = x.row(i);
            for comp in &self.components {
                let mut dot = 0.0;
                for ((v, m), c) in row.iter().zip(&self.mean).zip(comp) {
                    dot += (v - m) * c;
                }
                data.push(dot);
            }
        }
        Ok(FeatureMatrix::from_flat(data, x.rows(), k))
    }

    pub fn fit_transform(x: &FeatureMatrix, n_components: usize) -> Result<(Pca, FeatureMatrix)> {
        let pca = Pca::fit(x, n_components)?;
        let z = pca.transform(x)?;
        Ok((pca, z))
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    /// Fraction of the total variance captured by each component.
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        if self.total_variance == 0.0 {
            return vec![0.0; self.explained_variance.len()];
        }
        self.explained_variance.iter().map(|v| v / self.total_variance).collect()
    }
}
