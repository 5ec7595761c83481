//! Small exact linear algebra over arbitrary-precision rationals: just enough
//! for hull construction and lattice work (rank, determinant, hyperplane
//! normals). Matrices here are tiny (ambient dimension at most ~8), so plain
//! fraction elimination is fast enough and trivially exact.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Rank of the row span, by Gaussian elimination.
pub(crate) fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut r = 0;
    for c in 0..cols {
        let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, pivot);
        let inv = rows[r][c].clone();
        for i in r + 1..rows.len() {
            if rows[i][c].is_zero() {
                continue;
            }
            let factor = &rows[i][c] / &inv;
            for j in c..cols {
                let sub = &factor * &rows[r][j];
                rows[i][j] = &rows[i][j] - sub;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Determinant of a square rational matrix by elimination.
pub(crate) fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    debug_assert!(m.iter().all(|row| row.len() == n));
    let mut result = BigRational::one();
    for c in 0..n {
        let Some(pivot) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != c {
            m.swap(c, pivot);
            result = -result;
        }
        result *= m[c][c].clone();
        let inv = m[c][c].clone();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let factor = &m[i][c] / &inv;
            for j in c..n {
                let sub = &factor * &m[c][j];
                m[i][j] = &m[i][j] - sub;
            }
        }
    }
    result
}

/// Generalized cross product: a vector orthogonal to all `d - 1` given
/// vectors in `Q^d`, via cofactor expansion. Returns `None` when the inputs
/// are linearly dependent (every cofactor vanishes). For `d = 1` (no input
/// vectors) the answer is the unit vector.
pub(crate) fn cross_product(diffs: &[Vec<BigRational>], dim: usize) -> Option<Vec<BigRational>> {
    debug_assert_eq!(diffs.len() + 1, dim);
    if dim == 1 {
        return Some(vec![BigRational::one()]);
    }
    let mut normal = Vec::with_capacity(dim);
    for j in 0..dim {
        let minor: Vec<Vec<BigRational>> = diffs
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let cof = det(minor);
        normal.push(if j % 2 == 0 { cof } else { -cof });
    }
    if normal.iter().all(|v| v.is_zero()) {
        None
    } else {
        Some(normal)
    }
}

/// Scale a rational vector to integers and divide out the content, preserving
/// direction. The result is a primitive integer vector.
pub(crate) fn primitive_integer_direction(v: &[BigRational]) -> Vec<BigInt> {
    use num_integer::Integer;
    let mut lcm = BigInt::one();
    for x in v {
        lcm = lcm.lcm(x.denom());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from(lcm.clone())).to_integer()).collect();
    let mut gcd = BigInt::zero();
    for x in &ints {
        gcd = gcd.gcd(x);
    }
    if gcd.is_zero() || gcd.is_one() {
        return ints;
    }
    ints.into_iter().map(|x| x / &gcd).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> BigRational {
        BigRational::from(BigInt::from(n))
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![vec![q(1), q(2)], vec![q(2), q(4)], vec![q(0), q(1)]];
        assert_eq!(rank(rows), 2);
    }

    #[test]
    fn det_of_singular_matrix_is_zero() {
        let m = vec![vec![q(1), q(2)], vec![q(2), q(4)]];
        assert!(det(m).is_zero());
    }

    #[test]
    fn det_tracks_row_swaps() {
        let m = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
        assert_eq!(det(m), q(-1));
    }

    #[test]
    fn cross_product_is_orthogonal() {
        let diffs = vec![vec![q(1), q(0), q(2)], vec![q(0), q(1), q(3)]];
        let n = cross_product(&diffs, 3).unwrap();
        for d in &diffs {
            let dot: BigRational = d.iter().zip(&n).map(|(a, b)| a * b).sum();
            assert!(dot.is_zero());
        }
    }

    #[test]
    fn cross_product_detects_dependence() {
        let diffs = vec![vec![q(1), q(2), q(0)], vec![q(2), q(4), q(0)]];
        assert!(cross_product(&diffs, 3).is_none());
    }

    #[test]
    fn primitive_direction_clears_denominators() {
        let v = vec![BigRational::new(BigInt::from(2), BigInt::from(3)), q(4)];
        assert_eq!(primitive_integer_direction(&v), vec![BigInt::from(1), BigInt::from(6)]);
    }
}
