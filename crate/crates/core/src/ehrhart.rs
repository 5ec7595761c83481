//! Quasi-polynomial structure of dilation counts.
//!
//! For a full-dimensional rational polytope with denominator `k`, the counts
//! `y_m = |mP ∩ Z^d|` agree with one of `k` degree-`d` polynomials according
//! to `m mod k`. Everything here works on the raw count sequence: exact
//! interpolation of the constituents, the minimal writing period (which can
//! collapse below `k`), the numerator coefficients of the generating function
//! with respect to `(1 - t^ρ)^{d+1}`, and evaluation of arbitrary terms from
//! those coefficients. The degree-(d+1) forward-difference kernel doubles as
//! the certificate: `y` has period `ρ` exactly when `Δ_ρ^{d+1} y = 0`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Dense univariate polynomial over rationals, coefficients ascending.
/// Normalized so the last stored coefficient is nonzero (empty = zero).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<BigRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn eval(&self, q: &BigInt) -> BigRational {
        let x = BigRational::from(q.clone());
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &x + c;
        }
        acc
    }
}

impl std::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    if i == 1 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{i}")?;
                    }
                }
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A period-`period` quasi-polynomial: `y_{q·period + r} = constituents[r](q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiPolynomial {
    pub degree: usize,
    pub period: u64,
    pub constituents: Vec<Polynomial>,
}

impl QuasiPolynomial {
    pub fn eval(&self, m: u64) -> BigRational {
        let r = (m % self.period) as usize;
        let q = BigInt::from(m / self.period);
        self.constituents[r].eval(&q)
    }
}

/// Numerator coefficients `δ_0 .. δ_{ρ(d+1)-1}` of the count generating
/// function over `(1 - t^ρ)^{d+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaVector {
    pub coeffs: Vec<BigInt>,
    pub dim: usize,
    pub period: u64,
}

/// `j`-fold forward difference with step `k`: one application maps `y_m` to
/// `y_{m+k} - y_m`, shortening the sequence by `k`.
pub fn forward_difference(y: &[BigInt], k: usize, j: usize) -> Result<Vec<BigInt>> {
    if k == 0 {
        return Err(Error::InvalidParam("difference step must be positive".into()));
    }
    if y.len() < j * k + 1 {
        return Err(Error::TooFewTerms {
            needed: j * k + 1,
            got: y.len(),
        });
    }
    let mut cur = y.to_vec();
    for _ in 0..j {
        cur = cur.windows(k + 1).map(|w| &w[k] - &w[0]).collect::<Vec<_>>();
        // windows(k+1) yields len-k results, exactly the shortened sequence.
    }
    Ok(cur)
}

/// Interpolating polynomial through `(i, values[i])` for `i = 0..n`, by
/// Newton forward differences. Exact; degree at most `n - 1`.
fn interpolate(values: &[BigRational]) -> Polynomial {
    let n = values.len();
    // Divided differences at unit-spaced nodes are forward differences over
    // factorials.
    let mut table = values.to_vec();
    let mut newton = vec![table[0].clone()];
    let mut factorial = BigRational::one();
    for level in 1..n {
        table = table.windows(2).map(|w| &w[1] - &w[0]).collect();
        factorial *= BigRational::from(BigInt::from(level as i64));
        newton.push(&table[0] / &factorial);
    }
    // Expand sum of c_i * x(x-1)...(x-i+1) into monomial coefficients.
    let mut coeffs = vec![BigRational::zero(); n];
    let mut falling = vec![BigRational::one()]; // product so far, ascending
    for (i, c) in newton.iter().enumerate() {
        if i > 0 {
            // multiply by (x - (i-1))
            let shift = BigRational::from(BigInt::from(i as i64 - 1));
            let mut next = vec![BigRational::zero(); falling.len() + 1];
            for (p, coeff) in falling.iter().enumerate() {
                next[p + 1] += coeff;
                next[p] -= coeff * &shift;
            }
            falling = next;
        }
        for (p, coeff) in falling.iter().enumerate() {
            coeffs[p] += c * coeff;
        }
    }
    Polynomial::new(coeffs)
}

fn check_budget(y: &[BigInt], d: usize, k: u64) -> Result<()> {
    let needed = 2 * (k as usize) * (d + 1);
    if y.len() < needed {
        return Err(Error::TooFewTerms { needed, got: y.len() });
    }
    Ok(())
}

/// Fit the unique period-`k`, degree-≤`d` quasi-polynomial through `y`,
/// verifying every supplied term. Requires the certified budget of
/// `2k(d+1)` terms so that each residue class is both interpolated and
/// cross-checked on held-out terms.
pub fn fit_quasi_polynomial(y: &[BigInt], d: usize, k: u64) -> Result<QuasiPolynomial> {
    check_budget(y, d, k)?;
    let k_us = k as usize;
    let mut constituents = Vec::with_capacity(k_us);
    for r in 0..k_us {
        let class: Vec<BigRational> = (0..)
            .map(|q| q * k_us + r)
            .take_while(|&i| i < y.len())
            .map(|i| BigRational::from(y[i].clone()))
            .collect();
        let poly = interpolate(&class[..=d]);
        for (q, val) in class.iter().enumerate().skip(d + 1) {
            if poly.eval(&BigInt::from(q)) != *val {
                return Err(Error::NotQuasiPolynomial { degree: d, period: k });
            }
        }
        constituents.push(poly);
    }
    Ok(QuasiPolynomial {
        degree: d,
        period: k,
        constituents,
    })
}

/// Minimal period ρ (a divisor of `k`) with which `y` can be written as a
/// degree-`d` quasi-polynomial, certified by `Δ_ρ^{d+1} y = 0` over the full
/// `2k(d+1)`-term budget. Detects quasi-period collapse below the
/// denominator.
pub fn quasi_period(y: &[BigInt], d: usize, k: u64) -> Result<u64> {
    check_budget(y, d, k)?;
    for rho in divisors(k) {
        let diff = forward_difference(y, rho as usize, d + 1)?;
        if diff.iter().all(|v| v.is_zero()) {
            return Ok(rho);
        }
    }
    Err(Error::NotQuasiPolynomial { degree: d, period: k })
}

fn divisors(k: u64) -> Vec<u64> {
    let mut out: Vec<u64> = (1..=k).filter(|i| k % i == 0).collect();
    out.sort_unstable();
    out
}

/// Numerator coefficients of `Σ y_m t^m` over `(1 - t^ρ)^{d+1}`: the
/// convolution of `y` with the expanded denominator. Exactly the first
/// `ρ(d+1)` coefficients may be nonzero; any later nonzero coefficient means
/// the stated `(d, ρ)` is wrong and is reported as non-termination.
pub fn delta_vector(y: &[BigInt], d: usize, rho: u64) -> Result<DeltaVector> {
    let rho_us = rho as usize;
    let support = rho_us * (d + 1);
    if y.len() < support {
        return Err(Error::TooFewTerms {
            needed: support,
            got: y.len(),
        });
    }
    // (1 - s)^{d+1} = Σ_i (-1)^i C(d+1, i) s^i with s = t^ρ.
    let signs: Vec<BigInt> = (0..=d + 1)
        .map(|i| {
            let b = binomial(d as u64 + 1, i as u64);
            if i % 2 == 0 {
                b
            } else {
                -b
            }
        })
        .collect();
    let mut coeffs = Vec::with_capacity(support);
    for j in 0..y.len() {
        let mut c = BigInt::zero();
        for (i, s) in signs.iter().enumerate() {
            let back = i * rho_us;
            if back > j {
                break;
            }
            c += s * &y[j - back];
        }
        if j < support {
            coeffs.push(c);
        } else if !c.is_zero() {
            return Err(Error::NonTerminatingDelta { index: j });
        }
    }
    Ok(DeltaVector {
        coeffs,
        dim: d,
        period: rho,
    })
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 1..=k {
        acc = acc * BigInt::from(n - k + i) / BigInt::from(i);
    }
    acc
}

/// Term `y_m` reconstructed from the numerator coefficients, for any `m`:
/// expanding `1/(1-t^ρ)^{d+1} = Σ_q C(d+q, d) t^{ρq}` gives
/// `y_m = Σ_{j ≡ m (mod ρ)} δ_j · C(d + (m-j)/ρ, d)`.
pub fn eval_from_delta(delta: &DeltaVector, m: u64) -> BigInt {
    let rho = delta.period;
    let d = delta.dim as u64;
    let mut acc = BigInt::zero();
    for (j, c) in delta.coeffs.iter().enumerate() {
        let j = j as u64;
        if j > m || (m - j) % rho != 0 {
            continue;
        }
        let q = (m - j) / rho;
        acc += c * binomial(d + q, d);
    }
    acc
}

/// Normalized volume `d! · vol(P) = (Σ δ_i) / ρ^{d+1}`, exact.
///
/// The power matches the asymptotics: near `t = 1` the generating function
/// behaves like `Σδ / (ρ(1-t))^{d+1}`, while the counts grow like
/// `vol(P) m^d`, so `Σδ = ρ^{d+1} vol(P) d!`. For lattice polytopes (ρ = 1)
/// this is the plain coefficient sum.
pub fn normalized_volume(delta: &DeltaVector) -> BigRational {
    let sum: BigInt = delta.coeffs.iter().sum();
    let denom = BigInt::from(delta.period).pow(delta.dim as u32 + 1);
    BigRational::new(sum, denom)
}

/// Natural logs of the counts, for feature construction. A zero count has no
/// log and is reported with its index.
pub fn log_vector(y: &[BigInt]) -> Result<Vec<f64>> {
    y.iter()
        .enumerate()
        .map(|(i, v)| {
            if v.is_zero() {
                Err(Error::ZeroCount { index: i })
            } else if v.is_negative() {
                Err(Error::InvalidParam(format!("negative count at index {i}")))
            } else {
                Ok(ln_big(v))
            }
        })
        .collect()
}

/// `ln` of a nonnegative big integer, accurate to f64 precision at any size.
fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 52 {
        return x.to_f64().expect("small integer fits f64").ln();
    }
    let shift = bits - 52;
    let top = (x >> shift).to_f64().expect("52-bit mantissa fits f64");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::ehrhart_vector;
    use crate::geometry::{convex_hull, RationalPoint};

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&n| BigInt::from(n)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn wide_triangle_counts(terms: usize) -> Vec<BigInt> {
        let p = convex_hull(
            &[
                RationalPoint::from_integers(&[-1, -1]),
                RationalPoint::from_integers(&[-1, 2]),
                RationalPoint::from_integers(&[2, -1]),
            ],
            2,
        )
        .unwrap();
        ehrhart_vector(&p, terms).counts
    }

    fn half_segment_counts(terms: usize) -> Vec<BigInt> {
        let p = convex_hull(
            &[
                RationalPoint::from_integers(&[0]),
                RationalPoint::new(vec![rat(1, 2)]),
            ],
            1,
        )
        .unwrap();
        ehrhart_vector(&p, terms).counts
    }

    #[test]
    fn first_differences_of_triangle_counts() {
        let y = ints(&[1, 10, 28, 55, 91]);
        assert_eq!(forward_difference(&y, 1, 1).unwrap(), ints(&[9, 18, 27, 36]));
        assert_eq!(forward_difference(&y, 1, 3).unwrap(), ints(&[0, 0]));
        // Δ²y is the constant 2! · (leading coefficient 9/2) = 9.
        assert_eq!(forward_difference(&y, 1, 2).unwrap(), ints(&[9, 9, 9]));
    }

    #[test]
    fn difference_needs_enough_terms() {
        let y = ints(&[1, 2, 3]);
        let err = forward_difference(&y, 2, 2).unwrap_err();
        assert!(matches!(err, Error::TooFewTerms { needed: 5, got: 3 }));
    }

    #[test]
    fn fit_recovers_square_polynomial() {
        // Unit square: y_m = (m+1)^2.
        let y: Vec<BigInt> = (0..8).map(|m: i64| BigInt::from((m + 1) * (m + 1))).collect();
        let qp = fit_quasi_polynomial(&y, 2, 1).unwrap();
        assert_eq!(qp.constituents.len(), 1);
        assert_eq!(qp.constituents[0].coeffs(), &[rat(1, 1), rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn fit_recovers_half_segment_constituents() {
        let y = half_segment_counts(9);
        let qp = fit_quasi_polynomial(&y, 1, 2).unwrap();
        // Both constituents are q + 1, yet the sequence has period 2: as
        // polynomials in m they are m/2 + 1 and (m-1)/2 + 1.
        assert_eq!(qp.constituents[0].coeffs(), &[rat(1, 1), rat(1, 1)]);
        assert_eq!(qp.constituents[1].coeffs(), &[rat(1, 1), rat(1, 1)]);
    }

    #[test]
    fn fit_recovers_denominator_two_triangle_constituents() {
        let p = convex_hull(
            &[
                RationalPoint::from_integers(&[5, -1]),
                RationalPoint::from_integers(&[-1, -1]),
                RationalPoint::new(vec![rat(-1, 1), rat(1, 2)]),
            ],
            2,
        )
        .unwrap();
        let y = ehrhart_vector(&p, 12).counts;
        let qp = fit_quasi_polynomial(&y, 2, 2).unwrap();
        assert_eq!(qp.constituents[0].coeffs(), &[rat(1, 1), rat(9, 1), rat(18, 1)]);
        assert_eq!(qp.constituents[1].coeffs(), &[rat(10, 1), rat(27, 1), rat(18, 1)]);
        assert_eq!(qp.eval(4), rat(91, 1));
    }

    #[test]
    fn fit_rejects_non_polynomial_growth() {
        let y: Vec<BigInt> = (0..8u32).map(|m| BigInt::from(2u64).pow(m)).collect();
        let err = fit_quasi_polynomial(&y, 2, 1).unwrap_err();
        assert!(matches!(err, Error::NotQuasiPolynomial { .. }));
    }

    #[test]
    fn quasi_period_collapses_for_scissors_congruent_triangle() {
        let p = convex_hull(
            &[
                RationalPoint::from_integers(&[5, -1]),
                RationalPoint::from_integers(&[-1, -1]),
                RationalPoint::new(vec![rat(-1, 1), rat(1, 2)]),
            ],
            2,
        )
        .unwrap();
        let y = ehrhart_vector(&p, 12).counts;
        assert_eq!(quasi_period(&y, 2, 2).unwrap(), 1);
    }

    #[test]
    fn quasi_period_of_half_segment_is_two() {
        let y = half_segment_counts(9);
        assert_eq!(quasi_period(&y, 1, 2).unwrap(), 2);
    }

    #[test]
    fn quasi_period_of_shifted_square_is_two() {
        // [1/2, 3/2] x [0, 1]: constituents (m+1)^2 and m(m+1) differ.
        let pts = [
            RationalPoint::new(vec![rat(1, 2), rat(0, 1)]),
            RationalPoint::new(vec![rat(3, 2), rat(0, 1)]),
            RationalPoint::new(vec![rat(1, 2), rat(1, 1)]),
            RationalPoint::new(vec![rat(3, 2), rat(1, 1)]),
        ];
        let p = convex_hull(&pts, 2).unwrap();
        let y = ehrhart_vector(&p, 12).counts;
        assert_eq!(quasi_period(&y, 2, 2).unwrap(), 2);
    }

    #[test]
    fn delta_of_wide_triangle() {
        let y = wide_triangle_counts(8);
        let delta = delta_vector(&y, 2, 1).unwrap();
        assert_eq!(delta.coeffs, ints(&[1, 7, 1]));
        assert_eq!(normalized_volume(&delta), rat(9, 1));
    }

    #[test]
    fn delta_of_unit_square() {
        let y: Vec<BigInt> = (0..7).map(|m: i64| BigInt::from((m + 1) * (m + 1))).collect();
        let delta = delta_vector(&y, 2, 1).unwrap();
        assert_eq!(delta.coeffs, ints(&[1, 1, 0]));
        assert_eq!(normalized_volume(&delta), rat(2, 1));
    }

    #[test]
    fn delta_of_half_segment_and_its_volume() {
        let y = half_segment_counts(9);
        let delta = delta_vector(&y, 1, 2).unwrap();
        assert_eq!(delta.coeffs, ints(&[1, 1, 0, 0]));
        // Σδ / ρ^{d+1} = 2/4; cross-check: Δ_2^1 y is constantly 1, and
        // 1 / ρ^d = 1/2 as well.
        assert_eq!(normalized_volume(&delta), rat(1, 2));
        let diff = forward_difference(&y, 2, 1).unwrap();
        assert!(diff.iter().all(|v| v == &BigInt::from(1)));
    }

    #[test]
    fn delta_with_wrong_period_does_not_terminate() {
        let y = half_segment_counts(9);
        let err = delta_vector(&y, 1, 1).unwrap_err();
        assert!(matches!(err, Error::NonTerminatingDelta { index: 2 }));
    }

    #[test]
    fn delta_identities_on_wide_triangle() {
        let y = wide_triangle_counts(8);
        let delta = delta_vector(&y, 2, 1).unwrap();
        // δ_0 = 1, δ_1 = y_1 - d - 1, δ_d = interior count.
        assert_eq!(delta.coeffs[0], BigInt::from(1));
        assert_eq!(delta.coeffs[1], &y[1] - BigInt::from(3));
        assert_eq!(delta.coeffs[2], BigInt::from(1));
    }

    #[test]
    fn eval_from_delta_extends_counts() {
        let y = wide_triangle_counts(8);
        let delta = delta_vector(&y, 2, 1).unwrap();
        for (m, known) in y.iter().enumerate() {
            assert_eq!(&eval_from_delta(&delta, m as u64), known);
        }
        // L(10) = (9/2)·100 + (9/2)·10 + 1.
        assert_eq!(eval_from_delta(&delta, 10), BigInt::from(496));
    }

    #[test]
    fn eval_from_delta_extends_half_segment() {
        let y = half_segment_counts(9);
        let delta = delta_vector(&y, 1, 2).unwrap();
        for m in 0..40u64 {
            assert_eq!(eval_from_delta(&delta, m), BigInt::from(m / 2 + 1));
        }
    }

    #[test]
    fn log_vector_of_ones_is_zero() {
        let y = ints(&[1, 1, 1]);
        assert_eq!(log_vector(&y).unwrap(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn log_vector_rejects_zero_counts() {
        let y = ints(&[1, 0, 3]);
        let err = log_vector(&y).unwrap_err();
        assert!(matches!(err, Error::ZeroCount { index: 1 }));
    }

    #[test]
    fn log_counts_approach_volume_asymptotics() {
        // log y_m → d log m + log vol(P) for the wide triangle (vol 9/2).
        let y = wide_triangle_counts(8);
        let delta = delta_vector(&y, 2, 1).unwrap();
        let m = 1000u64;
        let log_count = ln_big(&eval_from_delta(&delta, m));
        let predicted = 2.0 * (m as f64).ln() + 4.5f64.ln();
        assert!((log_count - predicted).abs() < 0.01);
    }

    #[test]
    fn ln_big_handles_huge_values() {
        let x = BigInt::from(10).pow(200);
        let expect = 200.0 * 10f64.ln();
        assert!((ln_big(&x) - expect).abs() < 1e-9);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(12, 2), BigInt::from(66));
        assert_eq!(binomial(5, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
    }

    #[test]
    fn round_trip_on_random_lattice_polytopes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let mut done = 0;
        while done < 8 {
            let d = rng.gen_range(2..=3usize);
            let n = d + rng.gen_range(1..=3);
            let pts: Vec<RationalPoint> = (0..n)
                .map(|_| {
                    RationalPoint::from_integers(
                        &(0..d).map(|_| rng.gen_range(-4i64..=4)).collect::<Vec<_>>(),
                    )
                })
                .collect();
            let Ok(p) = convex_hull(&pts, d) else { continue };
            let y = ehrhart_vector(&p, 2 * (d + 1)).counts;
            assert_eq!(quasi_period(&y, d, 1).unwrap(), 1);
            let delta = delta_vector(&y, d, 1).unwrap();
            for (m, known) in y.iter().enumerate() {
                assert_eq!(&eval_from_delta(&delta, m as u64), known);
            }
            // Constituent leading coefficients all equal vol(kP).
            let qp = fit_quasi_polynomial(&y, d, 1).unwrap();
            let lead = qp.constituents[0].leading_coefficient().unwrap().clone();
            let vol = normalized_volume(&delta);
            let mut fact = BigRational::one();
            for i in 2..=d {
                fact *= BigRational::from(BigInt::from(i as i64));
            }
            assert_eq!(lead * fact, vol);
            done += 1;
        }
    }
}
