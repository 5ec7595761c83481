//! Exact lattice-point counting for dilations of rational polytopes.
//!
//! The counter slices along coordinates: it scans integer values of the first
//! coordinate over the exact projection interval, substitutes each into the
//! inequality system, and recurses until a single variable remains, where the
//! count is a closed interval length. Scan bounds at every level come from
//! the facets of the exact projections of the polytope (hulls of projected
//! vertices, computed once per polytope), so no time is wasted on slices that
//! miss the polytope entirely. Arithmetic runs in `i128` when a conservative
//! magnitude bound allows it and falls back to big integers otherwise, so
//! results are exact in all cases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::geometry::{convex_hull, RationalPoint, RationalPolytope};

/// Consecutive dilation counts `counts[m] = |mP ∩ Z^d|` for `m = 0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EhrhartVector {
    pub counts: Vec<BigInt>,
    pub dim: usize,
    pub denominator: u64,
}

impl EhrhartVector {
    /// Number of stored terms (`T + 1`).
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// `|mP ∩ Z^d|`, exactly. The zeroth dilation is the single point at the
/// origin, so `m = 0` always counts 1.
pub fn count_dilation(p: &RationalPolytope, m: u64) -> BigInt {
    SlicedSystem::build(p).count(m)
}

/// Counts of the first `terms + 1` dilations `m = 0..=terms`, in parallel.
pub fn ehrhart_vector(p: &RationalPolytope, terms: usize) -> EhrhartVector {
    let sys = SlicedSystem::build(p);
    let counts: Vec<BigInt> = (0..=terms as u64).into_par_iter().map(|m| sys.count(m)).collect();
    EhrhartVector {
        counts,
        dim: p.ambient_dim(),
        denominator: p.denominator(),
    }
}

/// The integer points of `P` itself, in lexicographic order.
pub fn lattice_points(p: &RationalPolytope) -> Vec<Vec<BigInt>> {
    SlicedSystem::build(p).enumerate()
}

/// One inequality `coeffs · (x_1..x_j) >= offset` over a prefix of the
/// coordinates. Dilating by `m` scales only the offset.
struct Row {
    coeffs: Vec<BigInt>,
    offset: BigInt,
}

/// Per-polytope slicing data: `levels[j-1]` is the facet system of the exact
/// projection of `P` onto the first `j` coordinates (level `d` is `P`'s own
/// facet system).
struct SlicedSystem {
    levels: Vec<Vec<Row>>,
    /// Ceiling of the largest absolute vertex coordinate, for overflow bounds.
    coord_bound: BigInt,
}

impl SlicedSystem {
    fn build(p: &RationalPolytope) -> Self {
        let d = p.ambient_dim();
        let mut levels = Vec::with_capacity(d);
        for j in 1..d {
            let projected: Vec<RationalPoint> = p
                .vertices()
                .iter()
                .map(|v| RationalPoint::new(v.coords[..j].to_vec()))
                .collect();
            let hull = convex_hull(&projected, j)
                .expect("projection of a full-dimensional polytope is full-dimensional");
            levels.push(
                hull.facets()
                    .iter()
                    .map(|f| Row {
                        coeffs: f.normal.clone(),
                        offset: f.offset.clone(),
                    })
                    .collect(),
            );
        }
        levels.push(
            p.facets()
                .iter()
                .map(|f| Row {
                    coeffs: f.normal.clone(),
                    offset: f.offset.clone(),
                })
                .collect(),
        );
        let mut coord_bound = BigInt::one();
        for v in p.vertices() {
            for c in &v.coords {
                let ceil = c.abs().ceil().to_integer();
                if ceil > coord_bound {
                    coord_bound = ceil;
                }
            }
        }
        SlicedSystem { levels, coord_bound }
    }

    fn count(&self, m: u64) -> BigInt {
        if m == 0 {
            return BigInt::one();
        }
        let m_big = BigInt::from(m);
        if self.fits_i128(&m_big) {
            let levels = self.scaled_levels::<i128>(&m_big);
            let mut total = BigInt::zero();
            count_rec_i128(&levels, &mut Vec::new(), &mut total);
            total
        } else {
            let levels = self.scaled_levels::<BigInt>(&m_big);
            let mut total = BigInt::zero();
            count_rec_big(&levels, &mut Vec::new(), &mut total);
            total
        }
    }

    fn enumerate(&self) -> Vec<Vec<BigInt>> {
        let levels = self.scaled_levels::<BigInt>(&BigInt::one());
        let mut out = Vec::new();
        enumerate_rec(&levels, &mut Vec::new(), &mut out);
        out
    }

    /// True when every partial sum in the recursion is guaranteed to stay far
    /// inside the `i128` range: scanned coordinates of `mP` are bounded by
    /// `m * coord_bound`, so row magnitudes bound everything.
    fn fits_i128(&self, m: &BigInt) -> bool {
        let limit = BigInt::one() << 120;
        let x_bound = m * &self.coord_bound;
        for level in &self.levels {
            for row in level {
                let mut risk = (m * &row.offset).abs();
                for a in &row.coeffs {
                    risk += a.abs() * &x_bound;
                }
                if risk >= limit {
                    return false;
                }
            }
        }
        true
    }

    /// Levels with offsets pre-scaled by the dilation factor, converted to
    /// the working integer type.
    fn scaled_levels<T: SliceInt>(&self, m: &BigInt) -> Vec<Vec<(Vec<T>, T)>> {
        self.levels
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|row| {
                        let coeffs = row.coeffs.iter().map(|c| T::from_bigint(c)).collect();
                        let offset = T::from_bigint(&(m * &row.offset));
                        (coeffs, offset)
                    })
                    .collect()
            })
            .collect()
    }
}

trait SliceInt: Integer + Clone {
    fn from_bigint(x: &BigInt) -> Self;
}

impl SliceInt for i128 {
    fn from_bigint(x: &BigInt) -> Self {
        x.to_i128().expect("magnitude bound guarantees i128 fits")
    }
}

impl SliceInt for BigInt {
    fn from_bigint(x: &BigInt) -> Self {
        x.clone()
    }
}

/// Integer range of the next coordinate after substituting `prefix`, from the
/// level's rows. `None` means the slice is empty.
fn slice_interval<T: SliceInt>(rows: &[(Vec<T>, T)], prefix: &[T]) -> Option<(T, T)> {
    let j = prefix.len();
    let mut lo: Option<T> = None;
    let mut hi: Option<T> = None;
    for (coeffs, offset) in rows {
        let mut residual = offset.clone();
        for (a, x) in coeffs[..j].iter().zip(prefix) {
            residual = residual - a.clone() * x.clone();
        }
        let lead = &coeffs[j];
        if lead.is_zero() {
            // Constraint on the prefix alone; projection bounds make this
            // almost always satisfied, but check exactly anyway.
            if residual > T::zero() {
                return None;
            }
        } else if *lead > T::zero() {
            let b = residual.div_ceil(lead);
            lo = Some(match lo {
                Some(cur) => {
                    if b > cur {
                        b
                    } else {
                        cur
                    }
                }
                None => b,
            });
        } else {
            let b = residual.div_floor(lead);
            hi = Some(match hi {
                Some(cur) => {
                    if b < cur {
                        b
                    } else {
                        cur
                    }
                }
                None => b,
            });
        }
    }
    let (lo, hi) = (lo?, hi?);
    if lo > hi {
        None
    } else {
        Some((lo, hi))
    }
}

fn count_rec_i128(levels: &[Vec<(Vec<i128>, i128)>], prefix: &mut Vec<i128>, total: &mut BigInt) {
    let j = prefix.len();
    let Some((lo, hi)) = slice_interval(&levels[j], prefix) else {
        return;
    };
    if j + 1 == levels.len() {
        *total += BigInt::from(hi - lo + 1);
        return;
    }
    for x in lo..=hi {
        prefix.push(x);
        count_rec_i128(levels, prefix, total);
        prefix.pop();
    }
}

fn count_rec_big(levels: &[Vec<(Vec<BigInt>, BigInt)>], prefix: &mut Vec<BigInt>, total: &mut BigInt) {
    let j = prefix.len();
    let Some((lo, hi)) = slice_interval(&levels[j], prefix) else {
        return;
    };
    if j + 1 == levels.len() {
        *total += &hi - &lo + 1;
        return;
    }
    let mut x = lo;
    while x <= hi {
        prefix.push(x.clone());
        count_rec_big(levels, prefix, total);
        prefix.pop();
        x += 1;
    }
}

fn enumerate_rec(
    levels: &[Vec<(Vec<BigInt>, BigInt)>],
    prefix: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    let j = prefix.len();
    let Some((lo, hi)) = slice_interval(&levels[j], prefix) else {
        return;
    };
    let mut x = lo;
    while x <= hi {
        prefix.push(x.clone());
        if prefix.len() == levels.len() {
            out.push(prefix.clone());
        } else {
            enumerate_rec(levels, prefix, out);
        }
        prefix.pop();
        x += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::convex_hull;
    use num_rational::BigRational;

    fn pt(coords: &[i64]) -> RationalPoint {
        RationalPoint::from_integers(coords)
    }

    fn rat_pt(coords: &[(i64, i64)]) -> RationalPoint {
        RationalPoint::new(
            coords
                .iter()
                .map(|&(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
                .collect(),
        )
    }

    /// Independent oracle: enumerate the integer bounding box of `mP` and
    /// test every point against every facet. No slicing, no projections.
    pub(crate) fn brute_force_count(p: &RationalPolytope, m: u64) -> BigInt {
        if m == 0 {
            return BigInt::one();
        }
        let d = p.ambient_dim();
        let m_rat = BigRational::from(BigInt::from(m));
        let mut lo = vec![BigInt::zero(); d];
        let mut hi = vec![BigInt::zero(); d];
        for i in 0..d {
            let coords: Vec<BigRational> =
                p.vertices().iter().map(|v| &v.coords[i] * &m_rat).collect();
            lo[i] = coords.iter().min().unwrap().ceil().to_integer();
            hi[i] = coords.iter().max().unwrap().floor().to_integer();
        }
        if (0..d).any(|i| lo[i] > hi[i]) {
            return BigInt::zero();
        }
        let mut count = BigInt::zero();
        let mut x = lo.clone();
        'outer: loop {
            let inside = p.facets().iter().all(|f| {
                let dot: BigInt = f.normal.iter().zip(&x).map(|(a, b)| a * b).sum();
                dot >= &f.offset * BigInt::from(m)
            });
            if inside {
                count += 1;
            }
            for i in (0..d).rev() {
                if x[i] < hi[i] {
                    x[i] += 1;
                    for j in i + 1..d {
                        x[j] = lo[j].clone();
                    }
                    continue 'outer;
                }
            }
            break;
        }
        count
    }

    fn wide_triangle() -> RationalPolytope {
        convex_hull(&[pt(&[-1, -1]), pt(&[-1, 2]), pt(&[2, -1])], 2).unwrap()
    }

    #[test]
    fn wide_triangle_counts_match_known_values() {
        let p = wide_triangle();
        let ev = ehrhart_vector(&p, 4);
        let expect: Vec<BigInt> = [1, 10, 28, 55, 91].iter().map(|&n| BigInt::from(n)).collect();
        assert_eq!(ev.counts, expect);
        assert_eq!(ev.dim, 2);
        assert_eq!(ev.denominator, 1);
    }

    #[test]
    fn standard_simplex_counts_are_binomials() {
        let p = convex_hull(&[pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1])], 2).unwrap();
        let ev = ehrhart_vector(&p, 3);
        let expect: Vec<BigInt> = [1, 3, 6, 10].iter().map(|&n| BigInt::from(n)).collect();
        assert_eq!(ev.counts, expect);
    }

    #[test]
    fn unit_cube_dilation_counts() {
        let mut pts = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    pts.push(pt(&[x, y, z]));
                }
            }
        }
        let p = convex_hull(&pts, 3).unwrap();
        assert_eq!(count_dilation(&p, 4), BigInt::from(125));
        assert_eq!(count_dilation(&p, 0), BigInt::from(1));
    }

    #[test]
    fn unit_segment_counts() {
        let p = convex_hull(&[pt(&[0]), pt(&[1])], 1).unwrap();
        let ev = ehrhart_vector(&p, 3);
        let expect: Vec<BigInt> = [1, 2, 3, 4].iter().map(|&n| BigInt::from(n)).collect();
        assert_eq!(ev.counts, expect);
    }

    #[test]
    fn half_open_triangle_has_no_lattice_points() {
        let p = convex_hull(
            &[rat_pt(&[(1, 3), (1, 3)]), rat_pt(&[(2, 3), (1, 3)]), rat_pt(&[(1, 3), (2, 3)])],
            2,
        )
        .unwrap();
        assert!(lattice_points(&p).is_empty());
        assert_eq!(count_dilation(&p, 1), BigInt::zero());
        assert_eq!(count_dilation(&p, 3), BigInt::from(3));
    }

    #[test]
    fn lattice_points_of_wide_triangle_are_sorted_and_complete() {
        let p = wide_triangle();
        let points = lattice_points(&p);
        assert_eq!(points.len(), 10);
        let mut sorted = points.clone();
        sorted.sort();
        assert_eq!(points, sorted);
        assert!(points.contains(&vec![BigInt::zero(), BigInt::zero()]));
    }

    #[test]
    fn denominator_two_triangle_counts_match_known_values() {
        let apex = rat_pt(&[(-1, 1), (1, 2)]);
        let p = convex_hull(&[pt(&[5, -1]), pt(&[-1, -1]), apex], 2).unwrap();
        let ev = ehrhart_vector(&p, 4);
        let expect: Vec<BigInt> = [1, 10, 28, 55, 91].iter().map(|&n| BigInt::from(n)).collect();
        assert_eq!(ev.counts, expect);
        assert_eq!(ev.denominator, 2);
    }

    #[test]
    fn counting_agrees_with_brute_force_on_random_polytopes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 12 {
            let d = rng.gen_range(2..=3);
            let n = d + rng.gen_range(1..=3);
            let pts: Vec<RationalPoint> = (0..n)
                .map(|_| {
                    RationalPoint::new(
                        (0..d)
                            .map(|_| BigRational::from(BigInt::from(rng.gen_range(-3i64..=3))))
                            .collect(),
                    )
                })
                .collect();
            let Ok(p) = convex_hull(&pts, d) else { continue };
            for m in 0..=4u64 {
                assert_eq!(count_dilation(&p, m), brute_force_count(&p, m));
            }
            checked += 1;
        }
    }

    #[test]
    fn counting_is_invariant_under_unimodular_transform() {
        let p = wide_triangle();
        let u = vec![
            vec![BigInt::from(1), BigInt::from(1)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let q = p
            .transform(&u, &pt(&[3, -2]), &BigRational::one())
            .unwrap();
        for m in 0..=5u64 {
            assert_eq!(count_dilation(&p, m), count_dilation(&q, m));
        }
    }

    #[test]
    fn dilation_composes_with_transform_scaling() {
        let p = wide_triangle();
        let id = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let tripled = p
            .transform(&id, &RationalPoint::origin(2), &BigRational::from(BigInt::from(3)))
            .unwrap();
        for m in 0..=4u64 {
            assert_eq!(count_dilation(&tripled, m), count_dilation(&p, 3 * m));
        }
    }

    #[test]
    fn counts_are_monotone_when_origin_is_inside() {
        let p = wide_triangle();
        let ev = ehrhart_vector(&p, 8);
        for w in ev.counts.windows(2) {
            assert!(w[0] <= w[1]);
        }
    }
}
