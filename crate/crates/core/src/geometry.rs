//! Rational polytopes with exact vertex and facet representations.
//!
//! All coordinates are arbitrary-precision rationals and every predicate is
//! decided exactly, so hulls, facet incidences and point classification never
//! suffer rounding artefacts. Polytopes are full-dimensional by construction:
//! building one from a degenerate point set reports the actual affine
//! dimension instead, which generators use as a redraw signal.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg;

/// A point of `Q^d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint {
    pub coords: Vec<BigRational>,
}

impl RationalPoint {
    pub fn new(coords: Vec<BigRational>) -> Self {
        Self { coords }
    }

    /// Convenience constructor from integer coordinates.
    pub fn from_integers(coords: &[i64]) -> Self {
        Self {
            coords: coords.iter().map(|&c| BigRational::from(BigInt::from(c))).collect(),
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![BigRational::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    fn sub(&self, other: &Self) -> Vec<BigRational> {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a - b)
            .collect()
    }
}

/// The closed halfspace `normal · x >= offset`, with integer data normalized
/// so that the gcd of all normal entries together with the offset is 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Halfspace {
    pub normal: Vec<BigInt>,
    pub offset: BigInt,
}

impl Halfspace {
    fn from_row(mut row: Vec<BigInt>) -> Self {
        debug_assert!(row.len() >= 2);
        let mut gcd = BigInt::zero();
        for x in &row {
            gcd = gcd.gcd(x);
        }
        if !gcd.is_zero() && !gcd.is_one() {
            for x in &mut row {
                *x = &*x / &gcd;
            }
        }
        let offset = row.pop().unwrap();
        debug_assert!(row.iter().any(|x| !x.is_zero()), "zero normal");
        Halfspace { normal: row, offset }
    }

    /// `normal · x - offset`; positive strictly inside, zero on the
    /// hyperplane, negative outside.
    pub fn eval(&self, p: &RationalPoint) -> BigRational {
        let mut acc = BigRational::from(-self.offset.clone());
        for (n, x) in self.normal.iter().zip(&p.coords) {
            acc += x * BigRational::from(n.clone());
        }
        acc
    }
}

/// Where a point sits relative to a polytope.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointLocation {
    Interior,
    Boundary,
    Outside,
}

/// A full-dimensional rational polytope in canonical form: vertices
/// deduplicated, minimal and lexicographically sorted; facets normalized and
/// sorted; `denominator` the least positive integer `k` with `kP` a lattice
/// polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalPolytope {
    ambient_dim: usize,
    vertices: Vec<RationalPoint>,
    facets: Vec<Halfspace>,
    denominator: u64,
}

impl RationalPolytope {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn vertices(&self) -> &[RationalPoint] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Halfspace] {
        &self.facets
    }

    /// Least positive `k` such that `kP` has integer vertices.
    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn is_lattice(&self) -> bool {
        self.denominator == 1
    }

    /// Exact location of `x` relative to the polytope.
    ///
    /// Panics if `x` lives in a different ambient dimension.
    pub fn classify_point(&self, x: &RationalPoint) -> PointLocation {
        assert_eq!(x.dim(), self.ambient_dim, "point dimension mismatch");
        let mut on_boundary = false;
        for f in &self.facets {
            let e = f.eval(x);
            if e.is_negative() {
                return PointLocation::Outside;
            }
            if e.is_zero() {
                on_boundary = true;
            }
        }
        if on_boundary {
            PointLocation::Boundary
        } else {
            PointLocation::Interior
        }
    }

    /// Image polytope under `x ↦ s · (U x + t)` with `U` unimodular and
    /// `s > 0`; vertices are mapped exactly and re-canonicalized.
    pub fn transform(
        &self,
        u: &[Vec<BigInt>],
        t: &RationalPoint,
        s: &BigRational,
    ) -> Result<RationalPolytope> {
        let d = self.ambient_dim;
        if u.len() != d || u.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidParam(format!("transform matrix must be {d}x{d}")));
        }
        if t.dim() != d {
            return Err(Error::InvalidParam("translation dimension mismatch".into()));
        }
        if !s.is_positive() {
            return Err(Error::InvalidParam("dilation factor must be positive".into()));
        }
        let det = linalg::det(
            u.iter()
                .map(|row| row.iter().map(|x| BigRational::from(x.clone())).collect())
                .collect(),
        );
        if !det.clone().abs().is_one() {
            return Err(Error::NonUnimodular { det: det.to_string() });
        }
        let images: Vec<RationalPoint> = self
            .vertices
            .iter()
            .map(|v| {
                let coords = u
                    .iter()
                    .zip(&t.coords)
                    .map(|(row, ti)| {
                        let mut acc = ti.clone();
                        for (a, x) in row.iter().zip(&v.coords) {
                            acc += x * BigRational::from(a.clone());
                        }
                        acc * s
                    })
                    .collect();
                RationalPoint::new(coords)
            })
            .collect();
        convex_hull(&images, d)
    }
}

/// Exact convex hull of a point set, by incremental beneath-beyond insertion.
///
/// Returns the canonical polytope, or `DimensionDeficient` with the actual
/// affine dimension when the points do not span `R^d`.
pub fn convex_hull(points: &[RationalPoint], ambient_dim: usize) -> Result<RationalPolytope> {
    let d = ambient_dim;
    if d == 0 {
        return Err(Error::InvalidParam("ambient dimension must be positive".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidParam("empty point list".into()));
    }
    if let Some(p) = points.iter().find(|p| p.dim() != d) {
        return Err(Error::InvalidParam(format!(
            "point of dimension {} in ambient dimension {d}",
            p.dim()
        )));
    }
    let mut pts: Vec<RationalPoint> = points.to_vec();
    pts.sort();
    pts.dedup();

    let builder = HullBuilder::new(pts, d)?;
    builder.finish()
}

struct BuildFacet {
    plane: Halfspace,
    /// Sorted indices of every processed point lying on the hyperplane.
    incident: Vec<usize>,
}

struct HullBuilder {
    dim: usize,
    pts: Vec<RationalPoint>,
    facets: Vec<BuildFacet>,
    processed: Vec<usize>,
    /// Fixed interior reference point (centroid of the starting simplex),
    /// used to orient every facet.
    reference: RationalPoint,
}

impl HullBuilder {
    fn new(pts: Vec<RationalPoint>, d: usize) -> Result<Self> {
        // Greedily pick d+1 affinely independent points for the seed simplex.
        let mut simplex = vec![0usize];
        let mut diffs: Vec<Vec<BigRational>> = Vec::new();
        for i in 1..pts.len() {
            if simplex.len() == d + 1 {
                break;
            }
            let cand = pts[i].sub(&pts[simplex[0]]);
            let mut trial = diffs.clone();
            trial.push(cand.clone());
            if linalg::rank(trial) > diffs.len() {
                diffs.push(cand);
                simplex.push(i);
            }
        }
        if simplex.len() < d + 1 {
            return Err(Error::DimensionDeficient { dim: simplex.len() - 1 });
        }

        let n_simplex = BigRational::from(BigInt::from(simplex.len() as i64));
        let mut centroid = vec![BigRational::zero(); d];
        for &i in &simplex {
            for (c, x) in centroid.iter_mut().zip(&pts[i].coords) {
                *c += x;
            }
        }
        for c in &mut centroid {
            *c /= &n_simplex;
        }
        let reference = RationalPoint::new(centroid);

        let mut builder = HullBuilder {
            dim: d,
            pts,
            facets: Vec::new(),
            processed: simplex.clone(),
            reference,
        };
        for omit in 0..simplex.len() {
            let subset: Vec<usize> = simplex
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != omit)
                .map(|(_, &i)| i)
                .collect();
            let plane = builder
                .oriented_plane(&subset)
                .expect("seed simplex facet must be non-degenerate");
            let incident = builder.coplanar_points(&plane);
            builder.facets.push(BuildFacet { plane, incident });
        }
        Ok(builder)
    }

    /// Hyperplane through the given affinely independent points, oriented so
    /// the interior reference point strictly satisfies it. `None` when the
    /// points are affinely dependent or the plane passes through the
    /// reference.
    fn oriented_plane(&self, idx: &[usize]) -> Option<Halfspace> {
        debug_assert_eq!(idx.len(), self.dim);
        let base = &self.pts[idx[0]];
        let diffs: Vec<Vec<BigRational>> =
            idx[1..].iter().map(|&i| self.pts[i].sub(base)).collect();
        let normal = linalg::cross_product(&diffs, self.dim)?;
        let mut row = normal.clone();
        let offset: BigRational = normal
            .iter()
            .zip(&base.coords)
            .map(|(n, x)| n * x)
            .sum();
        row.push(offset);
        let int_row = linalg::primitive_integer_direction(&row);
        let mut plane = Halfspace::from_row(int_row);
        let at_ref = plane.eval(&self.reference);
        if at_ref.is_zero() {
            return None;
        }
        if at_ref.is_negative() {
            for n in &mut plane.normal {
                *n = -n.clone();
            }
            plane.offset = -plane.offset.clone();
        }
        Some(plane)
    }

    fn coplanar_points(&self, plane: &Halfspace) -> Vec<usize> {
        self.processed
            .iter()
            .copied()
            .filter(|&i| plane.eval(&self.pts[i]).is_zero())
            .collect()
    }

    /// Affine dimension of a set of point indices (-1 for the empty set).
    fn affine_dim(&self, idx: &[usize]) -> isize {
        if idx.is_empty() {
            return -1;
        }
        let base = &self.pts[idx[0]];
        let diffs: Vec<Vec<BigRational>> =
            idx[1..].iter().map(|&i| self.pts[i].sub(base)).collect();
        linalg::rank(diffs) as isize
    }

    /// `idx[0]` plus a maximal affinely independent extension from `idx`.
    fn affine_basis(&self, idx: &[usize]) -> Vec<usize> {
        let mut basis = vec![idx[0]];
        let mut diffs: Vec<Vec<BigRational>> = Vec::new();
        for &i in &idx[1..] {
            let cand = self.pts[i].sub(&self.pts[idx[0]]);
            let mut trial = diffs.clone();
            trial.push(cand.clone());
            if linalg::rank(trial) > diffs.len() {
                diffs.push(cand);
                basis.push(i);
            }
        }
        basis
    }

    fn insert(&mut self, p: usize) {
        let evals: Vec<BigRational> =
            self.facets.iter().map(|f| f.plane.eval(&self.pts[p])).collect();
        let visible: Vec<usize> = (0..self.facets.len())
            .filter(|&i| evals[i].is_negative())
            .collect();
        self.processed.push(p);
        if visible.is_empty() {
            // Inside or on the boundary: extend incidences of touching facets.
            for (f, e) in self.facets.iter_mut().zip(&evals) {
                if e.is_zero() {
                    f.incident.push(p);
                }
            }
            return;
        }
        for (f, e) in self.facets.iter_mut().zip(&evals) {
            if e.is_zero() {
                f.incident.push(p);
            }
        }

        // Horizon ridges: (d-2)-dimensional intersections between a visible
        // facet and a kept one. Each spawns a facet through the ridge and p.
        let invisible: Vec<usize> = (0..self.facets.len())
            .filter(|&i| !evals[i].is_negative())
            .collect();
        let mut new_facets: BTreeSet<(Vec<BigInt>, BigInt)> = BTreeSet::new();
        for &fv in &visible {
            for &fi in &invisible {
                let shared: Vec<usize> = intersect_sorted(
                    &self.facets[fv].incident,
                    &self.facets[fi].incident,
                );
                if (shared.len() as isize) < self.dim as isize - 1 {
                    continue;
                }
                if self.affine_dim(&shared) != self.dim as isize - 2 {
                    continue;
                }
                let mut gens = if shared.is_empty() {
                    Vec::new()
                } else {
                    self.affine_basis(&shared)
                };
                gens.push(p);
                if gens.len() != self.dim {
                    continue;
                }
                let Some(plane) = self.oriented_plane(&gens) else {
                    // p affinely dependent on the ridge: the extension of an
                    // existing coplanar facet already covers this.
                    continue;
                };
                new_facets.insert((plane.normal, plane.offset));
            }
        }

        let old = std::mem::take(&mut self.facets);
        self.facets = old
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !evals[*i].is_negative())
            .map(|(_, f)| f)
            .collect();
        for (normal, offset) in new_facets {
            let plane = Halfspace { normal, offset };
            if self.facets.iter().any(|f| f.plane == plane) {
                continue; // an extended coplanar facet
            }
            let incident = self.coplanar_points(&plane);
            self.facets.push(BuildFacet { plane, incident });
        }
    }

    fn finish(mut self) -> Result<RationalPolytope> {
        let order: Vec<usize> = (0..self.pts.len())
            .filter(|i| !self.processed.contains(i))
            .collect();
        for p in order {
            self.insert(p);
        }

        let d = self.dim;
        let mut vertices = Vec::new();
        for &i in &self.processed {
            let tight: Vec<Vec<BigRational>> = self
                .facets
                .iter()
                .filter(|f| f.plane.eval(&self.pts[i]).is_zero())
                .map(|f| {
                    f.plane
                        .normal
                        .iter()
                        .map(|n| BigRational::from(n.clone()))
                        .collect()
                })
                .collect();
            if tight.len() >= d && linalg::rank(tight) == d {
                vertices.push(self.pts[i].clone());
            }
        }
        vertices.sort();

        let mut facets: Vec<Halfspace> = self.facets.iter().map(|f| f.plane.clone()).collect();
        facets.sort();
        facets.dedup();

        let mut denom = BigInt::one();
        for v in &vertices {
            for c in &v.coords {
                denom = denom.lcm(c.denom());
            }
        }
        let denominator = denom.to_u64().ok_or(Error::DenominatorOverflow)?;

        let poly = RationalPolytope {
            ambient_dim: d,
            vertices,
            facets,
            denominator,
        };
        verify_hull(&poly, &self.pts);
        Ok(poly)
    }
}

fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut a: Vec<usize> = a.to_vec();
    a.sort_unstable();
    let mut b: Vec<usize> = b.to_vec();
    b.sort_unstable();
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Construction-time certificate: every input point satisfies every facet,
/// and every facet is tight at enough affinely independent vertices to span
/// its hyperplane. A violation is an internal bug, not a caller error.
fn verify_hull(poly: &RationalPolytope, input: &[RationalPoint]) {
    let d = poly.ambient_dim;
    for p in input {
        for f in &poly.facets {
            assert!(
                !f.eval(p).is_negative(),
                "hull certificate violated: input point outside facet"
            );
        }
    }
    for f in &poly.facets {
        let tight: Vec<&RationalPoint> = poly
            .vertices
            .iter()
            .filter(|v| f.eval(v).is_zero())
            .collect();
        assert!(tight.len() >= d, "facet tight at fewer than d vertices");
        let diffs: Vec<Vec<BigRational>> =
            tight[1..].iter().map(|v| v.sub(tight[0])).collect();
        assert_eq!(
            linalg::rank(diffs),
            d - 1,
            "facet's tight vertices do not span its hyperplane"
        );
    }
    for v in &poly.vertices {
        for f in &poly.facets {
            assert!(!f.eval(v).is_negative(), "vertex violates a facet");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn pt(coords: &[i64]) -> RationalPoint {
        RationalPoint::from_integers(coords)
    }

    /// conv{(-1,-1), (-1,2), (2,-1)}: lattice triangle with 10 lattice
    /// points, one of them interior.
    pub(crate) fn wide_triangle() -> RationalPolytope {
        convex_hull(&[pt(&[-1, -1]), pt(&[-1, 2]), pt(&[2, -1])], 2).unwrap()
    }

    /// conv{(5,-1), (-1,-1), (-1,1/2)}: denominator-2 triangle.
    pub(crate) fn half_triangle() -> RationalPolytope {
        let apex = RationalPoint::new(vec![q(-1, 1), q(1, 2)]);
        convex_hull(&[pt(&[5, -1]), pt(&[-1, -1]), apex], 2).unwrap()
    }

    fn unit_square() -> RationalPolytope {
        convex_hull(&[pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1]), pt(&[1, 1])], 2).unwrap()
    }

    #[test]
    fn hull_drops_interior_and_duplicate_points() {
        let p = convex_hull(
            &[pt(&[-1, -1]), pt(&[-1, 2]), pt(&[2, -1]), pt(&[0, 0]), pt(&[-1, -1])],
            2,
        )
        .unwrap();
        assert_eq!(p, wide_triangle());
        assert_eq!(p.vertices().len(), 3);
        assert_eq!(p.facets().len(), 3);
    }

    #[test]
    fn hull_drops_boundary_midpoint() {
        let mid = RationalPoint::new(vec![q(1, 2), q(0, 1)]);
        let p = convex_hull(
            &[pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1]), pt(&[1, 1]), mid],
            2,
        )
        .unwrap();
        assert_eq!(p, unit_square());
        assert_eq!(p.vertices().len(), 4);
    }

    #[test]
    fn collinear_points_are_dimension_deficient() {
        let err = convex_hull(&[pt(&[0, 0]), pt(&[1, 1]), pt(&[2, 2])], 2).unwrap_err();
        match err {
            Error::DimensionDeficient { dim } => assert_eq!(dim, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn single_point_is_dimension_deficient() {
        let err = convex_hull(&[pt(&[3])], 1).unwrap_err();
        match err {
            Error::DimensionDeficient { dim } => assert_eq!(dim, 0),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn segment_in_one_dimension() {
        let p = convex_hull(&[pt(&[0]), pt(&[1])], 1).unwrap();
        assert_eq!(p.vertices().len(), 2);
        assert_eq!(p.facets().len(), 2);
        assert_eq!(p.denominator(), 1);
    }

    #[test]
    fn half_triangle_has_denominator_two() {
        let p = half_triangle();
        assert_eq!(p.denominator(), 2);
        assert_eq!(p.vertices().len(), 3);
    }

    #[test]
    fn classify_interior_boundary_outside() {
        let p = wide_triangle();
        assert_eq!(p.classify_point(&pt(&[0, 0])), PointLocation::Interior);
        assert_eq!(p.classify_point(&pt(&[2, -1])), PointLocation::Boundary);
        assert_eq!(p.classify_point(&pt(&[0, -1])), PointLocation::Boundary);
        assert_eq!(p.classify_point(&pt(&[3, 0])), PointLocation::Outside);
    }

    #[test]
    fn hull_is_idempotent_on_vertices() {
        for poly in [wide_triangle(), half_triangle(), unit_square()] {
            let again = convex_hull(poly.vertices(), poly.ambient_dim()).unwrap();
            assert_eq!(again, poly);
        }
    }

    #[test]
    fn transform_by_coordinate_swap_fixes_square() {
        let square = unit_square();
        let u = vec![
            vec![BigInt::from(0), BigInt::from(1)],
            vec![BigInt::from(1), BigInt::from(0)],
        ];
        let image = square
            .transform(&u, &RationalPoint::origin(2), &BigRational::one())
            .unwrap();
        assert_eq!(image, square);
    }

    #[test]
    fn transform_dilates_exactly() {
        let tri = convex_hull(&[pt(&[0, 0]), pt(&[1, 0]), pt(&[0, 1])], 2).unwrap();
        let id = vec![
            vec![BigInt::from(1), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let image = tri
            .transform(&id, &RationalPoint::origin(2), &q(2, 1))
            .unwrap();
        let expect = convex_hull(&[pt(&[0, 0]), pt(&[2, 0]), pt(&[0, 2])], 2).unwrap();
        assert_eq!(image, expect);
    }

    #[test]
    fn transform_rejects_non_unimodular_matrix() {
        let square = unit_square();
        let u = vec![
            vec![BigInt::from(2), BigInt::from(0)],
            vec![BigInt::from(0), BigInt::from(1)],
        ];
        let err = square
            .transform(&u, &RationalPoint::origin(2), &BigRational::one())
            .unwrap_err();
        assert!(matches!(err, Error::NonUnimodular { .. }));
    }

    #[test]
    fn cube_hull_in_three_dimensions() {
        let mut pts = Vec::new();
        for x in 0..2 {
            for y in 0..2 {
                for z in 0..2 {
                    pts.push(pt(&[x, y, z]));
                }
            }
        }
        // Extra interior and face-center points must be absorbed.
        pts.push(RationalPoint::new(vec![q(1, 2), q(1, 2), q(1, 2)]));
        pts.push(RationalPoint::new(vec![q(1, 2), q(1, 2), q(0, 1)]));
        let p = convex_hull(&pts, 3).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(p.facets().len(), 6);
    }

    #[test]
    fn cross_polytope_hull_in_four_dimensions() {
        let mut pts = Vec::new();
        for i in 0..4 {
            for s in [-1i64, 1] {
                let mut c = [0i64; 4];
                c[i] = s;
                pts.push(pt(&c));
            }
        }
        let p = convex_hull(&pts, 4).unwrap();
        assert_eq!(p.vertices().len(), 8);
        assert_eq!(p.facets().len(), 16);
    }

    #[test]
    fn hull_matches_brute_force_classification_on_random_draws() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20);
        for d in 2..=4usize {
            for _ in 0..12 {
                let n = d + rng.gen_range(1..=4);
                let pts: Vec<RationalPoint> = (0..n)
                    .map(|_| {
                        RationalPoint::new(
                            (0..d)
                                .map(|_| BigRational::from(BigInt::from(rng.gen_range(-4i64..=4))))
                                .collect(),
                        )
                    })
                    .collect();
                match convex_hull(&pts, d) {
                    Ok(poly) => {
                        for p in &pts {
                            assert_ne!(poly.classify_point(p), PointLocation::Outside);
                        }
                        for v in poly.vertices() {
                            assert!(pts.contains(v));
                        }
                    }
                    Err(Error::DimensionDeficient { dim }) => assert!(dim < d),
                    Err(other) => panic!("unexpected error {other:?}"),
                }
            }
        }
    }
}
