//! Polar duality, Fano polytopes, and the triangles of weighted projective
//! planes.
//!
//! The polar of a polytope with the origin strictly inside is
//! `{u : u · v >= -1 for every vertex v}`; its vertices correspond to facets
//! of the original. A Fano polytope is a lattice polytope with primitive
//! vertices and the origin interior; its Gorenstein index is the denominator
//! of the polar. Weighted projective planes `P(w0, w1, w2)` contribute the
//! simplices spanned by the images of the standard basis in the quotient
//! lattice `Z^3 / Z·(w0, w1, w2)`, and Markov triples (solutions of
//! `3abc = a^2 + b^2 + c^2`) index the family whose polars are all scissors
//! congruent to one lattice triangle.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::geometry::{convex_hull, PointLocation, RationalPoint, RationalPolytope};

/// Polar dual `P* = {u : u · v >= -1 for all v in P}`.
///
/// Bounded (and so again a polytope) exactly when the origin is strictly
/// interior. Each facet `n · x >= b` of `P` contributes the polar vertex
/// `n / (-b)`, and polarity is an involution: `(P*)* = P`.
pub fn polar(p: &RationalPolytope) -> Result<RationalPolytope> {
    let d = p.ambient_dim();
    if p.classify_point(&RationalPoint::origin(d)) != PointLocation::Interior {
        return Err(Error::OriginNotInterior);
    }
    let dual_points: Vec<RationalPoint> = p
        .facets()
        .iter()
        .map(|f| {
            // Origin interior forces b < 0, so -b > 0 is a valid denominator.
            let neg_b = -f.offset.clone();
            RationalPoint::new(
                f.normal
                    .iter()
                    .map(|n| BigRational::new(n.clone(), neg_b.clone()))
                    .collect(),
            )
        })
        .collect();
    let dual = convex_hull(&dual_points, d)?;
    assert_eq!(
        dual.vertices().len(),
        p.facets().len(),
        "facet-vertex duality must be a bijection"
    );
    Ok(dual)
}

/// Fano: lattice polytope, origin strictly interior, every vertex primitive.
pub fn is_fano(p: &RationalPolytope) -> bool {
    if !p.is_lattice() {
        return false;
    }
    let d = p.ambient_dim();
    if p.classify_point(&RationalPoint::origin(d)) != PointLocation::Interior {
        return false;
    }
    p.vertices().iter().all(|v| {
        let mut gcd = BigInt::zero();
        for c in &v.coords {
            gcd = gcd.gcd(c.numer());
        }
        gcd.is_one()
    })
}

/// Gorenstein index of a Fano polytope: the least `k` with `kP*` a lattice
/// polytope, i.e. the denominator of the polar.
pub fn gorenstein_index(p: &RationalPolytope) -> Result<u64> {
    if !is_fano(p) {
        return Err(Error::NotFano);
    }
    Ok(polar(p)?.denominator())
}

/// A Fano polytope bundled with its polar and Gorenstein index.
#[derive(Debug, Clone)]
pub struct FanoRecord {
    pub polytope: RationalPolytope,
    pub polar: RationalPolytope,
    pub gorenstein_index: u64,
}

impl FanoRecord {
    pub fn new(polytope: RationalPolytope) -> Result<Self> {
        if !is_fano(&polytope) {
            return Err(Error::NotFano);
        }
        let polar = polar(&polytope)?;
        let gorenstein_index = polar.denominator();
        Ok(FanoRecord {
            polytope,
            polar,
            gorenstein_index,
        })
    }
}

/// Fano triangle of the weighted projective plane `P(w0, w1, w2)`: the
/// convex hull of the images of the standard basis vectors in the quotient
/// lattice `Z^3 / Z·w`, identified with `Z^2` through a Smith-style
/// unimodular change of basis carrying `w` to a unit vector.
///
/// Weights must be positive and pairwise coprime.
pub fn wps_fano_simplex(w0: u64, w1: u64, w2: u64) -> Result<RationalPolytope> {
    let bad = || Error::BadWeights { w0, w1, w2 };
    if w0 == 0 || w1 == 0 || w2 == 0 {
        return Err(bad());
    }
    if w0.gcd(&w1) != 1 || w0.gcd(&w2) != 1 || w1.gcd(&w2) != 1 {
        return Err(bad());
    }
    let w: Vec<BigInt> = [w0, w1, w2].iter().map(|&x| BigInt::from(x)).collect();
    let u = carry_to_unit_vector(&w);
    // In the new coordinates the sublattice Z·w is the first axis, so the
    // quotient map is "drop the first coordinate of U·x". The basis vector
    // e_i lands on column i of U with the first row removed.
    let verts: Vec<RationalPoint> = (0..3)
        .map(|i| {
            RationalPoint::new(vec![
                BigRational::from(u[1][i].clone()),
                BigRational::from(u[2][i].clone()),
            ])
        })
        .collect();
    // Σ w_i v_i = (U·w minus first row) = 0: the defining relation.
    for row in 1..3 {
        let sum: BigInt = (0..3).map(|i| &u[row][i] * &w[i]).sum();
        assert!(sum.is_zero(), "quotient images must satisfy the weight relation");
    }
    let simplex = convex_hull(&verts, 2)?;
    assert!(
        is_fano(&simplex),
        "pairwise coprime weights must give a Fano triangle"
    );
    Ok(simplex)
}

/// Unimodular `U` with `U·w = (g, 0, 0)` where `g = gcd(w) (= 1 here)`, by
/// extended-gcd row operations — the change of basis underlying the Smith
/// normal form of the column vector `w`.
fn carry_to_unit_vector(w: &[BigInt]) -> Vec<Vec<BigInt>> {
    let n = w.len();
    let mut w = w.to_vec();
    let mut u: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    for j in 1..n {
        if w[j].is_zero() {
            continue;
        }
        let eg = w[0].extended_gcd(&w[j]);
        let (g, s, t) = (eg.gcd, eg.x, eg.y);
        let w0g = &w[0] / &g;
        let wjg = &w[j] / &g;
        for col in 0..n {
            let r0 = u[0][col].clone();
            let rj = u[j][col].clone();
            // [[s, t], [-wj/g, w0/g]] has determinant 1, so U stays in GL_n(Z).
            u[0][col] = &s * &r0 + &t * &rj;
            u[j][col] = &w0g * rj - &wjg * r0;
        }
        w[0] = g;
        w[j] = BigInt::zero();
    }
    u
}

/// A Markov triple `a <= b <= c` with `3abc = a^2 + b^2 + c^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MarkovTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl MarkovTriple {
    pub fn product(&self) -> u64 {
        self.a * self.b * self.c
    }

    /// Fano triangle of `P(a^2, b^2, c^2)`.
    pub fn fano_simplex(&self) -> Result<RationalPolytope> {
        wps_fano_simplex(self.a * self.a, self.b * self.b, self.c * self.c)
    }
}

/// All Markov triples with largest entry at most `bound`, generated from
/// `(1,1,1)` by the mutation `(a, b, c) -> (a, b, 3ab - c)` in each
/// coordinate, deduplicated and sorted.
pub fn markov_triples(bound: u64) -> Vec<MarkovTriple> {
    let mut seen = std::collections::BTreeSet::new();
    let mut queue = Vec::new();
    if bound >= 1 {
        let root = MarkovTriple { a: 1, b: 1, c: 1 };
        seen.insert(root);
        queue.push(root);
    }
    while let Some(t) = queue.pop() {
        let [a, b, c] = [t.a, t.b, t.c];
        for (x, y, z) in [(a, b, c), (a, c, b), (b, c, a)] {
            let m = 3 * x * y - z;
            let mut v = [x, y, m];
            v.sort_unstable();
            let cand = MarkovTriple {
                a: v[0],
                b: v[1],
                c: v[2],
            };
            if cand.c <= bound && seen.insert(cand) {
                queue.push(cand);
            }
        }
    }
    for t in &seen {
        debug_assert_eq!(
            3 * t.a * t.b * t.c,
            t.a * t.a + t.b * t.b + t.c * t.c,
            "Markov relation must hold"
        );
        debug_assert!(t.a.gcd(&t.b) == 1 && t.a.gcd(&t.c) == 1 && t.b.gcd(&t.c) == 1);
    }
    seen.into_iter().collect()
}
