//! Seeded generation of labeled Ehrhart datasets.
//!
//! A dataset is a collection of [`DataPoint`]s, each holding the dilation
//! counts `y_0..y_T` of one random polytope together with exact labels
//! (dimension, normalized volume, quasi-period, vertex denominator).  Two
//! generators are provided: random *lattice* polytopes (convex hulls of
//! integer points in a box) and random *rational* polytopes (lattice
//! polytopes translated by a random lattice point of themselves and shrunk
//! by an integer factor, so the vertex denominators are controlled).
//!
//! Generation is reproducible: every datapoint is produced from its own
//! RNG stream derived from `(master_seed, draw_index)`, so a dataset is a
//! pure function of its [`GenerationParams`] regardless of thread count.

use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::counting::ehrhart_vector;
use crate::ehrhart::{delta_vector, eval_from_delta, normalized_volume, quasi_period};
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, RationalPoint, RationalPolytope};

/// Which family of random polytopes a dataset is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    /// Convex hulls of random integer points; quasi-period is always 1.
    Lattice,
    /// Random lattice polytopes translated and shrunk by an integer factor,
    /// giving genuinely rational vertices and quasi-periods > 1.
    Rational,
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetKind::Lattice => write!(f, "lattice"),
            DatasetKind::Rational => write!(f, "rational"),
        }
    }
}

/// Full description of a dataset build.  Datasets are pure functions of
/// these parameters.
#[derive(Debug, Clone)]
pub struct GenerationParams {
    pub kind: DatasetKind,
    /// Ambient dimensions to draw from (draws cycle through these).
    pub dims: Vec<usize>,
    /// Requested number of points per class.  A class is a dimension for
    /// lattice datasets and a `(dimension, quasi-period)` pair for rational
    /// ones.
    pub per_class: usize,
    /// Highest dilation index `T`; each datapoint carries counts `y_0..y_T`.
    pub terms: usize,
    /// Vertex coordinates are drawn from `[-box_radius, box_radius]`.
    pub box_radius: i64,
    /// Inclusive range of shrink factors for rational datasets.
    pub r_range: (u64, u64),
    /// Quasi-period labels kept in a rational dataset; draws whose certified
    /// quasi-period falls outside this list are discarded.
    pub rho_values: Vec<u64>,
    pub master_seed: u64,
    /// Redraw cap for a single datapoint (degenerate hulls are redrawn).
    pub retry_cap: u32,
    /// Cap on total draws for the whole build; when exhausted the dataset is
    /// returned underfilled with a warning per short class.
    pub draw_budget: u64,
}

impl GenerationParams {
    /// Lattice-polytope dataset over the given dimensions.
    pub fn lattice(dims: Vec<usize>, per_class: usize, terms: usize, master_seed: u64) -> Self {
        let budget = 60 * (dims.len() as u64) * (per_class as u64) + 1_000;
        GenerationParams {
            kind: DatasetKind::Lattice,
            dims,
            per_class,
            terms,
            box_radius: 5,
            r_range: (1, 1),
            rho_values: vec![1],
            master_seed,
            retry_cap: 1_000,
            draw_budget: budget,
        }
    }

    /// Rational-polytope dataset over the given dimensions and quasi-periods.
    pub fn rational(
        dims: Vec<usize>,
        rho_values: Vec<u64>,
        per_class: usize,
        terms: usize,
        master_seed: u64,
    ) -> Self {
        let r_max = rho_values.iter().copied().max().unwrap_or(2).max(2);
        let r_min = rho_values.iter().copied().min().unwrap_or(2).max(2);
        let classes = (dims.len() * rho_values.len()) as u64;
        // A draw fixes its dimension by cycling and its shrink factor
        // uniformly, so the expected yield for one class is roughly one in
        // dims x r-range; the budget leaves generous slack beyond that.
        let spread = (r_max - r_min + 1).max(1) * dims.len().max(1) as u64;
        let budget = 12 * spread * classes * (per_class as u64) / (dims.len() as u64).max(1) + 1_000;
        GenerationParams {
            kind: DatasetKind::Rational,
            dims,
            per_class,
            terms,
            box_radius: 5,
            r_range: (r_min, r_max),
            rho_values,
            master_seed,
            retry_cap: 1_000,
            draw_budget: budget,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dims.is_empty() {
            return Err(Error::InvalidParam("dims must be non-empty".into()));
        }
        if self.dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParam("dimensions must be positive".into()));
        }
        if self.per_class == 0 {
            return Err(Error::InvalidParam("per_class must be positive".into()));
        }
        if self.box_radius < 1 {
            return Err(Error::InvalidParam("box_radius must be at least 1".into()));
        }
        if self.kind == DatasetKind::Rational {
            if self.r_range.0 < 2 || self.r_range.0 > self.r_range.1 {
                return Err(Error::InvalidParam(
                    "r_range must satisfy 2 <= lo <= hi for rational datasets".into(),
                ));
            }
            if self.rho_values.is_empty() || self.rho_values.iter().any(|&r| r < 2) {
                return Err(Error::InvalidParam(
                    "rho_values must be non-empty and >= 2 for rational datasets".into(),
                ));
            }
        }
        Ok(())
    }
}

/// One labeled sample: the dilation counts of a random polytope plus the
/// exact quantities a model is asked to recover from them.
#[derive(Debug, Clone)]
pub struct DataPoint {
    /// Ambient (and affine) dimension of the polytope.
    pub dim: usize,
    /// Counts `y_0..y_T`, extended past the certified window by evaluating
    /// the fitted quasi-polynomial.
    pub counts: Vec<BigInt>,
    /// Normalized volume (sum of the delta-vector over rho^(d+1)).
    pub volume: BigRational,
    /// Certified minimal quasi-period; `None` for lattice datapoints.
    pub quasi_period: Option<u64>,
    /// Least common denominator of the vertex coordinates.
    pub denominator: u64,
    /// `(master_seed, draw_index)` provenance; not persisted to disk.
    pub seed_info: Option<(u64, u64)>,
    /// Redraws consumed before this point succeeded; not persisted.
    pub retries: u32,
}

impl PartialEq for DataPoint {
    /// Equality ignores in-memory provenance (`seed_info`, `retries`) so a
    /// datapoint compares equal to its round trip through disk.
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.counts == other.counts
            && self.volume == other.volume
            && self.quasi_period == other.quasi_period
            && self.denominator == other.denominator
    }
}

impl Eq for DataPoint {}

impl DataPoint {
    fn dedup_key(&self) -> (usize, Vec<BigInt>, BigRational, Option<u64>, u64) {
        (
            self.dim,
            self.counts.clone(),
            self.volume.clone(),
            self.quasi_period,
            self.denominator,
        )
    }
}

/// A built or loaded dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub kind: DatasetKind,
    /// Highest dilation index: every point carries `terms + 1` counts.
    pub terms: usize,
    pub points: Vec<DataPoint>,
    /// One warning per class that fell short of its quota.
    pub warnings: Vec<String>,
}

/// Expands `(master_seed, draw_index)` into an independent 256-bit RNG seed
/// via splitmix64 so datapoint streams never overlap.
fn stream_seed(master_seed: u64, index: u64) -> [u8; 32] {
    let mut state = master_seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let mut out = [0u8; 32];
    for chunk in out.chunks_mut(8) {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    out
}

fn rng_for(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(stream_seed(master_seed, index))
}

fn draw_point_count(rng: &mut ChaCha8Rng, dim: usize) -> usize {
    dim + rng.gen_range(1..=5usize)
}

fn draw_shrink_factor(rng: &mut ChaCha8Rng, r_range: (u64, u64)) -> u64 {
    rng.gen_range(r_range.0..=r_range.1)
}

fn draw_integer_points(rng: &mut ChaCha8Rng, n: usize, dim: usize, radius: i64) -> Vec<RationalPoint> {
    (0..n)
        .map(|_| {
            let coords = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect::<Vec<_>>();
            RationalPoint::from_integers(&coords)
        })
        .collect()
}

fn try_hull(points: &[RationalPoint], dim: usize) -> Result<Option<RationalPolytope>> {
    match convex_hull(points, dim) {
        Ok(p) => Ok(Some(p)),
        Err(Error::DimensionDeficient { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Computes the certified count window, fits labels, and extends the counts
/// out to `terms`.  The window length `2k(d+1)` is exactly what the
/// quasi-period and delta-vector certificates require.
fn finish_datapoint(p: &RationalPolytope, terms: usize, retries: u32) -> Result<DataPoint> {
    let d = p.ambient_dim();
    let k = p.denominator();
    let window = 2 * (k as usize) * (d + 1);
    let ev = ehrhart_vector(p, window - 1);
    let rho = quasi_period(&ev.counts, d, k)?;
    let delta = delta_vector(&ev.counts, d, rho)?;
    let volume = normalized_volume(&delta);
    let mut counts = ev.counts;
    for m in counts.len()..=terms {
        counts.push(eval_from_delta(&delta, m as u64));
    }
    counts.truncate(terms + 1);
    Ok(DataPoint {
        dim: d,
        counts,
        volume,
        quasi_period: if k == 1 { None } else { Some(rho) },
        denominator: k,
        seed_info: None,
        retries,
    })
}

/// Draws one lattice datapoint: the hull of `d + k` random integer points
/// (`k` uniform in 1..=5) in the box, redrawn while the hull is not
/// full-dimensional.
pub fn gen_lattice_datapoint(
    params: &GenerationParams,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DataPoint> {
    for attempt in 0..params.retry_cap {
        let n = draw_point_count(rng, dim);
        let pts = draw_integer_points(rng, n, dim, params.box_radius);
        if let Some(p) = try_hull(&pts, dim)? {
            return finish_datapoint(&p, params.terms, attempt);
        }
    }
    Err(Error::RetryLimit { cap: params.retry_cap })
}

/// Draws one rational datapoint: a random lattice polytope in the enlarged
/// box `[-box_radius * r, box_radius * r]^d` is translated by one of its own
/// lattice points (so the result still contains a lattice point) and shrunk
/// by `1/r`.  The quasi-period label is certified from the counts, not
/// assumed equal to `r`.
pub fn gen_rational_datapoint(
    params: &GenerationParams,
    dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DataPoint> {
    for attempt in 0..params.retry_cap {
        let r = draw_shrink_factor(rng, params.r_range);
        let n = draw_point_count(rng, dim);
        let radius = params
            .box_radius
            .checked_mul(r as i64)
            .ok_or_else(|| Error::InvalidParam("box_radius * r overflows".into()))?;
        let pts = draw_integer_points(rng, n, dim, radius);
        let hull = match try_hull(&pts, dim)? {
            Some(h) => h,
            None => continue,
        };
        let lattice_pts = crate::counting::lattice_points(&hull);
        if lattice_pts.is_empty() {
            continue;
        }
        let v = &lattice_pts[rng.gen_range(0..lattice_pts.len())];
        let identity: Vec<Vec<BigInt>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        let translation = RationalPoint::new(
            v.iter().map(|c| BigRational::from_integer(-c.clone())).collect(),
        );
        let scale = BigRational::new(BigInt::one(), BigInt::from(r));
        let shrunk = hull.transform(&identity, &translation, &scale)?;
        return finish_datapoint(&shrunk, params.terms, attempt);
    }
    Err(Error::RetryLimit { cap: params.retry_cap })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct ClassKey {
    dim: usize,
    rho: Option<u64>,
}

fn class_of(kind: DatasetKind, point: &DataPoint) -> ClassKey {
    match kind {
        DatasetKind::Lattice => ClassKey { dim: point.dim, rho: None },
        DatasetKind::Rational => ClassKey { dim: point.dim, rho: point.quasi_period },
    }
}

fn target_classes(params: &GenerationParams) -> Vec<ClassKey> {
    match params.kind {
        DatasetKind::Lattice => params.dims.iter().map(|&d| ClassKey { dim: d, rho: None }).collect(),
        DatasetKind::Rational => {
            let mut out = Vec::new();
            for &d in &params.dims {
                for &r in &params.rho_values {
                    out.push(ClassKey { dim: d, rho: Some(r) });
                }
            }
            out
        }
    }
}

/// Builds a dataset to quota.  Draw `i` uses the RNG stream
/// `(master_seed, i)` and targets dimension `dims[i % dims.len()]`; draws
/// are generated in parallel batches but accepted strictly in draw order,
/// so the result is independent of thread scheduling.  Draws that land in a
/// full or unwanted class, duplicate an accepted point, or exhaust their
/// retry cap are discarded.  If the draw budget runs out first, the dataset
/// is returned with one warning per underfilled class.
pub fn build_dataset(params: &GenerationParams) -> Result<Dataset> {
    params.validate()?;
    let classes = target_classes(params);
    let mut remaining: std::collections::BTreeMap<ClassKey, usize> =
        classes.iter().map(|&c| (c, params.per_class)).collect();
    let mut points: Vec<DataPoint> = Vec::with_capacity(classes.len() * params.per_class);
    let mut seen: HashSet<(usize, Vec<BigInt>, BigRational, Option<u64>, u64)> = HashSet::new();

    const BATCH: u64 = 64;
    let mut next_index: u64 = 0;
    while remaining.values().any(|&q| q > 0) && next_index < params.draw_budget {
        let hi = (next_index + BATCH).min(params.draw_budget);
        let batch: Vec<(u64, Result<DataPoint>)> = (next_index..hi)
            .into_par_iter()
            .map(|i| {
                let dim = params.dims[(i as usize) % params.dims.len()];
                let mut rng = rng_for(params.master_seed, i);
                let point = match params.kind {
                    DatasetKind::Lattice => gen_lattice_datapoint(params, dim, &mut rng),
                    DatasetKind::Rational => gen_rational_datapoint(params, dim, &mut rng),
                };
                (i, point)
            })
            .collect();
        for (i, result) in batch {
            let mut point = match result {
                Ok(p) => p,
                Err(Error::RetryLimit { .. }) => continue,
                Err(e) => return Err(e),
            };
            let class = class_of(params.kind, &point);
            let Some(slot) = remaining.get_mut(&class) else { continue };
            if *slot == 0 {
                continue;
            }
            let key = point.dedup_key();
            if !seen.insert(key) {
                continue;
            }
            point.seed_info = Some((params.master_seed, i));
            *slot -= 1;
            points.push(point);
        }
        next_index = hi;
    }

    let warnings: Vec<String> = remaining
        .iter()
        .filter(|(_, &q)| q > 0)
        .map(|(c, &q)| match c.rho {
            None => format!("class dim={} short by {} points", c.dim, q),
            Some(r) => format!("class dim={} rho={} short by {} points", c.dim, r, q),
        })
        .collect();

    Ok(Dataset { kind: params.kind, terms: params.terms, points, warnings })
}

/// Writes a dataset as CSV: a header line `schema=1,T=<terms>,kind=<kind>`
/// followed by one row per point with fields
/// `d, vol_num, vol_den, rho, k, y_0, ..., y_T` (rho is empty for lattice
/// datasets).
pub fn write_dataset<P: AsRef<Path>>(dataset: &Dataset, path: P) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "schema=1,T={},kind={}", dataset.terms, dataset.kind)?;
    for p in &dataset.points {
        let rho = match p.quasi_period {
            Some(r) => r.to_string(),
            None => String::new(),
        };
        write!(
            w,
            "{},{},{},{},{}",
            p.dim,
            p.volume.numer(),
            p.volume.denom(),
            rho,
            p.denominator
        )?;
        for y in &p.counts {
            write!(w, ",{}", y)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn schema_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Schema { line, msg: msg.into() }
}

fn parse_bigint(s: &str, line: usize, what: &str) -> Result<BigInt> {
    s.trim()
        .parse::<BigInt>()
        .map_err(|_| schema_err(line, format!("invalid {}: {:?}", what, s)))
}

/// Reads a dataset written by [`write_dataset`], validating the header, the
/// row shapes, and the per-row label invariants.  The round trip through
/// disk preserves every persisted field exactly.
pub fn read_dataset<P: AsRef<Path>>(path: P) -> Result<Dataset> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut lines = reader.lines();

    let header = lines
        .next()
        .ok_or_else(|| schema_err(1, "empty file"))??;
    let mut terms: Option<usize> = None;
    let mut kind: Option<DatasetKind> = None;
    let mut schema_ok = false;
    for field in header.split(',') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| schema_err(1, format!("malformed header field {:?}", field)))?;
        match key.trim() {
            "schema" => {
                if value.trim() != "1" {
                    return Err(schema_err(1, format!("unsupported schema version {:?}", value)));
                }
                schema_ok = true;
            }
            "T" => {
                terms = Some(
                    value
                        .trim()
                        .parse()
                        .map_err(|_| schema_err(1, format!("invalid T {:?}", value)))?,
                );
            }
            "kind" => {
                kind = Some(match value.trim() {
                    "lattice" => DatasetKind::Lattice,
                    "rational" => DatasetKind::Rational,
                    other => return Err(schema_err(1, format!("unknown kind {:?}", other))),
                });
            }
            other => return Err(schema_err(1, format!("unknown header key {:?}", other))),
        }
    }
    if !schema_ok {
        return Err(schema_err(1, "missing schema version"));
    }
    let terms = terms.ok_or_else(|| schema_err(1, "missing T"))?;
    let kind = kind.ok_or_else(|| schema_err(1, "missing kind"))?;

    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = 5 + terms + 1;
        if fields.len() != expected {
            return Err(schema_err(
                line_no,
                format!("expected {} fields, found {}", expected, fields.len()),
            ));
        }
        let dim: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| schema_err(line_no, format!("invalid dimension {:?}", fields[0])))?;
        if dim == 0 {
            return Err(schema_err(line_no, "dimension must be positive"));
        }
        let vol_num = parse_bigint(fields[1], line_no, "volume numerator")?;
        let vol_den = parse_bigint(fields[2], line_no, "volume denominator")?;
        if !vol_den.is_positive() {
            return Err(schema_err(line_no, "volume denominator must be positive"));
        }
        let rho_field = fields[3].trim();
        let quasi_period = match (kind, rho_field.is_empty()) {
            (DatasetKind::Lattice, true) => None,
            (DatasetKind::Lattice, false) => {
                return Err(schema_err(line_no, "lattice rows must leave rho empty"))
            }
            (DatasetKind::Rational, true) => {
                return Err(schema_err(line_no, "rational rows must set rho"))
            }
            (DatasetKind::Rational, false) => Some(
                rho_field
                    .parse::<u64>()
                    .map_err(|_| schema_err(line_no, format!("invalid rho {:?}", rho_field)))?,
            ),
        };
        let denominator: u64 = fields[4]
            .trim()
            .parse()
            .map_err(|_| schema_err(line_no, format!("invalid denominator {:?}", fields[4])))?;
        if denominator == 0 {
            return Err(schema_err(line_no, "denominator must be positive"));
        }
        if let Some(rho) = quasi_period {
            if rho == 0 || denominator % rho != 0 {
                return Err(schema_err(
                    line_no,
                    format!("rho {} must divide the denominator {}", rho, denominator),
                ));
            }
        }
        let mut counts = Vec::with_capacity(terms + 1);
        for f in &fields[5..] {
            let y = parse_bigint(f, line_no, "count")?;
            if y.is_negative() {
                return Err(schema_err(line_no, "counts must be non-negative"));
            }
            counts.push(y);
        }
        if !counts[0].is_one() {
            return Err(schema_err(line_no, "y_0 must equal 1"));
        }
        points.push(DataPoint {
            dim,
            counts,
            volume: BigRational::new(vol_num, vol_den),
            quasi_period,
            denominator,
            seed_info: None,
            retries: 0,
        });
    }

    Ok(Dataset { kind, terms, points, warnings: Vec::new() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ehrhart::forward_difference;

    fn small_lattice_params(seed: u64) -> GenerationParams {
        GenerationParams::lattice(vec![2, 3], 6, 12, seed)
    }

    fn small_rational_params(seed: u64) -> GenerationParams {
        // T is large enough that the certified window 2k(d+1) <= 18 always
        // fits inside the persisted counts.
        GenerationParams::rational(vec![2], vec![2, 3], 4, 20, seed)
    }

    #[test]
    fn lattice_build_is_deterministic() {
        let a = build_dataset(&small_lattice_params(11)).unwrap();
        let b = build_dataset(&small_lattice_params(11)).unwrap();
        assert_eq!(a.points, b.points);
        assert!(a.warnings.is_empty(), "quota should fill: {:?}", a.warnings);
        let c = build_dataset(&small_lattice_params(12)).unwrap();
        assert_ne!(a.points, c.points);
    }

    #[test]
    fn lattice_quota_and_classes() {
        let ds = build_dataset(&small_lattice_params(3)).unwrap();
        assert_eq!(ds.points.len(), 12);
        for d in [2usize, 3] {
            assert_eq!(ds.points.iter().filter(|p| p.dim == d).count(), 6);
        }
        for p in &ds.points {
            assert_eq!(p.counts.len(), 13);
            assert_eq!(p.denominator, 1);
            assert_eq!(p.quasi_period, None);
            assert!(p.seed_info.is_some());
        }
    }

    #[test]
    fn rational_build_labels_are_certified() {
        let ds = build_dataset(&small_rational_params(5)).unwrap();
        assert!(ds.warnings.is_empty(), "quota should fill: {:?}", ds.warnings);
        assert_eq!(ds.points.len(), 8);
        for p in &ds.points {
            let rho = p.quasi_period.expect("rational points carry rho");
            assert!(rho == 2 || rho == 3);
            assert_eq!(p.denominator % rho, 0);
            // Independent re-certification from the persisted counts: the
            // (d+1)-st difference at stride rho vanishes on the certified
            // window, and at no proper divisor of rho.
            let window = 2 * (p.denominator as usize) * (p.dim + 1);
            let counts = &p.counts[..window.min(p.counts.len())];
            assert_eq!(quasi_period(counts, p.dim, p.denominator).unwrap(), rho);
            let delta = delta_vector(counts, p.dim, rho).unwrap();
            assert_eq!(normalized_volume(&delta), p.volume);
        }
    }

    #[test]
    fn lattice_volume_matches_leading_difference() {
        // d! vol = the d-th forward difference of the counts at stride 1,
        // an oracle independent of the delta-vector path.
        let ds = build_dataset(&small_lattice_params(7)).unwrap();
        for p in &ds.points {
            let diff = forward_difference(&p.counts, 1, p.dim).unwrap();
            let lead = BigRational::from_integer(diff[0].clone());
            assert_eq!(lead, p.volume.clone(), "dim {} point", p.dim);
        }
    }

    #[test]
    fn extended_counts_follow_the_fit() {
        // Counts past the certified window must keep satisfying the
        // vanishing-difference identity out to the end of the feature vector.
        let ds = build_dataset(&small_rational_params(9)).unwrap();
        for p in &ds.points {
            let rho = p.quasi_period.unwrap() as usize;
            let diff = forward_difference(&p.counts, rho, p.dim + 1).unwrap();
            assert!(diff.iter().all(|x| x.is_zero()), "tail breaks the fit");
        }
    }

    #[test]
    fn round_trip_through_disk() {
        let dir = std::env::temp_dir().join(format!("ehrhart-datagen-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        for (name, params) in [
            ("lat.csv", small_lattice_params(21)),
            ("rat.csv", small_rational_params(22)),
        ] {
            let ds = build_dataset(&params).unwrap();
            let path = dir.join(name);
            write_dataset(&ds, &path).unwrap();
            let back = read_dataset(&path).unwrap();
            assert_eq!(back.kind, ds.kind);
            assert_eq!(back.terms, ds.terms);
            assert_eq!(back.points, ds.points);
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn read_rejects_malformed_files() {
        let dir = std::env::temp_dir().join(format!("ehrhart-datagen-bad-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let cases: Vec<(&str, &str, usize)> = vec![
            ("bad-version.csv", "schema=2,T=3,kind=lattice\n", 1),
            ("no-schema.csv", "T=3,kind=lattice\n", 1),
            ("bad-kind.csv", "schema=1,T=3,kind=mystery\n", 1),
            // Row has too few count columns for T=3.
            ("ragged.csv", "schema=1,T=3,kind=lattice\n2,9,1,,1,1,10,28\n", 2),
            // Lattice rows must leave rho empty.
            ("rho-set.csv", "schema=1,T=2,kind=lattice\n2,9,1,4,1,1,10,28\n", 2),
            // Rational rows must set rho.
            ("rho-missing.csv", "schema=1,T=2,kind=rational\n2,9,1,,2,1,10,28\n", 2),
            // rho must divide the denominator.
            ("rho-bad.csv", "schema=1,T=2,kind=rational\n2,9,1,3,2,1,10,28\n", 2),
            // y_0 must be 1.
            ("y0.csv", "schema=1,T=2,kind=lattice\n2,9,1,,1,2,10,28\n", 2),
            ("neg.csv", "schema=1,T=2,kind=lattice\n2,9,1,,1,1,-10,28\n", 2),
        ];
        for (name, contents, want_line) in cases {
            let path = dir.join(name);
            std::fs::write(&path, contents).unwrap();
            match read_dataset(&path) {
                Err(Error::Schema { line, .. }) => {
                    assert_eq!(line, want_line, "case {}", name)
                }
                other => panic!("case {} should fail with Schema, got {:?}", name, other),
            }
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn draws_are_uniform() {
        // 10_000 draws of k and r; each bucket stays within four standard
        // deviations of its expectation.
        let mut rng = rng_for(999, 0);
        let mut k_buckets = [0u32; 5];
        let mut r_buckets = [0u32; 5];
        for _ in 0..10_000 {
            k_buckets[draw_point_count(&mut rng, 2) - 3] += 1;
            r_buckets[(draw_shrink_factor(&mut rng, (2, 6)) - 2) as usize] += 1;
        }
        let sigma = (10_000.0f64 * 0.2 * 0.8).sqrt();
        for bucket in k_buckets.iter().chain(r_buckets.iter()) {
            let dev = (*bucket as f64 - 2_000.0).abs();
            assert!(dev < 4.0 * sigma, "bucket {} deviates {}", bucket, dev);
        }
    }

    #[test]
    fn degenerate_draws_are_retried() {
        // Some master seed in a modest range must start with a degenerate
        // point cloud (e.g. collinear in dimension 2) and recover by
        // redrawing from the same stream.
        let params = GenerationParams::lattice(vec![2], 1, 8, 0);
        let mut saw_retry = false;
        for seed in 0..400 {
            let mut rng = rng_for(seed, 0);
            let p = gen_lattice_datapoint(&params, 2, &mut rng).unwrap();
            if p.retries > 0 {
                saw_retry = true;
                assert_eq!(p.counts.len(), 9);
                assert!(p.counts[1] > BigInt::one());
                break;
            }
        }
        assert!(saw_retry, "no degenerate first draw in 400 seeds");
    }

    #[test]
    fn retry_cap_is_enforced() {
        // A zero box radius only ever draws the origin, so every hull is
        // degenerate and the generator must give up at the cap.  (Validation
        // rejects such params at the dataset level; the generator is called
        // directly here.)
        let params = GenerationParams {
            kind: DatasetKind::Lattice,
            dims: vec![3],
            per_class: 1,
            terms: 8,
            box_radius: 0,
            r_range: (1, 1),
            rho_values: vec![1],
            master_seed: 1,
            retry_cap: 20,
            draw_budget: 10,
        };
        let mut rng = rng_for(1, 0);
        match gen_lattice_datapoint(&params, 3, &mut rng) {
            Err(Error::RetryLimit { cap: 20 }) => {}
            other => panic!("expected retry limit, got {:?}", other),
        }
    }

    #[test]
    fn budget_exhaustion_warns_per_class() {
        let mut params = small_lattice_params(31);
        params.draw_budget = 3;
        let ds = build_dataset(&params).unwrap();
        assert!(ds.points.len() <= 3);
        assert!(!ds.warnings.is_empty());
        assert!(ds.warnings.iter().any(|w| w.contains("dim=3")));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = small_lattice_params(1);
        p.dims.clear();
        assert!(matches!(build_dataset(&p), Err(Error::InvalidParam(_))));
        let mut p = small_rational_params(1);
        p.r_range = (1, 6);
        assert!(matches!(build_dataset(&p), Err(Error::InvalidParam(_))));
        let mut p = small_rational_params(1);
        p.rho_values = vec![1];
        assert!(matches!(build_dataset(&p), Err(Error::InvalidParam(_))));
    }

    #[test]
    fn stream_seeds_are_distinct() {
        let mut seen = HashSet::new();
        for master in 0..8u64 {
            for index in 0..64u64 {
                assert!(seen.insert(stream_seed(master, index)));
            }
        }
    }
}
