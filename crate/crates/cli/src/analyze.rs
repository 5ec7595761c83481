//! One-off analysis of a single polytope given by its vertices.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context};
use ehrhart_core::counting::ehrhart_vector;
use ehrhart_core::ehrhart::{delta_vector, fit_quasi_polynomial, normalized_volume, quasi_period};
use ehrhart_core::geometry::{convex_hull, RationalPoint};
use ehrhart_core::BigRational;
use serde_json::json;

/// Parses a vertex file (one vertex per line, whitespace-separated rational
/// coordinates such as `-1` or `1/2`; blank lines and `#` comments are
/// skipped) and returns the full analysis as JSON.
pub fn analyze_vertex_file(
    path: &Path,
    terms: Option<usize>,
) -> anyhow::Result<serde_json::Value> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let points = parse_vertices(&text)?;
    analyze_points(&points, terms)
}

/// Parses vertex lines into points, requiring a consistent dimension.
pub fn parse_vertices(text: &str) -> anyhow::Result<Vec<RationalPoint>> {
    let mut points = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let coords: Vec<BigRational> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<BigRational>()
                    .map_err(|_| anyhow::anyhow!("line {}: bad coordinate {:?}", idx + 1, tok))
            })
            .collect::<anyhow::Result<_>>()?;
        if coords.is_empty() {
            continue;
        }
        if let Some(first) = points.first() {
            let first: &RationalPoint = first;
            if coords.len() != first.dim() {
                bail!(
                    "line {}: expected {} coordinates, found {}",
                    idx + 1,
                    first.dim(),
                    coords.len()
                );
            }
        }
        points.push(RationalPoint::new(coords));
    }
    if points.is_empty() {
        bail!("no vertices found");
    }
    Ok(points)
}

/// Computes counts, quasi-period, delta vector, normalized volume, and the
/// quasi-polynomial constituents of the convex hull of `points`.  At least
/// enough dilations are counted to certify the period; `terms` can ask for
/// more.
pub fn analyze_points(
    points: &[RationalPoint],
    terms: Option<usize>,
) -> anyhow::Result<serde_json::Value> {
    let dim = points[0].dim();
    let hull = convex_hull(points, dim)?;
    let k = hull.denominator();
    let needed = 2 * (k as usize) * (dim + 1);
    let len = needed.max(terms.map_or(0, |t| t + 1));
    let ev = ehrhart_vector(&hull, len - 1);
    let rho = quasi_period(&ev.counts, dim, k)?;
    let delta = delta_vector(&ev.counts, dim, rho)?;
    let volume = normalized_volume(&delta);
    let qp = fit_quasi_polynomial(&ev.counts, dim, rho)?;
    Ok(json!({
        "dimension": dim,
        "vertex_count": hull.vertices().len(),
        "facet_count": hull.facets().len(),
        "denominator": k,
        "quasi_period": rho,
        "counts": ev.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "delta_vector": delta.coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "normalized_volume": volume.to_string(),
        "constituents": qp.constituents.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
    }))
}
