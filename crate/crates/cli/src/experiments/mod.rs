//! The experiments behind each subcommand, sharing dataset builders so the
//! classification and regression studies can reuse one corpus.

pub mod dimension;
pub mod gorenstein;
pub mod markov;
pub mod quasiperiod;
pub mod volume;

use std::collections::BTreeMap;

use anyhow::Context;
use ehrhart_core::datagen::{build_dataset, Dataset, DatasetKind, GenerationParams};

use crate::pipeline::RunConfig;

/// Penalty grid shared by the classification experiments.  The span is wide
/// on purpose: the best penalty sits near the bottom for quasi-period runs
/// and near the top for unprojected count features.
pub const C_GRID: [f64; 9] =
    [0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0, 10_000.0, 50_000.0];

/// Lattice-polytope corpus over dimensions 2-4 (the dimension and volume
/// experiments share it).
pub fn lattice_dataset(cfg: &RunConfig) -> anyhow::Result<Dataset> {
    let dims = cfg.usize_list_or("dims", &[2, 3, 4])?;
    let per_class = cfg.usize_or("per_class", 200)?;
    let terms = cfg.terms_or(100);
    let params = GenerationParams::lattice(dims, per_class, terms, cfg.seed);
    build_dataset(&params).context("building lattice dataset")
}

/// Rational-polytope corpus for one dimension with quasi-periods 2-6.
pub fn rational_dataset(cfg: &RunConfig, dim: usize) -> anyhow::Result<Dataset> {
    let rho = cfg.u64_list_or("rho", &[2, 3, 4, 5, 6])?;
    let per_class = cfg.usize_or("per_class", 300)?;
    let terms = cfg.terms_or(100);
    let seed = cfg.seed ^ (dim as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let params = GenerationParams::rational(vec![dim], rho, per_class, terms, seed);
    build_dataset(&params).with_context(|| format!("building rational dataset for dim {}", dim))
}

/// Copies dataset-build warnings into report notes.
pub fn note_warnings(report: &mut crate::report::ExperimentReport, dataset: &Dataset) {
    for w in &dataset.warnings {
        report.add_note(format!("dataset warning: {}", w));
    }
}

/// Per-class row counts: dimension for lattice data, (dimension,
/// quasi-period) for rational data.
pub fn class_histogram(dataset: &Dataset) -> BTreeMap<String, usize> {
    let mut hist = BTreeMap::new();
    for p in &dataset.points {
        let key = match dataset.kind {
            DatasetKind::Lattice => format!("d={}", p.dim),
            DatasetKind::Rational => {
                format!("d={} rho={}", p.dim, p.quasi_period.unwrap_or(1))
            }
        };
        *hist.entry(key).or_insert(0) += 1;
    }
    hist
}

/// Builds a dataset from overrides and writes it to `<out>/dataset.csv`.
pub fn run_generate(cfg: &RunConfig) -> anyhow::Result<crate::report::ExperimentReport> {
    let mut report = crate::report::ExperimentReport::new("generate", cfg.seed);
    let kind = cfg.overrides.get("kind").map(String::as_str).unwrap_or("lattice");
    let terms = cfg.terms_or(100);
    let params = match kind {
        "lattice" => {
            let dims = cfg.usize_list_or("dims", &[2, 3, 4])?;
            let per_class = cfg.usize_or("per_class", 200)?;
            GenerationParams::lattice(dims, per_class, terms, cfg.seed)
        }
        "rational" => {
            let dims = cfg.usize_list_or("dims", &[2, 3])?;
            let rho = cfg.u64_list_or("rho", &[2, 3, 4, 5, 6])?;
            let per_class = cfg.usize_or("per_class", 300)?;
            GenerationParams::rational(dims, rho, per_class, terms, cfg.seed)
        }
        other => anyhow::bail!("config kind={:?} must be lattice or rational", other),
    };
    report.add_param("kind", kind);
    report.add_param("dims", format!("{:?}", params.dims));
    report.add_param("per_class", params.per_class);
    report.add_param("terms", terms);
    let dataset = build_dataset(&params).context("building dataset")?;
    note_warnings(&mut report, &dataset);
    let path = cfg.out.join("dataset.csv");
    ehrhart_core::datagen::write_dataset(&dataset, &path)?;
    report.add_metric("points", dataset.points.len() as f64);
    for (class, count) in class_histogram(&dataset) {
        report.add_note(format!("class {}: {} rows", class, count));
    }
    // Note the bare file name: reports must be byte-identical across reruns
    // regardless of where the output directory lives.
    report.add_note("wrote dataset.csv".to_string());
    report.claim("every class reached its quota", dataset.warnings.is_empty());
    Ok(report)
}
