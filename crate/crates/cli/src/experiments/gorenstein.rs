//! Trying — and provably failing — to read the Gorenstein index of a Fano
//! polygon off the Ehrhart counts of its polar dual.
//!
//! A classifier is trained on randomly generated Fano polygons, labeled by
//! Gorenstein index, with the polar's dilation counts as features, through
//! the same rotate-scale-classify pipeline the quasi-period study uses.
//! The weighted projective triangles attached to Markov triples are the
//! spoiler: their polars all share one count vector while their indices
//! all differ, so those counts cannot determine the index.  The experiment
//! certifies this two ways: the held-out Markov family is classified no
//! better than its class prior, and the corpus contains explicit feature
//! collisions — identical count vectors with different labels.

use std::collections::BTreeMap;

use ehrhart_core::counting::ehrhart_vector;
use ehrhart_core::geometry::{convex_hull, RationalPoint};
use ehrhart_core::ml::{accuracy, counts_features, stratified_split, FeatureKind};
use ehrhart_core::toric::{gorenstein_index, is_fano, markov_triples, polar};
use ehrhart_core::BigInt;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::C_GRID;
use crate::pipeline::{fit_pipeline, tune_svc, Projection, RunConfig};
use crate::report::{write_plot_csv, ExperimentReport};

/// One labeled example: polar dilation counts plus the Gorenstein index.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Example {
    counts: Vec<BigInt>,
    index: usize,
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new("gorenstein", cfg.seed);
    let terms = cfg.terms_or(24);
    let bound = cfg.u64_or("markov_bound", 433)?;
    let budget = cfg.usize_or("draws", 4000)?;
    let min_support = cfg.usize_or("min_support", 6)?;
    report.add_param("terms", terms);
    report.add_param("markov_bound", bound);
    report.add_param("draws", budget);

    // The held-out family: Markov-triple triangles, labeled by index.
    let markov: Vec<Example> = markov_triples(bound)
        .into_iter()
        .map(|t| -> anyhow::Result<Example> {
            let simplex = t.fano_simplex()?;
            let dual = polar(&simplex)?;
            let counts = ehrhart_vector(&dual, terms).counts;
            let index = gorenstein_index(&simplex)? as usize;
            Ok(Example { counts, index })
        })
        .collect::<anyhow::Result<_>>()?;
    report.add_metric("markov_subset_size", markov.len() as f64);

    // Random Fano polygons, deduplicated by (counts, label).
    let pool = random_fano_pool(cfg.seed, budget, terms);
    report.add_metric("pool_distinct", pool.len() as f64);

    // Hold the family out at the feature level: anything indistinguishable
    // from a Markov triangle leaves the training corpus.
    let train_pool: Vec<&Example> = pool
        .iter()
        .filter(|e| !markov.iter().any(|m| m.counts == e.counts))
        .collect();
    report.add_metric(
        "excluded_markov_twins",
        (pool.len() - train_pool.len()) as f64,
    );

    // Keep only indices with enough support to classify.
    let mut support: BTreeMap<usize, usize> = BTreeMap::new();
    for e in &train_pool {
        *support.entry(e.index).or_default() += 1;
    }
    let keep: Vec<&Example> =
        train_pool.iter().copied().filter(|e| support[&e.index] >= min_support).collect();
    let classes: Vec<usize> = {
        let mut c: Vec<usize> = keep.iter().map(|e| e.index).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    report.add_metric("training_examples", keep.len() as f64);
    report.add_metric("training_classes", classes.len() as f64);
    anyhow::ensure!(classes.len() >= 2, "not enough Gorenstein-index classes to train on");

    let counts: Vec<Vec<BigInt>> = keep.iter().map(|e| e.counts.clone()).collect();
    let labels: Vec<usize> = keep.iter().map(|e| e.index).collect();
    let x = counts_features(&counts, FeatureKind::Raw)?;
    let split = stratified_split(&labels, 0.5, cfg.seed ^ 0x03)?;
    let y_train: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
    let y_test: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();
    let x_train = x.select_rows(&split.train);
    // Full principal-component rotation, as in the quasi-period study. The
    // raw count vectors of these low-index families span far fewer
    // directions than their length, so the rotation stops at the rank.
    let (pipe, z_train) = fit_pipeline(&x_train, Projection::Rotation)?;
    let tuned = tune_svc(&z_train, &y_train, &C_GRID, cfg.seed)?;
    let holdout_pred = tuned.model.predict(&pipe.transform(&x.select_rows(&split.test))?)?;
    let holdout = accuracy(&holdout_pred, &y_test);
    report.add_metric("holdout_accuracy", holdout);
    report.add_metric("holdout_prior", class_prior(&y_test));
    report.add_metric("chosen_c", tuned.c);

    // Evaluate on the Markov family.
    let markov_counts: Vec<Vec<BigInt>> = markov.iter().map(|e| e.counts.clone()).collect();
    let markov_labels: Vec<usize> = markov.iter().map(|e| e.index).collect();
    let zm = pipe.transform(&counts_features(&markov_counts, FeatureKind::Raw)?)?;
    let markov_pred = tuned.model.predict(&zm)?;
    let markov_acc = accuracy(&markov_pred, &markov_labels);
    let prior = class_prior(&markov_labels);
    report.add_metric("markov_accuracy", markov_acc);
    report.add_metric("markov_prior", prior);

    let mut plot_rows = Vec::new();
    for (i, &p) in holdout_pred.iter().enumerate() {
        plot_rows.push(format!("holdout,{},{}", y_test[i], p));
    }
    for (i, &p) in markov_pred.iter().enumerate() {
        plot_rows.push(format!("markov,{},{}", markov_labels[i], p));
    }
    write_plot_csv(&cfg.out, "gorenstein_predictions.csv", "subset,truth,prediction", &plot_rows)?;
    report.add_note("wrote gorenstein_predictions.csv");

    // Certify impossibility: identical features, different labels.
    let mut all: Vec<&Example> = pool.iter().chain(&markov).collect();
    all.sort_by(|a, b| a.counts.cmp(&b.counts).then(a.index.cmp(&b.index)));
    let mut collision_pairs = 0usize;
    let mut collision_groups = 0usize;
    let mut example_note: Option<String> = None;
    let mut start = 0;
    while start < all.len() {
        let mut end = start + 1;
        while end < all.len() && all[end].counts == all[start].counts {
            end += 1;
        }
        let mut group_labels: Vec<usize> = all[start..end].iter().map(|e| e.index).collect();
        group_labels.dedup();
        if group_labels.len() > 1 {
            collision_groups += 1;
            collision_pairs += group_labels.len() * (group_labels.len() - 1) / 2;
            example_note.get_or_insert_with(|| {
                let prefix: Vec<String> =
                    all[start].counts.iter().take(5).map(|c| c.to_string()).collect();
                format!(
                    "collision: Gorenstein indices {:?} share counts starting {}, ...",
                    group_labels,
                    prefix.join(", ")
                )
            });
        }
        start = end;
    }
    report.add_metric("collision_groups", collision_groups as f64);
    report.add_metric("collision_pairs", collision_pairs as f64);
    if let Some(note) = example_note {
        report.add_note(note);
    }

    report.claim(
        "the Markov family cannot be classified beyond its prior (+5 points)",
        markov_acc <= prior + 0.05,
    );
    report.claim("feature collisions certify the ambiguity", collision_pairs >= 1);
    Ok(report)
}

/// Most frequent label's share.
fn class_prior(labels: &[usize]) -> f64 {
    let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        *freq.entry(l).or_default() += 1;
    }
    freq.values().copied().max().unwrap_or(0) as f64 / labels.len() as f64
}

/// Draws random Fano polygons: hulls of a few integer points near the
/// origin, kept when the origin is strictly interior and every vertex is
/// primitive.  Returns distinct (counts, index) examples in a canonical
/// order.
fn random_fano_pool(seed: u64, budget: usize, terms: usize) -> Vec<Example> {
    let drawn: Vec<Option<Example>> = (0..budget as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ 0x6F72_656E ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let n = rng.gen_range(3..=6usize);
            let points: Vec<RationalPoint> = (0..n)
                .map(|_| {
                    RationalPoint::from_integers(&[
                        rng.gen_range(-4i64..=4),
                        rng.gen_range(-4i64..=4),
                    ])
                })
                .collect();
            let hull = convex_hull(&points, 2).ok()?;
            if !is_fano(&hull) {
                return None;
            }
            let dual = polar(&hull).ok()?;
            let counts = ehrhart_vector(&dual, terms).counts;
            let index = gorenstein_index(&hull).ok()? as usize;
            Some(Example { counts, index })
        })
        .collect();
    let mut pool: Vec<Example> = drawn.into_iter().flatten().collect();
    pool.sort_by(|a, b| a.counts.cmp(&b.counts).then(a.index.cmp(&b.index)));
    pool.dedup();
    pool
}
