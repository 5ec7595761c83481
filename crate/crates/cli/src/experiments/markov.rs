//! The Markov-triple collapse, verified exactly.
//!
//! For every Markov triple (a, b, c) up to a bound, the weighted projective
//! triangle with weights (a^2, b^2, c^2) has Gorenstein index a*b*c, yet its
//! polar dual repeats the dilation counts of one fixed lattice triangle —
//! so the quasi-period collapses from the worst case a*b*c to 1.  The
//! reference triangle's period is certified from its counts; equality of
//! count vectors transfers that certificate to every member of the family.

use ehrhart_core::counting::ehrhart_vector;
use ehrhart_core::ehrhart::{delta_vector, quasi_period};
use ehrhart_core::geometry::{convex_hull, RationalPoint};
use ehrhart_core::toric::{gorenstein_index, markov_triples, polar};

use crate::pipeline::RunConfig;
use crate::report::{write_plot_csv, ExperimentReport};

pub fn run(cfg: &RunConfig) -> anyhow::Result<ExperimentReport> {
    let mut report = ExperimentReport::new("markov", cfg.seed);
    let bound = cfg.u64_or("bound", 433)?;
    let terms = cfg.terms_or(20);
    report.add_param("bound", bound);
    report.add_param("terms", terms);

    // Reference: the triangle with vertices (-1,-1), (-1,2), (2,-1).  Its
    // counts are a genuine polynomial (quasi-period 1), certified here.
    let reference = convex_hull(
        &[
            RationalPoint::from_integers(&[-1, -1]),
            RationalPoint::from_integers(&[-1, 2]),
            RationalPoint::from_integers(&[2, -1]),
        ],
        2,
    )?;
    let reference_counts = ehrhart_vector(&reference, terms).counts;
    anyhow::ensure!(
        quasi_period(&reference_counts, 2, 1)? == 1,
        "reference triangle must have period 1"
    );
    let delta = delta_vector(&reference_counts, 2, 1)?;
    report.add_param("reference_delta", format!("{:?}", delta.coeffs));

    let triples = markov_triples(bound);
    report.add_metric("triples", triples.len() as f64);
    let mut rows = Vec::with_capacity(triples.len());
    let mut all_indices_match = true;
    let mut all_collapsed = true;
    for t in &triples {
        let simplex = t.fano_simplex()?;
        let index = gorenstein_index(&simplex)?;
        let index_matches = index == t.product();
        let dual = polar(&simplex)?;
        let counts = ehrhart_vector(&dual, terms).counts;
        let collapsed = counts == reference_counts;
        all_indices_match &= index_matches;
        all_collapsed &= collapsed;
        rows.push(format!(
            "{},{},{},{},{},{}",
            t.a,
            t.b,
            t.c,
            t.product(),
            index,
            collapsed
        ));
    }
    write_plot_csv(
        &cfg.out,
        "markov_table.csv",
        "a,b,c,product,gorenstein_index,collapsed",
        &rows,
    )?;
    report.add_note("wrote markov_table.csv");

    report.claim("every Gorenstein index equals a*b*c", all_indices_match);
    report.claim(
        "every polar repeats the reference counts (period collapses to 1)",
        all_collapsed,
    );
    Ok(report)
}
