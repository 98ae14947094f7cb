//! Batch analysis of a replication-project CSV: per-project success rates,
//! replication rates split by original-p-value threshold, and the
//! combined-p-value table for non-significant replications.
//!
//! ```bash
//! cargo run --example analyze_dataset
//! ```
//!
//! The bundled file uses the correlation schema `project,study,ro,no,rr,nr`;
//! a `project,study,po,pr,c` bypass schema is accepted too.

use replisum::combine::{Method, Weights};
use replisum::projects::{
    analyze_records, combined_pvalue_table, ingest_csv_path, replication_rate_by_threshold,
    success_rates, CombinedPvalueRow,
};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("examples/data/example_projects.csv");
    let records = ingest_csv_path(&path)?;
    println!("{} study pairs from {}\n", records.len(), path.display());

    let alpha = Probability::new(0.025)?;
    let rows = analyze_records(&records, alpha, &Weights::new(1.0, 2.0)?)?;

    println!("success rates at overall level 0.000625:");
    let alpha_sq = [0.000625];
    for row in success_rates(&rows, &Method::ALL, &alpha_sq)? {
        println!(
            "  {:<6} {:<20} {}/{} ({:.1}%)",
            row.project,
            row.method.to_string(),
            row.successes,
            row.n,
            100.0 * row.rate
        );
    }

    println!("\nreplication rates (pr <= 0.025) by original-p threshold:");
    for row in replication_rate_by_threshold(&rows, &[0.005, 0.025], alpha)? {
        let fmt = |r: Option<f64>| r.map_or("-".to_string(), |v| format!("{:.1}%", 100.0 * v));
        println!(
            "  t = {:<6} below: {} of {} ({}), above: {} of {} ({})",
            row.threshold,
            (row.rate_below.unwrap_or(0.0) * row.n_below as f64).round(),
            row.n_below,
            fmt(row.rate_below),
            (row.rate_above.unwrap_or(0.0) * row.n_above as f64).round(),
            row.n_above,
            fmt(row.rate_above),
        );
    }

    println!("\ncombined p-values where the replication alone was not significant:");
    for row in combined_pvalue_table(&rows, alpha) {
        let flat = CombinedPvalueRow::from(&row);
        println!(
            "  {:<6} {:<10} pr = {:.3}  p2TR = {:.5}  pE = {:.5}  pF = {:.5}  pMA = {:.5}{}",
            flat.project,
            flat.study,
            flat.pr,
            flat.p_two_trials,
            flat.p_edgington,
            flat.p_fisher,
            flat.p_meta,
            if flat.wrong_direction { "  [wrong direction]" } else { "" }
        );
    }
    Ok(())
}
