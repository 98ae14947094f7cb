//! The significance level the replication study must meet, as a function
//! of the original p-value. This level equals the conditional Type-I error
//! rate when the replication's true effect is null.
//!
//! ```bash
//! cargo run --example conditional_levels
//! ```

use replisum::combine::Weights;
use replisum::conditional::{
    level_edgington, level_edgington_weighted, level_fisher, level_meta, level_two_trials,
};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let alpha = Probability::new(0.025)?;
    let weights = Weights::new(1.0, 2.0)?;

    println!("replication significance level by original p-value (alpha = 0.025, c = 1):\n");
    println!(
        "{:>8}  {:>10} {:>10} {:>10} {:>10} {:>10}",
        "po", "two-trials", "edgington", "weighted", "fisher", "meta"
    );
    for po in [0.0001, 0.001, 0.005, 0.01, 0.02, 0.025, 0.03, 0.035] {
        let po = Probability::new(po)?;
        println!(
            "{:>8}  {:>10} {:>10} {:>10} {:>10} {:>10}",
            po.value(),
            pct(level_two_trials(po, alpha).value()),
            pct(level_edgington(po, alpha)?.value()),
            pct(level_edgington_weighted(po, alpha, &weights)?.value()),
            pct(level_fisher(po, alpha)?.value()),
            pct(level_meta(po, alpha, 1.0)?.value()),
        );
    }
    println!(
        "\nThe two-trials rule demands pr <= alpha whenever the original was significant; \
         the additive methods loosen or tighten the level with the strength of the \
         original result, while Fisher and meta-analysis can leave almost nothing to \
         show at replication."
    );
    Ok(())
}

fn pct(level: f64) -> String {
    format!("{:.2}%", 100.0 * level)
}
