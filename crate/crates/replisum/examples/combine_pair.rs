//! Combine a pair of one-sided p-values with every method and judge
//! replication success at the overall level alpha^2.
//!
//! ```bash
//! cargo run --example combine_pair
//! ```

use replisum::combine::{assess, budget, budget_weighted, Method, StudyPair, Weights};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let alpha = Probability::new(0.025)?;
    let weights = Weights::new(1.0, 2.0)?;

    // A convincing replication of a just-non-significant original, and a
    // pair of borderline studies. The two-trials rule and the sum of
    // p-values reach opposite verdicts on them.
    let discordant = StudyPair::new(0.026, 0.001, Some(1.0))?;
    let borderline = StudyPair::new(0.024, 0.024, Some(1.0))?;

    for (label, pair) in [("po=0.026, pr=0.001", &discordant), ("po=0.024, pr=0.024", &borderline)]
    {
        println!("{label}:");
        for method in Method::ALL {
            let result = assess(pair, method, alpha, Some(&weights))?;
            println!(
                "  {:<20} p = {:.6}  {}",
                result.method.to_string(),
                result.p_combined.value(),
                if result.success { "success" } else { "no success" }
            );
        }
        println!();
    }

    // The additive methods have an interpretable budget: success holds
    // exactly when the (weighted) p-value sum stays within it.
    println!("budget for po + pr      : {:.4}", budget(alpha)?);
    println!(
        "budget for po + 2*pr    : {:.4}",
        budget_weighted(alpha, &weights)?
    );
    Ok(())
}
