//! Planning a second replication study: overall budgets for two and three
//! studies, the alpha-spending split between the first and second
//! replication, and a worked two-stage decision.
//!
//! ```bash
//! cargo run --example sequential_plan
//! ```

use replisum::sequential::{
    assess_three, budget_k, spending_curve, spending_plan, stage_decision, StageDecision,
};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let alpha = Probability::new(0.025)?;

    println!("p-value sum budgets at overall level alpha^2 = 0.000625:");
    for k in 1..=3 {
        println!("  {k} studies: {:.5}", budget_k(alpha, k)?);
    }

    // Spend half of alpha^2 after the first replication.
    let plan = spending_plan(alpha, 0.5)?;
    println!(
        "\nhalf-spend plan: stop for success at E2 <= {:.4}, futility at E2 >= {:.4}",
        plan.b2(),
        plan.b3()
    );

    // An original at 0.02 and a first replication at 0.03: too large to
    // stop for success, small enough to justify a second replication.
    let e2 = 0.02 + 0.03;
    match stage_decision(e2, &plan)? {
        StageDecision::Continue { next_level } => {
            println!(
                "E2 = {e2}: continue, second replication at significance level {:.4}",
                next_level.value()
            );
            // Suppose it comes in at 0.04.
            let verdict = assess_three(
                Probability::new(0.02)?,
                Probability::new(0.03)?,
                Probability::new(0.04)?,
                alpha,
            )?;
            println!(
                "after pr2 = 0.04: E3 = {:.2}, combined p = {:.6}, success = {}",
                0.09,
                verdict.p_combined.value(),
                verdict.success
            );
        }
        other => println!("E2 = {e2}: {other:?}"),
    }

    // The whole trade-off curve between first- and second-stage budgets.
    println!("\ngamma, b2, b3");
    let gammas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for point in spending_curve(alpha, &gammas)? {
        println!("{:.1}, {:.5}, {:.5}", point.gamma, point.b2, point.b3);
    }
    Ok(())
}
