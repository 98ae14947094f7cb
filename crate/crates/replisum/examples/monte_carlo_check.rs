//! Monte Carlo verification of the analytic guarantees: overall Type-I
//! error at alpha^2 for every method, the conditional error rate given an
//! original result, project power against quadrature, and the two-stage
//! sequential level.
//!
//! ```bash
//! cargo run --release --example monte_carlo_check
//! ```

use replisum::combine::{Method, Weights};
use replisum::conditional::level_edgington;
use replisum::power::{mu_from_original_power, project_power_edgington, PowerScenario};
use replisum::sequential::spending_plan;
use replisum::sim::{simulate, simulate_sequential, SimConfig, Truth};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let alpha = Probability::new(0.025)?;
    let n_sim = 2_000_000;

    println!("null rejection rates (target 0.000625, n = {n_sim}):");
    for (i, method) in Method::ALL.into_iter().enumerate() {
        let res = simulate(&SimConfig {
            method,
            alpha,
            weights: Some(Weights::new(1.0, 2.0)?),
            c: Some(1.0),
            truth: Truth::Null,
            n_sim,
            seed: i as u64,
        })?;
        println!("  {:<20} {:.6} (se {:.1e})", method.to_string(), res.rate, res.se);
    }

    let po = 0.001;
    let level = level_edgington(Probability::new(po)?, alpha)?.value();
    let res = simulate(&SimConfig {
        method: Method::Edgington,
        alpha,
        weights: None,
        c: None,
        truth: Truth::Conditional { po },
        n_sim,
        seed: 10,
    })?;
    println!(
        "\nconditional rate at po = {po}: simulated {:.4}, analytic level {:.4}",
        res.rate, level
    );

    let scenario = PowerScenario::new(0.8, 1.0, 1.0, 0.025)?;
    let quadrature = project_power_edgington(&scenario)?.value();
    let mu = mu_from_original_power(Probability::new(0.8)?, alpha)?;
    let res = simulate(&SimConfig {
        method: Method::Edgington,
        alpha,
        weights: None,
        c: Some(1.0),
        truth: Truth::Alternative { mu, d: 1.0, truncate_original: false },
        n_sim,
        seed: 11,
    })?;
    println!(
        "project power at 80%/c=1: simulated {:.4}, quadrature {:.4}",
        res.rate, quadrature
    );

    let plan = spending_plan(alpha, 0.5)?;
    let res = simulate_sequential(&plan, 10_000_000, 12)?;
    println!(
        "two-stage level with half spending: {:.6} (target 0.000625)",
        res.rate
    );
    Ok(())
}
