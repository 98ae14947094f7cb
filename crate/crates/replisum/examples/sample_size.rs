//! Replication sample-size calculation: absolute and relative sizes under
//! conditional power, the predictive-power alternative, and the ratio
//! curve against the two-trials rule.
//!
//! ```bash
//! cargo run --example sample_size
//! ```

use replisum::combine::Method;
use replisum::design::{
    absolute_sample_size, adjusted_level, ratio_curve, relative_sample_size,
    relative_sample_size_conditional, DesignInput, PowerType,
};

fn main() -> replisum::Result<()> {
    // A two-sample z-test replication of an original with p_o = 0.01,
    // estimated effect 0.5 at unit standard deviation, aiming for 80%
    // conditional power.
    for method in [Method::TwoTrials, Method::Edgington] {
        let input = DesignInput::new(method, 0.01, 0.025, 0.8)?.with_effect(0.5, 1.0)?;
        let level = adjusted_level(method, input.po, input.alpha, None)?;
        println!(
            "{method}: replication level {:.4}, c = {:.3}, n_r per group = {}",
            level.value(),
            relative_sample_size_conditional(&input)?,
            absolute_sample_size(&input)?,
        );
    }

    // Shrinking the original estimate by 25% guards against inflation and
    // grows the size accordingly.
    let shrunk = DesignInput::new(Method::Edgington, 0.01, 0.025, 0.8)?
        .with_effect(0.5, 1.0)?
        .with_shrinkage(0.25)?;
    println!(
        "edgington with 25% shrinkage: n_r per group = {}",
        absolute_sample_size(&shrunk)?
    );

    // Predictive power accounts for the uncertainty of the original
    // estimate and asks for a larger study.
    let predictive = DesignInput::new(Method::Edgington, 0.01, 0.025, 0.8)?
        .with_power_type(PowerType::Predictive);
    println!(
        "edgington under predictive power: c = {:.3}\n",
        relative_sample_size(&predictive)?
    );

    // Sample-size ratio versus the two-trials rule over the original
    // p-value, the design-stage view of what the level substitution buys.
    println!("po, conditional ratio, predictive ratio");
    let grid: Vec<f64> = (0..=8).map(|i| 1e-5 * 2.5_f64.powi(i)).collect();
    let conditional = ratio_curve(
        PowerType::Conditional,
        Method::Edgington,
        0.8,
        0.025,
        &grid,
        None,
    )?;
    let predictive = ratio_curve(
        PowerType::Predictive,
        Method::Edgington,
        0.8,
        0.025,
        &grid,
        None,
    )?;
    for (c, p) in conditional.iter().zip(predictive.iter()) {
        println!("{:.6}, {:.4}, {:.4}", c.po, c.ratio, p.ratio);
    }
    Ok(())
}
