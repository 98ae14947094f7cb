//! Project power of every method as a function of the relative sample size
//! c = n_r/n_o, emitted as plot-ready CSV on stdout.
//!
//! ```bash
//! cargo run --example power_curves > project_power.csv
//! ```

use replisum::combine::{Method, Weights};
use replisum::power::{limit_power_edgington, power_curve, write_power_curve_csv};
use replisum::Probability;

fn main() -> replisum::Result<()> {
    let alpha = 0.025;
    let c_grid: Vec<f64> = (0..=49).map(|i| 0.2 + i as f64 * (10.0 - 0.2) / 49.0).collect();

    let mut rows = Vec::new();
    for original_power in [0.8, 0.4] {
        for d in [1.0, 0.5] {
            rows.extend(power_curve(
                original_power,
                alpha,
                d,
                Some(Weights::new(1.0, 2.0)?),
                &Method::ALL,
                &c_grid,
            )?);
        }
    }
    write_power_curve_csv(&mut std::io::stdout().lock(), &rows)?;

    // The additive methods approach finite limits as c grows.
    let a = Probability::new(alpha)?;
    let w = Weights::new(1.0, 2.0)?;
    for original_power in [0.8, 0.4] {
        let op = Probability::new(original_power)?;
        eprintln!(
            "limits at original power {:.0}%: edgington {:.1}%, weighted {:.1}%",
            100.0 * original_power,
            100.0 * limit_power_edgington(op, a, None)?.value(),
            100.0 * limit_power_edgington(op, a, Some(&w))?.value(),
        );
    }
    Ok(())
}
