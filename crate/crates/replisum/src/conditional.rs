//! Replication-study significance levels implied by each method given the
//! original p-value. The level is the largest replication p-value still
//! compatible with success at overall level α², and equals the conditional
//! Type-I error rate when the replication's true effect is null.
//!
//! Levels are clamped to [0, 1]: 0 means success is impossible for this
//! original result, 1 means success is guaranteed.

use crate::combine::{budget, budget_weighted, Weights};
use crate::error::{Error, Result};
use crate::specfun::{fisher_critical, norm_cdf_raw, norm_quantile_raw, Probability};

/// Two-trials rule: α while the original study is significant, otherwise 0.
pub fn level_two_trials(po: Probability, alpha: Probability) -> Probability {
    if po.value() <= alpha.value() {
        alpha
    } else {
        Probability::from_cdf(0.0)
    }
}

/// Unweighted sum of p-values: the remaining budget √2·α − po.
pub fn level_edgington(po: Probability, alpha: Probability) -> Result<Probability> {
    let b = budget(alpha)?;
    Ok(Probability::from_cdf((b - po.value()).max(0.0)))
}

/// Weighted sum of p-values: (b_w − wo·po)/wr with b_w = √(2·wo·wr)·α.
pub fn level_edgington_weighted(
    po: Probability,
    alpha: Probability,
    weights: &Weights,
) -> Result<Probability> {
    let bw = budget_weighted(alpha, weights)?;
    let level = (bw - weights.original() * po.value()) / weights.replication();
    Ok(Probability::from_cdf(level.max(0.0)))
}

/// Fisher's product criterion: min{c_F/po, 1}.
pub fn level_fisher(po: Probability, alpha: Probability) -> Result<Probability> {
    let cf = fisher_critical(alpha)?;
    if po.value() <= cf {
        return Ok(Probability::from_cdf(1.0));
    }
    Ok(Probability::from_cdf((cf / po.value()).min(1.0)))
}

/// Meta-analysis criterion: 1 − Φ{(Φ⁻¹(1−α²)·√(c+1) − z_o)/√c}, which
/// depends on the variance ratio c.
pub fn level_meta(po: Probability, alpha: Probability, c: f64) -> Result<Probability> {
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain(format!(
            "variance ratio c must be finite and positive, got {c}"
        )));
    }
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(format!(
            "level_meta requires 0 < alpha < 1, got {a}"
        )));
    }
    let pov = po.value();
    if pov <= 0.0 {
        return Ok(Probability::from_cdf(1.0));
    }
    if pov >= 1.0 {
        return Ok(Probability::from_cdf(0.0));
    }
    let zo = -norm_quantile_raw(pov);
    let q = -norm_quantile_raw(a * a); // Phi^-1(1 - alpha^2)
    let threshold = (q * (c + 1.0).sqrt() - zo) / c.sqrt();
    Ok(Probability::from_cdf(norm_cdf_raw(-threshold)))
}
