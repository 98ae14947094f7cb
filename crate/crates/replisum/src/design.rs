//! Replication sample-size calculation under conditional and predictive
//! power.
//!
//! The two-trials rule sizes the replication at significance level α; the
//! additive methods replace α with the level left over after the original
//! study (the conditional level), so the required size depends on the
//! original p-value. Conditional power treats the original effect estimate
//! as the truth; predictive power averages over its uncertainty, giving the
//! replication z-value the distribution N(√c·z_o, 1 + c).

use crate::combine::{Method, Weights};
use crate::conditional::{level_edgington, level_edgington_weighted, level_fisher};
use crate::error::{Error, Result};
use crate::specfun::{norm_cdf_raw, norm_quantile_raw, Probability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PowerType {
    Conditional,
    Predictive,
}

impl PowerType {
    pub fn name(self) -> &'static str {
        match self {
            PowerType::Conditional => "conditional",
            PowerType::Predictive => "predictive",
        }
    }
}

impl std::fmt::Display for PowerType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for PowerType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conditional" => Ok(PowerType::Conditional),
            "predictive" => Ok(PowerType::Predictive),
            other => Err(Error::usage(format!(
                "unknown power type '{other}' (expected conditional or predictive)"
            ))),
        }
    }
}

/// Inputs for a replication sample-size calculation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignInput {
    pub method: Method,
    pub po: Probability,
    pub alpha: Probability,
    /// Target power 1 − β of the replication study.
    pub target_power: Probability,
    pub weights: Option<Weights>,
    pub power_type: PowerType,
    /// Original effect estimate, in analysis units (for absolute sizing).
    pub theta_hat_o: Option<f64>,
    /// Common standard deviation of the measurements, same units.
    pub tau: Option<f64>,
    /// Original per-group sample size (for absolute n_r from relative c).
    pub n_original: Option<u64>,
    /// Fractional reduction of the original effect estimate, in [0, 1).
    pub shrinkage: f64,
}

impl DesignInput {
    pub fn new(method: Method, po: f64, alpha: f64, target_power: f64) -> Result<Self> {
        for (label, v) in [("po", po), ("alpha", alpha), ("target_power", target_power)] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::domain(format!(
                    "{label} must lie strictly in (0, 1), got {v}"
                )));
            }
        }
        Ok(DesignInput {
            method,
            po: Probability::new(po)?,
            alpha: Probability::new(alpha)?,
            target_power: Probability::new(target_power)?,
            weights: None,
            power_type: PowerType::Conditional,
            theta_hat_o: None,
            tau: None,
            n_original: None,
            shrinkage: 0.0,
        })
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn with_power_type(mut self, power_type: PowerType) -> Self {
        self.power_type = power_type;
        self
    }

    pub fn with_shrinkage(mut self, shrinkage: f64) -> Result<Self> {
        if !shrinkage.is_finite() || !(0.0..1.0).contains(&shrinkage) {
            return Err(Error::domain(format!(
                "shrinkage must lie in [0, 1), got {shrinkage}"
            )));
        }
        self.shrinkage = shrinkage;
        Ok(self)
    }

    pub fn with_effect(mut self, theta_hat_o: f64, tau: f64) -> Result<Self> {
        if !theta_hat_o.is_finite() || theta_hat_o == 0.0 {
            return Err(Error::domain(format!(
                "theta_hat_o must be finite and non-zero, got {theta_hat_o}"
            )));
        }
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::domain(format!(
                "tau must be finite and positive, got {tau}"
            )));
        }
        self.theta_hat_o = Some(theta_hat_o);
        self.tau = Some(tau);
        Ok(self)
    }

    pub fn with_original_n(mut self, n_original: u64) -> Result<Self> {
        if n_original == 0 {
            return Err(Error::domain("original sample size must be positive".to_string()));
        }
        self.n_original = Some(n_original);
        Ok(self)
    }

    /// Shrunken original z-value (1 − shrinkage)·Φ⁻¹(1 − po); requires
    /// po < 0.5 so the original points the right way.
    fn design_zo(&self) -> Result<f64> {
        if self.po.value() >= 0.5 {
            return Err(Error::domain(format!(
                "sample-size calculation requires po < 0.5 (positive original z), got {}",
                self.po.value()
            )));
        }
        Ok((1.0 - self.shrinkage) * -norm_quantile_raw(self.po.value()))
    }
}

/// The significance level available to the replication study for `method`
/// given the original p-value. Errors when success is already impossible
/// (zero level).
pub fn adjusted_level(
    method: Method,
    po: Probability,
    alpha: Probability,
    weights: Option<&Weights>,
) -> Result<Probability> {
    let level = match method {
        Method::TwoTrials => alpha,
        Method::Edgington => level_edgington(po, alpha)?,
        Method::EdgingtonWeighted => {
            let w = weights.ok_or_else(|| {
                Error::usage("weighted Edgington design requires weights".to_string())
            })?;
            level_edgington_weighted(po, alpha, w)?
        }
        Method::Fisher => level_fisher(po, alpha)?,
        Method::MetaAnalysis => {
            return Err(Error::usage(
                "meta-analysis has no design-time level: its replication significance \
                 level depends on the variance ratio being solved for"
                    .to_string(),
            ))
        }
    };
    if level.value() <= 0.0 {
        return Err(Error::domain(format!(
            "replication success is impossible: po = {} exhausts the budget at alpha = {}",
            po.value(),
            alpha.value()
        )));
    }
    Ok(level)
}

/// z₁₋level + z₁₋β, the standardized distance a replication design must
/// cover. Errors when the adjusted level is so large that no positive
/// distance remains.
fn design_distance(level: Probability, target_power: Probability) -> Result<f64> {
    let lv = level.value();
    if lv >= 1.0 {
        return Err(Error::domain(
            "adjusted significance level is 1: success is guaranteed at any sample size"
                .to_string(),
        ));
    }
    let distance = -norm_quantile_raw(lv) + norm_quantile_raw(target_power.value());
    if distance <= 0.0 {
        return Err(Error::domain(format!(
            "adjusted level {lv} is too large for target power {}: the design equation \
             has no positive solution",
            target_power.value()
        )));
    }
    Ok(distance)
}

/// Relative replication sample size c = n_r/n_o under conditional power:
/// (z₁₋α̃ + z₁₋β)²/z_o².
pub fn relative_sample_size_conditional(input: &DesignInput) -> Result<f64> {
    let level = adjusted_level(input.method, input.po, input.alpha, input.weights.as_ref())?;
    let zo = input.design_zo()?;
    let distance = design_distance(level, input.target_power)?;
    Ok((distance / zo).powi(2))
}

/// Absolute per-group replication sample size for a balanced two-sample
/// z-test: ⌈2τ²(z₁₋α̃ + z₁₋β)²/((1−s)·θ̂_o)²⌉.
pub fn absolute_sample_size(input: &DesignInput) -> Result<u64> {
    let theta = input.theta_hat_o.ok_or_else(|| {
        Error::usage("absolute sample size requires the original effect estimate".to_string())
    })?;
    let tau = input
        .tau
        .ok_or_else(|| Error::usage("absolute sample size requires tau".to_string()))?;
    let level = adjusted_level(input.method, input.po, input.alpha, input.weights.as_ref())?;
    let distance = design_distance(level, input.target_power)?;
    let effect = (1.0 - input.shrinkage) * theta;
    let n = 2.0 * tau * tau * distance * distance / (effect * effect);
    Ok(n.ceil() as u64)
}

/// Absolute replication size from a relative one, ⌈c·n_o⌉.
pub fn absolute_from_relative(c: f64, n_original: u64) -> u64 {
    (c * n_original as f64).ceil() as u64
}

/// Ratio of the method's conditional relative sample size to the
/// two-trials rule's; the original z cancels.
pub fn sample_size_ratio_conditional(
    method: Method,
    po: Probability,
    alpha: Probability,
    target_power: Probability,
    weights: Option<&Weights>,
) -> Result<f64> {
    let level = adjusted_level(method, po, alpha, weights)?;
    let num = design_distance(level, target_power)?;
    let den = design_distance(alpha, target_power)?;
    Ok((num / den).powi(2))
}

/// Probability that the replication clears `level` when its z-value has
/// the predictive distribution N(√c·z_o, 1 + c):
/// Φ{(√c·z_o − z₁₋level)/√(1+c)}.
pub fn predictive_power(zo: f64, c: f64, level: Probability) -> Result<Probability> {
    if !zo.is_finite() {
        return Err(Error::domain(format!("zo must be finite, got {zo}")));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain(format!(
            "relative sample size c must be finite and positive, got {c}"
        )));
    }
    let lv = level.value();
    if lv <= 0.0 || lv >= 1.0 {
        return Err(Error::domain(format!(
            "predictive_power requires 0 < level < 1, got {lv}"
        )));
    }
    let z_level = -norm_quantile_raw(lv);
    Ok(Probability::from_cdf(norm_cdf_raw(
        (c.sqrt() * zo - z_level) / (1.0 + c).sqrt(),
    )))
}

/// Smallest relative sample size reaching the target predictive power, by
/// bracketing and bisection to relative tolerance 1e-8. The attainable
/// limit as c → ∞ is Φ(z_o); targets at or above it are rejected with the
/// limit attached.
pub fn relative_sample_size_predictive(input: &DesignInput) -> Result<f64> {
    let level = adjusted_level(input.method, input.po, input.alpha, input.weights.as_ref())?;
    let zo = input.design_zo()?;
    let target = input.target_power.value();
    if level.value() >= target {
        return Err(Error::domain(format!(
            "adjusted level {} already meets the target power {target} as c -> 0; \
             any replication size suffices",
            level.value()
        )));
    }
    let achievable = norm_cdf_raw(zo);
    if achievable <= target {
        return Err(Error::Unattainable { achievable });
    }
    let power_at = |c: f64| predictive_power(zo, c, level).map(|p| p.value());
    let mut lo = 1e-12_f64;
    let mut hi = 1.0_f64;
    while power_at(hi)? < target {
        hi *= 10.0;
        if hi > 1e12 {
            return Err(Error::numerical(format!(
                "predictive sample-size bracket exceeded 1e12 for target {target} \
                 (achievable limit {achievable})"
            )));
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if power_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-8 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Relative sample size under the input's power type.
pub fn relative_sample_size(input: &DesignInput) -> Result<f64> {
    match input.power_type {
        PowerType::Conditional => relative_sample_size_conditional(input),
        PowerType::Predictive => relative_sample_size_predictive(input),
    }
}

/// Sample-size ratio of `method` versus the two-trials rule at the same
/// original p-value and target power.
pub fn sample_size_ratio(
    power_type: PowerType,
    method: Method,
    po: Probability,
    alpha: Probability,
    target_power: Probability,
    weights: Option<&Weights>,
) -> Result<f64> {
    match power_type {
        PowerType::Conditional => {
            sample_size_ratio_conditional(method, po, alpha, target_power, weights)
        }
        PowerType::Predictive => {
            let mut num =
                DesignInput::new(method, po.value(), alpha.value(), target_power.value())?
                    .with_power_type(PowerType::Predictive);
            if let Some(w) = weights {
                num = num.with_weights(*w);
            }
            let den =
                DesignInput::new(Method::TwoTrials, po.value(), alpha.value(), target_power.value())?
                    .with_power_type(PowerType::Predictive);
            Ok(relative_sample_size_predictive(&num)? / relative_sample_size_predictive(&den)?)
        }
    }
}

/// One row of a sample-size-ratio table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RatioRow {
    pub power_type: PowerType,
    pub method: Method,
    pub target_power: f64,
    pub po: f64,
    pub ratio: f64,
}

/// Evaluates the sample-size ratio over a grid of original p-values.
pub fn ratio_curve(
    power_type: PowerType,
    method: Method,
    target_power: f64,
    alpha: f64,
    po_grid: &[f64],
    weights: Option<&Weights>,
) -> Result<Vec<RatioRow>> {
    let alpha = Probability::new(alpha)?;
    let target = Probability::new(target_power)?;
    po_grid
        .iter()
        .map(|&po| {
            let ratio = sample_size_ratio(
                power_type,
                method,
                Probability::new(po)?,
                alpha,
                target,
                weights,
            )?;
            Ok(RatioRow {
                power_type,
                method,
                target_power,
                po,
                ratio,
            })
        })
        .collect()
}

/// Writes a ratio table as CSV with header
/// `power_type,method,target_power,po,ratio`.
pub fn write_ratio_curve_csv<W: std::io::Write>(out: &mut W, rows: &[RatioRow]) -> Result<()> {
    writeln!(out, "power_type,method,target_power,po,ratio")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.power_type, r.method, r.target_power, r.po, r.ratio
        )?;
    }
    Ok(())
}
