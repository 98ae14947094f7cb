//! Project power: the probability of declaring replication success across
//! both studies jointly when both true effects are non-null.
//!
//! The original z-value is N(μ, 1) with μ determined by the original
//! study's power at level α; the replication z-value is N(d·μ·√c, 1) where
//! c is the relative sample size and d the ratio of the true replication
//! effect to the true original effect. The two-trials rule has a closed
//! product form; the other methods integrate the conditional success
//! probability against the original z density. Fisher's method and the
//! meta-analysis criterion are integrated from z_o = 0 upward.

use crate::combine::{budget, budget_weighted, Method, Weights};
use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{
    fisher_critical, norm_cdf_raw, norm_pdf, norm_quantile, norm_quantile_raw, Probability,
};

/// Absolute tolerance of the project-power quadrature.
const QUAD_TOL: f64 = 1e-8;
/// Half-width of the integration window around μ; φ(z−μ) makes the
/// truncation error below 1e-17.
const WINDOW: f64 = 8.5;
/// Inner quantile arguments are clamped here before inversion.
const CLAMP: f64 = 1e-15;

fn clamp_unit(p: f64) -> f64 {
    p.clamp(CLAMP, 1.0 - CLAMP)
}

/// Inputs for a project-power evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerScenario {
    original_power: Probability,
    c: f64,
    d: f64,
    alpha: Probability,
    weights: Option<Weights>,
}

impl PowerScenario {
    /// `original_power` is the power of the original study at level
    /// `alpha`; `c` the relative sample size n_r/n_o; `d` the effect ratio
    /// θ_r/θ_o.
    pub fn new(original_power: f64, c: f64, d: f64, alpha: f64) -> Result<Self> {
        for (label, v) in [("original_power", original_power), ("alpha", alpha)] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::domain(format!(
                    "{label} must lie strictly in (0, 1), got {v}"
                )));
            }
        }
        for (label, v) in [("c", c), ("d", d)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!(
                    "{label} must be finite and positive, got {v}"
                )));
            }
        }
        // The standardized original mean must be positive, which needs the
        // original power to exceed the significance level.
        if original_power <= alpha {
            return Err(Error::domain(format!(
                "original power ({original_power}) must exceed alpha ({alpha}) for a \
                 positive standardized effect"
            )));
        }
        Ok(PowerScenario {
            original_power: Probability::new(original_power)?,
            c,
            d,
            alpha: Probability::new(alpha)?,
            weights: None,
        })
    }

    pub fn with_weights(mut self, weights: Weights) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn original_power(&self) -> Probability {
        self.original_power
    }

    pub fn relative_sample_size(&self) -> f64 {
        self.c
    }

    pub fn effect_ratio(&self) -> f64 {
        self.d
    }

    pub fn alpha(&self) -> Probability {
        self.alpha
    }

    pub fn weights(&self) -> Option<&Weights> {
        self.weights.as_ref()
    }

    fn mu(&self) -> f64 {
        -norm_quantile_raw(self.alpha.value()) + norm_quantile_raw(self.original_power.value())
    }

    /// Mean of the replication z-value, d·μ·√c.
    fn replication_mean(&self) -> f64 {
        self.d * self.mu() * self.c.sqrt()
    }
}

/// Standardized mean μ = Φ⁻¹(1−α) + Φ⁻¹(power) of the original z-value
/// implied by the original study's power at level α.
pub fn mu_from_original_power(original_power: Probability, alpha: Probability) -> Result<f64> {
    Ok(-norm_quantile(alpha)? + norm_quantile(original_power)?)
}

fn integrate_success<F: Fn(f64) -> f64>(
    success_given_zo: F,
    lower: f64,
    mu: f64,
) -> Result<Probability> {
    let a = lower.max(mu - WINDOW);
    let b = mu + WINDOW;
    if a >= b {
        return Ok(Probability::from_cdf(0.0));
    }
    let value = quad::integrate(
        |zo| success_given_zo(zo) * norm_pdf(zo - mu),
        a,
        b,
        QUAD_TOL,
    )?;
    Ok(Probability::from_cdf(value))
}

/// Two-trials rule: Φ(μ − z₁₋α)·Φ(d·μ·√c − z₁₋α). The first factor equals
/// the original power by construction.
pub fn project_power_two_trials(s: &PowerScenario) -> Result<Probability> {
    let za = -norm_quantile_raw(s.alpha.value());
    let first = norm_cdf_raw(s.mu() - za);
    let second = norm_cdf_raw(s.replication_mean() - za);
    Ok(Probability::from_cdf(first * second))
}

/// Unweighted sum of p-values.
pub fn project_power_edgington(s: &PowerScenario) -> Result<Probability> {
    let b = budget(s.alpha)?;
    let mu = s.mu();
    let shift = s.replication_mean();
    let lower = -norm_quantile_raw(b);
    integrate_success(
        |zo| {
            let arg = clamp_unit(2.0 - b - norm_cdf_raw(zo));
            norm_cdf_raw(shift - norm_quantile_raw(arg))
        },
        lower,
        mu,
    )
}

/// Weighted sum of p-values with ratio w̃ = wr/wo.
pub fn project_power_edgington_weighted(s: &PowerScenario) -> Result<Probability> {
    let weights = s
        .weights
        .ok_or_else(|| Error::usage("weighted project power requires weights".to_string()))?;
    let ratio = weights.ratio();
    // Budget on the normalized wo = 1 scale; must not exceed 1.
    let bw = budget_weighted(s.alpha, &weights)? / weights.original();
    let mu = s.mu();
    let shift = s.replication_mean();
    let lower = -norm_quantile_raw(bw);
    integrate_success(
        |zo| {
            let arg = clamp_unit(1.0 + (1.0 - bw - norm_cdf_raw(zo)) / ratio);
            norm_cdf_raw(shift - norm_quantile_raw(arg))
        },
        lower,
        mu,
    )
}

/// Fisher's product criterion, integrated from z_o = 0.
pub fn project_power_fisher(s: &PowerScenario) -> Result<Probability> {
    let cf = fisher_critical(s.alpha)?;
    let mu = s.mu();
    let shift = s.replication_mean();
    integrate_success(
        |zo| {
            let po = norm_cdf_raw(-zo);
            if po < cf {
                1.0
            } else {
                let arg = clamp_unit(1.0 - cf / po);
                norm_cdf_raw(shift - norm_quantile_raw(arg))
            }
        },
        0.0,
        mu,
    )
}

/// Meta-analysis criterion, integrated from z_o = 0.
pub fn project_power_meta(s: &PowerScenario) -> Result<Probability> {
    let a = s.alpha.value();
    let q = -norm_quantile_raw(a * a);
    let sqrt_c = s.c.sqrt();
    let mu = s.mu();
    let shift = s.replication_mean();
    integrate_success(
        |zo| norm_cdf_raw(shift - (q * (s.c + 1.0).sqrt() - zo) / sqrt_c),
        0.0,
        mu,
    )
}

/// Dispatches to the method-specific project power.
pub fn project_power(s: &PowerScenario, method: Method) -> Result<Probability> {
    match method {
        Method::TwoTrials => project_power_two_trials(s),
        Method::Edgington => project_power_edgington(s),
        Method::EdgingtonWeighted => project_power_edgington_weighted(s),
        Method::Fisher => project_power_fisher(s),
        Method::MetaAnalysis => project_power_meta(s),
    }
}

/// Limit of Edgington's project power as c → ∞:
/// 1 − Φ(Φ⁻¹(1−B) − Φ⁻¹(1−α) − Φ⁻¹(power)), with B the budget (per unit of
/// original weight in the weighted case).
pub fn limit_power_edgington(
    original_power: Probability,
    alpha: Probability,
    weights: Option<&Weights>,
) -> Result<Probability> {
    let b = match weights {
        Some(w) => budget_weighted(alpha, w)? / w.original(),
        None => budget(alpha)?,
    };
    let z = norm_quantile_raw(b) - norm_quantile_raw(alpha.value())
        + norm_quantile(original_power)?;
    Ok(Probability::from_cdf(norm_cdf_raw(z)))
}

/// One row of a project-power table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PowerCurveRow {
    pub method: Method,
    pub c: f64,
    pub d: f64,
    pub original_power: f64,
    pub alpha: f64,
    pub project_power: f64,
}

/// Evaluates project power for every method over a grid of relative sample
/// sizes.
pub fn power_curve(
    original_power: f64,
    alpha: f64,
    d: f64,
    weights: Option<Weights>,
    methods: &[Method],
    c_grid: &[f64],
) -> Result<Vec<PowerCurveRow>> {
    let mut rows = Vec::with_capacity(methods.len() * c_grid.len());
    for &method in methods {
        for &c in c_grid {
            let mut scenario = PowerScenario::new(original_power, c, d, alpha)?;
            if let Some(w) = weights {
                scenario = scenario.with_weights(w);
            }
            let pp = project_power(&scenario, method)?;
            rows.push(PowerCurveRow {
                method,
                c,
                d,
                original_power,
                alpha,
                project_power: pp.value(),
            });
        }
    }
    Ok(rows)
}

/// Writes a power table as CSV with header
/// `method,c,d,original_power,alpha,project_power`.
pub fn write_power_curve_csv<W: std::io::Write>(
    out: &mut W,
    rows: &[PowerCurveRow],
) -> Result<()> {
    writeln!(out, "method,c,d,original_power,alpha,project_power")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method, r.c, r.d, r.original_power, r.alpha, r.project_power
        )?;
    }
    Ok(())
}
