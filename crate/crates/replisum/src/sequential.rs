//! Budgets and alpha-spending plans for sequential replication: an overall
//! budget for the sum of k p-values, a two-stage split of α² between the
//! first and second replication study, and the resulting stage decisions.

use crate::combine::{Method, MethodResult};
use crate::error::{Error, Result};
use crate::specfun::{irwin_hall_cdf, Probability};

/// Overall budget for the sum of k study p-values: the b with
/// Pr(IH(k) ≤ b) = α², which is (k!·α²)^(1/k) while the solution stays in
/// the first branch (b ≤ 1).
pub fn budget_k(alpha: Probability, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("budget_k requires k >= 1".to_string()));
    }
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(format!(
            "budget_k requires 0 < alpha < 1, got {a}"
        )));
    }
    let mut factorial = 1.0_f64;
    for i in 2..=k {
        factorial *= i as f64;
    }
    let b = (factorial * a * a).powf(1.0 / k as f64);
    if b > 1.0 {
        return Err(Error::domain(format!(
            "budget_k has no first-branch solution: alpha = {a} is too large for k = {k} \
             (closed form gives {b} > 1)"
        )));
    }
    Ok(b)
}

/// A two-stage alpha-spending plan: stop for success at the first
/// replication when E₂ = p_o + p_r1 ≤ b2, otherwise run a second
/// replication whenever E₂ < b3 and declare success when
/// E₃ = E₂ + p_r2 ≤ b3. The split satisfies
/// Pr(E₂ ≤ b2) = γα² and total rejection probability α² under the null.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpendingPlan {
    alpha: f64,
    gamma: f64,
    b2: f64,
    b3: f64,
}

impl SpendingPlan {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Proportion of α² spent at the first replication.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Stage-1 budget for E₂.
    pub fn b2(&self) -> f64 {
        self.b2
    }

    /// Stage-2 budget for E₃ (and futility bound for E₂).
    pub fn b3(&self) -> f64 {
        self.b3
    }
}

/// Builds the spending plan for a given proportion γ of α² spent at the
/// first replication. b2 = √(2γ)·α inverts the first stage exactly; b3
/// solves b3³/6 − b2²·b3/2 + b2³/3 = (1−γ)·α², the second-stage rejection
/// probability for b3 ≤ 1.
pub fn spending_plan(alpha: Probability, gamma: f64) -> Result<SpendingPlan> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(format!(
            "spending_plan requires 0 < alpha < 1, got {a}"
        )));
    }
    if !gamma.is_finite() || !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "gamma must lie in [0, 1], got {gamma}"
        )));
    }
    let b2 = (2.0 * gamma).sqrt() * a;
    let b3 = if gamma >= 1.0 {
        b2
    } else if gamma <= 0.0 {
        budget_k(alpha, 3)?
    } else {
        let target = (1.0 - gamma) * a * a;
        let g = |b3: f64| b3.powi(3) / 6.0 - b2 * b2 * b3 / 2.0 + b2.powi(3) / 3.0 - target;
        let (mut lo, mut hi) = (b2, 1.0_f64);
        if g(hi) < 0.0 {
            return Err(Error::numerical(format!(
                "spending_plan bracket failure: no stage-2 budget below 1 for alpha = {a}, \
                 gamma = {gamma}"
            )));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    Ok(SpendingPlan { alpha: a, gamma, b2, b3 })
}

/// Decision after the first replication study.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum StageDecision {
    /// E₂ ≤ b2: replication success, stop.
    StopSuccess,
    /// E₂ ≥ b3: no second replication can save the project, stop.
    StopFutility,
    /// Run a second replication at significance level b3 − E₂.
    Continue { next_level: Probability },
}

/// Classifies the first-stage p-value sum E₂ against the plan.
pub fn stage_decision(e2: f64, plan: &SpendingPlan) -> Result<StageDecision> {
    if !e2.is_finite() || e2 < 0.0 {
        return Err(Error::domain(format!(
            "E2 must be a finite non-negative p-value sum, got {e2}"
        )));
    }
    if e2 <= plan.b2 {
        Ok(StageDecision::StopSuccess)
    } else if e2 >= plan.b3 {
        Ok(StageDecision::StopFutility)
    } else {
        Ok(StageDecision::Continue {
            next_level: Probability::new(plan.b3 - e2)?,
        })
    }
}

/// Assesses one original and two replication p-values jointly: the sum is
/// referred to IH(3) and success requires it to stay within the overall
/// three-study budget.
pub fn assess_three(
    po: Probability,
    pr1: Probability,
    pr2: Probability,
    alpha: Probability,
) -> Result<MethodResult> {
    let e3 = po.value() + pr1.value() + pr2.value();
    let p_combined = irwin_hall_cdf(e3, 3)?;
    let result = MethodResult::at_level(Method::Edgington, p_combined, alpha);
    debug_assert_eq!(result.success, e3 <= budget_k(alpha, 3).unwrap_or(f64::NAN));
    Ok(result)
}

/// One point of the spending-plan curve.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SpendingPoint {
    pub gamma: f64,
    pub b2: f64,
    pub b3: f64,
}

/// Evaluates the plan over a grid of spending proportions.
pub fn spending_curve(alpha: Probability, gammas: &[f64]) -> Result<Vec<SpendingPoint>> {
    gammas
        .iter()
        .map(|&gamma| {
            let plan = spending_plan(alpha, gamma)?;
            Ok(SpendingPoint {
                gamma,
                b2: plan.b2(),
                b3: plan.b3(),
            })
        })
        .collect()
}

/// Writes a spending curve as CSV with header `gamma,b2,b3`.
pub fn write_spending_curve_csv<W: std::io::Write>(
    out: &mut W,
    rows: &[SpendingPoint],
) -> Result<()> {
    writeln!(out, "gamma,b2,b3")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.gamma, r.b2, r.b3)?;
    }
    Ok(())
}
