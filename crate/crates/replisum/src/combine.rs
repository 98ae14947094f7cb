//! Combined p-values and success verdicts for the five replication
//! assessment methods, plus the p-value budgets of the additive methods.
//!
//! All methods control the overall Type-I error rate at level α² when
//! success is declared for a combined p-value at or below α².

use crate::error::{Error, Result};
use crate::specfun::{
    chisq4_tail, irwin_hall_cdf, norm_cdf_raw, norm_quantile_raw, trapezoid_cdf, Probability,
};

/// The five assessment methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    TwoTrials,
    Edgington,
    EdgingtonWeighted,
    Fisher,
    MetaAnalysis,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::TwoTrials,
        Method::Edgington,
        Method::EdgingtonWeighted,
        Method::Fisher,
        Method::MetaAnalysis,
    ];

    /// Canonical token used in CLI flags and CSV columns.
    pub fn name(self) -> &'static str {
        match self {
            Method::TwoTrials => "two-trials",
            Method::Edgington => "edgington",
            Method::EdgingtonWeighted => "edgington-weighted",
            Method::Fisher => "fisher",
            Method::MetaAnalysis => "meta",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-trials" => Ok(Method::TwoTrials),
            "edgington" => Ok(Method::Edgington),
            "edgington-weighted" => Ok(Method::EdgingtonWeighted),
            "fisher" => Ok(Method::Fisher),
            "meta" => Ok(Method::MetaAnalysis),
            other => Err(Error::usage(format!(
                "unknown method '{other}' (expected two-trials, edgington, \
                 edgington-weighted, fisher or meta)"
            ))),
        }
    }
}

/// One original/replication pair of one-sided p-values, optionally with the
/// variance ratio c = σ_o²/σ_r² (interpretable as n_r/n_o).
///
/// Both p-values must lie strictly inside (0, 1); empirical values at the
/// boundary must be clamped by the caller before construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyPair {
    po: Probability,
    pr: Probability,
    c: Option<f64>,
}

impl StudyPair {
    pub fn new(po: f64, pr: f64, c: Option<f64>) -> Result<Self> {
        for (label, v) in [("po", po), ("pr", pr)] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::domain(format!(
                    "{label} must lie strictly in (0, 1), got {v}"
                )));
            }
        }
        if let Some(cv) = c {
            if !cv.is_finite() || cv <= 0.0 {
                return Err(Error::domain(format!(
                    "variance ratio c must be finite and positive, got {cv}"
                )));
            }
        }
        Ok(StudyPair {
            po: Probability::new(po)?,
            pr: Probability::new(pr)?,
            c,
        })
    }

    pub fn po(&self) -> Probability {
        self.po
    }

    pub fn pr(&self) -> Probability {
        self.pr
    }

    pub fn variance_ratio(&self) -> Option<f64> {
        self.c
    }
}

/// A positive weight pair (wo, wr) with wo <= wr for the weighted sum of
/// p-values. Only the ratio wr/wo matters for the combined p-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    wo: f64,
    wr: f64,
}

impl Weights {
    pub fn new(wo: f64, wr: f64) -> Result<Self> {
        if !(wo.is_finite() && wr.is_finite() && wo > 0.0 && wr > 0.0) {
            return Err(Error::domain(format!(
                "weights must be finite and positive, got ({wo}, {wr})"
            )));
        }
        if wo > wr {
            return Err(Error::domain(format!(
                "original weight must not exceed replication weight, got ({wo}, {wr})"
            )));
        }
        Ok(Weights { wo, wr })
    }

    pub fn original(&self) -> f64 {
        self.wo
    }

    pub fn replication(&self) -> f64 {
        self.wr
    }

    /// Replication-to-original weight ratio w̃ = wr/wo >= 1.
    pub fn ratio(&self) -> f64 {
        self.wr / self.wo
    }
}

impl Default for Weights {
    /// The conventional downweighting of the original study: (1, 2).
    fn default() -> Self {
        Weights { wo: 1.0, wr: 2.0 }
    }
}

/// Outcome of assessing one pair with one method at overall level α².
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MethodResult {
    pub method: Method,
    pub p_combined: Probability,
    /// The overall Type-I error level α² at which success is judged.
    pub overall_level: Probability,
    /// success ⇔ p_combined <= overall_level.
    pub success: bool,
}

impl MethodResult {
    pub(crate) fn at_level(method: Method, p_combined: Probability, alpha: Probability) -> Self {
        let overall_level = Probability::from_cdf(alpha.value() * alpha.value());
        MethodResult {
            method,
            p_combined,
            overall_level,
            success: p_combined.value() <= overall_level.value(),
        }
    }
}

/// Two-trials rule: max{po, pr}².
pub fn p_two_trials(pair: &StudyPair) -> Probability {
    let m = pair.po.value().max(pair.pr.value());
    Probability::from_cdf(m * m)
}

/// Sum of p-values referred to its null distribution IH(2).
pub fn p_edgington(pair: &StudyPair) -> Probability {
    irwin_hall_cdf(pair.po.value() + pair.pr.value(), 2)
        .expect("sum of two probabilities is a valid IH(2) argument")
}

/// Weighted sum wo·po + wr·pr referred to its trapezoidal null
/// distribution. Weights are normalized to wo = 1 first; the result only
/// depends on the ratio wr/wo.
pub fn p_edgington_weighted(pair: &StudyPair, weights: &Weights) -> Probability {
    let ratio = weights.ratio();
    trapezoid_cdf(pair.po.value() + ratio * pair.pr.value(), 1.0, ratio)
        .expect("normalized weights satisfy 0 < 1 <= ratio")
}

/// Fisher's product criterion: χ²(4) upper tail of -2·log(po·pr),
/// equal to q(1 - ln q) with q = po·pr.
pub fn p_fisher(pair: &StudyPair) -> Probability {
    // Sum of logs avoids underflow of the raw product for tiny p-values.
    let log_q = pair.po.value().ln() + pair.pr.value().ln();
    chisq4_tail(-2.0 * log_q).expect("log of in-(0,1) product is negative")
}

/// Fixed-effect meta-analysis (weighted Stouffer) p-value
/// 1 - Φ{(z_o + √c·z_r)/√(1+c)}. Requires the pair's variance ratio.
pub fn p_meta_analysis(pair: &StudyPair) -> Result<Probability> {
    let c = pair.c.ok_or_else(|| {
        Error::usage("meta-analysis requires the variance ratio c on the study pair".to_string())
    })?;
    // z = Phi^-1(1 - p) computed as -Phi^-1(p) to keep tail precision.
    let zo = -norm_quantile_raw(pair.po.value());
    let zr = -norm_quantile_raw(pair.pr.value());
    let z_ma = (zo + c.sqrt() * zr) / (1.0 + c).sqrt();
    Ok(Probability::from_cdf(norm_cdf_raw(-z_ma)))
}

/// Budget for the unweighted p-value sum: the largest po + pr compatible
/// with success at overall level α², equal to √2·α. Requires 0 < α <= 0.5
/// so the budget inverts the first branch of the IH(2) CDF.
pub fn budget(alpha: Probability) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a > 0.5 {
        return Err(Error::domain(format!(
            "budget requires 0 < alpha <= 0.5, got {a}"
        )));
    }
    Ok(std::f64::consts::SQRT_2 * a)
}

/// Budget for the weighted sum wo·po + wr·pr: √(2·wo·wr)·α, valid while it
/// does not exceed wo (first-branch inversion of the trapezoidal CDF).
pub fn budget_weighted(alpha: Probability, weights: &Weights) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(format!(
            "budget_weighted requires 0 < alpha < 1, got {a}"
        )));
    }
    let bw = (2.0 * weights.wo * weights.wr).sqrt() * a;
    if bw > weights.wo {
        return Err(Error::domain(format!(
            "alpha = {a} is too large for weights ({}, {}): budget {bw} exceeds the \
             original weight",
            weights.wo, weights.wr
        )));
    }
    Ok(bw)
}

/// Computes the combined p-value for `method` and thresholds it at α².
///
/// Weighted Edgington requires `weights`; meta-analysis requires the
/// variance ratio on the pair.
pub fn assess(
    pair: &StudyPair,
    method: Method,
    alpha: Probability,
    weights: Option<&Weights>,
) -> Result<MethodResult> {
    let p = match method {
        Method::TwoTrials => p_two_trials(pair),
        Method::Edgington => p_edgington(pair),
        Method::EdgingtonWeighted => {
            let w = weights.ok_or_else(|| {
                Error::usage("weighted Edgington requires weights (wo, wr)".to_string())
            })?;
            p_edgington_weighted(pair, w)
        }
        Method::Fisher => p_fisher(pair),
        Method::MetaAnalysis => p_meta_analysis(pair)?,
    };
    Ok(MethodResult::at_level(method, p, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::u01;
    use crate::specfun::fisher_critical;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    fn pair(po: f64, pr: f64) -> StudyPair {
        StudyPair::new(po, pr, None).unwrap()
    }

    #[test]
    fn two_trials_worked_examples() {
        assert!((p_two_trials(&pair(0.024, 0.024)).value() - 0.000576).abs() < 1e-15);
        let failing = p_two_trials(&pair(0.026, 0.001)).value();
        assert!((failing - 0.000676).abs() < 1e-15);
        assert!(failing > 0.000625);
        assert!((p_two_trials(&pair(0.5, 0.5)).value() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn edgington_worked_examples() {
        let a = p_edgington(&pair(0.026, 0.001)).value();
        assert!((a - 0.0003645).abs() < 1e-10);
        assert!((a * 1e4).round() / 1e4 == 0.0004);
        let b = p_edgington(&pair(0.024, 0.024)).value();
        assert!((b - 0.001152).abs() < 1e-10);
        assert!((b * 1e3).round() / 1e3 == 0.001);
        assert!((p_edgington(&pair(0.5, 0.7)).value() - 0.68).abs() < 1e-12);
    }

    #[test]
    fn edgington_second_branch_monte_carlo() {
        let n = 2_000_000_u64;
        let hits = (0..n)
            .filter(|&i| u01(5150, i, 0) + u01(5150, i, 1) <= 1.2)
            .count() as f64;
        let rate = hits / n as f64;
        let se = (0.68_f64 * 0.32 / n as f64).sqrt();
        assert!((rate - 0.68).abs() < 3.0 * se);
    }

    #[test]
    fn weighted_edgington_worked_examples() {
        let w = Weights::new(1.0, 2.0).unwrap();
        let a = p_edgington_weighted(&pair(0.026, 0.001), &w).value();
        assert!((a - 0.000196).abs() < 1e-12);
        let sym = p_edgington_weighted(&pair(0.75, 0.375), &w).value();
        assert!((sym - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weighted_reduces_to_unweighted_for_equal_weights() {
        let w = Weights::new(1.0, 1.0).unwrap();
        for &(po, pr) in &[(0.01, 0.02), (0.3, 0.4), (0.7, 0.9), (0.5, 0.5)] {
            let a = p_edgington_weighted(&pair(po, pr), &w).value();
            let b = p_edgington(&pair(po, pr)).value();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn weighted_tracks_two_trials_when_original_negligible() {
        let w = Weights::default();
        for &pr in &[0.01, 0.025, 0.1] {
            let po = pr / 200.0;
            let pw = p_edgington_weighted(&pair(po, pr), &w).value();
            let p2 = p_two_trials(&pair(po, pr)).value();
            assert!(
                (pw / p2 - 1.0).abs() <= 3.0 * po / pr,
                "pr = {pr}: ratio deviation {}",
                (pw / p2 - 1.0).abs()
            );
            // Unweighted runs at about half the two-trials value here.
            let pe = p_edgington(&pair(po, pr)).value();
            assert!((pe / (p2 / 2.0) - 1.0).abs() < 0.05);
        }
    }

    #[test]
    fn fisher_worked_example() {
        let v = p_fisher(&pair(0.026, 0.001)).value();
        assert!((v - 3.0049276e-4).abs() < 1e-6);
    }

    #[test]
    fn fisher_matches_product_closed_form() {
        // Second algebraic route: q(1 - ln q) with q = po*pr.
        for &(po, pr) in &[(0.026, 0.001), (0.3, 0.2), (0.9, 0.8), (1e-4, 0.5)] {
            let q: f64 = po * pr;
            let direct = q * (1.0 - q.ln());
            let via_tail = p_fisher(&pair(po, pr)).value();
            assert!((via_tail - direct).abs() < 1e-14, "q = {q}");
        }
    }

    #[test]
    fn fisher_boundary_behavior() {
        // Product near one gives a p-value near one.
        assert!(p_fisher(&pair(0.999, 0.9999)).value() > 0.999);
        // Success is guaranteed for po below the critical product value,
        // no matter how large pr is.
        let cf = fisher_critical(p(0.025)).unwrap();
        let guaranteed = pair(cf * 0.999, 0.9999);
        assert!(p_fisher(&guaranteed).value() <= 0.000625);
        // Just above the critical value with pr near one: no success.
        let v = p_fisher(&pair(6e-5, 0.9999)).value();
        assert!((v - 6.4327e-4).abs() < 1e-6);
        assert!(v > 0.000625);
    }

    #[test]
    fn fisher_survives_extreme_underflow() {
        let pair = StudyPair::new(1e-300, 1e-300, None).unwrap();
        assert!(p_fisher(&pair).value() > 0.0 || p_fisher(&pair).value() == 0.0);
        assert!(p_fisher(&pair).value() < 1e-200);
    }

    #[test]
    fn meta_analysis_worked_example() {
        let pair = StudyPair::new(0.025, 0.025, Some(1.0)).unwrap();
        let v = p_meta_analysis(&pair).unwrap().value();
        assert!((v - 0.0027873).abs() < 1e-5);
    }

    #[test]
    fn meta_analysis_sharpens_equal_evidence() {
        for &pv in &[0.01, 0.1, 0.3, 0.49] {
            let pair = StudyPair::new(pv, pv, Some(1.0)).unwrap();
            assert!(p_meta_analysis(&pair).unwrap().value() < pv);
        }
    }

    #[test]
    fn meta_analysis_degenerates_to_original_for_tiny_c() {
        let pair = StudyPair::new(0.03, 0.4, Some(1e-12)).unwrap();
        let v = p_meta_analysis(&pair).unwrap().value();
        assert!((v - 0.03).abs() < 1e-5);
    }

    #[test]
    fn meta_analysis_requires_variance_ratio() {
        let r = p_meta_analysis(&pair(0.025, 0.025));
        assert!(matches!(r, Err(Error::Usage(_))));
    }

    #[test]
    fn budget_values() {
        assert!((budget(p(0.025)).unwrap() - 0.035355).abs() < 1e-6);
        assert!((budget(p(0.05)).unwrap() - 0.070711).abs() < 1e-6);
        assert!(budget(p(0.6)).is_err());
    }

    #[test]
    fn budget_matches_success_region() {
        let b = budget(p(0.025)).unwrap();
        for i in 1..200 {
            for j in 1..200 {
                let (po, pr) = (i as f64 / 400.0, j as f64 / 400.0);
                let success = p_edgington(&pair(po, pr)).value() <= 0.000625;
                assert_eq!(success, po + pr <= b, "po={po}, pr={pr}");
            }
        }
    }

    #[test]
    fn budget_weighted_values() {
        let a = p(0.025);
        assert!((budget_weighted(a, &Weights::new(1.0, 2.0).unwrap()).unwrap() - 0.05).abs() < 1e-15);
        assert!(
            (budget_weighted(a, &Weights::new(1.0, 1.0).unwrap()).unwrap() - 0.035355).abs() < 1e-6
        );
        assert!(
            (budget_weighted(a, &Weights::new(1.0, 3.0).unwrap()).unwrap() - 0.061237).abs() < 1e-6
        );
        // Budget exceeding the original weight is rejected.
        assert!(budget_weighted(a, &Weights::new(1.0, 4000.0).unwrap()).is_err());
    }

    #[test]
    fn budget_weighted_monte_carlo_level() {
        // Pr(E_w <= b_w) = alpha^2 under the null for w = (1, 3).
        let w = Weights::new(1.0, 3.0).unwrap();
        let bw = budget_weighted(p(0.025), &w).unwrap();
        let n = 10_000_000_u64;
        let hits = (0..n)
            .filter(|&i| u01(4242, i, 0) + 3.0 * u01(4242, i, 1) <= bw)
            .count() as f64;
        let rate = hits / n as f64;
        let expect = 0.000625;
        let se = (expect * (1.0 - expect) / n as f64).sqrt();
        assert!((rate - expect).abs() <= 3.0 * se, "rate {rate}");
    }

    #[test]
    fn assess_opposite_verdicts_on_worked_examples() {
        let a = p(0.025);
        let discordant = pair(0.026, 0.001);
        let borderline = pair(0.024, 0.024);
        assert!(assess(&discordant, Method::Edgington, a, None).unwrap().success);
        assert!(!assess(&borderline, Method::Edgington, a, None).unwrap().success);
        assert!(!assess(&discordant, Method::TwoTrials, a, None).unwrap().success);
        assert!(assess(&borderline, Method::TwoTrials, a, None).unwrap().success);
    }

    #[test]
    fn assess_boundary_is_inclusive() {
        // Combined p exactly at alpha^2 counts as success.
        let exact = pair(0.025, 0.025);
        let r = assess(&exact, Method::TwoTrials, p(0.025), None).unwrap();
        assert_eq!(r.p_combined.value(), r.overall_level.value());
        assert!((r.p_combined.value() - 0.000625).abs() < 1e-15);
        assert!(r.success);
    }

    #[test]
    fn assess_requires_method_inputs() {
        let a = p(0.025);
        assert!(matches!(
            assess(&pair(0.01, 0.01), Method::EdgingtonWeighted, a, None),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            assess(&pair(0.01, 0.01), Method::MetaAnalysis, a, None),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn combined_p_values_monotone_in_both_arguments() {
        let w = Weights::default();
        let grid: Vec<f64> = (1..=200).map(|i| i as f64 / 201.0).collect();
        let eval = |po: f64, pr: f64| -> [f64; 5] {
            let sp = StudyPair::new(po, pr, Some(1.0)).unwrap();
            [
                p_two_trials(&sp).value(),
                p_edgington(&sp).value(),
                p_edgington_weighted(&sp, &w).value(),
                p_fisher(&sp).value(),
                p_meta_analysis(&sp).unwrap().value(),
            ]
        };
        for i in 0..grid.len() - 1 {
            for j in 0..grid.len() - 1 {
                let base = eval(grid[i], grid[j]);
                let po_up = eval(grid[i + 1], grid[j]);
                let pr_up = eval(grid[i], grid[j + 1]);
                for m in 0..5 {
                    assert!(po_up[m] + 1e-12 >= base[m], "method {m} not monotone in po");
                    assert!(pr_up[m] + 1e-12 >= base[m], "method {m} not monotone in pr");
                }
            }
        }
    }

    #[test]
    fn study_pair_rejects_boundary_p_values() {
        assert!(StudyPair::new(0.0, 0.5, None).is_err());
        assert!(StudyPair::new(0.5, 1.0, None).is_err());
        assert!(StudyPair::new(f64::NAN, 0.5, None).is_err());
        assert!(StudyPair::new(0.5, 0.5, Some(0.0)).is_err());
        assert!(StudyPair::new(0.5, 0.5, Some(f64::INFINITY)).is_err());
    }

    #[test]
    fn weights_validation() {
        assert!(Weights::new(2.0, 1.0).is_err());
        assert!(Weights::new(0.0, 1.0).is_err());
        assert!(Weights::new(1.0, f64::NAN).is_err());
        assert_eq!(Weights::default().ratio(), 2.0);
    }

    #[test]
    fn method_names_roundtrip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("stouffer".parse::<Method>().is_err());
    }
}
