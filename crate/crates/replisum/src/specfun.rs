//! Special functions used throughout the crate: standard normal CDF and
//! quantile, the χ²(4 df) upper tail and the derived Fisher critical value,
//! Irwin-Hall CDFs, and the trapezoidal CDF of a weighted sum of two
//! uniforms.
//!
//! The normal CDF follows Cody's rational approximations for erf/erfc
//! (maximum relative error below 1e-16 on each branch), so the absolute
//! error of `norm_cdf` is well under the 1e-12 contract and lower-tail
//! values keep full relative accuracy. The quantile uses Acklam's rational
//! initializer polished by one Halley step against `norm_cdf`.

#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// A probability, guaranteed to lie in [0, 1].
///
/// Construction validates the bound; CDF-style computations clamp their
/// floating-point output before wrapping, so the invariant always holds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize)]
#[serde(transparent)]
pub struct Probability(f64);

impl Probability {
    /// Validates that `value` is finite and in [0, 1].
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(Probability(value))
        } else {
            Err(Error::domain(format!(
                "probability must lie in [0, 1], got {value}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Wraps a floating-point CDF evaluation, clamping to [0, 1].
    pub(crate) fn from_cdf(value: f64) -> Self {
        Probability(value.clamp(0.0, 1.0))
    }
}

impl std::fmt::Display for Probability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl From<Probability> for f64 {
    fn from(p: Probability) -> f64 {
        p.0
    }
}

const FRAC_1_SQRT_2PI: f64 = 0.39894228040143267793994605993438;

// Cody (1969) rational coefficients for erf on |x| <= 0.46875.
const ERF_A: [f64; 5] = [
    3.16112374387056560e0,
    1.13864154151050156e2,
    3.77485237685302021e2,
    3.20937758913846947e3,
    1.85777706184603153e-1,
];
const ERF_B: [f64; 4] = [
    2.36012909523441209e1,
    2.44024637934444173e2,
    1.28261652607737228e3,
    2.84423683343917062e3,
];

// Cody coefficients for erfc on 0.46875 < x <= 4.
const ERFC_C: [f64; 9] = [
    5.64188496988670089e-1,
    8.88314979438837594e0,
    6.61191906371416295e1,
    2.98635138197400131e2,
    8.81952221241769090e2,
    1.71204761263407058e3,
    2.05107837782607147e3,
    1.23033935479799725e3,
    2.15311535474403846e-8,
];
const ERFC_D: [f64; 8] = [
    1.57449261107098347e1,
    1.17693950891312499e2,
    5.37181101862009858e2,
    1.62138957456669019e3,
    3.29079923573345963e3,
    4.36261909014324716e3,
    3.43936767414372164e3,
    1.23033935480374942e3,
];

// Cody coefficients for erfc on x > 4.
const ERFC_P: [f64; 6] = [
    3.05326634961232344e-1,
    3.60344899949804439e-1,
    1.25781726111229246e-1,
    1.60837851487422766e-2,
    6.58749161529837803e-4,
    1.63153871373020978e-2,
];
const ERFC_Q: [f64; 5] = [
    2.56852019228982242e0,
    1.87295284992346047e0,
    5.27905102951428412e-1,
    6.05183413124413191e-2,
    2.33520497626869185e-3,
];

const FRAC_1_SQRT_PI: f64 = 5.6418958354775628695e-1;

/// Complementary error function for non-negative arguments, via Cody's
/// three-branch rational approximation.
fn erfc_nonneg(y: f64) -> f64 {
    debug_assert!(y >= 0.0);
    if y <= 0.46875 {
        let z = y * y;
        let mut num = ERF_A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + ERF_A[i]) * z;
            den = (den + ERF_B[i]) * z;
        }
        return 1.0 - y * (num + ERF_A[3]) / (den + ERF_B[3]);
    }
    // exp(-y^2) split as exp(-ysq^2) * exp(-(y-ysq)(y+ysq)) with ysq a
    // 1/16 grid point, preserving relative accuracy of the exponential.
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    let expfac = (-ysq * ysq).exp() * (-del).exp();
    if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        expfac * (num + ERFC_C[7]) / (den + ERFC_D[7])
    } else {
        let z = 1.0 / (y * y);
        let mut num = ERFC_P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * z;
            den = (den + ERFC_Q[i]) * z;
        }
        let r = z * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        (expfac * (FRAC_1_SQRT_PI - r) / y).max(0.0)
    }
}

fn erfc(x: f64) -> f64 {
    if x >= 0.0 {
        erfc_nonneg(x)
    } else {
        2.0 - erfc_nonneg(-x)
    }
}

/// Standard normal CDF on raw floats. Callers guarantee a finite argument.
pub(crate) fn norm_cdf_raw(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

// Acklam's rational approximation coefficients for the normal quantile.
const ACK_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ACK_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ACK_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ACK_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

const ACK_P_LOW: f64 = 0.02425;

/// Quantile for p in (0, 0.5]: Acklam initializer plus one Halley step.
fn quantile_lower_half(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p <= 0.5);
    let x = if p < ACK_P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((ACK_C[0] * q + ACK_C[1]) * q + ACK_C[2]) * q + ACK_C[3]) * q + ACK_C[4]) * q
            + ACK_C[5])
            / ((((ACK_D[0] * q + ACK_D[1]) * q + ACK_D[2]) * q + ACK_D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((ACK_A[0] * r + ACK_A[1]) * r + ACK_A[2]) * r + ACK_A[3]) * r + ACK_A[4]) * r
            + ACK_A[5])
            * q
            / (((((ACK_B[0] * r + ACK_B[1]) * r + ACK_B[2]) * r + ACK_B[3]) * r + ACK_B[4]) * r
                + 1.0)
    };
    let pdf = norm_pdf(x);
    if pdf > 0.0 {
        // Halley refinement against the high-accuracy CDF.
        let e = norm_cdf_raw(x) - p;
        let u = e / pdf;
        x - u / (1.0 + 0.5 * x * u)
    } else {
        x
    }
}

/// Normal quantile on raw floats. Callers guarantee p in (0, 1).
pub(crate) fn norm_quantile_raw(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);
    if p > 0.5 {
        -quantile_lower_half(1.0 - p)
    } else {
        quantile_lower_half(p)
    }
}

/// Standard normal CDF Φ(x).
pub fn norm_cdf(x: f64) -> Result<Probability> {
    if !x.is_finite() {
        return Err(Error::domain(format!("norm_cdf requires finite x, got {x}")));
    }
    Ok(Probability::from_cdf(norm_cdf_raw(x)))
}

/// Normal quantile Φ⁻¹(p); requires 0 < p < 1.
pub fn norm_quantile(p: Probability) -> Result<f64> {
    let v = p.value();
    if v <= 0.0 || v >= 1.0 {
        return Err(Error::domain(format!(
            "norm_quantile requires 0 < p < 1, got {v}"
        )));
    }
    Ok(norm_quantile_raw(v))
}

/// Upper tail of the χ² distribution with 4 degrees of freedom,
/// exp(-x/2)·(1 + x/2).
pub fn chisq4_tail(x: f64) -> Result<Probability> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!(
            "chisq4_tail requires finite x >= 0, got {x}"
        )));
    }
    Ok(Probability::from_cdf((-0.5 * x).exp() * (1.0 + 0.5 * x)))
}

pub(crate) fn chisq4_tail_raw(x: f64) -> f64 {
    (-0.5 * x).exp() * (1.0 + 0.5 * x)
}

/// Fisher product-criterion critical value c_F: the largest product of two
/// p-values still significant at overall level alpha². Solves
/// exp(-x/2)(1 + x/2) = alpha² by bisection and returns exp(-x/2).
pub fn fisher_critical(alpha: Probability) -> Result<f64> {
    let a = alpha.value();
    if a <= 0.0 || a >= 1.0 {
        return Err(Error::domain(format!(
            "fisher_critical requires 0 < alpha < 1, got {a}"
        )));
    }
    let target = a * a;
    let mut lo = 0.0_f64;
    let mut hi = 4.0_f64;
    while chisq4_tail_raw(hi) > target {
        hi *= 2.0;
        if hi > 4096.0 {
            return Err(Error::numerical(format!(
                "fisher_critical bracket failure at alpha = {a}"
            )));
        }
    }
    // The tail is monotone decreasing; bisect to well below the 1e-12
    // probability tolerance.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if chisq4_tail_raw(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.max(1.0) {
            break;
        }
    }
    Ok((-0.25 * (lo + hi)).exp())
}

const MAX_IRWIN_HALL_N: u32 = 10;

/// CDF of the Irwin-Hall distribution: Pr(U₁ + ... + Uₙ ≤ x) for
/// independent standard uniforms, via the alternating sum
/// (1/n!)·Σⱼ (-1)ʲ C(n,j) (x-j)ⁿ with Kahan compensation.
///
/// `n` is limited to 10: the alternating sum loses accuracy as n grows
/// and nothing here needs more than three studies.
pub fn irwin_hall_cdf(x: f64, n: u32) -> Result<Probability> {
    if n == 0 {
        return Err(Error::domain("irwin_hall_cdf requires n >= 1".to_string()));
    }
    if n > MAX_IRWIN_HALL_N {
        return Err(Error::domain(format!(
            "irwin_hall_cdf supports n <= {MAX_IRWIN_HALL_N}, got {n}"
        )));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "irwin_hall_cdf requires finite x, got {x}"
        )));
    }
    if x <= 0.0 {
        return Ok(Probability::from_cdf(0.0));
    }
    if x >= n as f64 {
        return Ok(Probability::from_cdf(1.0));
    }
    // The distribution is symmetric about n/2; evaluating the alternating
    // sum only on the lower half keeps its cancellation small.
    let half = n as f64 / 2.0;
    if x > half {
        return Ok(Probability::from_cdf(
            1.0 - irwin_hall_lower(n as f64 - x, n),
        ));
    }
    Ok(Probability::from_cdf(irwin_hall_lower(x, n)))
}

/// Alternating sum (1/n!)·Σⱼ (-1)ʲ C(n,j) (x-j)ⁿ with Kahan compensation,
/// for 0 < x <= n/2.
fn irwin_hall_lower(x: f64, n: u32) -> f64 {
    let nf = n as f64;
    let mut factorial = 1.0_f64;
    for k in 2..=n {
        factorial *= k as f64;
    }
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64; // Kahan compensation
    let mut binom = 1.0_f64; // C(n, j)
    let jmax = x.floor() as u32;
    for j in 0..=jmax.min(n) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * binom * (x - j as f64).powf(nf);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        binom *= (n - j) as f64 / (j + 1) as f64;
    }
    sum / factorial
}

/// CDF of the sum of two independent uniforms on (0, wo) and (0, wr),
/// a trapezoidal distribution with support [0, wo + wr]. Requires
/// 0 < wo <= wr.
pub fn trapezoid_cdf(x: f64, wo: f64, wr: f64) -> Result<Probability> {
    if !(wo.is_finite() && wr.is_finite() && wo > 0.0 && wr > 0.0) {
        return Err(Error::domain(format!(
            "trapezoid_cdf requires positive finite weights, got ({wo}, {wr})"
        )));
    }
    if wo > wr {
        return Err(Error::domain(format!(
            "trapezoid_cdf requires wo <= wr, got ({wo}, {wr})"
        )));
    }
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "trapezoid_cdf requires finite x, got {x}"
        )));
    }
    let value = if x <= 0.0 {
        0.0
    } else if x <= wo {
        x * x / (2.0 * wo * wr)
    } else if x <= wr {
        (x - 0.5 * wo) / wr
    } else if x < wo + wr {
        let s = wo + wr;
        1.0 + (x * s - 0.5 * s * s - 0.5 * x * x) / (wo * wr)
    } else {
        1.0
    };
    Ok(Probability::from_cdf(value))
}
