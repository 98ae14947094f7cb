//! Monte Carlo verification harness: overall Type-I error, conditional
//! Type-I error, and project power of every method, plus the two-stage
//! sequential procedure.
//!
//! Random numbers come from a counter-based generator keyed by
//! (seed, replicate, stream), so replicate i is reproducible in isolation
//! and results are bitwise identical regardless of how replicates are
//! scheduled across threads.

use rayon::prelude::*;

use crate::combine::{assess, Method, StudyPair, Weights};
use crate::error::{Error, Result};
use crate::sequential::{stage_decision, SpendingPlan, StageDecision};
use crate::specfun::{norm_cdf_raw, norm_quantile_raw, Probability};

/// SplitMix64 finalizer: full-avalanche 64-bit mixing.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval (0, 1), a pure function of
/// (seed, replicate, stream).
pub(crate) fn u01(seed: u64, replicate: u64, stream: u64) -> f64 {
    let mut x = mix64(seed ^ 0x243F6A8885A308D3);
    x = mix64(x.wrapping_add(replicate.wrapping_mul(0x9E3779B97F4A7C15)));
    x = mix64(x.wrapping_add(stream.wrapping_mul(0xD1B54A32D192ED03)));
    // 53 random bits, centered half a step away from both endpoints.
    (((x >> 11) as f64) + 0.5) * (1.0 / 9007199254740992.0)
}

/// Data-generating truth for a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truth {
    /// Both true effects null: (po, pr) independent uniforms.
    Null,
    /// Original result fixed at `po`, replication effect null: pr uniform.
    Conditional { po: f64 },
    /// z_o ~ N(mu, 1) and z_r ~ N(d·mu·√c, 1). With `truncate_original`,
    /// success is only counted when z_o >= 0, mirroring power integrals
    /// that start at zero.
    Alternative {
        mu: f64,
        d: f64,
        truncate_original: bool,
    },
}

/// Configuration of one simulation run. Identical configurations produce
/// identical results.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub method: Method,
    pub alpha: Probability,
    pub weights: Option<Weights>,
    /// Variance ratio: required for the meta-analysis method and for the
    /// alternative truth.
    pub c: Option<f64>,
    pub truth: Truth,
    pub n_sim: u64,
    pub seed: u64,
}

/// Estimated success rate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SimResult {
    pub rate: f64,
    pub se: f64,
    pub n_sim: u64,
}

fn binomial_result(hits: u64, n: u64) -> SimResult {
    let rate = hits as f64 / n as f64;
    SimResult {
        rate,
        se: (rate * (1.0 - rate) / n as f64).sqrt(),
        n_sim: n,
    }
}

const P_CLAMP: f64 = 1e-16;

fn clamp_p(p: f64) -> f64 {
    p.clamp(P_CLAMP, 1.0 - P_CLAMP)
}

fn replicate_success(cfg: &SimConfig, i: u64) -> Result<bool> {
    let seed = cfg.seed;
    let (po, pr, truncated_out) = match cfg.truth {
        Truth::Null => (u01(seed, i, 0), u01(seed, i, 1), false),
        Truth::Conditional { po } => (po, u01(seed, i, 0), false),
        Truth::Alternative {
            mu,
            d,
            truncate_original,
        } => {
            let c = cfg.c.ok_or_else(|| {
                Error::usage("alternative truth requires the variance ratio c".to_string())
            })?;
            let zo = mu + norm_quantile_raw(u01(seed, i, 0));
            let zr = d * mu * c.sqrt() + norm_quantile_raw(u01(seed, i, 1));
            let po = norm_cdf_raw(-zo);
            let pr = norm_cdf_raw(-zr);
            (po, pr, truncate_original && zo < 0.0)
        }
    };
    if truncated_out {
        return Ok(false);
    }
    let pair = StudyPair::new(clamp_p(po), clamp_p(pr), cfg.c)?;
    Ok(assess(&pair, cfg.method, cfg.alpha, cfg.weights.as_ref())?.success)
}

/// Runs the configured simulation and returns the success rate.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    if cfg.n_sim == 0 {
        return Err(Error::domain("n_sim must be at least 1".to_string()));
    }
    if let Truth::Conditional { po } = cfg.truth {
        if !(po > 0.0 && po < 1.0) {
            return Err(Error::domain(format!(
                "conditional truth requires 0 < po < 1, got {po}"
            )));
        }
    }
    // Validate the first replicate up front so configuration errors
    // surface as errors rather than a poisoned count.
    replicate_success(cfg, 0)?;
    let hits = (0..cfg.n_sim)
        .into_par_iter()
        .filter(|&i| replicate_success(cfg, i).unwrap_or(false))
        .count() as u64;
    Ok(binomial_result(hits, cfg.n_sim))
}

/// Two-stage rejection rate of a spending plan under the null, from
/// independent uniform p-value triples.
pub fn simulate_sequential(plan: &SpendingPlan, n_sim: u64, seed: u64) -> Result<SimResult> {
    if n_sim == 0 {
        return Err(Error::domain("n_sim must be at least 1".to_string()));
    }
    let hits = (0..n_sim)
        .into_par_iter()
        .filter(|&i| {
            let e2 = u01(seed, i, 0) + u01(seed, i, 1);
            match stage_decision(e2, plan) {
                Ok(StageDecision::StopSuccess) => true,
                Ok(StageDecision::Continue { next_level }) => {
                    u01(seed, i, 2) <= next_level.value()
                }
                _ => false,
            }
        })
        .count() as u64;
    Ok(binomial_result(hits, n_sim))
}
