//! Batch analysis of replication-project datasets.
//!
//! Input rows carry correlation-scale effect estimates and sample sizes
//! (`project,study,ro,no,rr,nr`), or precomputed one-sided p-values and the
//! variance ratio (`project,study,po,pr,c`), or both. Correlation rows are
//! converted to one-sided p-values through the z-transformation
//! atanh(r)·√(n−3), oriented in the direction of the original estimate so
//! that replication estimates pointing the wrong way land above 0.5.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::combine::{assess, Method, MethodResult, StudyPair, Weights};
use crate::error::{Error, Result, RowError};
use crate::specfun::{norm_cdf_raw, Probability};

/// One raw dataset row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StudyRecord {
    pub project: String,
    pub study: String,
    /// Original correlation-scale effect estimate.
    pub ro: Option<f64>,
    /// Original sample size.
    pub no: Option<u64>,
    /// Replication correlation-scale effect estimate.
    pub rr: Option<f64>,
    /// Replication sample size.
    pub nr: Option<u64>,
    /// Precomputed one-sided original p-value (bypass column).
    pub po: Option<f64>,
    /// Precomputed one-sided replication p-value (bypass column).
    pub pr: Option<f64>,
    /// Precomputed variance ratio (bypass column).
    pub c: Option<f64>,
}

impl StudyRecord {
    fn has_correlations(&self) -> bool {
        self.ro.is_some() && self.no.is_some() && self.rr.is_some() && self.nr.is_some()
    }

    fn has_bypass(&self) -> bool {
        self.po.is_some() && self.pr.is_some() && self.c.is_some()
    }

    fn validate(&self) -> std::result::Result<(), String> {
        if !self.has_correlations() && !self.has_bypass() {
            return Err(
                "row needs either complete correlation columns (ro,no,rr,nr) or complete \
                 bypass columns (po,pr,c)"
                    .to_string(),
            );
        }
        if self.has_correlations() {
            for (label, r) in [("ro", self.ro.unwrap()), ("rr", self.rr.unwrap())] {
                if !r.is_finite() || r.abs() >= 1.0 {
                    return Err(format!("{label} must satisfy |r| < 1, got {r}"));
                }
            }
            for (label, n) in [("no", self.no.unwrap()), ("nr", self.nr.unwrap())] {
                if n <= 3 {
                    return Err(format!(
                        "{label} must exceed 3 for the z-transformation, got {n}"
                    ));
                }
            }
        }
        if self.has_bypass() {
            for (label, p) in [("po", self.po.unwrap()), ("pr", self.pr.unwrap())] {
                if !p.is_finite() || p <= 0.0 || p >= 1.0 {
                    return Err(format!("{label} must lie strictly in (0, 1), got {p}"));
                }
            }
            let c = self.c.unwrap();
            if !c.is_finite() || c <= 0.0 {
                return Err(format!("c must be finite and positive, got {c}"));
            }
        }
        Ok(())
    }
}

const COLUMNS: [&str; 9] = ["project", "study", "ro", "no", "rr", "nr", "po", "pr", "c"];

/// Reads records from CSV. The header must contain `project` and `study`
/// plus the correlation columns, the bypass columns, or both. Every invalid
/// row is reported with its line number; any invalid row fails the whole
/// ingest.
pub fn ingest_csv<R: Read>(reader: R) -> Result<Vec<StudyRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, name) in headers.iter().enumerate() {
        match COLUMNS.iter().find(|c| **c == name) {
            Some(column) => {
                index.insert(column, i);
            }
            None => return Err(Error::usage(format!("unknown CSV column '{name}'"))),
        }
    }
    for required in ["project", "study"] {
        if !index.contains_key(required) {
            return Err(Error::usage(format!("missing CSV column '{required}'")));
        }
    }
    let has_corr_cols = ["ro", "no", "rr", "nr"].iter().all(|c| index.contains_key(*c));
    let has_bypass_cols = ["po", "pr", "c"].iter().all(|c| index.contains_key(*c));
    if !has_corr_cols && !has_bypass_cols {
        return Err(Error::usage(
            "header must include the correlation columns (ro,no,rr,nr) or the bypass \
             columns (po,pr,c)"
                .to_string(),
        ));
    }

    let mut records = Vec::new();
    let mut errors = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |name: &str| -> Option<&str> {
            index
                .get(name)
                .and_then(|&i| row.get(i))
                .filter(|s| !s.is_empty())
        };

        let parse_f64 = |name: &str, errs: &mut Vec<RowError>| -> Option<f64> {
            field(name).and_then(|s| match s.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    errs.push(RowError {
                        line,
                        message: format!("malformed number in column '{name}': '{s}'"),
                    });
                    None
                }
            })
        };
        let parse_u64 = |name: &str, errs: &mut Vec<RowError>| -> Option<u64> {
            field(name).and_then(|s| match s.parse::<u64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    errs.push(RowError {
                        line,
                        message: format!("malformed sample size in column '{name}': '{s}'"),
                    });
                    None
                }
            })
        };

        let before = errors.len();
        let record = StudyRecord {
            project: field("project").unwrap_or("").to_string(),
            study: field("study").unwrap_or("").to_string(),
            ro: parse_f64("ro", &mut errors),
            no: parse_u64("no", &mut errors),
            rr: parse_f64("rr", &mut errors),
            nr: parse_u64("nr", &mut errors),
            po: parse_f64("po", &mut errors),
            pr: parse_f64("pr", &mut errors),
            c: parse_f64("c", &mut errors),
        };
        if errors.len() > before {
            continue;
        }
        if record.project.is_empty() || record.study.is_empty() {
            errors.push(RowError {
                line,
                message: "project and study labels must be non-empty".to_string(),
            });
            continue;
        }
        if let Err(message) = record.validate() {
            errors.push(RowError { line, message });
            continue;
        }
        records.push(record);
    }
    if !errors.is_empty() {
        return Err(Error::Data(errors));
    }
    if records.is_empty() {
        return Err(Error::usage("no data rows in input".to_string()));
    }
    Ok(records)
}

/// Reads records from a CSV file on disk.
pub fn ingest_csv_path<P: AsRef<Path>>(path: P) -> Result<Vec<StudyRecord>> {
    let file = std::fs::File::open(path.as_ref())?;
    ingest_csv(std::io::BufReader::new(file))
}

/// Empirical p-values are clamped into this closed interval before study
/// pairs are built, keeping downstream quantiles finite.
const P_CLAMP: f64 = 1e-16;

/// Converts a record to a study pair. Bypass columns, when complete, are
/// used verbatim; otherwise p-values come from the z-transformation
/// z = atanh(r)·√(n−3), with both p-values oriented along the sign of the
/// original estimate, and c = (nr−3)/(no−3).
pub fn to_study_pair(record: &StudyRecord) -> Result<StudyPair> {
    record
        .validate()
        .map_err(|message| Error::Data(vec![RowError { line: 0, message }]))?;
    if record.has_bypass() {
        return StudyPair::new(
            record.po.unwrap(),
            record.pr.unwrap(),
            Some(record.c.unwrap()),
        );
    }
    let (ro, no) = (record.ro.unwrap(), record.no.unwrap());
    let (rr, nr) = (record.rr.unwrap(), record.nr.unwrap());
    let sign = if ro < 0.0 { -1.0 } else { 1.0 };
    let zo = ro.atanh().abs() * ((no - 3) as f64).sqrt();
    let zr = sign * rr.atanh() * ((nr - 3) as f64).sqrt();
    let po = norm_cdf_raw(-zo).clamp(P_CLAMP, 1.0 - P_CLAMP);
    let pr = norm_cdf_raw(-zr).clamp(P_CLAMP, 1.0 - P_CLAMP);
    let c = (nr - 3) as f64 / (no - 3) as f64;
    StudyPair::new(po, pr, Some(c))
}

/// One analyzed study pair: p-values, all five method results, and the
/// wrong-direction indicator (pr > 0.5).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub project: String,
    pub study: String,
    pub po: Probability,
    pub pr: Probability,
    pub c: f64,
    /// Results in `Method::ALL` order.
    pub results: [MethodResult; 5],
    pub wrong_direction: bool,
}

impl AnalysisRow {
    pub fn result_for(&self, method: Method) -> &MethodResult {
        &self.results[Method::ALL.iter().position(|m| *m == method).unwrap()]
    }
}

/// Assesses every record with every method at overall level alpha².
pub fn analyze_records(
    records: &[StudyRecord],
    alpha: Probability,
    weights: &Weights,
) -> Result<Vec<AnalysisRow>> {
    records
        .iter()
        .map(|record| {
            let pair = to_study_pair(record)?;
            let results = [
                assess(&pair, Method::TwoTrials, alpha, None)?,
                assess(&pair, Method::Edgington, alpha, None)?,
                assess(&pair, Method::EdgingtonWeighted, alpha, Some(weights))?,
                assess(&pair, Method::Fisher, alpha, None)?,
                assess(&pair, Method::MetaAnalysis, alpha, None)?,
            ];
            Ok(AnalysisRow {
                project: record.project.clone(),
                study: record.study.clone(),
                po: pair.po(),
                pr: pair.pr(),
                c: pair.variance_ratio().expect("pairs from records carry c"),
                results,
                wrong_direction: pair.pr().value() > 0.5,
            })
        })
        .collect()
}

/// Replication rates for original studies below and above a p-value
/// threshold.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ThresholdRateRow {
    pub threshold: f64,
    pub n_below: usize,
    /// Share of significant replications among originals with po <= t;
    /// absent when the group is empty.
    pub rate_below: Option<f64>,
    pub n_above: usize,
    pub rate_above: Option<f64>,
}

/// Splits pairs at each threshold on the original p-value and reports the
/// share of significant replications (pr <= repl_alpha) in both groups.
pub fn replication_rate_by_threshold(
    rows: &[AnalysisRow],
    thresholds: &[f64],
    repl_alpha: Probability,
) -> Result<Vec<ThresholdRateRow>> {
    if rows.is_empty() {
        return Err(Error::usage("no study pairs to analyze".to_string()));
    }
    thresholds
        .iter()
        .map(|&t| {
            if !t.is_finite() || t <= 0.0 || t >= 1.0 {
                return Err(Error::domain(format!(
                    "threshold must lie strictly in (0, 1), got {t}"
                )));
            }
            let mut n_below = 0_usize;
            let mut sig_below = 0_usize;
            let mut n_above = 0_usize;
            let mut sig_above = 0_usize;
            for row in rows {
                let significant = row.pr.value() <= repl_alpha.value();
                if row.po.value() <= t {
                    n_below += 1;
                    sig_below += significant as usize;
                } else {
                    n_above += 1;
                    sig_above += significant as usize;
                }
            }
            let rate = |sig: usize, n: usize| (n > 0).then(|| sig as f64 / n as f64);
            Ok(ThresholdRateRow {
                threshold: t,
                n_below,
                rate_below: rate(sig_below, n_below),
                n_above,
                rate_above: rate(sig_above, n_above),
            })
        })
        .collect()
}

/// Success share of one project under one method at one overall level.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SuccessRateRow {
    pub project: String,
    pub method: Method,
    pub alpha_sq: f64,
    pub n: usize,
    pub successes: usize,
    pub rate: f64,
}

/// Success rates per (project, method, overall level α²). Projects keep
/// their input order.
pub fn success_rates(
    rows: &[AnalysisRow],
    methods: &[Method],
    alpha_sq_grid: &[f64],
) -> Result<Vec<SuccessRateRow>> {
    if rows.is_empty() {
        return Err(Error::usage("no study pairs to analyze".to_string()));
    }
    let mut projects: Vec<&str> = Vec::new();
    for row in rows {
        if !projects.contains(&row.project.as_str()) {
            projects.push(&row.project);
        }
    }
    let mut out = Vec::new();
    for project in projects {
        let in_project: Vec<&AnalysisRow> =
            rows.iter().filter(|r| r.project == project).collect();
        for &method in methods {
            for &alpha_sq in alpha_sq_grid {
                if !(0.0..=1.0).contains(&alpha_sq) {
                    return Err(Error::domain(format!(
                        "alpha_sq must lie in [0, 1], got {alpha_sq}"
                    )));
                }
                let successes = in_project
                    .iter()
                    .filter(|r| r.result_for(method).p_combined.value() <= alpha_sq)
                    .count();
                out.push(SuccessRateRow {
                    project: project.to_string(),
                    method,
                    alpha_sq,
                    n: in_project.len(),
                    successes,
                    rate: successes as f64 / in_project.len() as f64,
                });
            }
        }
    }
    Ok(out)
}

/// Rows with a non-significant replication (pr > repl_alpha), for the
/// combined-p-value table.
pub fn combined_pvalue_table(rows: &[AnalysisRow], repl_alpha: Probability) -> Vec<AnalysisRow> {
    rows.iter()
        .filter(|r| r.pr.value() > repl_alpha.value())
        .cloned()
        .collect()
}

/// Flat serialization of an [`AnalysisRow`], with one column per combined
/// p-value and success flag. Field names match the CSV header exactly.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CombinedPvalueRow {
    pub project: String,
    pub study: String,
    pub po: f64,
    pub pr: f64,
    pub c: f64,
    pub p_two_trials: f64,
    pub p_edgington: f64,
    pub p_edgington_weighted: f64,
    pub p_fisher: f64,
    pub p_meta: f64,
    pub success_two_trials: bool,
    pub success_edgington: bool,
    pub success_edgington_weighted: bool,
    pub success_fisher: bool,
    pub success_meta: bool,
    pub wrong_direction: bool,
}

impl From<&AnalysisRow> for CombinedPvalueRow {
    fn from(row: &AnalysisRow) -> Self {
        let p = |m: Method| row.result_for(m).p_combined.value();
        let s = |m: Method| row.result_for(m).success;
        CombinedPvalueRow {
            project: row.project.clone(),
            study: row.study.clone(),
            po: row.po.value(),
            pr: row.pr.value(),
            c: row.c,
            p_two_trials: p(Method::TwoTrials),
            p_edgington: p(Method::Edgington),
            p_edgington_weighted: p(Method::EdgingtonWeighted),
            p_fisher: p(Method::Fisher),
            p_meta: p(Method::MetaAnalysis),
            success_two_trials: s(Method::TwoTrials),
            success_edgington: s(Method::Edgington),
            success_edgington_weighted: s(Method::EdgingtonWeighted),
            success_fisher: s(Method::Fisher),
            success_meta: s(Method::MetaAnalysis),
            wrong_direction: row.wrong_direction,
        }
    }
}

/// Writes threshold rates as CSV with header
/// `threshold,n_below,rate_below,n_above,rate_above`; absent rates are
/// empty fields.
pub fn write_threshold_rates_csv<W: std::io::Write>(
    out: &mut W,
    rows: &[ThresholdRateRow],
) -> Result<()> {
    writeln!(out, "threshold,n_below,rate_below,n_above,rate_above")?;
    let fmt = |r: Option<f64>| r.map_or(String::new(), |v| v.to_string());
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.threshold,
            r.n_below,
            fmt(r.rate_below),
            r.n_above,
            fmt(r.rate_above)
        )?;
    }
    Ok(())
}

/// Writes success rates as CSV with header
/// `project,method,alpha_sq,n,successes,rate`.
pub fn write_success_rates_csv<W: std::io::Write>(
    out: &mut W,
    rows: &[SuccessRateRow],
) -> Result<()> {
    writeln!(out, "project,method,alpha_sq,n,successes,rate")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.project, r.method, r.alpha_sq, r.n, r.successes, r.rate
        )?;
    }
    Ok(())
}

/// Writes the combined-p-value table as CSV; columns match
/// [`CombinedPvalueRow`] field names.
pub fn write_combined_pvalues_csv<W: std::io::Write>(
    out: &mut W,
    rows: &[CombinedPvalueRow],
) -> Result<()> {
    writeln!(
        out,
        "project,study,po,pr,c,p_two_trials,p_edgington,p_edgington_weighted,p_fisher,\
         p_meta,success_two_trials,success_edgington,success_edgington_weighted,\
         success_fisher,success_meta,wrong_direction"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.project,
            r.study,
            r.po,
            r.pr,
            r.c,
            r.p_two_trials,
            r.p_edgington,
            r.p_edgington_weighted,
            r.p_fisher,
            r.p_meta,
            r.success_two_trials,
            r.success_edgington,
            r.success_edgington_weighted,
            r.success_fisher,
            r.success_meta,
            r.wrong_direction
        )?;
    }
    Ok(())
}
