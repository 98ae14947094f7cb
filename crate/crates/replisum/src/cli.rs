//! Command-line surface: every capability behind one subcommand, with
//! human, JSON, or CSV output.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 data error,
//! 3 numerical failure. Results go to standard output, diagnostics to
//! standard error. Probabilities are printed with six significant digits
//! in JSON; human output mirrors one-decimal percentage rounding.

use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::combine::{self, Method, MethodResult, StudyPair, Weights};
use crate::conditional;
use crate::design::{self, DesignInput, PowerType};
use crate::error::{Error, Result};
use crate::power;
use crate::projects::{self, CombinedPvalueRow};
use crate::sequential;
use crate::sim::{self, SimConfig, Truth};
use crate::specfun::Probability;

const SEED_ENV: &str = "REPLISUM_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MethodArg {
    TwoTrials,
    Edgington,
    EdgingtonWeighted,
    Fisher,
    Meta,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::TwoTrials => Method::TwoTrials,
            MethodArg::Edgington => Method::Edgington,
            MethodArg::EdgingtonWeighted => Method::EdgingtonWeighted,
            MethodArg::Fisher => Method::Fisher,
            MethodArg::Meta => Method::MetaAnalysis,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "replisum",
    version,
    about = "Replication success from combined original and replication p-values"
)]
struct Cli {
    /// Output format for results on stdout.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    output: OutputFormat,
    /// Optional key=value configuration file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Combine a pair of one-sided p-values and judge success at alpha^2.
    Combine(CombineArgs),
    /// Replication significance level implied by the original p-value.
    Level(LevelArgs),
    /// Project power for one method, at a point or over a grid of c.
    Power(PowerArgs),
    /// Replication sample size under conditional or predictive power.
    Samplesize(SamplesizeArgs),
    /// Multi-replication budgets and alpha-spending plans.
    #[command(subcommand)]
    Sequential(SequentialCommand),
    /// Batch analysis of a replication-project dataset.
    Analyze(AnalyzeArgs),
    /// Monte Carlo estimation of error rates and power.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct CombineArgs {
    /// One-sided original p-value.
    #[arg(long)]
    po: Option<f64>,
    /// One-sided replication p-value.
    #[arg(long)]
    pr: Option<f64>,
    /// Variance ratio sigma_o^2/sigma_r^2 (needed by meta).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Original-study weight (edgington-weighted).
    #[arg(long)]
    wo: Option<f64>,
    /// Replication-study weight (edgington-weighted).
    #[arg(long)]
    wr: Option<f64>,
    /// One-sided significance level; overall level is alpha^2.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct LevelArgs {
    #[arg(long)]
    po: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Variance ratio (needed by meta).
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    wo: Option<f64>,
    #[arg(long)]
    wr: Option<f64>,
}

#[derive(Debug, Args)]
struct PowerArgs {
    /// Power of the original study at level alpha.
    #[arg(long)]
    original_power: Option<f64>,
    /// Relative sample size n_r/n_o.
    #[arg(long)]
    c: Option<f64>,
    /// Effect ratio theta_r/theta_o.
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    wo: Option<f64>,
    #[arg(long)]
    wr: Option<f64>,
    /// Evaluate a curve over c: minimum, maximum, number of steps.
    #[arg(long, num_args = 3, value_names = ["CMIN", "CMAX", "STEPS"])]
    curve: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct SamplesizeArgs {
    #[arg(long)]
    po: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Target power of the replication study.
    #[arg(long)]
    power: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Size under predictive instead of conditional power.
    #[arg(long)]
    predictive: bool,
    /// Original effect estimate (for an absolute per-group size).
    #[arg(long)]
    theta: Option<f64>,
    /// Common standard deviation of the measurements.
    #[arg(long)]
    tau: Option<f64>,
    /// Original per-group sample size (absolute size from relative c).
    #[arg(long)]
    no: Option<u64>,
    /// Fractional reduction of the original effect estimate, in [0, 1).
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long)]
    wo: Option<f64>,
    #[arg(long)]
    wr: Option<f64>,
    /// Emit the sample-size ratio curve over po: minimum, maximum, steps
    /// (log-spaced).
    #[arg(long, num_args = 3, value_names = ["POMIN", "POMAX", "STEPS"])]
    ratio_curve: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
enum SequentialCommand {
    /// Two-stage alpha-spending budgets b2 and b3.
    Plan(PlanArgs),
    /// Decision after the first replication study.
    Decide(DecideArgs),
    /// Joint assessment of one original and two replication p-values.
    Assess(AssessThreeArgs),
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Proportion of alpha^2 spent at the first replication.
    #[arg(long)]
    gamma: Option<f64>,
    /// Emit the whole curve over gamma with this many steps.
    #[arg(long)]
    curve: Option<usize>,
}

#[derive(Debug, Args)]
struct DecideArgs {
    /// Sum of the original and first-replication p-values.
    #[arg(long)]
    e2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Debug, Args)]
struct AssessThreeArgs {
    #[arg(long)]
    po: Option<f64>,
    #[arg(long)]
    pr1: Option<f64>,
    #[arg(long)]
    pr2: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Input CSV (project,study,ro,no,rr,nr or project,study,po,pr,c).
    #[arg(long)]
    input: Option<PathBuf>,
    /// Restrict to these project labels.
    #[arg(long, num_args = 1..)]
    projects: Option<Vec<String>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    wo: Option<f64>,
    #[arg(long)]
    wr: Option<f64>,
    /// Thresholds for the replication-rate split (comma separated).
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// Directory for the CSV/JSON table files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Simulation description file (key=value lines).
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nsim: Option<u64>,
}

/// key=value file with '#' comments, shared by --config and simulate specs.
fn parse_kv_file(path: &Path) -> Result<HashMap<String, String>> {
    let text = std::fs::read_to_string(path)?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::usage(format!(
                "{}:{}: expected key=value, got '{raw}'",
                path.display(),
                lineno + 1
            )));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

struct Config(HashMap<String, String>);

impl Config {
    fn load(path: Option<&Path>) -> Result<Self> {
        Ok(Config(match path {
            Some(p) => parse_kv_file(p)?,
            None => HashMap::new(),
        }))
    }

    /// Flag value if given, else config-file value, else the default.
    fn resolve<T: std::str::FromStr>(
        &self,
        flag: Option<T>,
        key: &str,
        default: Option<T>,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.0.get(key) {
            return raw
                .parse::<T>()
                .map_err(|_| Error::usage(format!("bad value for '{key}': '{raw}'")));
        }
        default.ok_or_else(|| Error::usage(format!("missing required option --{key}")))
    }

    fn resolve_method(&self, flag: Option<MethodArg>) -> Result<Method> {
        if let Some(m) = flag {
            return Ok(m.into());
        }
        if let Some(raw) = self.0.get("method") {
            return raw.parse::<Method>();
        }
        Err(Error::usage("missing required option --method".to_string()))
    }

    fn resolve_optional<T: std::str::FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.0.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|_| Error::usage(format!("bad value for '{key}': '{raw}'"))),
            None => Ok(None),
        }
    }
}

fn prob(v: f64, label: &str) -> Result<Probability> {
    Probability::new(v).map_err(|_| {
        Error::usage(format!("{label} must be a probability in [0, 1], got {v}"))
    })
}

/// Rounds to six significant digits for JSON output.
fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor();
    let scale = 10f64.powf(5.0 - magnitude);
    (x * scale).round() / scale
}

fn pct1(x: f64) -> String {
    format!("{:.1}%", 100.0 * x)
}

fn method_result_json(r: &MethodResult) -> Value {
    json!({
        "method": r.method.name(),
        "p": sig6(r.p_combined.value()),
        "overall_level": sig6(r.overall_level.value()),
        "success": r.success,
    })
}

fn env_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.parse::<u64>().ok())
        .unwrap_or(0)
}

/// Parses argv and executes; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("replisum: {e}");
            if let Error::Data(errors) = &e {
                for row in errors {
                    eprintln!("replisum:   {row}");
                }
            }
            e.exit_code()
        }
    }
}

fn execute<W: Write>(cli: &Cli, out: &mut W) -> Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match &cli.command {
        Command::Combine(args) => cmd_combine(args, &config, cli.output, out),
        Command::Level(args) => cmd_level(args, &config, cli.output, out),
        Command::Power(args) => cmd_power(args, &config, cli.output, out),
        Command::Samplesize(args) => cmd_samplesize(args, &config, cli.output, out),
        Command::Sequential(sub) => match sub {
            SequentialCommand::Plan(args) => cmd_plan(args, &config, cli.output, out),
            SequentialCommand::Decide(args) => cmd_decide(args, &config, cli.output, out),
            SequentialCommand::Assess(args) => cmd_assess_three(args, &config, cli.output, out),
        },
        Command::Analyze(args) => cmd_analyze(args, &config, cli.output, out),
        Command::Simulate(args) => cmd_simulate(args, &config, cli.output, out),
    }
}

fn resolve_weights(
    config: &Config,
    wo: Option<f64>,
    wr: Option<f64>,
) -> Result<Weights> {
    let wo = config.resolve(wo, "wo", Some(1.0))?;
    let wr = config.resolve(wr, "wr", Some(2.0))?;
    Weights::new(wo, wr)
}

fn cmd_combine<W: Write>(
    args: &CombineArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let po = config.resolve(args.po, "po", None)?;
    let pr = config.resolve(args.pr, "pr", None)?;
    let c = config.resolve_optional(args.c, "c")?;
    let method = config.resolve_method(args.method)?;
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    let weights = resolve_weights(config, args.wo, args.wr)?;
    let pair = StudyPair::new(po, pr, c)?;
    let result = combine::assess(&pair, method, alpha, Some(&weights))?;
    match output {
        OutputFormat::Json => {
            let mut value = method_result_json(&result);
            value["po"] = json!(sig6(po));
            value["pr"] = json!(sig6(pr));
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "method,po,pr,p_combined,overall_level,success")?;
            writeln!(
                out,
                "{},{},{},{},{},{}",
                result.method,
                po,
                pr,
                result.p_combined.value(),
                result.overall_level.value(),
                result.success
            )?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "{}: combined p = {:.4e} at overall level {:.4e}: {}",
                result.method,
                result.p_combined.value(),
                result.overall_level.value(),
                if result.success { "replication success" } else { "no success" }
            )?;
        }
    }
    Ok(())
}

fn cmd_level<W: Write>(
    args: &LevelArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let po = prob(config.resolve(args.po, "po", None)?, "po")?;
    let method = config.resolve_method(args.method)?;
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    let level = match method {
        Method::TwoTrials => conditional::level_two_trials(po, alpha),
        Method::Edgington => conditional::level_edgington(po, alpha)?,
        Method::EdgingtonWeighted => {
            let weights = resolve_weights(config, args.wo, args.wr)?;
            conditional::level_edgington_weighted(po, alpha, &weights)?
        }
        Method::Fisher => conditional::level_fisher(po, alpha)?,
        Method::MetaAnalysis => {
            let c = config
                .resolve_optional(args.c, "c")?
                .ok_or_else(|| Error::usage("meta level requires --c".to_string()))?;
            conditional::level_meta(po, alpha, c)?
        }
    };
    match output {
        OutputFormat::Json => {
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "method": method.name(),
                    "po": sig6(po.value()),
                    "alpha": sig6(alpha.value()),
                    "level": sig6(level.value()),
                }))?
            )?;
        }
        OutputFormat::Csv => {
            writeln!(out, "method,po,alpha,level")?;
            writeln!(out, "{},{},{},{}", method, po.value(), alpha.value(), level.value())?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "{}: replication study significance level {} (po = {})",
                method,
                pct1(level.value()),
                po.value()
            )?;
        }
    }
    Ok(())
}

fn cmd_power<W: Write>(
    args: &PowerArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let original_power = config.resolve(args.original_power, "original-power", None)?;
    let d = config.resolve(args.d, "d", Some(1.0))?;
    let alpha = config.resolve(args.alpha, "alpha", Some(0.025))?;
    let method = config.resolve_method(args.method)?;
    let weights = resolve_weights(config, args.wo, args.wr)?;
    let c_grid: Vec<f64> = match &args.curve {
        Some(spec) => {
            let (cmin, cmax, steps) = (spec[0], spec[1], spec[2] as usize);
            if steps < 2 || cmin <= 0.0 || cmax <= cmin {
                return Err(Error::usage(
                    "--curve expects 0 < CMIN < CMAX and STEPS >= 2".to_string(),
                ));
            }
            (0..steps)
                .map(|i| cmin + (cmax - cmin) * i as f64 / (steps - 1) as f64)
                .collect()
        }
        None => vec![config.resolve(args.c, "c", None)?],
    };
    let rows = power::power_curve(original_power, alpha, d, Some(weights), &[method], &c_grid)?;
    match output {
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            power::write_power_curve_csv(&mut buf, &rows)?;
            out.write_all(&buf)?;
        }
        OutputFormat::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "method": r.method.name(),
                        "c": r.c,
                        "d": r.d,
                        "original_power": r.original_power,
                        "alpha": r.alpha,
                        "project_power": sig6(r.project_power),
                    })
                })
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(items))?)?;
        }
        OutputFormat::Human => {
            for r in &rows {
                writeln!(
                    out,
                    "{} at c = {:.3}, d = {}: project power {}",
                    r.method,
                    r.c,
                    r.d,
                    pct1(r.project_power)
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_samplesize<W: Write>(
    args: &SamplesizeArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let method = config.resolve_method(args.method)?;
    let alpha = config.resolve(args.alpha, "alpha", Some(0.025))?;
    let target = config.resolve(args.power, "power", None)?;
    let power_type = if args.predictive {
        PowerType::Predictive
    } else {
        PowerType::Conditional
    };
    let weights = resolve_weights(config, args.wo, args.wr)?;

    if let Some(spec) = &args.ratio_curve {
        let (po_min, po_max, steps) = (spec[0], spec[1], spec[2] as usize);
        if steps < 2 || po_min <= 0.0 || po_max <= po_min || po_max >= 1.0 {
            return Err(Error::usage(
                "--ratio-curve expects 0 < POMIN < POMAX < 1 and STEPS >= 2".to_string(),
            ));
        }
        let grid: Vec<f64> = (0..steps)
            .map(|i| {
                (po_min.ln() + (po_max.ln() - po_min.ln()) * i as f64 / (steps - 1) as f64).exp()
            })
            .collect();
        let rows = design::ratio_curve(power_type, method, target, alpha, &grid, Some(&weights))?;
        match output {
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                design::write_ratio_curve_csv(&mut buf, &rows)?;
                out.write_all(&buf)?;
            }
            OutputFormat::Json => {
                let items: Vec<Value> = rows
                    .iter()
                    .map(|r| {
                        json!({
                            "power_type": r.power_type.name(),
                            "method": r.method.name(),
                            "target_power": r.target_power,
                            "po": r.po,
                            "ratio": sig6(r.ratio),
                        })
                    })
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(items))?)?;
            }
            OutputFormat::Human => {
                for r in &rows {
                    writeln!(
                        out,
                        "{} {} po = {:.6}: sample size ratio {:.4}",
                        r.power_type, r.method, r.po, r.ratio
                    )?;
                }
            }
        }
        return Ok(());
    }

    let po = config.resolve(args.po, "po", None)?;
    let mut input = DesignInput::new(method, po, alpha, target)?
        .with_weights(weights)
        .with_power_type(power_type);
    if let Some(s) = config.resolve_optional(args.shrinkage, "shrinkage")? {
        input = input.with_shrinkage(s)?;
    }
    let theta = config.resolve_optional(args.theta, "theta")?;
    let tau = config.resolve_optional(args.tau, "tau")?;
    if let (Some(theta), Some(tau)) = (theta, tau) {
        input = input.with_effect(theta, tau)?;
    }
    if let Some(no) = config.resolve_optional(args.no, "no")? {
        input = input.with_original_n(no)?;
    }

    let level = design::adjusted_level(method, input.po, input.alpha, input.weights.as_ref())?;
    let relative = design::relative_sample_size(&input)?;
    let ratio = design::sample_size_ratio(
        power_type,
        method,
        input.po,
        input.alpha,
        input.target_power,
        input.weights.as_ref(),
    )?;
    let n_absolute = if input.theta_hat_o.is_some() {
        Some(design::absolute_sample_size(&input)?)
    } else {
        input.n_original.map(|no| design::absolute_from_relative(relative, no))
    };

    match output {
        OutputFormat::Json => {
            let mut value = json!({
                "method": method.name(),
                "power_type": power_type.name(),
                "po": sig6(po),
                "alpha": sig6(alpha),
                "target_power": target,
                "adjusted_level": sig6(level.value()),
                "relative_sample_size": sig6(relative),
                "ratio_vs_two_trials": sig6(ratio),
            });
            if let Some(n) = n_absolute {
                value["n_replication"] = json!(n);
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        OutputFormat::Csv => {
            writeln!(
                out,
                "power_type,method,target_power,po,adjusted_level,relative_sample_size,\
                 ratio_vs_two_trials,n_replication"
            )?;
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                power_type,
                method,
                target,
                po,
                level.value(),
                relative,
                ratio,
                n_absolute.map_or(String::new(), |n| n.to_string())
            )?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "{} ({} power {}): adjusted level {:.4}, relative sample size c = {:.4} \
                 ({} of the two-trials size)",
                method,
                power_type,
                pct1(target),
                level.value(),
                relative,
                pct1(ratio)
            )?;
            if let Some(n) = n_absolute {
                writeln!(out, "replication size per group: {n}")?;
            }
        }
    }
    Ok(())
}

fn cmd_plan<W: Write>(
    args: &PlanArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    if let Some(steps) = args.curve {
        if steps < 2 {
            return Err(Error::usage("--curve needs at least 2 steps".to_string()));
        }
        let gammas: Vec<f64> = (0..steps).map(|i| i as f64 / (steps - 1) as f64).collect();
        let rows = sequential::spending_curve(alpha, &gammas)?;
        match output {
            OutputFormat::Csv => {
                let mut buf = Vec::new();
                sequential::write_spending_curve_csv(&mut buf, &rows)?;
                out.write_all(&buf)?;
            }
            OutputFormat::Json => {
                let items: Vec<Value> = rows
                    .iter()
                    .map(|r| json!({"gamma": r.gamma, "b2": sig6(r.b2), "b3": sig6(r.b3)}))
                    .collect();
                writeln!(out, "{}", serde_json::to_string_pretty(&Value::Array(items))?)?;
            }
            OutputFormat::Human => {
                for r in &rows {
                    writeln!(out, "gamma = {:.3}: b2 = {:.4}, b3 = {:.4}", r.gamma, r.b2, r.b3)?;
                }
            }
        }
        return Ok(());
    }
    let gamma = config.resolve(args.gamma, "gamma", None)?;
    let plan = sequential::spending_plan(alpha, gamma)?;
    match output {
        OutputFormat::Json => {
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "alpha": sig6(plan.alpha()),
                    "gamma": plan.gamma(),
                    "b2": sig6(plan.b2()),
                    "b3": sig6(plan.b3()),
                }))?
            )?;
        }
        OutputFormat::Csv => {
            writeln!(out, "gamma,b2,b3")?;
            writeln!(out, "{},{},{}", plan.gamma(), plan.b2(), plan.b3())?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "spend {} of alpha^2 first: stop for success at E2 <= {:.4}, futility at \
                 E2 >= {:.4}, otherwise continue",
                pct1(plan.gamma()),
                plan.b2(),
                plan.b3()
            )?;
        }
    }
    Ok(())
}

fn cmd_decide<W: Write>(
    args: &DecideArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    let gamma = config.resolve(args.gamma, "gamma", None)?;
    let e2 = config.resolve(args.e2, "e2", None)?;
    let plan = sequential::spending_plan(alpha, gamma)?;
    let decision = sequential::stage_decision(e2, &plan)?;
    match output {
        OutputFormat::Json => {
            let mut value = serde_json::to_value(decision)?;
            if let Some(obj) = value.as_object_mut() {
                if let Some(nl) = obj.get_mut("next_level") {
                    *nl = json!(sig6(nl.as_f64().unwrap_or(0.0)));
                }
                obj.insert("e2".to_string(), json!(e2));
                obj.insert("b2".to_string(), json!(sig6(plan.b2())));
                obj.insert("b3".to_string(), json!(sig6(plan.b3())));
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "e2,b2,b3,verdict,next_level")?;
            let (verdict, next) = match decision {
                sequential::StageDecision::StopSuccess => ("stop_success", String::new()),
                sequential::StageDecision::StopFutility => ("stop_futility", String::new()),
                sequential::StageDecision::Continue { next_level } => {
                    ("continue", next_level.value().to_string())
                }
            };
            writeln!(out, "{},{},{},{},{}", e2, plan.b2(), plan.b3(), verdict, next)?;
        }
        OutputFormat::Human => match decision {
            sequential::StageDecision::StopSuccess => {
                writeln!(out, "E2 = {e2} <= b2 = {:.4}: stop, replication success", plan.b2())?;
            }
            sequential::StageDecision::StopFutility => {
                writeln!(out, "E2 = {e2} >= b3 = {:.4}: stop for futility", plan.b3())?;
            }
            sequential::StageDecision::Continue { next_level } => {
                writeln!(
                    out,
                    "continue: run a second replication at significance level {:.4}",
                    next_level.value()
                )?;
            }
        },
    }
    Ok(())
}

fn cmd_assess_three<W: Write>(
    args: &AssessThreeArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    let po = prob(config.resolve(args.po, "po", None)?, "po")?;
    let pr1 = prob(config.resolve(args.pr1, "pr1", None)?, "pr1")?;
    let pr2 = prob(config.resolve(args.pr2, "pr2", None)?, "pr2")?;
    let result = sequential::assess_three(po, pr1, pr2, alpha)?;
    let budget = sequential::budget_k(alpha, 3)?;
    match output {
        OutputFormat::Json => {
            let mut value = method_result_json(&result);
            value["e3"] = json!(sig6(po.value() + pr1.value() + pr2.value()));
            value["budget"] = json!(sig6(budget));
            writeln!(out, "{}", serde_json::to_string_pretty(&value)?)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "e3,budget,p_combined,overall_level,success")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                po.value() + pr1.value() + pr2.value(),
                budget,
                result.p_combined.value(),
                result.overall_level.value(),
                result.success
            )?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "E3 = {:.4} against budget {:.4}: {}",
                po.value() + pr1.value() + pr2.value(),
                budget,
                if result.success { "replication success" } else { "no success" }
            )?;
        }
    }
    Ok(())
}

const DEFAULT_THRESHOLDS: [f64; 6] = [0.0001, 0.001, 0.005, 0.01, 0.025, 0.05];

fn cmd_analyze<W: Write>(
    args: &AnalyzeArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let input = match &args.input {
        Some(p) => p.clone(),
        None => PathBuf::from(config.resolve(None::<String>, "input", None)?),
    };
    let alpha = prob(config.resolve(args.alpha, "alpha", Some(0.025))?, "alpha")?;
    let weights = resolve_weights(config, args.wo, args.wr)?;
    let mut records = projects::ingest_csv_path(&input)?;
    if let Some(wanted) = &args.projects {
        records.retain(|r| wanted.contains(&r.project));
        if records.is_empty() {
            return Err(Error::usage(format!(
                "no records left after filtering to projects {wanted:?}"
            )));
        }
    }
    let rows = projects::analyze_records(&records, alpha, &weights)?;
    let thresholds = args
        .thresholds
        .clone()
        .unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
    let rates = projects::replication_rate_by_threshold(&rows, &thresholds, alpha)?;
    let alpha_sq = alpha.value() * alpha.value();
    let success = projects::success_rates(&rows, &Method::ALL, &[alpha_sq])?;
    let combined: Vec<CombinedPvalueRow> = projects::combined_pvalue_table(&rows, alpha)
        .iter()
        .map(CombinedPvalueRow::from)
        .collect();

    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        let mut buf = Vec::new();
        projects::write_threshold_rates_csv(&mut buf, &rates)?;
        std::fs::write(dir.join("rates_by_threshold.csv"), &buf)?;
        std::fs::write(
            dir.join("rates_by_threshold.json"),
            serde_json::to_string_pretty(&rates)?,
        )?;
        let mut buf = Vec::new();
        projects::write_success_rates_csv(&mut buf, &success)?;
        std::fs::write(dir.join("success_rates.csv"), &buf)?;
        std::fs::write(
            dir.join("success_rates.json"),
            serde_json::to_string_pretty(&success)?,
        )?;
        let mut buf = Vec::new();
        projects::write_combined_pvalues_csv(&mut buf, &combined)?;
        std::fs::write(dir.join("combined_pvalues.csv"), &buf)?;
        std::fs::write(
            dir.join("combined_pvalues.json"),
            serde_json::to_string_pretty(&combined)?,
        )?;
    }

    match output {
        OutputFormat::Json => {
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "n_pairs": rows.len(),
                    "alpha": sig6(alpha.value()),
                    "overall_level": sig6(alpha_sq),
                    "success_rates": success,
                    "rates_by_threshold": rates,
                    "n_nonsignificant_replications": combined.len(),
                }))?
            )?;
        }
        OutputFormat::Csv => {
            let mut buf = Vec::new();
            projects::write_success_rates_csv(&mut buf, &success)?;
            out.write_all(&buf)?;
        }
        OutputFormat::Human => {
            writeln!(out, "{} study pairs at overall level {:.6}", rows.len(), alpha_sq)?;
            for r in &success {
                writeln!(
                    out,
                    "  {} / {}: {} of {} succeed ({})",
                    r.project,
                    r.method,
                    r.successes,
                    r.n,
                    pct1(r.rate)
                )?;
            }
        }
    }
    Ok(())
}

fn cmd_simulate<W: Write>(
    args: &SimulateArgs,
    config: &Config,
    output: OutputFormat,
    out: &mut W,
) -> Result<()> {
    let spec_path = match &args.spec {
        Some(p) => p.clone(),
        None => PathBuf::from(config.resolve(None::<String>, "spec", None)?),
    };
    let spec = parse_kv_file(&spec_path)?;
    let get = |key: &str| spec.get(key).map(|s| s.as_str());
    let parse_f64 = |key: &str| -> Result<Option<f64>> {
        get(key)
            .map(|raw| {
                raw.parse::<f64>()
                    .map_err(|_| Error::usage(format!("bad value for '{key}': '{raw}'")))
            })
            .transpose()
    };

    let n_sim = match args.nsim {
        Some(n) => n,
        None => get("nsim")
            .map(|raw| {
                raw.parse::<u64>()
                    .map_err(|_| Error::usage(format!("bad value for 'nsim': '{raw}'")))
            })
            .transpose()?
            .unwrap_or(1_000_000),
    };
    let seed = match args.seed {
        Some(s) => s,
        None => get("seed")
            .map(|raw| {
                raw.parse::<u64>()
                    .map_err(|_| Error::usage(format!("bad value for 'seed': '{raw}'")))
            })
            .transpose()?
            .unwrap_or_else(env_seed),
    };
    let alpha = prob(parse_f64("alpha")?.unwrap_or(0.025), "alpha")?;
    let kind = get("kind").unwrap_or("null");

    let result_json = match kind {
        "sequential" => {
            let gamma = parse_f64("gamma")?
                .ok_or_else(|| Error::usage("sequential simulation requires gamma".to_string()))?;
            let plan = sequential::spending_plan(alpha, gamma)?;
            let res = sim::simulate_sequential(&plan, n_sim, seed)?;
            json!({
                "kind": kind,
                "gamma": gamma,
                "b2": sig6(plan.b2()),
                "b3": sig6(plan.b3()),
                "rate": res.rate,
                "se": res.se,
                "n_sim": res.n_sim,
                "seed": seed,
            })
        }
        "null" | "conditional" | "alternative" => {
            let method = get("method")
                .ok_or_else(|| Error::usage("simulation spec requires method".to_string()))?
                .parse::<Method>()?;
            let weights = match (parse_f64("wo")?, parse_f64("wr")?) {
                (None, None) => Weights::default(),
                (wo, wr) => Weights::new(wo.unwrap_or(1.0), wr.unwrap_or(2.0))?,
            };
            let c = parse_f64("c")?;
            let truth = match kind {
                "null" => Truth::Null,
                "conditional" => Truth::Conditional {
                    po: parse_f64("po")?.ok_or_else(|| {
                        Error::usage("conditional simulation requires po".to_string())
                    })?,
                },
                _ => {
                    let mu = match parse_f64("mu")? {
                        Some(mu) => mu,
                        None => {
                            let op = parse_f64("original_power")?.ok_or_else(|| {
                                Error::usage(
                                    "alternative simulation requires mu or original_power"
                                        .to_string(),
                                )
                            })?;
                            power::mu_from_original_power(prob(op, "original_power")?, alpha)?
                        }
                    };
                    Truth::Alternative {
                        mu,
                        d: parse_f64("d")?.unwrap_or(1.0),
                        truncate_original: get("truncate_original") == Some("true"),
                    }
                }
            };
            let cfg = SimConfig {
                method,
                alpha,
                weights: Some(weights),
                c,
                truth,
                n_sim,
                seed,
            };
            let res = sim::simulate(&cfg)?;
            json!({
                "kind": kind,
                "method": method.name(),
                "alpha": sig6(alpha.value()),
                "rate": res.rate,
                "se": res.se,
                "n_sim": res.n_sim,
                "seed": seed,
            })
        }
        other => {
            return Err(Error::usage(format!(
                "unknown simulation kind '{other}' (expected null, conditional, alternative \
                 or sequential)"
            )))
        }
    };

    match output {
        OutputFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&result_json)?)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "kind,rate,se,n_sim,seed")?;
            writeln!(
                out,
                "{},{},{},{},{}",
                kind,
                result_json["rate"].as_f64().unwrap_or(f64::NAN),
                result_json["se"].as_f64().unwrap_or(f64::NAN),
                n_sim,
                seed
            )?;
        }
        OutputFormat::Human => {
            writeln!(
                out,
                "{kind} simulation: rate {:.6} (se {:.2e}, n = {n_sim}, seed {seed})",
                result_json["rate"].as_f64().unwrap_or(f64::NAN),
                result_json["se"].as_f64().unwrap_or(f64::NAN),
            )?;
        }
    }
    Ok(())
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Numerical(format!("JSON serialization failed: {e}"))
    }
}
