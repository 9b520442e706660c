use std::time::Instant;

use clap::{Args, ValueEnum};
use serde_json::{json, Map, Value};

use ar1_persistence::mc::{self, fit_exponent, simulate, usable_fit_window, SimConfig};
use ar1_persistence::series::{expand, kato_radius_bound};
use ar1_persistence::spectral::{
    self, build_rule, discretize, perron_eigenpair, persistence_curve,
};
use ar1_persistence::validation::{run_suite, Suite};
use ar1_persistence::{exact::rat, Error};

use crate::report::{num, Format, RunReport};
use crate::{CliError, Outcome};

/// Defaults for every tunable, in one place.
pub mod defaults {
    pub const COEFF_ORDER: usize = 8;
    pub const SERIES_ORDER: usize = 40;
    /// Total quadrature nodes (16 per panel).
    pub const NODES: usize = 128;
    pub const PANELS: usize = 8;
    pub const LENGTH: f64 = 10.0;
    pub const TOL: f64 = 1e-12;
    pub const MAX_ITER: usize = 100_000;
    pub const N_MAX: usize = 30;
    pub const PATHS: u64 = 1_000_000;
    pub const SEED: u64 = 42;
    pub const BATCHES: u64 = 100;
    pub const FIT_LO: usize = 10;
    pub const RADIUS_ORDER: usize = 60;
    pub const RADIUS_WINDOW: usize = 20;
}

type CmdResult = Result<(RunReport, Format, Outcome), CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CoeffFormat {
    /// Exact pi-form, one line per coefficient.
    Exact,
    /// Floating point, one line per coefficient.
    Float,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, default_value_t = defaults::COEFF_ORDER)]
    order: usize,
    #[arg(long, value_enum, default_value_t = CoeffFormat::Exact)]
    format: CoeffFormat,
}

pub fn coeffs(args: &CoeffsArgs) -> CmdResult {
    let start = Instant::now();
    let series = expand(args.order);
    let mut report = RunReport::new("coeffs");
    report.input("order", args.order);
    let mut list = Vec::new();
    for (n, k) in series.coefficients().iter().enumerate() {
        let exact = k.to_string();
        let value = series.k_values()[n];
        report.text.push(match args.format {
            CoeffFormat::Float => format!("K{n} = {}", num(value)),
            _ => format!("K{n} = {exact}"),
        });
        report
            .rows
            .push(vec![n.to_string(), exact.clone(), num(value)]);
        list.push(json!({ "n": n, "exact": exact, "value": value }));
    }
    report.header = vec!["n", "exact", "value"];
    report.outputs = json!({ "coefficients": list });
    report
        .provenance("method", "exact recursion over Q[s], s = (2 pi)^(-1/2)")
        .provenance("normalization", "G[0][0] = 1, G[0][k] = 0 for k >= 1")
        .provenance("wall_time_s", start.elapsed().as_secs_f64());
    let format = match args.format {
        CoeffFormat::Exact | CoeffFormat::Float => Format::Text,
        CoeffFormat::Csv => Format::Csv,
        CoeffFormat::Json => Format::Json,
    };
    Ok((report, format, Outcome::Ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Series,
    Nystrom,
    Both,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Total quadrature nodes; must be a multiple of --panels.
    #[arg(long, default_value_t = defaults::NODES)]
    nodes: usize,
    #[arg(long, default_value_t = defaults::PANELS)]
    panels: usize,
    /// Truncation point L of the half line.
    #[arg(long, default_value_t = defaults::LENGTH)]
    length: f64,
}

impl GridArgs {
    fn rule(&self) -> Result<spectral::QuadratureRule, CliError> {
        if self.panels == 0 || !self.nodes.is_multiple_of(self.panels) {
            return Err(CliError::Usage(format!(
                "--nodes {} is not a positive multiple of --panels {}",
                self.nodes, self.panels
            )));
        }
        Ok(build_rule(
            self.nodes / self.panels,
            self.panels,
            self.length,
        )?)
    }

    fn record(&self, report: &mut RunReport) {
        report
            .input("nodes", self.nodes)
            .input("panels", self.panels)
            .input("length", self.length);
    }
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Series truncation order.
    #[arg(long, default_value_t = defaults::SERIES_ORDER)]
    order: usize,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = defaults::TOL)]
    tol: f64,
    #[arg(long, default_value_t = defaults::MAX_ITER)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn lambda(args: &LambdaArgs) -> CmdResult {
    let start = Instant::now();
    let mut report = RunReport::new("lambda");
    report
        .input("rho", args.rho)
        .input("method", format!("{:?}", args.method).to_lowercase());
    let mut outputs = Map::new();
    let mut outcome = Outcome::Ok;
    report.header = vec!["quantity", "value"];

    let series_value = if matches!(args.method, Method::Series | Method::Both) {
        report.input("order", args.order);
        let v = expand(args.order).eval_lambda(args.rho, args.order)?;
        let note = if args.rho.abs() >= 1.0 / 3.0 {
            " (outside the proven radius 1/3)"
        } else {
            ""
        };
        report
            .text
            .push(format!("series (order {}): {}{note}", args.order, num(v)));
        report.rows.push(vec!["series".into(), num(v)]);
        outputs.insert("series".into(), json!(v));
        Some(v)
    } else {
        None
    };

    let nystrom_value = if matches!(args.method, Method::Nystrom | Method::Both) {
        args.grid.record(&mut report);
        report
            .input("tol", args.tol)
            .input("max_iter", args.max_iter);
        let op = discretize(args.rho, &args.grid.rule()?)?;
        let lambda = match perron_eigenpair(&op, args.tol, args.max_iter) {
            Ok(pair) => {
                report.provenance("iterations", pair.iterations);
                pair.lambda
            }
            Err(Error::NotConverged {
                iterations,
                lambda,
                last_change,
                ..
            }) => {
                outcome = Outcome::Failed(format!(
                    "power iteration did not converge in {iterations} iterations (last change {last_change:e})"
                ));
                report
                    .provenance("iterations", iterations)
                    .provenance("converged", false);
                lambda
            }
            Err(e) => return Err(e.into()),
        };
        report.text.push(format!(
            "nystrom ({} nodes, L = {}): {}",
            args.grid.nodes,
            args.grid.length,
            num(lambda)
        ));
        report.rows.push(vec!["nystrom".into(), num(lambda)]);
        outputs.insert("nystrom".into(), json!(lambda));
        Some(lambda)
    } else {
        None
    };

    if let (Some(s), Some(n)) = (series_value, nystrom_value) {
        let diff = (s - n).abs();
        report.text.push(format!("|difference|: {diff:e}"));
        report.rows.push(vec!["difference".into(), num(diff)]);
        outputs.insert("difference".into(), json!(diff));
    }
    report.outputs = Value::Object(outputs);
    report.provenance("wall_time_s", start.elapsed().as_secs_f64());
    Ok((report, args.format, outcome))
}

#[derive(Debug, Args)]
pub struct PersistenceArgs {
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Largest horizon N.
    #[arg(long, default_value_t = defaults::N_MAX)]
    nmax: usize,
    #[arg(long, default_value_t = defaults::PATHS)]
    paths: u64,
    #[arg(long, default_value_t = defaults::SEED)]
    seed: u64,
    /// Independent random streams; must divide --paths.
    #[arg(long, default_value_t = defaults::BATCHES)]
    batches: u64,
    #[arg(long, default_value_t = defaults::FIT_LO)]
    fit_lo: usize,
    /// Defaults to --nmax. Clipped to the last horizon with enough survivors.
    #[arg(long)]
    fit_hi: Option<usize>,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn persistence(args: &PersistenceArgs) -> CmdResult {
    let start = Instant::now();
    let config = SimConfig {
        rho: args.rho,
        n_max: args.nmax,
        paths: args.paths,
        seed: args.seed,
        batches: args.batches,
    };
    let fit_hi = args.fit_hi.unwrap_or(args.nmax);
    let mut report = RunReport::new("persistence");
    report
        .input("rho", args.rho)
        .input("nmax", args.nmax)
        .input("paths", args.paths)
        .input("seed", args.seed)
        .input("batches", args.batches)
        .input("fit_lo", args.fit_lo)
        .input("fit_hi", fit_hi);
    if fit_hi > args.nmax || args.fit_lo == 0 || args.fit_lo >= fit_hi {
        return Err(CliError::Usage(format!(
            "fit window [{}, {fit_hi}] must satisfy 1 <= fit-lo < fit-hi <= nmax = {}",
            args.fit_lo, args.nmax
        )));
    }
    let est = simulate(&config)?;

    // The operator-power curve and Perron root exist only under the Nystrom rho cap.
    let nystrom = if args.rho.abs() <= spectral::kernel::RHO_CAP {
        args.grid.record(&mut report);
        let rule = args.grid.rule()?;
        let curve = persistence_curve(args.rho, args.nmax, &rule)?;
        let op = discretize(args.rho, &rule)?;
        let pair = perron_eigenpair(&op, defaults::TOL, defaults::MAX_ITER)?;
        Some((curve, pair.lambda))
    } else {
        None
    };

    report.header = vec!["N", "survivors", "p_hat", "stderr", "p_operator"];
    report.text.push(format!(
        "{:>4} {:>12} {:>14} {:>12} {:>14}",
        "N", "survivors", "p_hat", "stderr", "p_operator"
    ));
    let mut table = Vec::new();
    for n in 0..=args.nmax {
        let p_op = nystrom.as_ref().map(|(c, _)| c[n]);
        let p_op_text = p_op
            .map(|p| format!("{p:.8e}"))
            .unwrap_or_else(|| "-".into());
        report.text.push(format!(
            "{n:>4} {:>12} {:>14.8e} {:>12.4e} {:>14}",
            est.survivors[n], est.p_hat[n], est.stderr[n], p_op_text
        ));
        report.rows.push(vec![
            n.to_string(),
            est.survivors[n].to_string(),
            num(est.p_hat[n]),
            num(est.stderr[n]),
            p_op.map(num).unwrap_or_default(),
        ]);
        table.push(json!({
            "n": n,
            "survivors": est.survivors[n],
            "p_hat": est.p_hat[n],
            "stderr": est.stderr[n],
            "p_operator": p_op,
        }));
    }

    let (lo, hi) = usable_fit_window(&est, args.fit_lo, fit_hi).ok_or_else(|| {
        CliError::Usage(format!(
            "no usable fit window in [{}, {fit_hi}]: need at least {} survivors at two or more horizons; raise --paths or lower --fit-lo",
            args.fit_lo,
            mc::MIN_SURVIVORS
        ))
    })?;
    let fit = fit_exponent(&est, lo, hi)?;
    report.text.push(format!(
        "fit window [{lo}, {hi}] (requested [{}, {fit_hi}]): slope {:.6} +- {:.6}, lambda {:.6}",
        args.fit_lo,
        fit.slope,
        fit.slope_se,
        fit.lambda()
    ));
    let mut fit_json = json!({
        "n_lo": lo,
        "n_hi": hi,
        "slope": fit.slope,
        "slope_se": fit.slope_se,
        "lambda": fit.lambda(),
    });
    if let Some((_, lambda)) = &nystrom {
        let z = (fit.slope - lambda.ln()) / fit.slope_se;
        report.text.push(format!(
            "nystrom log lambda {:.6} (lambda {:.6}), z = {z:.2}",
            lambda.ln(),
            lambda
        ));
        fit_json["nystrom_log_lambda"] = json!(lambda.ln());
        fit_json["z"] = json!(z);
    } else {
        report.text.push(format!(
            "nystrom comparison skipped: |rho| > {}",
            spectral::kernel::RHO_CAP
        ));
    }
    report.outputs = json!({ "table": table, "fit": fit_json });
    report
        .provenance("generator", mc::GENERATOR)
        .provenance("normal_method", mc::NORMAL_METHOD)
        .provenance("min_survivors", mc::MIN_SURVIVORS)
        .provenance("wall_time_s", start.elapsed().as_secs_f64());
    Ok((report, args.format, Outcome::Ok))
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(long, default_value_t = defaults::RADIUS_ORDER)]
    order: usize,
    /// Trailing coefficients used by the root test; needs order >= 2 * window.
    #[arg(long, default_value_t = defaults::RADIUS_WINDOW)]
    window: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn radius(args: &RadiusArgs) -> CmdResult {
    let start = Instant::now();
    let mut report = RunReport::new("radius");
    report
        .input("order", args.order)
        .input("window", args.window);
    if args.order < 2 * args.window {
        return Err(CliError::Usage(format!(
            "window {} exceeds the data: order {} provides at most {} (order >= 2 * window)",
            args.window,
            args.order,
            args.order / 2
        )));
    }
    let (a, c, d) = (rat(1, 2), rat(1, 1), rat(1, 2));
    let bound = kato_radius_bound(&a, &c, &d)?;
    let estimate = expand(args.order).radius_estimate(args.window)?;
    report.text.push(format!(
        "proven lower bound: {bound} (Kato bound with a = {a}, c = {c}, d = {d})"
    ));
    report.text.push(format!(
        "ESTIMATE (root test over K_{}..K_{}, not a proven value): {}",
        args.order + 1 - args.window,
        args.order,
        num(estimate)
    ));
    report.header = vec!["quantity", "value", "status"];
    report.rows.push(vec![
        "lower_bound".into(),
        bound.to_string(),
        "proven".into(),
    ]);
    report
        .rows
        .push(vec!["radius".into(), num(estimate), "estimate".into()]);
    report.outputs = json!({
        "lower_bound": { "value": bound.to_string(), "status": "proven", "a": a.to_string(), "c": c.to_string(), "d": d.to_string() },
        "radius_estimate": { "value": estimate, "status": "estimate" },
    });
    report
        .provenance("estimator", "1 / max |K_n|^(1/n) over the trailing window")
        .provenance("wall_time_s", start.elapsed().as_secs_f64());
    Ok((report, args.format, Outcome::Ok))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SuiteArg {
    /// Monte Carlo with 10^6 paths.
    Fast,
    /// Monte Carlo with 10^7 paths.
    Full,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
    suite: SuiteArg,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

pub fn validate(args: &ValidateArgs) -> CmdResult {
    let start = Instant::now();
    let suite = match args.suite {
        SuiteArg::Fast => Suite::Fast,
        SuiteArg::Full => Suite::Full,
    };
    let checks = run_suite(suite);
    let mut report = RunReport::new("validate");
    report.input("suite", suite.name());
    report.header = vec![
        "id", "name", "passed", "measured", "required", "seconds", "detail",
    ];
    for check in &checks {
        report.text.push(check.line());
        report.rows.push(vec![
            check.id.to_string(),
            check.name.clone(),
            check.passed.to_string(),
            num(check.measured),
            check.required.clone(),
            format!("{:.3}", check.seconds),
            check.detail.clone(),
        ]);
    }
    let failed: Vec<u32> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    report.text.push(format!(
        "{} passed, {} failed",
        checks.len() - failed.len(),
        failed.len()
    ));
    let checks_json: Vec<Value> = checks
        .iter()
        .map(|c| {
            let mut v = serde_json::to_value(c).unwrap_or(Value::Null);
            // NaN has no JSON form; a failed computation reports null.
            if !c.measured.is_finite() {
                v["measured"] = Value::Null;
            }
            v
        })
        .collect();
    report.outputs = json!({ "checks": checks_json, "failed": failed });
    report
        .provenance("mc_paths", suite.mc_paths())
        .provenance("mc_seed", ar1_persistence::validation::MC_SEED)
        .provenance("generator", mc::GENERATOR)
        .provenance("wall_time_s", start.elapsed().as_secs_f64());
    let outcome = if failed.is_empty() {
        Outcome::Ok
    } else {
        Outcome::Failed(format!("acceptance checks failed: {failed:?}"))
    };
    Ok((report, args.format, outcome))
}
