//! Command-line front end. Every command builds a JSON (or CSV) report, writes
//! it atomically, and derives the exit status from the report's `passed` flag.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cutoff::{
    build_bands, build_cutoff, build_pair, derivative_bound_check, finite_difference_check, grid_stability,
    rate_convergence, recursion_product, sample_rows,
};
use crate::exactalg::rational::{parse_fraction, Rational};
use crate::exactalg::{a_table_generating, a_table_recurrence, bernoulli_generator, matrix_inverse_coeffs};
use crate::geometry::strata::{sample_sigma1, sample_sigma2};
use crate::geometry::{
    classify, classify_exact, initial_state, integrate, spiral_fit, symplectic_rank, symplectic_rank_exact,
    Covector, ExactCovector, GeometryError, ModelParams, StratumLabel, DEFAULT_TOL,
};
use crate::localize::{
    bound_scan_a, extract_delta, verify_gamma_expansion, verify_x2_localizer, verify_stirling_identity,
    verify_x2_bracket, LocalizeError, Localizer,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Overrides the directory that reports go to.
pub const REPORT_DIR_ENV: &str = "SOSVERIFY_REPORT_DIR";

pub const DEFAULT_SEED: u64 = 20_061_107;

#[derive(Debug, Parser)]
#[command(name = "sosverify", version, about = "Exact and numeric checks for a sum-of-squares model operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report file. Relative paths resolve against $SOSVERIFY_REPORT_DIR when it is set.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Seed for every randomized check.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Localizer coefficient table, built two independent ways.
    Coeffs {
        #[arg(long, default_value_t = 40)]
        jmax: usize,
    },
    /// Exact commutator identities for the localizers at one k.
    Verify(VerifyArgs),
    /// Stratum of one covector.
    Classify(ClassifyArgs),
    /// Hamilton flow of the spiral model.
    Flow(FlowArgs),
    /// Nested cutoffs, their derivative bounds and the product bound.
    Cutoff(CutoffArgs),
    /// Everything above with default depths.
    ReportAll {
        #[arg(long, default_value_t = 8)]
        pmax: usize,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, default_value_t = 8)]
    pub jmax: usize,
    #[arg(long, default_value_t = 8)]
    pub pmax: usize,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: String,
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: String,
    #[arg(long, allow_hyphen_values = true)]
    pub xi: String,
    /// Use the spiral model with this rate instead of the closed one.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0)]
    pub b: f64,
    /// Tolerance when some coordinate is not an exact decimal or fraction.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    pub k: i64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value = "1.02,0", allow_hyphen_values = true)]
    pub x0: String,
    #[arg(long, default_value = "1,-0.05", allow_hyphen_values = true)]
    pub xi0: String,
    #[arg(long, default_value_t = 50.0)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Allowed drift of either conserved quantity.
    #[arg(long, default_value_t = 1e-8)]
    pub drift_tol: f64,
}

#[derive(Debug, Args)]
pub struct CutoffArgs {
    #[arg(long = "n", default_value_t = 64)]
    pub n: u64,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value = "1", allow_hyphen_values = true)]
    pub r1: String,
    #[arg(long, default_value = "2", allow_hyphen_values = true)]
    pub r2: String,
    /// Constant for the product bound; defaults to the measured one.
    #[arg(long)]
    pub c: Option<f64>,
    /// Sample count for CSV output.
    #[arg(long, default_value_t = 1001)]
    pub points: usize,
    /// Highest derivative order written to CSV.
    #[arg(long, default_value_t = 2)]
    pub orders: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl From<LocalizeError> for CliError {
    fn from(e: LocalizeError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<crate::cutoff::CutoffError> for CliError {
    fn from(e: crate::cutoff::CutoffError) -> Self {
        CliError::Config(e.to_string())
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// What a command produced: the report body, its pass flag, and an optional
/// line for stdout.
pub struct Outcome {
    pub report: Value,
    pub passed: bool,
    pub csv: Option<String>,
    pub stdout: Option<String>,
}

impl Outcome {
    fn json(report: Value) -> Self {
        let passed = report["passed"].as_bool().unwrap_or(false);
        Outcome { report, passed, csv: None, stdout: None }
    }
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("sosverify: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    let (name, outcome) = match &cli.command {
        Command::Coeffs { jmax } => ("coeffs", run_coeffs(*jmax)?),
        Command::Verify(a) => ("verify", run_verify(a)?),
        Command::Classify(a) => ("classify", run_classify(a)?),
        Command::Flow(a) => ("flow", run_flow(a, cli.format)?),
        Command::Cutoff(a) => ("cutoff", run_cutoff(a, cli.format)?),
        Command::ReportAll { pmax } => ("report-all", run_all(*pmax, cli.seed)?),
    };
    if cli.format == Format::Csv && outcome.csv.is_none() {
        return Err(config(format!("{name} has no CSV output")));
    }
    let body = match (&outcome.csv, cli.format) {
        (Some(csv), Format::Csv) => csv.clone(),
        _ => serde_json::to_string_pretty(&outcome.report).expect("report is plain JSON") + "\n",
    };
    let ext = if cli.format == Format::Csv { "csv" } else { "json" };
    match report_path(cli.out.as_deref(), name, ext) {
        Some(path) => write_atomic(&path, body.as_bytes())?,
        None if outcome.stdout.is_none() => print!("{body}"),
        None => {}
    }
    if let Some(line) = &outcome.stdout {
        println!("{line}");
    }
    eprintln!("{name}: {}", if outcome.passed { "pass" } else { "FAIL" });
    Ok(if outcome.passed { EXIT_PASS } else { EXIT_FAIL })
}

/// `--out` wins; otherwise the report directory from the environment, if any.
fn report_path(out: Option<&Path>, name: &str, ext: &str) -> Option<PathBuf> {
    let dir = std::env::var_os(REPORT_DIR_ENV).map(PathBuf::from);
    match (out, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.to_path_buf()),
        (None, Some(d)) => Some(d.join(format!("{name}.{ext}"))),
        (None, None) => None,
    }
}

/// Writes to a sibling temp file and renames it over the target.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let file_name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{file_name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

fn check_k(k: i64) -> Result<(), CliError> {
    if !(2..=64).contains(&k) {
        return Err(config(format!("k must satisfy 2 <= k <= 64, got {k}")));
    }
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn run_coeffs(jmax: usize) -> Result<Outcome, CliError> {
    if jmax == 0 || jmax > 200 {
        return Err(config(format!("jmax must be in 1..=200, got {jmax}")));
    }
    let rec = a_table_recurrence(jmax);
    let gen = a_table_generating(jmax);
    let first_difference = rec.first_difference(&gen);
    let bern = bernoulli_generator(jmax);
    let inv = matrix_inverse_coeffs(jmax);
    let bernoulli_agrees = (0..=jmax).all(|m| bern.coeff(m) == inv[m]);
    let recurrence_violations = rec.recurrence_violations().len();
    let boundary_violations = rec.boundary_violations().len();
    let table: Value = serde_json::from_str(&rec.to_json()).expect("table JSON is valid");
    let passed =
        first_difference.is_none() && bernoulli_agrees && recurrence_violations == 0 && boundary_violations == 0;
    Ok(Outcome::json(json!({
        "command": "coeffs",
        "jmax": jmax,
        "first_difference": first_difference,
        "bernoulli_agrees": bernoulli_agrees,
        "recurrence_violations": recurrence_violations,
        "boundary_violations": boundary_violations,
        "table": table,
        "passed": passed,
    })))
}

pub fn verify_report(k: i64, jmax: usize, pmax: usize) -> Result<Value, CliError> {
    check_k(k)?;
    if jmax < 2 || pmax < 1 {
        return Err(config("need jmax >= 2 and pmax >= 1"));
    }
    let loc = Localizer::new(k, jmax.max(pmax) + 1)?;
    let localizer = verify_x2_localizer(&loc, jmax)?;
    let x2 = verify_x2_bracket(&loc, pmax)?;
    let delta = extract_delta(&loc, pmax)?;
    let gamma = verify_gamma_expansion(&loc, jmax)?;
    let stirling = verify_stirling_identity(jmax as u32)?;
    let scan = bound_scan_a(jmax)?;
    let residuals: usize = localizer.entries.iter().chain(&x2.entries).map(|e| e.residual_terms).sum();
    let passed = localizer.passed && x2.passed && delta.passed && gamma.passed && stirling.passed;
    Ok(json!({
        "command": "verify",
        "k": k,
        "jmax": jmax,
        "pmax": pmax,
        "total_residual_terms": residuals,
        "x2_localizer": to_value(&localizer),
        "x2_localized_power": to_value(&x2),
        "x1_localized_power": to_value(&delta),
        "gamma_expansion": to_value(&gamma),
        "stirling": to_value(&stirling),
        "coefficient_growth": to_value(&scan),
        "passed": passed,
    }))
}

pub fn run_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    Ok(Outcome::json(verify_report(a.k, a.jmax, a.pmax)?))
}

/// Exact value of `"p/q"`, an integer, or a plain decimal such as `-0.25`.
pub fn parse_exact(s: &str) -> Option<Rational> {
    if let Ok(q) = parse_fraction(s) {
        return Some(q);
    }
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.')?;
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), frac_part.len());
    let q = Rational::new(digits, den);
    Some(if neg { -q } else { q })
}

fn parse_pair(s: &str, what: &str) -> Result<[String; 2], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok([a.to_string(), b.to_string()]),
        _ => Err(config(format!("--{what} expects two comma-separated numbers, got {s:?}"))),
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    if let Some(q) = parse_exact(s) {
        return Ok(crate::exactalg::rational::to_f64(&q));
    }
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| config(format!("not a finite number: {s:?}")))
}

fn geometry_config(e: GeometryError) -> CliError {
    config(e.to_string())
}

pub fn run_classify(a: &ClassifyArgs) -> Result<Outcome, CliError> {
    let params = match a.mu {
        Some(mu) => ModelParams::spiral(a.k, mu, a.a, a.b),
        None => ModelParams::closed(a.k),
    }
    .map_err(geometry_config)?;
    let x = parse_pair(&a.x, "x")?;
    let xi = parse_pair(&a.xi, "xi")?;
    let raw = [a.t.as_str(), x[0].as_str(), x[1].as_str(), a.tau.as_str(), xi[0].as_str(), xi[1].as_str()];
    let exact: Option<Vec<Rational>> = raw.iter().map(|s| parse_exact(s)).collect();

    let (label, symplectic, mode) = if let Some(q) = exact {
        let c = ExactCovector {
            t: q[0].clone(),
            x: [q[1].clone(), q[2].clone()],
            tau: q[3].clone(),
            xi: [q[4].clone(), q[5].clone()],
        };
        let label = classify_exact(&c, &params).map_err(geometry_config)?;
        let sym = match label {
            StratumLabel::Sigma1 | StratumLabel::Sigma2 => {
                Some(symplectic_rank_exact(label, &c, &params).map_err(geometry_config)?)
            }
            _ => None,
        };
        (label, sym, "exact")
    } else {
        let v: Vec<f64> = raw.iter().map(|s| parse_f64(s)).collect::<Result<_, _>>()?;
        let c = Covector { t: v[0], x: [v[1], v[2]], tau: v[3], xi: [v[4], v[5]] };
        let label = classify(&c, &params, a.tol).map_err(geometry_config)?;
        let sym = match label {
            StratumLabel::Sigma1 | StratumLabel::Sigma2 => {
                Some(symplectic_rank(label, &c, &params, a.tol).map_err(geometry_config)?)
            }
            _ => None,
        };
        (label, sym, "float")
    };
    let mut out = Outcome::json(json!({
        "command": "classify",
        "model": to_value(&params),
        "arithmetic": mode,
        "stratum": label.to_string(),
        "symplectic": symplectic.map(|s| to_value(&s)),
        "passed": true,
    }));
    out.stdout = Some(label.to_string());
    Ok(out)
}

pub fn flow_report(a: &FlowArgs) -> Result<(Value, Option<String>), CliError> {
    let params = ModelParams::spiral(a.k, a.mu, a.a, a.b).map_err(geometry_config)?;
    if !(a.h > 0.0 && a.t_end > 0.0 && a.h.is_finite() && a.t_end.is_finite()) {
        return Err(config("need h > 0 and t-end > 0"));
    }
    let x = parse_pair(&a.x0, "x0")?;
    let xi = parse_pair(&a.xi0, "xi0")?;
    let x0 = [parse_f64(&x[0])?, parse_f64(&x[1])?];
    let xi0 = [parse_f64(&xi[0])?, parse_f64(&xi[1])?];
    let s0 = initial_state(&params, x0, xi0).map_err(geometry_config)?;
    let common = json!({
        "command": "flow",
        "model": to_value(&params),
        "x0": x0,
        "xi0": xi0,
        "t_end": a.t_end,
        "h": a.h,
    });
    let traj = match integrate(&s0, &params, a.t_end, a.h) {
        Ok(t) => t,
        Err(e @ GeometryError::StepRejected { .. }) => {
            let mut v = common;
            v["error"] = json!(e.to_string());
            v["passed"] = json!(false);
            return Ok((v, None));
        }
        Err(e) => return Err(geometry_config(e)),
    };
    let r0 = x0[0].hypot(x0[1]);
    let inside = a.a < r0 && r0 < a.b;
    let monotone = traj.radius_monotone(&params).map_err(geometry_config)?;
    let fit = spiral_fit(&traj, a.a + 0.05 * (a.b - a.a), a.b - 0.05 * (a.b - a.a));
    let (dx, da) = (traj.drift_x_dot_xi(), traj.drift_x_a_xi());
    let passed = dx <= a.drift_tol && da <= a.drift_tol && traj.closed_form_max_rel_dev <= 1e-6 && (!inside || monotone);
    let mut v = common;
    let obj = v.as_object_mut().expect("object");
    obj.insert("steps".into(), json!(traj.states.len() - 1));
    obj.insert("drift_x_dot_xi".into(), json!(dx));
    obj.insert("drift_x_a_xi".into(), json!(da));
    obj.insert("richardson_max".into(), json!(traj.richardson_max));
    obj.insert("closed_form_max_rel_dev".into(), json!(traj.closed_form_max_rel_dev));
    obj.insert("starts_inside_annulus".into(), json!(inside));
    obj.insert("radius_monotone".into(), json!(monotone));
    obj.insert("final_radius".into(), json!(traj.states.last().map(|s| s.monitors.norm_x)));
    obj.insert("spiral_fit".into(), json!(fit.map(|f| to_value(&f))));
    obj.insert("passed".into(), json!(passed));
    Ok((v, Some(traj.to_csv())))
}

pub fn run_flow(a: &FlowArgs, format: Format) -> Result<Outcome, CliError> {
    let (report, csv) = flow_report(a)?;
    let mut out = Outcome::json(report);
    out.csv = csv.filter(|_| format == Format::Csv);
    if format == Format::Csv && out.csv.is_none() {
        out.csv = Some(String::new());
    }
    Ok(out)
}

pub fn run_cutoff(a: &CutoffArgs, format: Format) -> Result<Outcome, CliError> {
    let r1 = parse_exact(&a.r1).ok_or_else(|| config(format!("r1 must be exact, got {:?}", a.r1)))?;
    let r2 = parse_exact(&a.r2).ok_or_else(|| config(format!("r2 must be exact, got {:?}", a.r2)))?;
    if a.n > 1 << 16 {
        return Err(config("N above 2^16 is not supported"));
    }
    let fam = build_bands(r1, r2, a.n)?;
    let cut = build_cutoff(&fam, a.k)?;
    let (inner, outer) = build_pair(&fam, a.k)?;
    let check = derivative_bound_check(&cut, &fam)?;
    let fd = finite_difference_check(&cut, 1000, 1e-6);
    let c = match a.c {
        Some(c) => c,
        None => check.c_measured,
    };
    let product = recursion_product(a.n, c)?;
    let violations = fam.geometry_violations();
    let passed = violations.is_empty() && check.passed && fd.passed;
    let profile: Vec<Value> = check
        .pass_profile
        .iter()
        .map(|p| json!({"k": p.k, "ell": p.ell, "ln_sup": p.ln_sup, "ln_bound": p.ln_bound, "sup_exact": p.sup_exact, "C_measured": check.c_measured, "pass": p.pass}))
        .collect();
    let csv = (format == Format::Csv).then(|| {
        let orders = a.orders.min(cut.n);
        let mut s = String::from("r,phi");
        for o in 1..=orders {
            s.push_str(&format!(",phi_{o}"));
        }
        s.push('\n');
        for row in sample_rows(&cut, a.points, orders) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    });
    let mut out = Outcome::json(json!({
        "command": "cutoff",
        "N": a.n,
        "bands": to_value(&fam.summary()),
        "geometry_violations": violations,
        "cutoff": to_value(&cut.summary()),
        "pair": [to_value(&inner.summary()), to_value(&outer.summary())],
        "C_measured": check.c_measured,
        "argmax_ell": check.argmax_ell,
        "weaker_form_holds": check.weaker_form_holds,
        "bound_check": profile,
        "finite_difference": to_value(&fd),
        "product": to_value(&product),
        "passed": passed,
    }));
    out.csv = csv;
    Ok(out)
}

/// Exact symplectic dichotomy on `count` random points of each stratum.
pub fn strata_report(k: i64, count: usize, seed: u64) -> Result<Value, CliError> {
    let params = ModelParams::closed(k).map_err(geometry_config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sigma1_nondegenerate = 0;
    let mut sigma2_degenerate = 0;
    for _ in 0..count {
        let p = sample_sigma1(&params, &mut rng);
        if !symplectic_rank_exact(StratumLabel::Sigma1, &p, &params).map_err(geometry_config)?.degenerate {
            sigma1_nondegenerate += 1;
        }
        let p = sample_sigma2(&params, &mut rng);
        if symplectic_rank_exact(StratumLabel::Sigma2, &p, &params).map_err(geometry_config)?.degenerate {
            sigma2_degenerate += 1;
        }
    }
    Ok(json!({
        "k": k,
        "seed": seed,
        "samples": count,
        "sigma1_nondegenerate": sigma1_nondegenerate,
        "sigma2_degenerate": sigma2_degenerate,
        "passed": sigma1_nondegenerate == count && sigma2_degenerate == count,
    }))
}

pub fn run_all(pmax: usize, seed: u64) -> Result<Outcome, CliError> {
    let coeffs = run_coeffs(40)?.report;
    let mut verify = Vec::new();
    for k in 2..=5 {
        verify.push(verify_report(k, pmax, pmax)?);
    }
    let mut strata = Vec::new();
    for k in 2..=5 {
        strata.push(strata_report(k, 100, seed.wrapping_add(k as u64))?);
    }
    let flow_args = FlowArgs {
        k: 2,
        mu: 0.05,
        a: 1.0,
        b: 2.0,
        x0: "1.02,0".into(),
        xi0: "1,-0.05".into(),
        t_end: 50.0,
        h: 1e-3,
        drift_tol: 1e-8,
    };
    let (flow, _) = flow_report(&flow_args)?;
    let (r1, r2) = crate::cutoff::default_interval();
    let grid = grid_stability(r1, r2, 1 << 10, 8)?;
    let rates = rate_convergence(grid.c_max, 2, 16, 1 << 12, 1e-3)?;
    let cutoff_passed = grid.stable && grid.geometry_ok && grid.all_bounds_hold && rates.converged;
    let coeff_table_ok = coeffs["passed"].as_bool().unwrap_or(false);
    let mut summary = coeffs;
    if let Some(obj) = summary.as_object_mut() {
        obj.remove("table");
    }
    let all = |v: &[Value]| v.iter().all(|r| r["passed"].as_bool().unwrap_or(false));
    let passed = coeff_table_ok && all(&verify) && all(&strata) && flow["passed"].as_bool().unwrap_or(false) && cutoff_passed;
    Ok(Outcome::json(json!({
        "command": "report-all",
        "seed": seed,
        "coeffs": summary,
        "verify": verify,
        "strata": strata,
        "flow": flow,
        "cutoff_grid": to_value(&grid),
        "product_rates": to_value(&rates),
        "cutoff_passed": cutoff_passed,
        "passed": passed,
    })))
}
