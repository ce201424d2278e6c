use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use digit_dirichlet::beta_series::{build_sbeta_table, f_beta_eval, g_beta_eval, DEFAULT_TABLE};
use digit_dirichlet::delange::{
    beta_grid, d_beta, figure_grids, h_beta, s_beta, BetaParam, Figure, FourierTruncation,
    DEFAULT_CUTOFF,
};
use digit_dirichlet::digits::IntegerBase;
use digit_dirichlet::integer_base::{eval_series, zb_estimate, SeriesTag, DEFAULT_TOL};
use digit_dirichlet::numerics::EvalResult;
use digit_dirichlet::poles::{enumerate_poles, residue_check, PoleDescriptor, PoleRecord};
use digit_dirichlet::special::PrecisionProfile;
use digit_dirichlet::verify::{run_suite, VerifyOptions};
use digit_dirichlet::Error;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "digit-dirichlet",
    version,
    about = "Dirichlet series of digit sums: evaluation, poles, Delange grids and checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one series at one point.
    Eval(EvalArgs),
    /// List the poles inside a disc about the origin.
    Poles(PolesArgs),
    /// Compare closed-form residues with contour integrals.
    Certify(CertifyArgs),
    /// Evaluate S_beta(n), d_beta(n) or h_beta(x) at a single argument.
    Delange(DelangeArgs),
    /// Write the three beta-grid CSV files.
    Plot(PlotArgs),
    /// Run the acceptance suite.
    Verify(VerifyArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
#[value(rename_all = "verbatim")]
enum Function {
    #[value(alias = "zb")]
    Zb,
    #[value(alias = "fb")]
    Fb,
    #[value(alias = "gb")]
    Gb,
    #[value(alias = "gbeta")]
    Gbeta,
    #[value(alias = "fbeta")]
    Fbeta,
}

impl Function {
    fn integer_tag(self) -> Option<SeriesTag> {
        match self {
            Function::Zb => Some(SeriesTag::Zb),
            Function::Fb => Some(SeriesTag::Fb),
            Function::Gb => Some(SeriesTag::Gb),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Function::Zb => "Zb",
            Function::Fb => "Fb",
            Function::Gb => "Gb",
            Function::Gbeta => "Gbeta",
            Function::Fbeta => "Fbeta",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum IntegerFunction {
    #[value(alias = "zb", name = "Zb")]
    Zb,
    #[value(alias = "fb", name = "Fb")]
    Fb,
    #[value(alias = "gb", name = "Gb")]
    Gb,
}

impl From<IntegerFunction> for SeriesTag {
    fn from(f: IntegerFunction) -> Self {
        match f {
            IntegerFunction::Zb => SeriesTag::Zb,
            IntegerFunction::Fb => SeriesTag::Fb,
            IntegerFunction::Gb => SeriesTag::Gb,
        }
    }
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum)]
    function: Function,
    /// Integer base b >= 2 (Zb, Fb, Gb).
    #[arg(long)]
    base: Option<f64>,
    /// Real base beta > 1 (Gbeta, Fbeta).
    #[arg(long)]
    beta: Option<f64>,
    /// Evaluation point, written a+bi.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    s: Complex64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Bernoulli truncation order; chosen from Re(s) when omitted.
    #[arg(long = "bernoulli-k")]
    bernoulli_k: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    fourier_cutoff: usize,
    /// Length of the S_beta table used by Fbeta.
    #[arg(long, default_value_t = DEFAULT_TABLE)]
    table_size: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct PolesArgs {
    #[arg(long, value_enum)]
    function: IntegerFunction,
    #[arg(long)]
    base: f64,
    #[arg(long)]
    radius: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, value_enum)]
    function: IntegerFunction,
    #[arg(long)]
    base: f64,
    #[arg(long)]
    radius: f64,
    /// Allowed |contour - formula| for every Laurent coefficient.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("argument").required(true).args(["n", "d", "x"])))]
struct DelangeArgs {
    #[arg(long)]
    beta: f64,
    /// Evaluate S_beta(n).
    #[arg(long)]
    n: Option<u64>,
    /// Evaluate d_beta(n) = S_beta(n+1) - S_beta(n).
    #[arg(long)]
    d: Option<u64>,
    /// Evaluate h_beta(x).
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    fourier_cutoff: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
struct PlotArgs {
    /// Directory receiving fig1_beta_grid.csv, fig2_beta_grid.csv and fig3_beta_grid.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    fourier_cutoff: usize,
    /// Restrict to some figures (1, 2 or 3); all three by default.
    #[arg(long = "figure")]
    figures: Vec<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Criterion number, key or key prefix; repeatable.
    #[arg(long)]
    only: Vec<String>,
    #[arg(long, default_value_t = 1.0)]
    tol_scale: f64,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

/// Why a command stopped early.
enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(msg) => Failure::Usage(msg),
            other => Failure::Numeric(other),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Numeric(Error::InvalidInput(format!("i/o: {e}")))
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Numeric(Error::InvalidInput(format!("csv: {e}")))
    }
}

type Outcome = std::result::Result<u8, Failure>;

fn parse_complex(text: &str) -> std::result::Result<Complex64, String> {
    let trimmed = text.trim();
    if trimmed.contains(char::is_whitespace) {
        return Err(format!("`{text}` contains spaces; write a+bi"));
    }
    let z: Complex64 = trimmed
        .parse()
        .map_err(|_| format!("`{text}` is not a complex number of the form a+bi"))?;
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("`{text}` is not finite"))
    }
}

fn integer_base(value: f64) -> std::result::Result<IntegerBase, Failure> {
    if value.fract() != 0.0 || !(2.0..=u64::MAX as f64).contains(&value) {
        return Err(Failure::Usage(format!(
            "base must be an integer >= 2, got {value}"
        )));
    }
    IntegerBase::new(value as u64).map_err(Failure::from)
}

fn beta_param(value: f64) -> std::result::Result<BetaParam, Failure> {
    if !(value > 1.0) {
        return Err(Failure::Usage(format!("beta must exceed 1, got {value}")));
    }
    BetaParam::new(value).map_err(Failure::from)
}

fn truncation(cutoff: usize) -> std::result::Result<FourierTruncation, Failure> {
    FourierTruncation::new(cutoff).map_err(Failure::from)
}

fn complex_json(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn print_json(value: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)
}

fn print_csv<R: Serialize>(rows: &[R], header: &[&str]) -> std::result::Result<(), Failure> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(io::stdout().lock());
    writer.write_record(header)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// eval

#[derive(Serialize)]
struct EvalRow<'a> {
    function: &'a str,
    base_or_beta: f64,
    s_re: f64,
    s_im: f64,
    value_re: f64,
    value_im: f64,
    abs_error_estimate: f64,
    bernoulli_k: Option<usize>,
    fourier_cutoff: Option<usize>,
    tol: f64,
}

fn cmd_eval(args: &EvalArgs) -> Outcome {
    if !(args.tol > 0.0) {
        return Err(Failure::Usage(format!("tol must be positive, got {}", args.tol)));
    }
    let (parameter, result, cutoff) = match args.function.integer_tag() {
        Some(tag) => {
            if args.beta.is_some() {
                return Err(Failure::Usage(format!(
                    "{} takes --base, not --beta",
                    args.function.name()
                )));
            }
            let raw = args
                .base
                .ok_or_else(|| Failure::Usage(format!("{} needs --base", args.function.name())))?;
            let b = integer_base(raw)?;
            let result = if tag == SeriesTag::Zb {
                let profile = PrecisionProfile {
                    target_abs_tol: args.tol,
                    ..PrecisionProfile::default()
                };
                let e = zb_estimate(b, args.s, &profile)?;
                EvalResult {
                    value: e.value,
                    abs_error_estimate: e.abs_error,
                    k_used: None,
                    quadrature: None,
                }
            } else {
                eval_series(tag, b, args.s, args.bernoulli_k, args.tol)?
            };
            (raw, result, None)
        }
        None => {
            if args.base.is_some() {
                return Err(Failure::Usage(format!(
                    "{} takes --beta, not --base",
                    args.function.name()
                )));
            }
            let raw = args
                .beta
                .ok_or_else(|| Failure::Usage(format!("{} needs --beta", args.function.name())))?;
            let beta = beta_param(raw)?;
            let trunc = truncation(args.fourier_cutoff)?;
            let result = if args.function == Function::Gbeta {
                g_beta_eval(beta, args.s, trunc)?
            } else {
                let table = build_sbeta_table(beta, args.table_size, trunc)?;
                f_beta_eval(beta, args.s, &table, args.tol)?
            };
            (raw, EvalResult { k_used: None, ..result }, Some(trunc.cutoff()))
        }
    };
    let row = EvalRow {
        function: args.function.name(),
        base_or_beta: parameter,
        s_re: args.s.re,
        s_im: args.s.im,
        value_re: result.value.re,
        value_im: result.value.im,
        abs_error_estimate: result.abs_error_estimate,
        bernoulli_k: result.k_used,
        fourier_cutoff: cutoff,
        tol: args.tol,
    };
    match args.format {
        Format::Json => print_json(&json!({
            "function": row.function,
            "base_or_beta": row.base_or_beta,
            "s": complex_json(args.s),
            "value": complex_json(result.value),
            "abs_error_estimate": row.abs_error_estimate,
            "bernoulli_k": row.bernoulli_k,
            "fourier_cutoff": row.fourier_cutoff,
            "tol": row.tol,
        }))?,
        Format::Csv => print_csv(
            &[row],
            &[
                "function",
                "base_or_beta",
                "s_re",
                "s_im",
                "value_re",
                "value_im",
                "abs_error_estimate",
                "bernoulli_k",
                "fourier_cutoff",
                "tol",
            ],
        )?,
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// poles and certify

const POLE_HEADER: [&str; 12] = [
    "tag",
    "b",
    "k",
    "m",
    "re",
    "im",
    "order",
    "residue_re",
    "residue_im",
    "laurent2_re",
    "laurent2_im",
    "flag",
];

/// Fixed-width CSV form; the JSON record omits an absent flag.
#[derive(Serialize)]
struct PoleCsvRow {
    tag: String,
    b: u64,
    k: usize,
    m: i64,
    re: f64,
    im: f64,
    order: u8,
    residue_re: f64,
    residue_im: f64,
    laurent2_re: Option<f64>,
    laurent2_im: Option<f64>,
    flag: Option<String>,
}

impl From<&PoleRecord> for PoleCsvRow {
    fn from(r: &PoleRecord) -> Self {
        Self {
            tag: r.tag.to_string(),
            b: r.b,
            k: r.k,
            m: r.m,
            re: r.re,
            im: r.im,
            order: r.order,
            residue_re: r.residue_re,
            residue_im: r.residue_im,
            laurent2_re: r.laurent2_re,
            laurent2_im: r.laurent2_im,
            flag: r.flag.map(|f| format!("{f:?}")),
        }
    }
}

fn sorted_poles(
    function: IntegerFunction,
    base: f64,
    radius: f64,
) -> std::result::Result<Vec<PoleDescriptor>, Failure> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Failure::Usage(format!("radius must be positive, got {radius}")));
    }
    let b = integer_base(base)?;
    let mut poles = enumerate_poles(function.into(), b, radius)?;
    poles.sort_by(|p, q| {
        p.location
            .norm()
            .total_cmp(&q.location.norm())
            .then(p.lattice_m.cmp(&q.lattice_m))
    });
    Ok(poles)
}

fn cmd_poles(args: &PolesArgs) -> Outcome {
    let poles = sorted_poles(args.function, args.base, args.radius)?;
    let records: Vec<PoleRecord> = poles.iter().map(PoleRecord::from).collect();
    match args.format {
        Format::Json => print_json(&json!({
            "function": SeriesTag::from(args.function).to_string(),
            "base": args.base,
            "radius": args.radius,
            "count": records.len(),
            "poles": records,
        }))?,
        Format::Csv => {
            let rows: Vec<PoleCsvRow> = records.iter().map(PoleCsvRow::from).collect();
            print_csv(&rows, &POLE_HEADER)?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct CertifyRow {
    k: usize,
    m: i64,
    re: f64,
    im: f64,
    order: u8,
    formula_re: f64,
    formula_im: f64,
    contour_re: f64,
    contour_im: f64,
    abs_diff: f64,
    laurent2_abs_diff: Option<f64>,
    passed: bool,
}

fn cmd_certify(args: &CertifyArgs) -> Outcome {
    if !(args.tol > 0.0) {
        return Err(Failure::Usage(format!("tol must be positive, got {}", args.tol)));
    }
    let poles = sorted_poles(args.function, args.base, args.radius)?;
    let mut rows = Vec::with_capacity(poles.len());
    for p in &poles {
        let r = residue_check(p, args.tol)?;
        rows.push(CertifyRow {
            k: p.lattice_k,
            m: p.lattice_m,
            re: p.location.re,
            im: p.location.im,
            order: p.order,
            formula_re: r.formula_re,
            formula_im: r.formula_im,
            contour_re: r.contour_re,
            contour_im: r.contour_im,
            abs_diff: r.abs_diff,
            laurent2_abs_diff: r.laurent2_abs_diff,
            passed: r.passed,
        });
    }
    let all_passed = rows.iter().all(|r| r.passed);
    match args.format {
        Format::Json => print_json(&json!({
            "function": SeriesTag::from(args.function).to_string(),
            "base": args.base,
            "radius": args.radius,
            "tol": args.tol,
            "all_passed": all_passed,
            "poles": rows,
        }))?,
        Format::Csv => print_csv(
            &rows,
            &[
                "k",
                "m",
                "re",
                "im",
                "order",
                "formula_re",
                "formula_im",
                "contour_re",
                "contour_im",
                "abs_diff",
                "laurent2_abs_diff",
                "passed",
            ],
        )?,
    }
    Ok(if all_passed { 0 } else { EXIT_VERIFY_FAILED })
}

// ---------------------------------------------------------------------------
// delange and plot

#[derive(Serialize)]
struct DelangeRow {
    quantity: &'static str,
    beta: f64,
    argument: f64,
    value: f64,
    tail_bound: f64,
    cutoff_k: usize,
}

fn cmd_delange(args: &DelangeArgs) -> Outcome {
    let beta = beta_param(args.beta)?;
    let trunc = truncation(args.fourier_cutoff)?;
    let (quantity, argument, result) = match (args.n, args.d, args.x) {
        (Some(n), _, _) => ("S_beta", n as f64, s_beta(beta, n, trunc)?),
        (_, Some(n), _) => ("d_beta", n as f64, d_beta(beta, n, trunc)?),
        (_, _, Some(x)) => {
            if !x.is_finite() {
                return Err(Failure::Usage(format!("x must be finite, got {x}")));
            }
            ("h_beta", x, h_beta(beta, x, trunc)?)
        }
        _ => return Err(Failure::Usage("one of --n, --d or --x is required".into())),
    };
    let row = DelangeRow {
        quantity,
        beta: args.beta,
        argument,
        value: result.value,
        tail_bound: result.tail_bound,
        cutoff_k: trunc.cutoff(),
    };
    match args.format {
        Format::Json => print_json(&serde_json::to_value(&row).map_err(io::Error::from)?)?,
        Format::Csv => print_csv(
            &[row],
            &["quantity", "beta", "argument", "value", "tail_bound", "cutoff_k"],
        )?,
    }
    Ok(0)
}

fn cmd_plot(args: &PlotArgs) -> Outcome {
    if !(args.step > 0.0 && args.step.is_finite()) {
        return Err(Failure::Usage(format!("step must be positive, got {}", args.step)));
    }
    let mut figures = Vec::new();
    for &n in &args.figures {
        let fig = Figure::ALL
            .iter()
            .copied()
            .find(|f| f.number() == n)
            .ok_or_else(|| Failure::Usage(format!("no figure {n}; choose 1, 2 or 3")))?;
        if !figures.contains(&fig) {
            figures.push(fig);
        }
    }
    if figures.is_empty() {
        figures = Figure::ALL.to_vec();
    }
    let trunc = truncation(args.fourier_cutoff)?;
    let lo = figures.iter().map(|f| f.range().0).fold(f64::MAX, f64::min);
    let hi = figures.iter().map(|f| f.range().1).fold(f64::MIN, f64::max);
    let betas = beta_grid(lo, hi, args.step)?;
    let grids = figure_grids(&figures, &betas, trunc, true)?;

    fs::create_dir_all(&args.out_dir)?;
    let mut written = Vec::new();
    for (fig, rows) in figures.iter().zip(&grids) {
        if let Some(bad) = rows.iter().find(|r| !r.value.is_finite()) {
            return Err(Failure::Numeric(Error::NonConvergence(format!(
                "figure {} produced a non-finite value at beta = {}",
                fig.number(),
                bad.beta
            ))));
        }
        let path = args.out_dir.join(fig.file_name());
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)?;
        writer.write_record(["beta", "x_or_n", "value", "tail_bound", "cutoff_K"])?;
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        written.push(json!({
            "figure": fig.number(),
            "path": path.display().to_string(),
            "rows": rows.len(),
        }));
    }
    print_json(&json!({ "files": written, "step": args.step, "fourier_cutoff": trunc.cutoff() }))?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify

fn cmd_verify(args: &VerifyArgs) -> Outcome {
    let options = VerifyOptions {
        tol_scale: args.tol_scale,
        only: args.only.clone(),
    };
    let reports = run_suite(&options)?;
    let all_passed = reports.iter().all(|r| r.passed);
    match args.format {
        ReportFormat::Text => {
            let mut out = io::stdout().lock();
            for r in &reports {
                writeln!(out, "{}", r.line())?;
            }
            let passed = reports.iter().filter(|r| r.passed).count();
            writeln!(out, "{passed}/{} criteria passed", reports.len())?;
        }
        ReportFormat::Json => print_json(&json!({
            "all_passed": all_passed,
            "tol_scale": args.tol_scale,
            "criteria": reports,
        }))?,
    }
    Ok(if all_passed { 0 } else { EXIT_VERIFY_FAILED })
}

fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Poles(a) => cmd_poles(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Delange(a) => cmd_delange(a),
        Command::Plot(a) => cmd_plot(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn error_object(kind: &str, message: &str, location: Option<Complex64>) -> Value {
    let mut obj = json!({ "error": true, "kind": kind, "message": message });
    if let Some(z) = location {
        obj["location"] = complex_json(z);
    }
    obj
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(message)) => {
            let _ = print_json(&error_object("InvalidInput", &message, None));
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(e)) => {
            let location = match &e {
                Error::PoleAt(z) => Some(*z),
                _ => None,
            };
            let _ = print_json(&error_object(e.kind(), &e.to_string(), location));
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}
