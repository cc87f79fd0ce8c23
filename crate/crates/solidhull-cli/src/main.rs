//! Command-line front end for the solid-hull toolkit.
//!
//! Every operation of the core crate is exposed as a subcommand with
//! machine-readable output: `--format json` (default) prints one JSON
//! document, `--format csv` prints the tabular section of the same report
//! as RFC-4180 rows. Floating-point values are rounded to 12 significant
//! digits before printing; infinities appear as the strings `"inf"` /
//! `"-inf"`. Identical invocations (including `--seed`) produce
//! byte-identical output.
//!
//! Exit codes: 0 on success, 1 when `verify` finds a fitted order outside
//! its tolerance band, 2 on usage or validation errors.
//!
//! Set `SOLIDHULL_LOG` to any non-empty value other than `0` for timing
//! and configuration diagnostics on stderr.

use std::fs::File;
use std::io::Read;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use solidhull_core::{
    critical_radius, gap_expansion, hull_norm_profile, inverse_weight_multiplier,
    membership_diagnostic, multiplier_check, multiplier_target, verify_proof_bounds,
    verify_radius_ratio, verify_rm_expansion, verify_weight_ratio,
};
use solidhull_core::numeric::{float_json, geometric_grid, integer_geometric_grid};
use solidhull_core::sequence::{extremal_block_sequence, random_sequence, unit_envelope};
use solidhull_core::{
    BlockMode, BlockSchemeF64, CoefficientSequenceF64, ExpWeightParamsF64, ExpansionCheckF64,
    ExpansionOrder, ExplicitFormSpec, FrameReportF64, InnerFactor, LinearTermSign, QuadCoeff,
    RatioAnchor, SequenceFormat, SolveOptionsF64,
};

#[derive(Parser)]
#[command(
    name = "solidhull",
    version,
    about = "Block decompositions, critical radii, and solid-hull norms for exponentially weighted spaces of analytic functions on the unit disc"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived constants of the weight (exponents, gap
    /// coefficient, block scale) and their defining-identity residuals.
    Constants {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Solve for critical radii r_m maximizing r^m v(r), with the
    /// closed-form gap expansion and its error, for one degree or a
    /// geometric range of degrees.
    Rm {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Degree m >= 1 (the smallest degree when --m-max is given).
        #[arg(long)]
        m: f64,
        /// Largest degree of a geometric degree grid.
        #[arg(long)]
        m_max: Option<f64>,
        /// Number of grid degrees when --m-max is given.
        #[arg(long, default_value_t = 16)]
        points: usize,
    },
    /// Print the block boundaries of a scheme.
    Blocks {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
    },
    /// Survey the frame condition: per-block peak-separation ratios
    /// A(n), B(n), their extremes, and the predicted common limit.
    Framecheck {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        /// First surveyed block.
        #[arg(long, default_value_t = 2)]
        n_min: u64,
    },
    /// Per-block canonical norms of a coefficient sequence: the
    /// solid-hull norm profile with its sup and tail slope.
    Hullnorm {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        input: InputArgs,
        /// First profiled block (default: the scheme's first block).
        #[arg(long)]
        n_min: Option<u64>,
    },
    /// Hull-norm profile plus a bounded/growing/inconclusive verdict on
    /// whether the sequence lies in the solid hull.
    Membership {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        scheme: SchemeArgs,
        #[command(flatten)]
        input: InputArgs,
        /// First profiled block (default: the scheme's first block).
        #[arg(long)]
        n_min: Option<u64>,
        /// Tail slope magnitude still considered flat.
        #[arg(long, default_value_t = 0.05)]
        slope_tol: f64,
    },
    /// Coefficient-multiplier diagnostic into ell^p: the mixed-norm
    /// target space and the weighted per-block aggregate of a multiplier
    /// sequence. Without an input sequence, prints the target space only.
    Multiplier {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        form: FormArgs,
        /// Target exponent p in [1, inf] ("inf" accepted).
        #[arg(long, value_parser = parse_extended_float)]
        p: f64,
        /// Read the multiplier sequence from a file ("-" for stdin).
        #[arg(long)]
        input: Option<String>,
        /// Input encoding; inferred from the file extension when omitted.
        #[arg(long, value_enum)]
        input_format: Option<FormatArg>,
        /// Use the inverse-weight multiplier built from the explicit
        /// block weights instead of reading one.
        #[arg(long)]
        inverse_weight: bool,
        /// First diagnosed block.
        #[arg(long, default_value_t = 2)]
        n_min: u64,
        /// Last diagnosed block.
        #[arg(long, default_value_t = 50)]
        n_max: u64,
    },
    /// Re-derive the asymptotic laws numerically and fit their
    /// convergence orders; exits 1 if a fitted order misses its
    /// predicted value by more than --band.
    Verify {
        #[command(flatten)]
        weight: WeightArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Which law(s) to check.
        #[arg(long, value_enum, default_value = "all")]
        which: WhichArg,
        /// Expansion order for the critical-gap law.
        #[arg(long, value_enum, default_value = "second")]
        order: OrderArg,
        /// Anchor degree for the radius-ratio law.
        #[arg(long, value_enum, default_value = "next")]
        anchor: AnchorArg,
        /// Tolerance band around each predicted order.
        #[arg(long, default_value_t = 0.25)]
        band: f64,
        /// Smallest degree of the critical-gap grid.
        #[arg(long, default_value_t = 1e2)]
        m_min: f64,
        /// Largest degree of the critical-gap grid.
        #[arg(long, default_value_t = 1e6)]
        m_max: f64,
        /// Number of degrees on the critical-gap grid.
        #[arg(long, default_value_t = 17)]
        m_points: usize,
        /// Smallest block of the ratio-law grids.
        #[arg(long, default_value_t = 10)]
        n_lo: u64,
        /// Largest block of the ratio-law grids.
        #[arg(long, default_value_t = 500)]
        n_hi: u64,
        /// Number of blocks on the ratio-law grids.
        #[arg(long, default_value_t = 24)]
        n_points: usize,
        /// Degree samples per block for the two-sided bound survey.
        #[arg(long, default_value_t = 12)]
        m_samples: usize,
    },
}

#[derive(Args)]
struct WeightArgs {
    /// Weight strength a > 0.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Weight exponent b in (0, 2].
    #[arg(long, default_value_t = 1.0)]
    b: f64,
}

impl WeightArgs {
    fn params(&self) -> Result<ExpWeightParamsF64, String> {
        ExpWeightParamsF64::new(self.a, self.b).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output encoding.
    #[arg(long, value_enum, default_value = "json")]
    format: OutputFormat,
}

#[derive(Args)]
struct SolverArgs {
    /// Relative tolerance of the critical-radius solver.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    /// Worker threads for per-block work (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
}

impl SolverArgs {
    fn opts(&self) -> SolveOptionsF64 {
        SolveOptionsF64 { tol: self.tol, max_iter: 1000 }
    }

    fn install_pool(&self) {
        if let Some(threads) = self.threads {
            // A pool can only be installed once per process; a second
            // attempt (e.g. in-process tests) keeps the existing one.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
}

#[derive(Args)]
struct SchemeArgs {
    /// Block boundary mode.
    #[arg(long, value_enum, default_value = "canonical")]
    mode: ModeArg,
    /// Last block of the scheme.
    #[arg(long, default_value_t = 50)]
    n_max: u64,
}

impl SchemeArgs {
    fn scheme(&self, params: ExpWeightParamsF64) -> Result<BlockSchemeF64, String> {
        BlockSchemeF64::new(params, self.mode.into(), self.n_max).map_err(|e| e.to_string())
    }
}

#[derive(Args)]
struct InputArgs {
    /// Read coefficient magnitudes from a file ("-" for stdin).
    #[arg(long)]
    input: Option<String>,
    /// Input encoding; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    input_format: Option<FormatArg>,
    /// Use the extremal unit-ball sequence of the selected scheme.
    #[arg(long)]
    extremal: bool,
    /// Use the single monomial of this degree.
    #[arg(long)]
    monomial: Option<u64>,
    /// Use a seeded random sequence with this many coefficients.
    #[arg(long)]
    random_length: Option<u64>,
    /// Seed for --random-length.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InputArgs {
    fn load(
        &self,
        scheme: &BlockSchemeF64,
        opts: &SolveOptionsF64,
    ) -> Result<CoefficientSequenceF64, String> {
        let sources = usize::from(self.input.is_some())
            + usize::from(self.extremal)
            + usize::from(self.monomial.is_some())
            + usize::from(self.random_length.is_some());
        if sources != 1 {
            return Err(
                "exactly one of --input, --extremal, --monomial, --random-length is required"
                    .to_string(),
            );
        }
        if let Some(path) = &self.input {
            return read_sequence(path, self.input_format);
        }
        if self.extremal {
            return extremal_block_sequence(scheme, opts).map_err(|e| e.to_string());
        }
        if let Some(m) = self.monomial {
            return Ok(CoefficientSequenceF64::unit_monomial(m));
        }
        let length = self.random_length.expect("one source remains");
        if length == 0 {
            return Err("--random-length must be at least 1".to_string());
        }
        Ok(random_sequence(self.seed, length, &unit_envelope(length - 1)))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Canonical,
    Theorem,
}

impl From<ModeArg> for BlockMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Canonical => BlockMode::Canonical,
            ModeArg::Theorem => BlockMode::Theorem,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    First,
    Second,
    Auxiliary,
}

impl From<OrderArg> for ExpansionOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::First => ExpansionOrder::First,
            OrderArg::Second => ExpansionOrder::Second,
            OrderArg::Auxiliary => ExpansionOrder::Auxiliary,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AnchorArg {
    Next,
    Current,
}

impl From<AnchorArg> for RatioAnchor {
    fn from(a: AnchorArg) -> Self {
        match a {
            AnchorArg::Next => RatioAnchor::Next,
            AnchorArg::Current => RatioAnchor::Current,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    Rm,
    WeightRatio,
    RadiusRatio,
    ProofBounds,
    All,
}

#[derive(Args)]
struct FormArgs {
    /// Quadratic exponent coefficient of the explicit block weight.
    #[arg(long, value_enum, default_value = "stated")]
    variant: VariantArg,
    /// Inner radius factor of the explicit block weight.
    #[arg(long, value_enum, default_value = "general")]
    inner: InnerArg,
    /// Sign of the linear exponent term (matters only for b > 1).
    #[arg(long, value_enum, default_value = "positive")]
    sign: SignArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Stated,
    Derived,
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    General,
    Specialized,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignArg {
    Positive,
    Negative,
}

impl FormArgs {
    fn spec(&self) -> ExplicitFormSpec {
        ExplicitFormSpec {
            quad: match self.variant {
                VariantArg::Stated => QuadCoeff::Stated,
                VariantArg::Derived => QuadCoeff::Derived,
            },
            inner: match self.inner {
                InnerArg::General => InnerFactor::General,
                InnerArg::Specialized => InnerFactor::Specialized,
            },
            linear_sign: match self.sign {
                SignArg::Positive => LinearTermSign::Positive,
                SignArg::Negative => LinearTermSign::Negative,
            },
        }
    }
}

fn parse_extended_float(s: &str) -> Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| e.to_string()),
    }
}

fn verbose() -> bool {
    std::env::var("SOLIDHULL_LOG").map(|v| !v.is_empty() && v != "0").unwrap_or(false)
}

fn main() {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(cli.command) {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            2
        }
    };
    if verbose() {
        eprintln!("solidhull: finished in {:.3}s with exit code {code}", started.elapsed().as_secs_f64());
    }
    std::process::exit(code);
}

fn run(command: Command) -> Result<i32, String> {
    match command {
        Command::Constants { weight, output } => cmd_constants(&weight, &output),
        Command::Rm { weight, output, solver, m, m_max, points } => {
            cmd_rm(&weight, &output, &solver, m, m_max, points)
        }
        Command::Blocks { weight, output, scheme } => cmd_blocks(&weight, &output, &scheme),
        Command::Framecheck { weight, output, solver, scheme, n_min } => {
            cmd_framecheck(&weight, &output, &solver, &scheme, n_min)
        }
        Command::Hullnorm { weight, output, solver, scheme, input, n_min } => {
            cmd_hullnorm(&weight, &output, &solver, &scheme, &input, n_min)
        }
        Command::Membership { weight, output, solver, scheme, input, n_min, slope_tol } => {
            cmd_membership(&weight, &output, &solver, &scheme, &input, n_min, slope_tol)
        }
        Command::Multiplier {
            weight,
            output,
            solver,
            form,
            p,
            input,
            input_format,
            inverse_weight,
            n_min,
            n_max,
        } => cmd_multiplier(
            &weight,
            &output,
            &solver,
            &form,
            p,
            input.as_deref(),
            input_format,
            inverse_weight,
            n_min,
            n_max,
        ),
        Command::Verify {
            weight,
            output,
            solver,
            which,
            order,
            anchor,
            band,
            m_min,
            m_max,
            m_points,
            n_lo,
            n_hi,
            n_points,
            m_samples,
        } => cmd_verify(
            &weight, &output, &solver, which, order, anchor, band, m_min, m_max, m_points, n_lo,
            n_hi, n_points, m_samples,
        ),
    }
}

fn cmd_constants(weight: &WeightArgs, output: &OutputArgs) -> Result<i32, String> {
    let params = weight.params()?;
    let c = params.constants();
    let residuals = params.identity_residuals();
    if verbose() {
        eprintln!("solidhull: constants for a={}, b={}", params.a(), params.b());
    }
    match output.format {
        OutputFormat::Json => emit_json(json!({
            "a": float_json(params.a()),
            "b": float_json(params.b()),
            "alpha": float_json(c.alpha),
            "beta": float_json(c.beta),
            "gap_coeff": float_json(c.gap_coeff),
            "block_scale": float_json(c.block_scale),
            "identity_residuals": [float_json(residuals[0]), float_json(residuals[1])],
        })),
        OutputFormat::Csv => {
            let mut rows = vec!["a,b,alpha,beta,gap_coeff,block_scale".to_string()];
            rows.push(format!(
                "{},{},{},{},{},{}",
                sig12(params.a()),
                sig12(params.b()),
                sig12(c.alpha),
                sig12(c.beta),
                sig12(c.gap_coeff),
                sig12(c.block_scale),
            ));
            emit_rows(rows)
        }
    }
    Ok(0)
}

fn cmd_rm(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    m: f64,
    m_max: Option<f64>,
    points: usize,
) -> Result<i32, String> {
    let params = weight.params()?;
    if !(m >= 1.0) {
        return Err(format!("--m must be at least 1, got {m}"));
    }
    let opts = solver.opts();
    solver.install_pool();
    let degrees = match m_max {
        Some(hi) => geometric_grid(m, hi, points).map_err(|e| e.to_string())?,
        None => vec![m],
    };
    use rayon::prelude::*;
    let rows: Result<Vec<Value>, String> = degrees
        .par_iter()
        .map(|&deg| {
            let solved = critical_radius(&params, deg, &opts).map_err(|e| e.to_string())?;
            let expansion = gap_expansion(&params, deg, ExpansionOrder::Second).ok();
            Ok(json!({
                "m": float_json(deg),
                "radius": float_json(solved.radius),
                "gap": float_json(solved.gap),
                "expansion_gap": expansion.map(float_json),
                "expansion_error": expansion.map(|e| float_json(e - solved.gap)),
                "iterations": solved.iterations,
            }))
        })
        .collect();
    let rows = rows?;
    match output.format {
        OutputFormat::Json => emit_json(json!({
            "a": float_json(params.a()),
            "b": float_json(params.b()),
            "rows": rows,
        })),
        OutputFormat::Csv => {
            let mut out = vec!["m,radius,gap,expansion_gap,expansion_error,iterations".to_string()];
            for row in &rows {
                out.push(format!(
                    "{},{},{},{},{},{}",
                    csv_cell(&row["m"]),
                    csv_cell(&row["radius"]),
                    csv_cell(&row["gap"]),
                    csv_cell(&row["expansion_gap"]),
                    csv_cell(&row["expansion_error"]),
                    csv_cell(&row["iterations"]),
                ));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

fn cmd_blocks(weight: &WeightArgs, output: &OutputArgs, scheme: &SchemeArgs) -> Result<i32, String> {
    let params = weight.params()?;
    let scheme = scheme.scheme(params)?;
    let mut rows = Vec::new();
    for n in scheme.n_min()..=scheme.n_max() + 1 {
        rows.push((n, scheme.boundary(n).map_err(|e| e.to_string())?));
    }
    match output.format {
        OutputFormat::Json => emit_json(json!({
            "a": float_json(scheme.params().a()),
            "b": float_json(scheme.params().b()),
            "mode": mode_label(scheme.mode()),
            "scale": float_json(scheme.scale()),
            "n_min": scheme.n_min(),
            "n_max": scheme.n_max(),
            "boundaries": rows.iter().map(|&(n, m)| json!({"n": n, "m": m})).collect::<Vec<_>>(),
        })),
        OutputFormat::Csv => {
            let mut out = vec!["n,boundary".to_string()];
            for (n, m) in rows {
                out.push(format!("{n},{m}"));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

fn cmd_framecheck(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    scheme: &SchemeArgs,
    n_min: u64,
) -> Result<i32, String> {
    let params = weight.params()?;
    let scheme = scheme.scheme(params)?;
    let opts = solver.opts();
    solver.install_pool();
    let report = scheme
        .check_frame_condition(n_min, scheme.n_max(), &opts)
        .map_err(|e| e.to_string())?;
    match output.format {
        OutputFormat::Json => emit_json(frame_report_json(&report)),
        OutputFormat::Csv => {
            let mut out = vec!["n,m_lo,m_hi,r_lo,r_hi,log_a,log_b".to_string()];
            for row in &report.rows {
                out.push(format!(
                    "{},{},{},{},{},{},{}",
                    row.n,
                    row.m_lo,
                    row.m_hi,
                    sig12(row.r_lo),
                    sig12(row.r_hi),
                    sig12(row.log_a),
                    sig12(row.log_b),
                ));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

fn frame_report_json(report: &FrameReportF64) -> Value {
    json!({
        "n_lo": report.n_lo,
        "n_hi": report.n_hi,
        "min_log_a": float_json(report.min_log_a),
        "max_log_a": float_json(report.max_log_a),
        "min_log_b": float_json(report.min_log_b),
        "max_log_b": float_json(report.max_log_b),
        "limit_estimate_log_a": float_json(report.limit_estimate_log_a),
        "limit_estimate_log_b": float_json(report.limit_estimate_log_b),
        "predicted_log_limit": float_json(report.predicted_log_limit),
        "last_n_with_small_frame": report.last_n_with_small_frame,
        "rows": report.rows.iter().map(|row| json!({
            "n": row.n,
            "m_lo": row.m_lo,
            "m_hi": row.m_hi,
            "r_lo": float_json(row.r_lo),
            "r_hi": float_json(row.r_hi),
            "log_a": float_json(row.log_a),
            "log_b": float_json(row.log_b),
        })).collect::<Vec<_>>(),
    })
}

fn cmd_hullnorm(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    scheme_args: &SchemeArgs,
    input: &InputArgs,
    n_min: Option<u64>,
) -> Result<i32, String> {
    let params = weight.params()?;
    let scheme = scheme_args.scheme(params)?;
    let opts = solver.opts();
    solver.install_pool();
    let seq = input.load(&scheme, &opts)?;
    let n_lo = n_min.unwrap_or_else(|| scheme.n_min());
    let profile =
        hull_norm_profile(&scheme, &seq, n_lo, scheme.n_max(), &opts).map_err(|e| e.to_string())?;
    match output.format {
        OutputFormat::Json => emit_json(profile.to_json()),
        OutputFormat::Csv => {
            let mut out = vec!["n,log_value".to_string()];
            for &(n, v) in &profile.per_block {
                out.push(format!("{n},{}", sig12(v)));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_membership(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    scheme_args: &SchemeArgs,
    input: &InputArgs,
    n_min: Option<u64>,
    slope_tol: f64,
) -> Result<i32, String> {
    let params = weight.params()?;
    let scheme = scheme_args.scheme(params)?;
    let opts = solver.opts();
    solver.install_pool();
    let seq = input.load(&scheme, &opts)?;
    let n_lo = n_min.unwrap_or_else(|| scheme.n_min());
    let report = membership_diagnostic(&scheme, &seq, n_lo, scheme.n_max(), slope_tol, &opts)
        .map_err(|e| e.to_string())?;
    match output.format {
        OutputFormat::Json => emit_json(report.to_json()),
        OutputFormat::Csv => {
            let mut out = vec!["n,log_value".to_string()];
            for &(n, v) in &report.profile.per_block {
                out.push(format!("{n},{}", sig12(v)));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_multiplier(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    form: &FormArgs,
    p: f64,
    input: Option<&str>,
    input_format: Option<FormatArg>,
    inverse_weight: bool,
    n_min: u64,
    n_max: u64,
) -> Result<i32, String> {
    let params = weight.params()?;
    solver.install_pool();
    let spec = form.spec();
    let sources = usize::from(input.is_some()) + usize::from(inverse_weight);
    if sources == 0 {
        // Target space only.
        let target = multiplier_target(p).map_err(|e| e.to_string())?;
        match output.format {
            OutputFormat::Json => emit_json(json!({
                "case": target.case.to_string(),
                "inner_exponent": float_json(target.r),
                "outer_exponent": float_json(target.s),
            })),
            OutputFormat::Csv => emit_rows(vec![
                "case,inner_exponent,outer_exponent".to_string(),
                format!("{},{},{}", target.case, sig12(target.r), sig12(target.s)),
            ]),
        }
        return Ok(0);
    }
    if sources > 1 {
        return Err("--input and --inverse-weight are mutually exclusive".to_string());
    }
    let lambda = match input {
        Some(path) => read_sequence(path, input_format)?,
        None => inverse_weight_multiplier(&params, &spec, n_max),
    };
    let diag =
        multiplier_check(&params, &spec, &lambda, p, n_min, n_max).map_err(|e| e.to_string())?;
    match output.format {
        OutputFormat::Json => emit_json(diag.to_json()),
        OutputFormat::Csv => {
            let mut out = vec!["n,log_value".to_string()];
            for &(n, v) in &diag.per_block {
                out.push(format!("{n},{}", sig12(v)));
            }
            emit_rows(out)
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    weight: &WeightArgs,
    output: &OutputArgs,
    solver: &SolverArgs,
    which: WhichArg,
    order: OrderArg,
    anchor: AnchorArg,
    band: f64,
    m_min: f64,
    m_max: f64,
    m_points: usize,
    n_lo: u64,
    n_hi: u64,
    n_points: usize,
    m_samples: usize,
) -> Result<i32, String> {
    let params = weight.params()?;
    if !(band > 0.0) {
        return Err(format!("--band must be positive, got {band}"));
    }
    let opts = solver.opts();
    solver.install_pool();
    let mut checks: Vec<ExpansionCheckF64> = Vec::new();
    if matches!(which, WhichArg::Rm | WhichArg::All) {
        let grid = geometric_grid(m_min, m_max, m_points).map_err(|e| e.to_string())?;
        checks.push(
            verify_rm_expansion(&params, &grid, order.into(), &opts).map_err(|e| e.to_string())?,
        );
    }
    if matches!(which, WhichArg::WeightRatio | WhichArg::RadiusRatio | WhichArg::All) {
        let grid = integer_geometric_grid(n_lo, n_hi, n_points).map_err(|e| e.to_string())?;
        if matches!(which, WhichArg::WeightRatio | WhichArg::All) {
            checks.push(verify_weight_ratio(&params, &grid, &opts).map_err(|e| e.to_string())?);
        }
        if matches!(which, WhichArg::RadiusRatio | WhichArg::All) {
            checks.push(
                verify_radius_ratio(&params, &grid, anchor.into(), &opts)
                    .map_err(|e| e.to_string())?,
            );
        }
    }
    let bounds = if matches!(which, WhichArg::ProofBounds | WhichArg::All) {
        Some(
            verify_proof_bounds(&params, n_lo.max(2), n_hi, m_samples, &opts)
                .map_err(|e| e.to_string())?,
        )
    } else {
        None
    };

    let mut all_within = true;
    let mut check_values = Vec::new();
    for check in &checks {
        let within = check.within_band(band);
        all_within &= within;
        let mut value = check.to_json();
        let obj = value.as_object_mut().expect("check serializes to an object");
        obj.insert("within_band".into(), within.into());
        check_values.push(value);
    }
    match output.format {
        OutputFormat::Json => {
            let mut doc = Map::new();
            doc.insert("a".into(), float_json(params.a()));
            doc.insert("b".into(), float_json(params.b()));
            doc.insert("band".into(), float_json(band));
            doc.insert("checks".into(), Value::Array(check_values));
            if let Some(report) = &bounds {
                doc.insert("proof_bounds".into(), report.to_json());
            }
            emit_json(Value::Object(doc));
        }
        OutputFormat::Csv => {
            let mut out = vec!["check,x,exact,predicted,residual".to_string()];
            for check in &checks {
                for i in 0..check.xs.len() {
                    out.push(format!(
                        "{},{},{},{},{}",
                        check.label,
                        sig12(check.xs[i]),
                        sig12(check.exact[i]),
                        sig12(check.predicted[i]),
                        sig12(check.residuals[i]),
                    ));
                }
            }
            emit_rows(out);
        }
    }
    Ok(if all_within { 0 } else { 1 })
}

fn mode_label(mode: BlockMode) -> &'static str {
    match mode {
        BlockMode::Canonical => "canonical",
        BlockMode::Theorem => "theorem",
    }
}

fn read_sequence(path: &str, format: Option<FormatArg>) -> Result<CoefficientSequenceF64, String> {
    let format = match format {
        Some(FormatArg::Json) => SequenceFormat::JsonArray,
        Some(FormatArg::Csv) => SequenceFormat::CsvComplex,
        None if path.to_ascii_lowercase().ends_with(".csv") => SequenceFormat::CsvComplex,
        None => SequenceFormat::JsonArray,
    };
    let mut bytes = Vec::new();
    if path == "-" {
        std::io::stdin().read_to_end(&mut bytes).map_err(|e| e.to_string())?;
    } else {
        File::open(path)
            .map_err(|e| format!("{path}: {e}"))?
            .read_to_end(&mut bytes)
            .map_err(|e| format!("{path}: {e}"))?;
    }
    CoefficientSequenceF64::ingest(bytes.as_slice(), format).map_err(|e| e.to_string())
}

/// Round a finite value to 12 significant digits.
fn round12(x: f64) -> f64 {
    format!("{x:.11e}").parse().expect("scientific notation round-trips")
}

/// A float as its shortest decimal form after rounding to 12 significant
/// digits; infinities render as `inf` / `-inf`.
fn sig12(x: f64) -> String {
    if x.is_finite() {
        format!("{}", round12(x))
    } else if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}

/// A JSON value's tabular cell: numbers via [`sig12`], strings bare,
/// null empty.
fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                u.to_string()
            } else {
                sig12(n.as_f64().unwrap_or(f64::NAN))
            }
        }
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Round every fractional number in a JSON tree to 12 significant digits;
/// integer-typed numbers (indices, counts) pass through unchanged.
fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            if n.is_u64() || n.is_i64() {
                Value::Number(n)
            } else {
                let x = round12(n.as_f64().expect("number is f64"));
                serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
            }
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_json).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, val)| (k, round_json(val))).collect())
        }
        other => other,
    }
}

fn emit_json(v: Value) {
    let rounded = round_json(v);
    println!("{}", serde_json::to_string_pretty(&rounded).expect("JSON values serialize"));
}

fn emit_rows(rows: Vec<String>) {
    for row in rows {
        println!("{row}");
    }
}
