//! Command-line front end.
//!
//! Every run is described by a [`RunConfig`]. A JSON file given with
//! `--config` is loaded first, then command-line flags override its fields.
//! The effective configuration (minus the output path) is echoed as the
//! provenance header of every report.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::conditions::{check_boundedness, BoundednessQuery};
use crate::corner::{solve_corner, system_from_specs, CornerReport};
use crate::error::LabError;
use crate::grid::{Grid, GridParams};
use crate::kernels::{tail_bound, KernelSpec};
use crate::operator::{apply_operator, assemble};
use crate::oracle;
use crate::spaces::{weighted_norm, FunctionSpec, SampledFunction, SpaceSpec};
use crate::sweep::{run_boundedness_sweep, write_csv, GridPlan, SweepPlan, CSV_COLUMNS};

pub const THREADS_ENV: &str = "POWERWEIGHT_THREADS";

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_NUMERICAL: i32 = 2;
const EXIT_INAPPLICABLE: i32 = 3;

const EXIT_HELP: &str = "Exit codes:
  0  success
  1  usage error (bad flag, bad mini-language string, invalid parameters)
  2  numerical failure (divergent integral, non-finite value, ill-conditioned system)
  3  a requested theorem is inapplicable (s1 >= 0); the report is still written

Errors are printed to stderr as one line: error kind=<kind> code=<code> reason=\"...\"";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub r_schedule: Vec<f64>,
    pub grid: GridPlan,
    pub node_budget: usize,
    pub gamma_tol: f64,
    pub gamma_grow: f64,
    pub record_timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        let plan = SweepPlan::new(Vec::new(), KernelSpec::envelope(2.0));
        SweepConfig {
            r_schedule: plan.r_schedule,
            grid: plan.grid,
            node_budget: plan.node_budget,
            gamma_tol: plan.gamma_tol,
            gamma_grow: plan.gamma_grow,
            record_timing: plan.record_timing,
        }
    }
}

/// All inputs of a run. Spec-valued fields hold mini-language strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub subcommand: Option<String>,
    pub kernel: String,
    /// Second kernel of the corner system.
    pub kernel2: String,
    pub source: String,
    pub target: String,
    pub function: String,
    /// Second right-hand side of the corner system.
    pub function2: String,
    pub grid: String,
    pub queries: Vec<String>,
    pub points: Vec<f64>,
    pub sweep: SweepConfig,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subcommand: None,
            kernel: "envelope(2)".into(),
            kernel2: "envelope(2)".into(),
            source: "H(-0.5)".into(),
            target: "H(-0.5)".into(),
            function: "indicator(0,1)".into(),
            function2: "gauss(1)".into(),
            grid: "grid(100,16,1.3,8)".into(),
            queries: Vec::new(),
            points: vec![0.0, 1.0, 5.0, 50.0],
            sweep: SweepConfig::default(),
            output: None,
            format: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("bad config: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn provenance(&self) -> String {
        let mut shown = self.clone();
        shown.output = None;
        shown.to_json()
    }

    fn kernel(&self) -> Result<KernelSpec, CliError> {
        Ok(self.kernel.parse()?)
    }

    fn grid(&self) -> Result<Arc<Grid>, CliError> {
        let params: GridParams = self.grid.parse()?;
        Ok(Arc::new(params.build()?))
    }

    fn queries(&self) -> Result<Vec<BoundednessQuery>, CliError> {
        Ok(self.queries.iter().map(|q| q.parse()).collect::<crate::Result<Vec<_>>>()?)
    }

    pub fn sweep_plan(&self) -> Result<SweepPlan, CliError> {
        let mut plan = SweepPlan::new(self.queries()?, self.kernel()?);
        plan.r_schedule = self.sweep.r_schedule.clone();
        plan.grid = self.sweep.grid;
        plan.seed = self.seed;
        plan.node_budget = self.sweep.node_budget;
        plan.gamma_tol = self.sweep.gamma_tol;
        plan.gamma_grow = self.sweep.gamma_grow;
        plan.record_timing = self.sweep.record_timing;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub reason: String,
}

impl CliError {
    fn usage(reason: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "usage", reason: reason.into() }
    }

    fn io(reason: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, kind: "io", reason: reason.into() }
    }

    pub fn line(&self) -> String {
        let reason = self.reason.replace('\n', " ").replace('"', "'");
        format!("error kind={} code={} reason=\"{}\"", self.kind, self.code, reason.trim())
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        let (code, kind) = match &e {
            LabError::Numerical(_) => (EXIT_NUMERICAL, "numerical"),
            LabError::Divergence { .. } => (EXIT_NUMERICAL, "divergence"),
            LabError::IllConditioned { .. } => (EXIT_NUMERICAL, "ill_conditioned"),
            LabError::Domain(_) => (EXIT_USAGE, "domain"),
            LabError::Structural(_) => (EXIT_USAGE, "structural"),
            LabError::Plan(_) => (EXIT_USAGE, "plan"),
            LabError::Parse(_) => (EXIT_USAGE, "parse"),
        };
        CliError { code, kind, reason: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "powerweight",
    version,
    about = "Integral operators with power-envelope kernels on power-weighted Lp spaces",
    after_help = EXIT_HELP
)]
struct Cli {
    /// JSON run configuration; command-line flags override its fields
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Output format [default: json, csv for sweep]
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
    /// Random seed recorded with the run [default: 0]
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the sufficient condition of one theorem
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Check(CheckArgs),
    /// Weighted norm of a function by quadrature
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Norm(NormArgs),
    /// Evaluate (Kf)(x) by quadrature
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Apply(ApplyArgs),
    /// Assemble the discretized operator and estimate its norm
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Opnorm(OpnormArgs),
    /// Truncation sweep over a radius schedule (CSV by default)
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Sweep(SweepArgs),
    /// Solve the coupled two-equation system
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Corner(CornerArgs),
    /// Closed-form reference values
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Theorem number: 1 (H), 2 (Hsp) or 3 (Hps)
    #[arg(long)]
    thm: Option<u8>,
    /// Source exponent s1 (theorems need s1 < 0)
    #[arg(long)]
    s1: Option<f64>,
    /// Target exponent s2
    #[arg(long)]
    s2: Option<f64>,
    /// Source integrability exponent [default: 2]
    #[arg(long)]
    p1: Option<f64>,
    /// Target integrability exponent [default: 2]
    #[arg(long)]
    p2: Option<f64>,
    /// Kernel decay exponent
    #[arg(long)]
    kappa: Option<f64>,
    /// Whole query in mini-language form, e.g. thm2(-0.5,0,3,2,2)
    #[arg(long, conflicts_with_all = ["thm", "s1", "s2", "p1", "p2", "kappa"])]
    query: Option<String>,
}

#[derive(Debug, Args)]
struct NormArgs {
    /// Space: H(s), Hsp(s,p) or Hps(p,s) [default: H(-0.5)]
    #[arg(long)]
    space: Option<String>,
    /// Function: powerlaw(t), indicator(a,b), gauss(sigma), bump(c,w) [default: indicator(0,1)]
    #[arg(long)]
    function: Option<String>,
    /// Grid: grid(R,panels,grading,order) [default: grid(100,16,1.3,8)]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct ApplyArgs {
    /// Kernel: envelope(k), envelope(k,c), cosmod(k,w), altmod(k) [default: envelope(2)]
    #[arg(long)]
    kernel: Option<String>,
    /// Function sampled on the grid [default: indicator(0,1)]
    #[arg(long)]
    function: Option<String>,
    /// Quadrature grid [default: grid(100,16,1.3,8)]
    #[arg(long)]
    grid: Option<String>,
    /// Evaluation points, comma separated [default: 0,1,5,50]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct OpnormArgs {
    /// Kernel [default: envelope(2)]
    #[arg(long)]
    kernel: Option<String>,
    /// Source space [default: H(-0.5)]
    #[arg(long)]
    source: Option<String>,
    /// Target space [default: H(-0.5)]
    #[arg(long)]
    target: Option<String>,
    /// Grid used for both source and target [default: grid(100,16,1.3,8)]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Query, repeatable: thm1(s1,s2,kappa) or thm2|thm3(s1,s2,p1,p2,kappa)
    #[arg(long = "query")]
    queries: Vec<String>,
    /// Kernel family; each query's kappa replaces its exponent [default: envelope(2)]
    #[arg(long)]
    kernel: Option<String>,
    /// Increasing radii, comma separated [default: 10,40,160,640]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    r_schedule: Option<Vec<f64>>,
    /// Panels per side at the smallest radius [default: 12]
    #[arg(long)]
    base_panels: Option<usize>,
    /// Panels per side added per factor 4 in radius [default: 4]
    #[arg(long)]
    step_panels: Option<usize>,
    /// Geometric panel grading [default: 1.3]
    #[arg(long)]
    grading: Option<f64>,
    /// Gauss-Legendre nodes per panel [default: 8]
    #[arg(long)]
    order: Option<usize>,
    /// Largest admissible node count [default: 4000]
    #[arg(long)]
    node_budget: Option<usize>,
    /// |gamma| below this is saturating [default: 0.05]
    #[arg(long)]
    gamma_tol: Option<f64>,
    /// gamma above this is growing [default: 0.1]
    #[arg(long)]
    gamma_grow: Option<f64>,
    /// Record wall-clock time per cell (output is then not reproducible)
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Args)]
struct CornerArgs {
    /// First kernel [default: envelope(2)]
    #[arg(long)]
    kernel: Option<String>,
    /// Second kernel [default: envelope(2)]
    #[arg(long)]
    kernel2: Option<String>,
    /// Space used for residual norms [default: H(-0.5)]
    #[arg(long)]
    space: Option<String>,
    /// Right-hand side F [default: indicator(0,1)]
    #[arg(long)]
    f: Option<String>,
    /// Right-hand side G [default: gauss(1)]
    #[arg(long)]
    g: Option<String>,
    /// Grid for both variables [default: grid(100,16,1.3,8)]
    #[arg(long)]
    grid: Option<String>,
}

#[derive(Debug, Subcommand)]
enum OracleCommand {
    /// 2 (1+|x|)^(1-a) / (a-1), the integral of (1+|x|+|y|)^(-a) over y
    #[command(allow_negative_numbers = true, after_help = EXIT_HELP)]
    Majorant {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        a: f64,
    },
    /// Weighted norm of (1+|x|)^(-t), on the whole line or on [-R, R]
    #[command(name = "powerlaw-norm", allow_negative_numbers = true, after_help = EXIT_HELP)]
    PowerlawNorm {
        #[arg(long)]
        t: f64,
        /// Space, e.g. H(-1) or Hsp(-1,4)
        #[arg(long)]
        space: String,
        /// Truncation radius; omitted means the whole line
        #[arg(long)]
        radius: Option<f64>,
    },
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    tool: &'static str,
    config: serde_json::Value,
    result: &'a T,
}

fn tool_id() -> &'static str {
    concat!("powerweight ", env!("CARGO_PKG_VERSION"))
}

fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var(THREADS_ENV) {
        if let Ok(n) = v.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs the tool on `argv` (including the program name) and returns the
/// exit code. Reports go to `stdout` unless an output path is set.
pub fn run_cli<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let first = e.to_string().lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
                    let _ = writeln!(stderr, "{}", CliError::usage(first).line());
                    EXIT_USAGE
                }
            };
        }
    };
    configure_threads();
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.line());
            e.code
        }
    }
}

fn set(slot: &mut String, v: Option<String>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn build_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if cli.output.is_some() {
        cfg.output = cli.output.clone();
    }
    if cli.format.is_some() {
        cfg.format = cli.format;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let name = match &cli.command {
        Command::Check(a) => {
            if let Some(q) = &a.query {
                cfg.queries = vec![q.clone()];
            } else if a.thm.is_some() || a.s1.is_some() || a.s2.is_some() || a.kappa.is_some() {
                let (thm, s1, s2, kappa) = match (a.thm, a.s1, a.s2, a.kappa) {
                    (Some(t), Some(s1), Some(s2), Some(k)) => (t, s1, s2, k),
                    _ => return Err(CliError::usage("check needs --thm, --s1, --s2 and --kappa (or --query)")),
                };
                let theorem = crate::conditions::Theorem::from_number(thm)?;
                let q = BoundednessQuery {
                    theorem,
                    s1,
                    s2,
                    p1: a.p1.unwrap_or(2.0),
                    p2: a.p2.unwrap_or(2.0),
                    kappa,
                };
                q.validate()?;
                cfg.queries = vec![q.to_string()];
            }
            "check"
        }
        Command::Norm(a) => {
            set(&mut cfg.source, a.space.clone());
            set(&mut cfg.function, a.function.clone());
            set(&mut cfg.grid, a.grid.clone());
            "norm"
        }
        Command::Apply(a) => {
            set(&mut cfg.kernel, a.kernel.clone());
            set(&mut cfg.function, a.function.clone());
            set(&mut cfg.grid, a.grid.clone());
            if let Some(x) = &a.x {
                cfg.points = x.clone();
            }
            "apply"
        }
        Command::Opnorm(a) => {
            set(&mut cfg.kernel, a.kernel.clone());
            set(&mut cfg.source, a.source.clone());
            set(&mut cfg.target, a.target.clone());
            set(&mut cfg.grid, a.grid.clone());
            "opnorm"
        }
        Command::Sweep(a) => {
            if !a.queries.is_empty() {
                cfg.queries = a.queries.clone();
            }
            set(&mut cfg.kernel, a.kernel.clone());
            let s = &mut cfg.sweep;
            if let Some(r) = &a.r_schedule {
                s.r_schedule = r.clone();
            }
            s.grid.base_panels = a.base_panels.unwrap_or(s.grid.base_panels);
            s.grid.step_panels = a.step_panels.unwrap_or(s.grid.step_panels);
            s.grid.grading = a.grading.unwrap_or(s.grid.grading);
            s.grid.panel_order = a.order.unwrap_or(s.grid.panel_order);
            s.node_budget = a.node_budget.unwrap_or(s.node_budget);
            s.gamma_tol = a.gamma_tol.unwrap_or(s.gamma_tol);
            s.gamma_grow = a.gamma_grow.unwrap_or(s.gamma_grow);
            s.record_timing |= a.timing;
            "sweep"
        }
        Command::Corner(a) => {
            set(&mut cfg.kernel, a.kernel.clone());
            set(&mut cfg.kernel2, a.kernel2.clone());
            set(&mut cfg.source, a.space.clone());
            set(&mut cfg.function, a.f.clone());
            set(&mut cfg.function2, a.g.clone());
            set(&mut cfg.grid, a.grid.clone());
            "corner"
        }
        Command::Oracle(_) => "oracle",
    };
    cfg.subcommand = Some(name.to_string());
    Ok(cfg)
}

#[derive(Serialize)]
struct NormResult {
    space: String,
    function: String,
    grid: String,
    nodes: usize,
    norm: f64,
}

#[derive(Serialize)]
struct ApplyPoint {
    x: f64,
    value: f64,
}

#[derive(Serialize)]
struct OpnormResult {
    kernel: String,
    source: String,
    target: String,
    grid: String,
    nodes: usize,
    norm: f64,
    certified: bool,
    converged: bool,
    iterations: usize,
    /// Bound on the neglected `|y| > R` part of the inner integral, when finite.
    tail_bound: Option<f64>,
}

#[derive(Serialize)]
struct OracleResult {
    quantity: &'static str,
    inputs: serde_json::Value,
    value: f64,
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = build_config(&cli)?;
    let format = cfg.format.unwrap_or(match cli.command {
        Command::Sweep(_) => OutputFormat::Csv,
        _ => OutputFormat::Json,
    });
    if format == OutputFormat::Csv && !matches!(cli.command, Command::Sweep(_)) {
        return Err(CliError::usage("csv output is only available for sweep"));
    }
    let mut code = EXIT_OK;
    let body = match &cli.command {
        Command::Check(_) => {
            let queries = cfg.queries()?;
            let [query] = queries.as_slice() else {
                return Err(CliError::usage(format!("check needs exactly one query, got {}", queries.len())));
            };
            let report = check_boundedness(query)?;
            if !report.applicable {
                code = EXIT_INAPPLICABLE;
            }
            json_report(&cfg, &report)
        }
        Command::Norm(_) => {
            let space: SpaceSpec = cfg.source.parse()?;
            let spec: FunctionSpec = cfg.function.parse()?;
            let grid = cfg.grid()?;
            let f = SampledFunction::from_spec(grid.clone(), spec)?;
            let result = NormResult {
                space: space.to_string(),
                function: spec.to_string(),
                grid: cfg.grid.clone(),
                nodes: grid.len(),
                norm: weighted_norm(&f, &space)?,
            };
            json_report(&cfg, &result)
        }
        Command::Apply(_) => {
            let k = cfg.kernel()?;
            let spec: FunctionSpec = cfg.function.parse()?;
            let f = SampledFunction::from_spec(cfg.grid()?, spec)?;
            let points = cfg
                .points
                .iter()
                .map(|&x| Ok(ApplyPoint { x, value: apply_operator(&k, &f, x)? }))
                .collect::<crate::Result<Vec<_>>>()?;
            json_report(&cfg, &points)
        }
        Command::Opnorm(_) => {
            let k = cfg.kernel()?;
            let source: SpaceSpec = cfg.source.parse()?;
            let target: SpaceSpec = cfg.target.parse()?;
            let grid = cfg.grid()?;
            let op = assemble(&k, &source, &target, &grid, &grid)?;
            let est = op.norm_estimate()?;
            let result = OpnormResult {
                kernel: k.to_string(),
                source: source.to_string(),
                target: target.to_string(),
                grid: cfg.grid.clone(),
                nodes: grid.len(),
                norm: est.value,
                certified: est.certified,
                converged: est.converged,
                iterations: est.iterations,
                tail_bound: tail_bound(&k, &source, grid.radius()).ok(),
            };
            json_report(&cfg, &result)
        }
        Command::Sweep(_) => {
            let plan = cfg.sweep_plan()?;
            let result = run_boundedness_sweep(&plan)?;
            if result.queries.iter().any(|q| !q.report.applicable) {
                code = EXIT_INAPPLICABLE;
            }
            match format {
                OutputFormat::Json => json_report(&cfg, &result),
                OutputFormat::Csv => {
                    let header = vec![
                        tool_id().to_string(),
                        format!("config {}", cfg.provenance()),
                        format!("columns {}", CSV_COLUMNS.join(",")),
                    ];
                    let mut buf = Vec::new();
                    write_csv(&result, &header, &mut buf)?;
                    String::from_utf8(buf).map_err(|e| CliError::io(e.to_string()))?
                }
            }
        }
        Command::Corner(_) => {
            let k1 = cfg.kernel()?;
            let k2: KernelSpec = cfg.kernel2.parse()?;
            let space: SpaceSpec = cfg.source.parse()?;
            let f: FunctionSpec = cfg.function.parse()?;
            let g: FunctionSpec = cfg.function2.parse()?;
            let grid = cfg.grid()?;
            let system = system_from_specs(k1, k2, f, g, &grid, &grid, space)?;
            let solution = solve_corner(&system, &grid, &grid)?;
            json_report(&cfg, &CornerReport::new(&system, &solution)?)
        }
        Command::Oracle(OracleCommand::Majorant { x, a }) => {
            let result = OracleResult {
                quantity: "majorant_integral",
                inputs: serde_json::json!({ "x": x, "a": a }),
                value: oracle::majorant(*x, *a)?,
            };
            json_report(&cfg, &result)
        }
        Command::Oracle(OracleCommand::PowerlawNorm { t, space, radius }) => {
            let sp: SpaceSpec = space.parse()?;
            let value = match radius {
                Some(r) => oracle::powerlaw_norm_truncated(*t, &sp, *r)?,
                None => oracle::powerlaw_norm(*t, &sp)?,
            };
            let result = OracleResult {
                quantity: "powerlaw_norm",
                inputs: serde_json::json!({ "t": t, "space": sp.to_string(), "radius": radius }),
                value,
            };
            json_report(&cfg, &result)
        }
    };
    match &cfg.output {
        Some(path) => fs::write(path, body).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?,
        None => stdout.write_all(body.as_bytes()).map_err(|e| CliError::io(e.to_string()))?,
    }
    Ok(code)
}

fn json_report<T: Serialize>(cfg: &RunConfig, result: &T) -> String {
    let config = serde_json::from_str(&cfg.provenance()).expect("config is json");
    let report = Report { tool: tool_id(), config, result };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}
