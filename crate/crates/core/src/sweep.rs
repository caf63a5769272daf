//! Truncation sweeps: discrete operator norms on nested meshes of growing
//! radius, log-log growth fits, the Hölder inner-integral estimate checked
//! numerically, and power-law witness ratios below threshold.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conditions::{check_boundedness, BoundednessQuery, ConditionReport};
use crate::error::{LabError, Result};
use crate::grid::{Grid, DEFAULT_GRADING, DEFAULT_PANEL_ORDER};
use crate::kernels::{envelope, majorant_integral, KernelSpec, Modulation};
use crate::operator::{assemble, empirical_ratio};
use crate::spaces::{weighted_norm, FunctionSpec, SampledFunction};

pub const DEFAULT_R_SCHEDULE: [f64; 4] = [10.0, 40.0, 160.0, 640.0];
pub const DEFAULT_GAMMA_TOL: f64 = 0.05;
pub const DEFAULT_GAMMA_GROW: f64 = 0.1;
pub const DEFAULT_NODE_BUDGET: usize = 4000;

/// How the nested meshes of a sweep are laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPlan {
    /// Panels per side of the mesh at the first radius.
    pub base_panels: usize,
    /// Panels added per side for every factor of 4 in radius.
    pub step_panels: usize,
    pub grading: f64,
    pub panel_order: usize,
}

impl Default for GridPlan {
    fn default() -> Self {
        GridPlan { base_panels: 12, step_panels: 4, grading: DEFAULT_GRADING, panel_order: DEFAULT_PANEL_ORDER }
    }
}

impl GridPlan {
    pub fn grids(&self, schedule: &[f64]) -> Result<Vec<Grid>> {
        Grid::nested(schedule, self.base_panels, self.step_panels, self.grading, self.panel_order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub queries: Vec<BoundednessQuery>,
    /// Kernel family; each query's `kappa` replaces the kernel's.
    pub kernel: KernelSpec,
    pub r_schedule: Vec<f64>,
    pub grid: GridPlan,
    pub seed: u64,
    pub node_budget: usize,
    pub gamma_tol: f64,
    pub gamma_grow: f64,
    /// Record wall-clock time per cell. Off by default so output is
    /// reproducible byte for byte.
    pub record_timing: bool,
}

impl SweepPlan {
    pub fn new(queries: Vec<BoundednessQuery>, kernel: KernelSpec) -> Self {
        SweepPlan {
            queries,
            kernel,
            r_schedule: DEFAULT_R_SCHEDULE.to_vec(),
            grid: GridPlan::default(),
            seed: 0,
            node_budget: DEFAULT_NODE_BUDGET,
            gamma_tol: DEFAULT_GAMMA_TOL,
            gamma_grow: DEFAULT_GAMMA_GROW,
            record_timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Saturating,
    Growing,
    Inconclusive,
}

impl Verdict {
    pub fn classify(gamma: Option<f64>, gamma_tol: f64, gamma_grow: f64) -> Self {
        match gamma {
            Some(g) if g.abs() < gamma_tol => Verdict::Saturating,
            Some(g) if g > gamma_grow => Verdict::Growing,
            _ => Verdict::Inconclusive,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Saturating => "saturating",
            Verdict::Growing => "growing",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub radius: f64,
    pub nodes: usize,
    pub norm: Option<f64>,
    pub certified: bool,
    pub converged: bool,
    pub elapsed_ms: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuerySweep {
    pub query: BoundednessQuery,
    pub report: ConditionReport,
    pub cells: Vec<SweepCell>,
    pub gamma: Option<f64>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub queries: Vec<QuerySweep>,
}

fn now_ms() -> f64 {
    use std::time::{SystemTime, UNIX_EPOCH};
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64() * 1e3).unwrap_or(0.0)
}

pub fn run_boundedness_sweep(plan: &SweepPlan) -> Result<SweepResult> {
    if plan.queries.is_empty() {
        return Ok(SweepResult { queries: Vec::new() });
    }
    if plan.r_schedule.is_empty() {
        return Err(LabError::Plan("empty radius schedule".into()));
    }
    if plan.r_schedule.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(LabError::Plan(format!("radii must be positive, got {:?}", plan.r_schedule)));
    }
    plan.kernel.validate()?;
    let grids: Vec<Arc<Grid>> = plan.grid.grids(&plan.r_schedule)?.into_iter().map(Arc::new).collect();
    let largest = grids.last().map(|g| g.len()).unwrap_or(0);
    if largest > plan.node_budget {
        return Err(LabError::Plan(format!(
            "largest grid has {largest} nodes, budget is {}",
            plan.node_budget
        )));
    }

    let mut out = Vec::with_capacity(plan.queries.len());
    for query in &plan.queries {
        let report = check_boundedness(query)?;
        let kernel = plan.kernel.with_kappa(query.kappa);
        let (source, target) = (query.source_space(), query.target_space());
        let mut cells = Vec::with_capacity(grids.len());
        for grid in &grids {
            let started = plan.record_timing.then(now_ms);
            let estimate = assemble(&kernel, &source, &target, grid, grid).and_then(|op| op.norm_estimate());
            let elapsed_ms = started.map(|t0| now_ms() - t0);
            cells.push(match estimate {
                Ok(est) => SweepCell {
                    radius: grid.radius(),
                    nodes: grid.len(),
                    norm: Some(est.value),
                    certified: est.certified,
                    converged: est.converged,
                    elapsed_ms,
                    error: None,
                },
                Err(e) => SweepCell {
                    radius: grid.radius(),
                    nodes: grid.len(),
                    norm: None,
                    certified: false,
                    converged: false,
                    elapsed_ms,
                    error: Some(e.to_string()),
                },
            });
        }
        let points: Vec<(f64, f64)> = cells
            .iter()
            .filter(|c| c.converged)
            .filter_map(|c| c.norm.map(|n| (c.radius, n)))
            .collect();
        let gamma = fit_growth_exponent(&points).ok();
        out.push(QuerySweep {
            query: *query,
            report,
            cells,
            gamma,
            verdict: Verdict::classify(gamma, plan.gamma_tol, plan.gamma_grow),
        });
    }
    Ok(SweepResult { queries: out })
}

/// Least-squares slope of `log(value)` against `log(R)`.
pub fn fit_growth_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(LabError::Domain(format!("need at least 2 points to fit, got {}", points.len())));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(LabError::Domain("radii must be strictly increasing".into()));
    }
    if points.iter().any(|&(r, v)| !(r > 0.0 && v > 0.0 && v.is_finite())) {
        return Err(LabError::Domain("radii and values must be positive and finite".into()));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(r, v)| (r.ln(), v.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Both sides of the Hölder estimate of the inner integral at a point `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub const HOLDER_SLACK: f64 = 1e-8;

/// `∫ env(x, y) |f(y)| dy <= ||f||_source (∫ (1+|x|+|y|)^(-q1 (a1 + kappa)) dy)^(1/q1)`
/// where `a1` is the source Hölder exponent (`s1`, or `2 s1/p1` for the
/// third family). The left side is computed by quadrature on `f`'s grid,
/// the right side with the closed-form majorant.
pub fn verify_holder_step(k: &KernelSpec, f: &SampledFunction, query: &BoundednessQuery, x: f64) -> Result<HolderCheck> {
    if k.modulation != Modulation::None || k.c_upper != 1.0 {
        return Err(LabError::Domain("Hölder check needs the pure envelope kernel with unit constant".into()));
    }
    query.validate()?;
    let source = query.source_space();
    let q1 = source.q();
    let a1 = source.holder_exponent();
    let majorant = majorant_integral(x, q1 * (a1 + query.kappa))?;
    let grid = f.grid();
    let integrand: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(f.values())
        .map(|(&y, &v)| envelope(x, y, query.kappa) * v.abs())
        .collect();
    let lhs = grid.integrate(&integrand)?;
    let rhs = weighted_norm(f, &source)? * majorant.powf(1.0 / q1);
    Ok(HolderCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + HOLDER_SLACK) })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeCell {
    pub radius: f64,
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

/// Empirical ratios `||K f_t|| / ||f_t||` for `f_t = (1+|y|)^(-t)` on
/// `[-R, R]`, one per radius of the schedule.
pub fn sharpness_probe(
    query: &BoundednessQuery,
    kernel: &KernelSpec,
    t: f64,
    r_schedule: &[f64],
    grid_plan: &GridPlan,
) -> Result<Vec<ProbeCell>> {
    query.validate()?;
    let kernel = kernel.with_kappa(query.kappa);
    let (source, target) = (query.source_space(), query.target_space());
    let grids = grid_plan.grids(r_schedule)?;
    Ok(grids
        .into_iter()
        .map(|grid| {
            let grid = Arc::new(grid);
            let radius = grid.radius();
            let ratio = SampledFunction::from_spec(grid.clone(), FunctionSpec::PowerLaw { t })
                .and_then(|f| empirical_ratio(&kernel, &f, &source, &target, &grid))
                .and_then(|r| {
                    if r.is_finite() {
                        Ok(r)
                    } else {
                        Err(LabError::Numerical(format!("non-finite ratio at R = {radius}")))
                    }
                });
            match ratio {
                Ok(r) => ProbeCell { radius, ratio: Some(r), error: None },
                Err(e) => ProbeCell { radius, ratio: None, error: Some(e.to_string()) },
            }
        })
        .collect())
}

pub const CSV_COLUMNS: [&str; 19] = [
    "row", "query", "theorem", "s1", "s2", "p1", "p2", "kappa", "threshold", "margin", "satisfied", "R", "nodes",
    "norm", "certified", "converged", "elapsed_ms", "gamma", "verdict",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes one `cell` row per (query, R) and one `summary` row per query.
/// `header_lines` are emitted first as `# ` comment lines.
pub fn write_csv<W: Write>(result: &SweepResult, header_lines: &[String], mut out: W) -> Result<()> {
    let io = |e: std::io::Error| LabError::Numerical(format!("write failed: {e}"));
    for line in header_lines {
        writeln!(out, "# {line}").map_err(io)?;
    }
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| LabError::Numerical(format!("csv write failed: {e}"));
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for (qi, qs) in result.queries.iter().enumerate() {
        let q = &qs.query;
        let prefix = |row: &str| {
            vec![
                row.to_string(),
                qi.to_string(),
                q.theorem.to_string(),
                q.s1.to_string(),
                q.s2.to_string(),
                q.p1.to_string(),
                q.p2.to_string(),
                q.kappa.to_string(),
                qs.report.threshold.to_string(),
                qs.report.margin.to_string(),
                qs.report.satisfied.to_string(),
            ]
        };
        for cell in &qs.cells {
            let mut rec = prefix("cell");
            rec.extend([
                cell.radius.to_string(),
                cell.nodes.to_string(),
                opt(cell.norm),
                cell.certified.to_string(),
                cell.converged.to_string(),
                opt(cell.elapsed_ms),
                String::new(),
                String::new(),
            ]);
            w.write_record(&rec).map_err(csv_err)?;
        }
        let mut rec = prefix("summary");
        rec.extend([String::new(), String::new(), String::new(), String::new(), String::new(), String::new()]);
        rec.push(opt(qs.gamma));
        rec.push(qs.verdict.as_str().to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(io)?;
    Ok(())
}
