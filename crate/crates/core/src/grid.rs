//! Truncated, graded composite Gauss–Legendre meshes on `[-R, R]`.
//!
//! Panel breakpoints on `[0, R]` grow geometrically away from the origin,
//! each panel carries the same Gauss–Legendre rule, and the whole mesh is
//! mirrored onto `[-R, 0]`. The origin is always a breakpoint, so integrands
//! with a kink at `x = 0` (every `(1+|x|)^a`) are integrated panel-wise
//! smoothly.
//!
//! Nested meshes for truncation studies come from [`Grid::extend`]: the
//! panels of the smaller mesh are kept verbatim and new graded panels are
//! appended on `[R, R']` and `[-R', -R]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::syntax::{expect_args, num, parse_call};

pub const DEFAULT_PANEL_ORDER: usize = 8;
pub const DEFAULT_GRADING: f64 = 1.3;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, refined by Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Parameters of a graded mesh, in the `grid(R,panels,grading,order)` syntax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub radius: f64,
    pub panels_per_side: usize,
    pub grading: f64,
    pub panel_order: usize,
}

impl GridParams {
    pub fn build(&self) -> Result<Grid> {
        Grid::build(self.radius, self.panels_per_side, self.grading, self.panel_order)
    }
}

impl fmt::Display for GridParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "grid({},{},{},{})",
            num(self.radius),
            self.panels_per_side,
            num(self.grading),
            self.panel_order
        )
    }
}

impl FromStr for GridParams {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = parse_call(s)?;
        if name != "grid" {
            return Err(LabError::Parse(format!("unknown grid form '{name}'")));
        }
        expect_args(&name, &args, &[4])?;
        let as_count = |v: f64, what: &str| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(LabError::Parse(format!("{what} must be a non-negative integer, got {v}")))
            }
        };
        Ok(GridParams {
            radius: args[0],
            panels_per_side: as_count(args[1], "panels")?,
            grading: args[2],
            panel_order: as_count(args[3], "order")?,
        })
    }
}

/// A symmetric composite quadrature mesh on `[-R, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    radius: f64,
    grading: f64,
    panel_order: usize,
    /// Breakpoints on `[0, R]`, starting at 0 and ending at R.
    breakpoints: Vec<f64>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    /// Builds the mesh with `panels_per_side` panels on each half-line.
    ///
    /// The first panel has width `R (g - 1) / (g^m - 1)` and each following
    /// panel is `g` times wider; `g = 1` gives uniform panels.
    pub fn build(radius: f64, panels_per_side: usize, grading: f64, panel_order: usize) -> Result<Grid> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(LabError::Domain(format!("grid radius must be positive, got {radius}")));
        }
        if panels_per_side < 1 {
            return Err(LabError::Domain("grid needs at least one panel per side".into()));
        }
        if !(grading.is_finite() && grading >= 1.0) {
            return Err(LabError::Domain(format!("grading must be >= 1, got {grading}")));
        }
        if panel_order < 2 {
            return Err(LabError::Domain(format!("panel order must be >= 2, got {panel_order}")));
        }
        let mut breakpoints = vec![0.0];
        append_graded(&mut breakpoints, radius, panels_per_side, grading);
        Ok(Grid::from_breakpoints(breakpoints, grading, panel_order))
    }

    /// Same panels on `[-R, R]`, plus `extra_panels` graded panels on each of
    /// `[R, new_radius]` and `[-new_radius, -R]`. The result contains `self`
    /// as an exact sub-grid (same nodes, same weights).
    pub fn extend(&self, new_radius: f64, extra_panels: usize) -> Result<Grid> {
        if !(new_radius.is_finite() && new_radius > self.radius) {
            return Err(LabError::Domain(format!(
                "extension radius {new_radius} must exceed current radius {}",
                self.radius
            )));
        }
        if extra_panels < 1 {
            return Err(LabError::Domain("extension needs at least one panel".into()));
        }
        let mut breakpoints = self.breakpoints.clone();
        append_graded(&mut breakpoints, new_radius, extra_panels, self.grading);
        Ok(Grid::from_breakpoints(breakpoints, self.grading, self.panel_order))
    }

    /// One mesh per radius in `schedule`, each an exact sub-grid of the next.
    ///
    /// The first mesh is `build(schedule[0], base_panels, ..)`; every later
    /// step adds `step_panels` panels per side for each factor of 4 in
    /// radius (rounded up), so panel counts grow with `log R`.
    pub fn nested(
        schedule: &[f64],
        base_panels: usize,
        step_panels: usize,
        grading: f64,
        panel_order: usize,
    ) -> Result<Vec<Grid>> {
        let Some(&first) = schedule.first() else {
            return Ok(Vec::new());
        };
        let mut grids = vec![Grid::build(first, base_panels, grading, panel_order)?];
        for pair in schedule.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(LabError::Plan(format!(
                    "radius schedule must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
            let factor = (pair[1] / pair[0]).ln() / 4f64.ln();
            let extra = ((step_panels as f64 * factor).ceil() as usize).max(1);
            let next = grids.last().expect("non-empty").extend(pair[1], extra)?;
            grids.push(next);
        }
        Ok(grids)
    }

    fn from_breakpoints(breakpoints: Vec<f64>, grading: f64, panel_order: usize) -> Grid {
        let (ref_nodes, ref_weights) = gauss_legendre(panel_order);
        let mut pos_nodes = Vec::with_capacity((breakpoints.len() - 1) * panel_order);
        let mut pos_weights = Vec::with_capacity(pos_nodes.capacity());
        for panel in breakpoints.windows(2) {
            let mid = 0.5 * (panel[0] + panel[1]);
            let half = 0.5 * (panel[1] - panel[0]);
            for (t, w) in ref_nodes.iter().zip(&ref_weights) {
                pos_nodes.push(mid + half * t);
                pos_weights.push(half * w);
            }
        }
        let n = pos_nodes.len();
        let mut nodes = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        nodes.extend(pos_nodes.iter().rev().map(|x| -x));
        weights.extend(pos_weights.iter().rev());
        nodes.extend(&pos_nodes);
        weights.extend(&pos_weights);
        Grid {
            radius: *breakpoints.last().expect("breakpoints"),
            grading,
            panel_order,
            breakpoints,
            nodes,
            weights,
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn panel_order(&self) -> usize {
        self.panel_order
    }

    pub fn panels_per_side(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i g_i`, summed in node order.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.len() {
            return Err(LabError::Structural(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                self.len()
            )));
        }
        let mut sum = 0.0;
        for (i, (v, w)) in values.iter().zip(&self.weights).enumerate() {
            if !v.is_finite() {
                return Err(LabError::Numerical(format!(
                    "non-finite integrand {v} at node {i} (x = {})",
                    self.nodes[i]
                )));
            }
            sum += w * v;
        }
        Ok(sum)
    }

    pub fn integrate_fn(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let values: Vec<f64> = self.nodes.iter().map(|&x| g(x)).collect();
        self.integrate(&values)
    }

    /// Index range of the nodes lying in `[-radius, radius]`, when `radius`
    /// is one of this grid's breakpoints.
    pub fn sub_range(&self, radius: f64) -> Option<std::ops::Range<usize>> {
        let panels = self.breakpoints.iter().position(|&b| b == radius)?;
        let per_side = self.len() / 2;
        let inner = panels * self.panel_order;
        Some(per_side - inner..per_side + inner)
    }
}

/// Appends `panels` geometrically graded panels from the current last
/// breakpoint up to `end`.
fn append_graded(breakpoints: &mut Vec<f64>, end: f64, panels: usize, grading: f64) {
    let start = *breakpoints.last().expect("breakpoints start at 0");
    let span = end - start;
    let mut width = if grading == 1.0 {
        span / panels as f64
    } else {
        span * (grading - 1.0) / (grading.powi(panels as i32) - 1.0)
    };
    let mut at = start;
    for _ in 0..panels - 1 {
        at += width;
        breakpoints.push(at);
        width *= grading;
    }
    breakpoints.push(end);
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_rule_is_exact_for_polynomials() {
        for n in 2..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let quad: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((quad - exact).abs() < 1e-13, "n={n} deg={deg}: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn smallest_grid_has_four_nodes() {
        let g = Grid::build(1.0, 1, 1.0, 2).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.panels_per_side(), 1);
    }

    #[test]
    fn constants_integrate_exactly() {
        let g = Grid::build(5.0, 7, 1.3, 8).unwrap();
        assert_relative_eq!(g.integrate_fn(|_| 1.0).unwrap(), 10.0, max_relative = 1e-12);
        assert_relative_eq!(g.weights().iter().sum::<f64>(), 10.0, max_relative = 1e-10);
    }

    #[test]
    fn grid_is_symmetric_and_positive() {
        let g = Grid::build(123.0, 13, 1.4, 6).unwrap();
        let n = g.len();
        for i in 0..n {
            assert!((g.nodes()[i] + g.nodes()[n - 1 - i]).abs() < 1e-14 * g.radius());
            assert!(g.weights()[i] > 0.0);
        }
        assert!(g.nodes().windows(2).all(|p| p[0] < p[1]));
        assert!(g.nodes()[0] >= -g.radius() && g.nodes()[n - 1] <= g.radius());
    }

    #[test]
    fn odd_function_integrates_to_zero() {
        let g = Grid::build(50.0, 10, 1.3, 8).unwrap();
        assert!(g.integrate_fn(|x| x).unwrap().abs() < 1e-12);
    }

    #[test]
    fn zero_integrand() {
        let g = Grid::build(3.0, 2, 1.0, 4).unwrap();
        assert_eq!(g.integrate(&vec![0.0; g.len()]).unwrap(), 0.0);
    }

    #[test]
    fn power_law_on_wide_grid() {
        let g = Grid::build(1e4, 40, 1.3, 8).unwrap();
        let v = g.integrate_fn(|x| (1.0 + x.abs()).powi(-2)).unwrap();
        let exact = 2.0 * (1.0 - 1.0 / (1.0 + 1e4));
        assert_relative_eq!(v, exact, max_relative = 1e-10);
        assert!(g.len() < 2000);
    }

    #[test]
    fn quartic_decay_on_r100() {
        let g = Grid::build(100.0, 24, 1.3, 8).unwrap();
        let v = g.integrate_fn(|x| (1.0 + x.abs()).powi(-4)).unwrap();
        // truncated closed form, the missing tail is 2/3 * 101^-3
        assert!((v - 2.0 / 3.0).abs() < 1e-6);
        let truncated = 2.0 / 3.0 * (1.0 - 101f64.powi(-3));
        assert!((v - truncated).abs() < 1e-8);
    }

    #[test]
    fn non_finite_integrand_is_rejected() {
        let g = Grid::build(1.0, 1, 1.0, 2).unwrap();
        let err = g.integrate(&[0.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, LabError::Numerical(_)));
        assert!(g.integrate(&[0.0]).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Grid::build(0.0, 1, 1.0, 2).is_err());
        assert!(Grid::build(1.0, 0, 1.0, 2).is_err());
        assert!(Grid::build(1.0, 1, 0.9, 2).is_err());
        assert!(Grid::build(1.0, 1, 1.0, 1).is_err());
        assert!(Grid::build(f64::INFINITY, 1, 1.0, 2).is_err());
    }

    #[test]
    fn extension_keeps_the_inner_grid() {
        let small = Grid::build(10.0, 6, 1.3, 8).unwrap();
        let big = small.extend(40.0, 3).unwrap();
        let range = big.sub_range(10.0).unwrap();
        assert_eq!(&big.nodes()[range.clone()], small.nodes());
        assert_eq!(&big.weights()[range], small.weights());
        assert_eq!(big.radius(), 40.0);
        assert_relative_eq!(big.integrate_fn(|_| 1.0).unwrap(), 80.0, max_relative = 1e-12);
    }

    #[test]
    fn nested_schedule() {
        let grids = Grid::nested(&[10.0, 40.0, 160.0, 640.0], 8, 4, 1.3, 8).unwrap();
        assert_eq!(grids.len(), 4);
        for pair in grids.windows(2) {
            let r = pair[1].sub_range(pair[0].radius()).unwrap();
            assert_eq!(&pair[1].nodes()[r], pair[0].nodes());
        }
        assert!(Grid::nested(&[10.0, 10.0], 8, 4, 1.3, 8).is_err());
        assert!(Grid::nested(&[], 8, 4, 1.3, 8).unwrap().is_empty());
    }

    #[test]
    fn refinement_reduces_error() {
        for a in [2.0f64, 3.0, 4.0] {
            let exact = 2.0 * (1.0 - 101f64.powf(1.0 - a)) / (a - 1.0);
            let mut last = f64::INFINITY;
            for m in [2usize, 4, 8, 16] {
                let g = Grid::build(100.0, m, 1.3, 4).unwrap();
                let err = (g.integrate_fn(|x| (1.0 + x.abs()).powf(-a)).unwrap() - exact).abs();
                assert!(err < last || err < 1e-14, "a={a} m={m}: {err} !< {last}");
                last = err;
            }
        }
    }

    #[test]
    fn grid_syntax_round_trips() {
        let p: GridParams = "grid(1e4, 40, 1.3, 8)".parse().unwrap();
        assert_eq!(p.radius, 1e4);
        assert_eq!(p.panels_per_side, 40);
        let again: GridParams = p.to_string().parse().unwrap();
        assert_eq!(p, again);
        assert!("grid(1,2.5,1,8)".parse::<GridParams>().is_err());
        assert!("mesh(1,2,1,8)".parse::<GridParams>().is_err());
    }
}
