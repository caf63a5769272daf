//! Power-weighted integrability spaces and sampled functions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::syntax::{expect_args, num, parse_call};

/// Conjugate pair `1/p + 1/q = 1` with `1 < p < ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    pub p: f64,
    pub q: f64,
}

impl ExponentPair {
    pub fn new(p: f64) -> Result<Self> {
        Ok(ExponentPair { p, q: conjugate_exponent(p)? })
    }
}

pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(LabError::Domain(format!("exponent p must lie in (1, inf), got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// One of the three weighted norm families.
///
/// Every variant is `(∫ |f|^p (1+|x|)^w dx)^(1/p)` for a weight exponent
/// `w` given by [`SpaceSpec::weight_exponent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SpaceSpec {
    /// `H(s)`: `p = 2`, `w = 2s`.
    ClassicL2 { s: f64 },
    /// `Hsp(s,p)`: `w = p s`.
    VariantA { s: f64, p: f64 },
    /// `Hps(p,s)`: `w = 2s` for every `p`.
    VariantB { p: f64, s: f64 },
}

impl SpaceSpec {
    pub fn classic(s: f64) -> Self {
        SpaceSpec::ClassicL2 { s }
    }

    pub fn variant_a(s: f64, p: f64) -> Result<Self> {
        conjugate_exponent(p)?;
        Ok(SpaceSpec::VariantA { s, p })
    }

    pub fn variant_b(p: f64, s: f64) -> Result<Self> {
        conjugate_exponent(p)?;
        Ok(SpaceSpec::VariantB { p, s })
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s().is_finite() {
            return Err(LabError::Domain(format!("weight exponent s must be finite, got {}", self.s())));
        }
        conjugate_exponent(self.p()).map(|_| ())
    }

    pub fn s(&self) -> f64 {
        match *self {
            SpaceSpec::ClassicL2 { s } | SpaceSpec::VariantA { s, .. } | SpaceSpec::VariantB { s, .. } => s,
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            SpaceSpec::ClassicL2 { .. } => 2.0,
            SpaceSpec::VariantA { p, .. } | SpaceSpec::VariantB { p, .. } => p,
        }
    }

    pub fn q(&self) -> f64 {
        let p = self.p();
        p / (p - 1.0)
    }

    pub fn weight_exponent(&self) -> f64 {
        match *self {
            SpaceSpec::ClassicL2 { s } => 2.0 * s,
            SpaceSpec::VariantA { s, p } => p * s,
            SpaceSpec::VariantB { s, .. } => 2.0 * s,
        }
    }

    /// `w / p`: the norm equals the unweighted `p`-norm of `(1+|x|)^(w/p) f`.
    pub fn holder_exponent(&self) -> f64 {
        self.weight_exponent() / self.p()
    }
}

impl fmt::Display for SpaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SpaceSpec::ClassicL2 { s } => write!(f, "H({})", num(s)),
            SpaceSpec::VariantA { s, p } => write!(f, "Hsp({},{})", num(s), num(p)),
            SpaceSpec::VariantB { p, s } => write!(f, "Hps({},{})", num(p), num(s)),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = LabError;

    fn from_str(text: &str) -> Result<Self> {
        let (name, args) = parse_call(text)?;
        let space = match name.as_str() {
            "H" => {
                expect_args(&name, &args, &[1])?;
                SpaceSpec::classic(args[0])
            }
            "Hsp" => {
                expect_args(&name, &args, &[2])?;
                SpaceSpec::VariantA { s: args[0], p: args[1] }
            }
            "Hps" => {
                expect_args(&name, &args, &[2])?;
                SpaceSpec::VariantB { p: args[0], s: args[1] }
            }
            other => return Err(LabError::Parse(format!("unknown space '{other}'"))),
        };
        space.validate()?;
        Ok(space)
    }
}

/// Closed-form test functions of the function mini-language.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `(1+|x|)^(-t)`
    PowerLaw { t: f64 },
    /// `1` on `[a, b]`, else `0`
    Indicator { a: f64, b: f64 },
    /// `exp(-x^2 / (2 sigma^2))`
    Gauss { sigma: f64 },
    /// `exp(1 - 1/(1 - r^2))` with `r = (x - c)/w` for `|r| < 1`, else `0`;
    /// peak value 1 at `c`, support `(c - w, c + w)`.
    Bump { c: f64, w: f64 },
}

impl FunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            FunctionSpec::PowerLaw { t } => (1.0 + x.abs()).powf(-t),
            FunctionSpec::Indicator { a, b } => {
                if x >= a && x <= b {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Gauss { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            FunctionSpec::Bump { c, w } => {
                let r = (x - c) / w;
                if r.abs() < 1.0 {
                    (1.0 - 1.0 / (1.0 - r * r)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            FunctionSpec::PowerLaw { t } => t.is_finite(),
            FunctionSpec::Indicator { a, b } => a.is_finite() && b.is_finite() && a <= b,
            FunctionSpec::Gauss { sigma } => sigma.is_finite() && sigma > 0.0,
            FunctionSpec::Bump { c, w } => c.is_finite() && w.is_finite() && w > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(LabError::Domain(format!("invalid function parameters in {self}")))
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FunctionSpec::PowerLaw { t } => write!(f, "powerlaw({})", num(t)),
            FunctionSpec::Indicator { a, b } => write!(f, "indicator({},{})", num(a), num(b)),
            FunctionSpec::Gauss { sigma } => write!(f, "gauss({})", num(sigma)),
            FunctionSpec::Bump { c, w } => write!(f, "bump({},{})", num(c), num(w)),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = LabError;

    fn from_str(text: &str) -> Result<Self> {
        let (name, args) = parse_call(text)?;
        let spec = match name.as_str() {
            "powerlaw" => {
                expect_args(&name, &args, &[1])?;
                FunctionSpec::PowerLaw { t: args[0] }
            }
            "indicator" => {
                expect_args(&name, &args, &[2])?;
                FunctionSpec::Indicator { a: args[0], b: args[1] }
            }
            "gauss" => {
                expect_args(&name, &args, &[1])?;
                FunctionSpec::Gauss { sigma: args[0] }
            }
            "bump" => {
                expect_args(&name, &args, &[2])?;
                FunctionSpec::Bump { c: args[0], w: args[1] }
            }
            other => return Err(LabError::Parse(format!("unknown function '{other}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Function values at the nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
    tag: Option<FunctionSpec>,
}

impl SampledFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(LabError::Structural(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::Numerical(format!(
                "non-finite sample {} at node {i} (x = {})",
                values[i],
                grid.nodes()[i]
            )));
        }
        Ok(SampledFunction { grid, values, tag: None })
    }

    pub fn from_spec(grid: Arc<Grid>, spec: FunctionSpec) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| spec.eval(x)).collect();
        let mut f = SampledFunction::new(grid, values)?;
        f.tag = Some(spec);
        Ok(f)
    }

    pub fn from_fn(grid: Arc<Grid>, g: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| g(x)).collect();
        SampledFunction::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        SampledFunction { grid, values: vec![0.0; n], tag: None }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn tag(&self) -> Option<&FunctionSpec> {
        self.tag.as_ref()
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        SampledFunction::new(self.grid.clone(), self.values.iter().map(|v| c * v).collect())
    }

    /// Pointwise combination of two functions on the same grid.
    pub fn zip_with(&self, other: &SampledFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if !Arc::ptr_eq(&self.grid, &other.grid) && self.grid != other.grid {
            return Err(LabError::Structural("functions live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        SampledFunction::new(self.grid.clone(), values)
    }
}

/// `(∫ |f|^p (1+|x|)^w dx)^(1/p)` by quadrature on the function's grid.
pub fn weighted_norm(f: &SampledFunction, space: &SpaceSpec) -> Result<f64> {
    space.validate()?;
    let p = space.p();
    let w = space.weight_exponent();
    let integrand: Vec<f64> = f
        .grid
        .nodes()
        .iter()
        .zip(&f.values)
        .map(|(&x, &v)| v.abs().powf(p) * (1.0 + x.abs()).powf(w))
        .collect();
    Ok(f.grid.integrate(&integrand)?.powf(1.0 / p))
}

/// Unweighted `p`-norm `(∫ |g|^p dx)^(1/p)` on the function's grid.
pub fn lp_norm(f: &SampledFunction, p: f64) -> Result<f64> {
    let integrand: Vec<f64> = f.values.iter().map(|v| v.abs().powf(p)).collect();
    Ok(f.grid.integrate(&integrand)?.powf(1.0 / p))
}

/// `g = (1+|x|)^(w/p) f`, the image of `f` under the isometry onto the
/// unweighted `p`-integrable functions.
pub fn to_unweighted(f: &SampledFunction, space: &SpaceSpec) -> Result<SampledFunction> {
    let e = space.holder_exponent();
    rescale(f, e)
}

/// Inverse of [`to_unweighted`].
pub fn from_unweighted(g: &SampledFunction, space: &SpaceSpec) -> Result<SampledFunction> {
    let e = space.holder_exponent();
    rescale(g, -e)
}

fn rescale(f: &SampledFunction, exponent: f64) -> Result<SampledFunction> {
    let values = f
        .grid
        .nodes()
        .iter()
        .zip(&f.values)
        .map(|(&x, &v)| (1.0 + x.abs()).powf(exponent) * v)
        .collect();
    let mut out = SampledFunction::new(f.grid.clone(), values)?;
    out.tag = None;
    Ok(out)
}
