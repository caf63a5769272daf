//! Kernel families with a power envelope `(1 + |x| + |y|)^(-kappa)`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::conditions;
use crate::error::{LabError, Result};
use crate::spaces::SpaceSpec;
use crate::syntax::{expect_args, num, parse_call};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulation {
    None,
    /// Multiplies the envelope by `cos(omega x y)`.
    Cosine { omega: f64 },
    /// Multiplies the envelope by `sign(sin(x + y))`.
    Alternating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kappa: f64,
    pub c_lower: f64,
    pub c_upper: f64,
    pub modulation: Modulation,
}

impl KernelSpec {
    /// `(1 + |x| + |y|)^(-kappa)` with unit constants.
    pub fn envelope(kappa: f64) -> Self {
        KernelSpec { kappa, c_lower: 1.0, c_upper: 1.0, modulation: Modulation::None }
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.c_lower = c;
        self.c_upper = c;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn cosine(kappa: f64, omega: f64) -> Self {
        KernelSpec { modulation: Modulation::Cosine { omega }, ..KernelSpec::envelope(kappa) }
    }

    pub fn alternating(kappa: f64) -> Self {
        KernelSpec { modulation: Modulation::Alternating, ..KernelSpec::envelope(kappa) }
    }

    pub fn is_nonnegative(&self) -> bool {
        self.modulation == Modulation::None
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.kappa.is_finite()
            && self.c_lower.is_finite()
            && self.c_upper.is_finite()
            && self.c_lower >= 0.0
            && self.c_upper >= self.c_lower
            && match self.modulation {
                Modulation::Cosine { omega } => omega.is_finite(),
                _ => true,
            };
        if ok {
            Ok(())
        } else {
            Err(LabError::Domain(format!("invalid kernel parameters {self:?}")))
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let env = self.c_upper * envelope(x, y, self.kappa);
        match self.modulation {
            Modulation::None => env,
            Modulation::Cosine { omega } => env * (omega * x * y).cos(),
            Modulation::Alternating => env * (x + y).sin().signum(),
        }
    }
}

/// `(1 + |x| + |y|)^(-kappa)`
pub fn envelope(x: f64, y: f64, kappa: f64) -> f64 {
    (1.0 + x.abs() + y.abs()).powf(-kappa)
}

pub fn kernel_eval(k: &KernelSpec, x: f64, y: f64) -> f64 {
    k.eval(x, y)
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.modulation {
            Modulation::None if self.c_upper == 1.0 && self.c_lower == 1.0 => {
                write!(f, "envelope({})", num(self.kappa))
            }
            Modulation::None => write!(f, "envelope({},{})", num(self.kappa), num(self.c_upper)),
            Modulation::Cosine { omega } => write!(f, "cosmod({},{})", num(self.kappa), num(omega)),
            Modulation::Alternating => write!(f, "altmod({})", num(self.kappa)),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = LabError;

    fn from_str(text: &str) -> Result<Self> {
        let (name, args) = parse_call(text)?;
        let k = match name.as_str() {
            "envelope" => {
                expect_args(&name, &args, &[1, 2])?;
                let k = KernelSpec::envelope(args[0]);
                match args.get(1) {
                    Some(&c) => k.with_constant(c),
                    None => k,
                }
            }
            "cosmod" => {
                expect_args(&name, &args, &[2])?;
                KernelSpec::cosine(args[0], args[1])
            }
            "altmod" => {
                expect_args(&name, &args, &[1])?;
                KernelSpec::alternating(args[0])
            }
            other => return Err(LabError::Parse(format!("unknown kernel '{other}'"))),
        };
        k.validate()?;
        Ok(k)
    }
}

/// Outcome of sampling a kernel against a claimed envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub upper_ok: bool,
    pub lower_ok: bool,
    /// Largest `|K| / (c_upper env)` seen, and where.
    pub worst_upper: (f64, f64, f64),
    /// Smallest `|K| / (c_lower env)` seen, and where.
    pub worst_lower: (f64, f64, f64),
    pub samples: usize,
}

const ENVELOPE_RTOL: f64 = 1e-12;

/// Checks `c_lower env <= |K| <= c_upper env` on `sample_count` seeded
/// random points plus a fixed lattice reaching `|x|, |y| = 1e6`.
///
/// Random coordinates are `±tan(pi u / 2)` with `u` uniform on `[0, 0.9999]`.
pub fn envelope_check(
    k: impl Fn(f64, f64) -> f64,
    kappa_claimed: f64,
    c_lower: f64,
    c_upper: f64,
    sample_count: usize,
    seed: u64,
) -> Result<EnvelopeReport> {
    if sample_count < 1 {
        return Err(LabError::Domain("envelope check needs at least one sample".into()));
    }
    let lattice = [0.0, 0.5, 1.0, 10.0, 1e3, 1e6];
    let mut points = Vec::with_capacity(sample_count + 4 * lattice.len() * lattice.len());
    for &a in &lattice {
        for &b in &lattice {
            points.extend([(a, b), (-a, b), (a, -b), (-a, -b)]);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coord = |rng: &mut ChaCha8Rng| {
        let u: f64 = rng.gen_range(0.0..=0.9999);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        sign * (FRAC_PI_2 * u).tan()
    };
    for _ in 0..sample_count {
        let x = coord(&mut rng);
        let y = coord(&mut rng);
        points.push((x, y));
    }

    let mut worst_upper = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut worst_lower = (f64::INFINITY, 0.0, 0.0);
    for (x, y) in points {
        let v = k(x, y);
        if !v.is_finite() {
            return Err(LabError::Numerical(format!("kernel value {v} at (x, y) = ({x}, {y})")));
        }
        let env = envelope(x, y, kappa_claimed);
        let upper = v.abs() / (c_upper * env);
        if upper > worst_upper.0 {
            worst_upper = (upper, x, y);
        }
        let lower = v.abs() / (c_lower * env);
        if lower < worst_lower.0 {
            worst_lower = (lower, x, y);
        }
    }
    Ok(EnvelopeReport {
        upper_ok: worst_upper.0 <= 1.0 + ENVELOPE_RTOL,
        lower_ok: worst_lower.0 >= 1.0 - ENVELOPE_RTOL,
        worst_upper,
        worst_lower,
        samples: sample_count,
    })
}

/// The kernel conjugated by the target and source weights:
/// `(1+|x|)^exponent_x K(x, y) (1+|y|)^exponent_y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlattenedKernel {
    pub base: KernelSpec,
    pub exponent_x: f64,
    pub exponent_y: f64,
}

impl FlattenedKernel {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (1.0 + x.abs()).powf(self.exponent_x) * self.base.eval(x, y) * (1.0 + y.abs()).powf(self.exponent_y)
    }
}

pub fn flatten_weights(k: &KernelSpec, source: &SpaceSpec, target: &SpaceSpec) -> FlattenedKernel {
    FlattenedKernel {
        base: *k,
        exponent_x: target.holder_exponent(),
        exponent_y: -source.holder_exponent(),
    }
}

/// `∫_R (1 + |x| + |y|)^(-a) dy = 2 (1+|x|)^(1-a) / (a - 1)`.
pub fn majorant_integral(x: f64, a: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(LabError::Divergence { exponent: a });
    }
    Ok(2.0 * (1.0 + x.abs()).powf(1.0 - a) / (a - 1.0))
}

/// `∫_{|y| > r} (1 + |y|)^(-a) dy = 2 (1+r)^(1-a) / (a - 1)`.
pub fn majorant_tail(a: f64, r: f64) -> Result<f64> {
    if !(a > 1.0) {
        return Err(LabError::Divergence { exponent: a });
    }
    Ok(2.0 * (1.0 + r).powf(1.0 - a) / (a - 1.0))
}

/// Bound on the `|y| > r` part of the Hölder-majorized inner integral
/// `∫ c_upper^q (1+|x|+|y|)^(-q (a + kappa)) dy`, uniform in `x`, where
/// `q` is the source conjugate exponent and `a` its Hölder exponent.
pub fn tail_bound(k: &KernelSpec, source: &SpaceSpec, r: f64) -> Result<f64> {
    let q = source.q();
    let exponent = q * (source.holder_exponent() + k.kappa);
    if k.kappa <= conditions::inner_threshold(source) {
        return Err(LabError::Divergence { exponent });
    }
    Ok(k.c_upper.powf(q) * majorant_tail(exponent, r)?)
}
