//! Sufficient conditions on the decay exponent `kappa` for
//! `K: X(s1, p1) -> X(s2, p2)` to be bounded.
//!
//! Each condition is `kappa > max(inner, outer)`: the inner threshold makes
//! the Hölder-majorized `y`-integral converge, the outer one makes the
//! resulting power of `(1+|x|)` integrable in `x`. All three families
//! require `s1 < 0`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::spaces::{conjugate_exponent, SpaceSpec};
use crate::syntax::{expect_args, num, parse_call};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// `H(s1) -> H(s2)`
    Thm1,
    /// `Hsp(s1,p1) -> Hsp(s2,p2)`
    Thm2,
    /// `Hps(p1,s1) -> Hps(p2,s2)`
    Thm3,
}

impl Theorem {
    pub fn number(self) -> u8 {
        match self {
            Theorem::Thm1 => 1,
            Theorem::Thm2 => 2,
            Theorem::Thm3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Result<Self> {
        match n {
            1 => Ok(Theorem::Thm1),
            2 => Ok(Theorem::Thm2),
            3 => Ok(Theorem::Thm3),
            _ => Err(LabError::Parse(format!("theorem must be 1, 2 or 3, got {n}"))),
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for Theorem {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches("thm").trim_start_matches("Thm");
        let n: u8 = t.parse().map_err(|_| LabError::Parse(format!("bad theorem '{s}'")))?;
        Theorem::from_number(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundednessQuery {
    pub theorem: Theorem,
    pub s1: f64,
    pub s2: f64,
    pub p1: f64,
    pub p2: f64,
    pub kappa: f64,
}

impl BoundednessQuery {
    pub fn thm1(s1: f64, s2: f64, kappa: f64) -> Self {
        BoundednessQuery { theorem: Theorem::Thm1, s1, s2, p1: 2.0, p2: 2.0, kappa }
    }

    pub fn thm2(s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64) -> Self {
        BoundednessQuery { theorem: Theorem::Thm2, s1, s2, p1, p2, kappa }
    }

    pub fn thm3(s1: f64, s2: f64, p1: f64, p2: f64, kappa: f64) -> Self {
        BoundednessQuery { theorem: Theorem::Thm3, s1, s2, p1, p2, kappa }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("s1", self.s1), ("s2", self.s2), ("kappa", self.kappa)] {
            if !v.is_finite() {
                return Err(LabError::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        conjugate_exponent(self.p1)?;
        conjugate_exponent(self.p2)?;
        if self.theorem == Theorem::Thm1 && (self.p1 != 2.0 || self.p2 != 2.0) {
            return Err(LabError::Domain(format!(
                "the H family fixes p1 = p2 = 2, got ({}, {})",
                self.p1, self.p2
            )));
        }
        Ok(())
    }

    pub fn source_space(&self) -> SpaceSpec {
        match self.theorem {
            Theorem::Thm1 => SpaceSpec::ClassicL2 { s: self.s1 },
            Theorem::Thm2 => SpaceSpec::VariantA { s: self.s1, p: self.p1 },
            Theorem::Thm3 => SpaceSpec::VariantB { p: self.p1, s: self.s1 },
        }
    }

    pub fn target_space(&self) -> SpaceSpec {
        match self.theorem {
            Theorem::Thm1 => SpaceSpec::ClassicL2 { s: self.s2 },
            Theorem::Thm2 => SpaceSpec::VariantA { s: self.s2, p: self.p2 },
            Theorem::Thm3 => SpaceSpec::VariantB { p: self.p2, s: self.s2 },
        }
    }

    pub fn thresholds(&self) -> Result<(f64, f64)> {
        match self.theorem {
            Theorem::Thm1 => Ok(threshold_thm1(self.s1, self.s2)),
            Theorem::Thm2 => threshold_thm2(self.s1, self.s2, self.p1, self.p2),
            Theorem::Thm3 => threshold_thm3(self.s1, self.s2, self.p1, self.p2),
        }
    }
}

/// `thm1(s1,s2,kappa)`, `thm2(s1,s2,p1,p2,kappa)`, `thm3(s1,s2,p1,p2,kappa)`.
impl fmt::Display for BoundednessQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.theorem {
            Theorem::Thm1 => write!(f, "thm1({},{},{})", num(self.s1), num(self.s2), num(self.kappa)),
            t => write!(
                f,
                "thm{}({},{},{},{},{})",
                t.number(),
                num(self.s1),
                num(self.s2),
                num(self.p1),
                num(self.p2),
                num(self.kappa)
            ),
        }
    }
}

impl FromStr for BoundednessQuery {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, a) = parse_call(s)?;
        let theorem: Theorem = match name.as_str() {
            "thm1" | "thm2" | "thm3" => name.parse()?,
            _ => return Err(LabError::Parse(format!("unknown query form '{name}'"))),
        };
        let q = if theorem == Theorem::Thm1 {
            expect_args(&name, &a, &[3])?;
            BoundednessQuery::thm1(a[0], a[1], a[2])
        } else {
            expect_args(&name, &a, &[5])?;
            BoundednessQuery { theorem, s1: a[0], s2: a[1], p1: a[2], p2: a[3], kappa: a[4] }
        };
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Inner,
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub query: BoundednessQuery,
    pub inner_threshold: f64,
    pub outer_threshold: f64,
    pub threshold: f64,
    pub satisfied: bool,
    pub margin: f64,
    pub applicable: bool,
    pub binding: Binding,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// `(1/2 - s1, 1 + s2 - s1)`
pub fn threshold_thm1(s1: f64, s2: f64) -> (f64, f64) {
    (0.5 - s1, 1.0 + s2 - s1)
}

/// `(1/q1 - s1, 1/p2 + 1/q1 + s2 - s1)`
pub fn threshold_thm2(s1: f64, s2: f64, p1: f64, p2: f64) -> Result<(f64, f64)> {
    let q1 = conjugate_exponent(p1)?;
    conjugate_exponent(p2)?;
    Ok((1.0 / q1 - s1, 1.0 / p2 + 1.0 / q1 + s2 - s1))
}

/// `(1/q1 - 2 s1/p1, 1/p2 + 1/q1 + 2 s2/p2 - 2 s1/p1)`
///
/// The inner threshold is the one the Hölder step actually needs: the source
/// factor is `(1+|y|)^(-2 s1/p1)` and `-q1 (2 s1/p1 + kappa) < -1` is
/// `kappa > 1/q1 - 2 s1/p1`, with `p1`.
pub fn threshold_thm3(s1: f64, s2: f64, p1: f64, p2: f64) -> Result<(f64, f64)> {
    let q1 = conjugate_exponent(p1)?;
    conjugate_exponent(p2)?;
    let a1 = 2.0 * s1 / p1;
    Ok((1.0 / q1 - a1, 1.0 / p2 + 1.0 / q1 + 2.0 * s2 / p2 - a1))
}

const THM3_NOTE: &str = "inner threshold uses the source Hoelder exponent 2*s1/p1";

pub fn check_boundedness(query: &BoundednessQuery) -> Result<ConditionReport> {
    query.validate()?;
    let (inner, outer) = query.thresholds()?;
    let threshold = inner.max(outer);
    let margin = query.kappa - threshold;
    let applicable = query.s1 < 0.0;
    Ok(ConditionReport {
        query: *query,
        inner_threshold: inner,
        outer_threshold: outer,
        threshold,
        satisfied: applicable && margin > 0.0,
        margin,
        applicable,
        binding: if inner >= outer { Binding::Inner } else { Binding::Outer },
        note: (query.theorem == Theorem::Thm3).then(|| THM3_NOTE.to_string()),
    })
}

/// Inner (y-integral) threshold for a source space: `1/q - w/p`.
pub fn inner_threshold(source: &SpaceSpec) -> f64 {
    1.0 / source.q() - source.holder_exponent()
}
