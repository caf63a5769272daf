//! Closed-form integrals of the power-law family.

use crate::error::{LabError, Result};
pub use crate::kernels::majorant_integral as majorant;
use crate::spaces::SpaceSpec;

/// `∫_0^r (1+t)^(-a) dt`, including `a = 1`.
fn power_antiderivative(a: f64, r: f64) -> f64 {
    if a == 1.0 {
        (1.0 + r).ln()
    } else {
        (1.0 - (1.0 + r).powf(1.0 - a)) / (a - 1.0)
    }
}

/// Weighted norm of `(1+|x|)^(-t)` over the whole line.
pub fn powerlaw_norm(t: f64, space: &SpaceSpec) -> Result<f64> {
    space.validate()?;
    let p = space.p();
    let a = t * p - space.weight_exponent();
    if !(a > 1.0) {
        return Err(LabError::Divergence { exponent: a });
    }
    Ok((2.0 / (a - 1.0)).powf(1.0 / p))
}

/// Weighted norm of `(1+|x|)^(-t)` restricted to `[-r, r]`.
pub fn powerlaw_norm_truncated(t: f64, space: &SpaceSpec, r: f64) -> Result<f64> {
    space.validate()?;
    if !(r > 0.0) {
        return Err(LabError::Domain(format!("truncation radius must be positive, got {r}")));
    }
    let p = space.p();
    let a = t * p - space.weight_exponent();
    Ok((2.0 * power_antiderivative(a, r)).powf(1.0 / p))
}

/// `∫_{-r}^{r} (1 + |x| + |y|)^(-a) dy`.
pub fn majorant_truncated(x: f64, a: f64, r: f64) -> f64 {
    let base = 1.0 + x.abs();
    if a == 1.0 {
        2.0 * ((base + r) / base).ln()
    } else {
        2.0 * (base.powf(1.0 - a) - (base + r).powf(1.0 - a)) / (a - 1.0)
    }
}

/// `∫_0^1 (1 + |x| + y)^(-kappa) dy`: the pure envelope kernel applied to
/// the indicator of `[0, 1]`.
pub fn envelope_on_unit_indicator(x: f64, kappa: f64) -> f64 {
    let base = 1.0 + x.abs();
    if kappa == 1.0 {
        ((base + 1.0) / base).ln()
    } else {
        (base.powf(1.0 - kappa) - (base + 1.0).powf(1.0 - kappa)) / (kappa - 1.0)
    }
}
