//! Numerical laboratory for linear integral operators
//!
//! ```text
//! (Kf)(x) = ∫ K(x, y) f(y) dy,    |K(x, y)| ≲ (1 + |x| + |y|)^(-kappa)
//! ```
//!
//! acting between power-weighted integrability spaces on the real line.
//! Three norm families are supported (see [`spaces::SpaceSpec`]):
//!
//! * `H(s)`: `(∫ |f|^2 (1+|x|)^(2s) dx)^(1/2)`
//! * `Hsp(s,p)`: `(∫ |f|^p (1+|x|)^(ps) dx)^(1/p)`
//! * `Hps(p,s)`: `(∫ |f|^p (1+|x|)^(2s) dx)^(1/p)`
//!
//! The crate evaluates the explicit sufficient conditions on `kappa` for
//! boundedness between such spaces ([`conditions`]), discretizes the operator
//! on truncated graded Gauss–Legendre meshes ([`grid`], [`operator`]) and
//! estimates discrete operator norms as the truncation radius grows
//! ([`sweep`]). [`corner`] solves the coupled two-equation system
//! `A1 C + D = F`, `C + A2 D = G`.

pub mod cli;
pub mod conditions;
pub mod corner;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod oracle;
pub mod operator;
pub mod spaces;
pub mod sweep;
mod syntax;

pub use conditions::{check_boundedness, BoundednessQuery, ConditionReport, Theorem};
pub use error::{LabError, Result};
pub use grid::Grid;
pub use kernels::{KernelSpec, Modulation};
pub use operator::DiscretizedOperator;
pub use spaces::{FunctionSpec, SampledFunction, SpaceSpec};
