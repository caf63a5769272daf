//! The coupled pair of integral equations
//!
//! ```text
//! ∫ K1(ξ1, ξ2) C(ξ1) dξ1 + D(ξ2) = F(ξ2)
//! C(ξ1) + ∫ K2(ξ1, ξ2) D(ξ2) dξ2 = G(ξ1)
//! ```
//!
//! for unknowns `C` (on the `ξ1` grid) and `D` (on the `ξ2` grid).
//!
//! The unknown is stacked as `(C, D)` and the equations as (second, first),
//! which gives the block matrix `[[I, A2], [A1, I]]`: the identity when both
//! kernels vanish.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::kernels::KernelSpec;
use crate::spaces::{weighted_norm, SampledFunction, SpaceSpec};

/// Condition estimates at or above this are rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct CornerSystem {
    pub k1: KernelSpec,
    pub k2: KernelSpec,
    /// Right-hand side of the first equation, on the `ξ2` grid.
    pub f: SampledFunction,
    /// Right-hand side of the second equation, on the `ξ1` grid.
    pub g: SampledFunction,
    pub space: SpaceSpec,
}

#[derive(Debug, Clone)]
pub struct CornerSolution {
    pub c: SampledFunction,
    pub d: SampledFunction,
    /// Weighted norm of `A1 C + D - F`.
    pub residual_1: f64,
    /// Weighted norm of `C + A2 D - G`.
    pub residual_2: f64,
    /// Estimate of the 1-norm condition number of the block matrix.
    pub condition_estimate: f64,
    /// `max |U| / max |M|` from the LU factorization.
    pub pivot_growth: f64,
}

/// `A1[i][j] = w1_j K1(ξ1_j, ξ2_i)`: maps `C` on grid 1 to a function on grid 2.
pub fn coupling_a1(k1: &KernelSpec, grid1: &Grid, grid2: &Grid) -> DMatrix<f64> {
    DMatrix::from_fn(grid2.len(), grid1.len(), |i, j| {
        grid1.weights()[j] * k1.eval(grid1.nodes()[j], grid2.nodes()[i])
    })
}

/// `A2[i][j] = w2_j K2(ξ1_i, ξ2_j)`: maps `D` on grid 2 to a function on grid 1.
pub fn coupling_a2(k2: &KernelSpec, grid1: &Grid, grid2: &Grid) -> DMatrix<f64> {
    DMatrix::from_fn(grid1.len(), grid2.len(), |i, j| {
        grid2.weights()[j] * k2.eval(grid1.nodes()[i], grid2.nodes()[j])
    })
}

pub fn block_matrix(k1: &KernelSpec, k2: &KernelSpec, grid1: &Grid, grid2: &Grid) -> DMatrix<f64> {
    let (n1, n2) = (grid1.len(), grid2.len());
    let mut m = DMatrix::identity(n1 + n2, n1 + n2);
    m.view_mut((0, n1), (n1, n2)).copy_from(&coupling_a2(k2, grid1, grid2));
    m.view_mut((n1, 0), (n2, n1)).copy_from(&coupling_a1(k1, grid1, grid2));
    m
}

fn check_grids(system: &CornerSystem, grid1: &Grid, grid2: &Grid) -> Result<()> {
    if system.g.grid().as_ref() != grid1 {
        return Err(LabError::Structural(format!(
            "G is sampled on a {}-node grid that is not the xi1 grid ({} nodes)",
            system.g.grid().len(),
            grid1.len()
        )));
    }
    if system.f.grid().as_ref() != grid2 {
        return Err(LabError::Structural(format!(
            "F is sampled on a {}-node grid that is not the xi2 grid ({} nodes)",
            system.f.grid().len(),
            grid2.len()
        )));
    }
    Ok(())
}

pub fn assemble_block(system: &CornerSystem, grid1: &Grid, grid2: &Grid) -> Result<DMatrix<f64>> {
    check_grids(system, grid1, grid2)?;
    system.k1.validate()?;
    system.k2.validate()?;
    let m = block_matrix(&system.k1, &system.k2, grid1, grid2);
    if let Some(idx) = m.iter().position(|v| !v.is_finite()) {
        return Err(LabError::Numerical(format!("non-finite block entry at flat index {idx}")));
    }
    Ok(m)
}

fn stack(top: &[f64], bottom: &[f64]) -> DVector<f64> {
    DVector::from_iterator(top.len() + bottom.len(), top.iter().chain(bottom).copied())
}

/// `(F, G)` with `F = A1 C* + D*` and `G = C* + A2 D*`, using the same
/// discretization as [`solve_corner`].
pub fn manufactured_case(
    c_star: &SampledFunction,
    d_star: &SampledFunction,
    k1: &KernelSpec,
    k2: &KernelSpec,
) -> Result<(SampledFunction, SampledFunction)> {
    let (grid1, grid2) = (c_star.grid(), d_star.grid());
    let m = block_matrix(k1, k2, grid1, grid2);
    let image = m * stack(c_star.values(), d_star.values());
    let n1 = grid1.len();
    let g = SampledFunction::new(grid1.clone(), image.rows(0, n1).iter().copied().collect())?;
    let f = SampledFunction::new(grid2.clone(), image.rows(n1, grid2.len()).iter().copied().collect())?;
    Ok((f, g))
}

pub fn solve_corner(system: &CornerSystem, grid1: &Grid, grid2: &Grid) -> Result<CornerSolution> {
    let m = assemble_block(system, grid1, grid2)?;
    let n1 = grid1.len();
    let lu = m.clone().lu();
    if !lu.is_invertible() {
        return Err(LabError::IllConditioned { estimate: f64::INFINITY });
    }
    let lu_t = m.transpose().lu();
    let inv_norm = hager_inverse_one_norm(m.nrows(), |x| lu.solve(x), |x| lu_t.solve(x));
    let condition_estimate = one_norm(&m) * inv_norm;
    if !(condition_estimate < MAX_CONDITION) {
        return Err(LabError::IllConditioned { estimate: condition_estimate });
    }
    let u_max = lu.u().amax();
    let pivot_growth = u_max / m.amax();

    let rhs = stack(system.g.values(), system.f.values());
    let z = lu
        .solve(&rhs)
        .ok_or(LabError::IllConditioned { estimate: condition_estimate })?;
    let c = SampledFunction::new(system.g.grid().clone(), z.rows(0, n1).iter().copied().collect())?;
    let d = SampledFunction::new(system.f.grid().clone(), z.rows(n1, grid2.len()).iter().copied().collect())?;

    let applied = &m * &z;
    let r2 = SampledFunction::new(
        system.g.grid().clone(),
        applied.rows(0, n1).iter().zip(system.g.values()).map(|(a, b)| a - b).collect(),
    )?;
    let r1 = SampledFunction::new(
        system.f.grid().clone(),
        applied.rows(n1, grid2.len()).iter().zip(system.f.values()).map(|(a, b)| a - b).collect(),
    )?;
    Ok(CornerSolution {
        residual_1: weighted_norm(&r1, &system.space)?,
        residual_2: weighted_norm(&r2, &system.space)?,
        c,
        d,
        condition_estimate,
        pivot_growth,
    })
}

/// Maximum absolute column sum.
pub fn one_norm(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager's estimator of `||A^-1||_1` with Higham's alternating-sign check.
/// `solve` applies `A^-1`, `solve_t` applies `A^-T`.
fn hager_inverse_one_norm(
    n: usize,
    solve: impl Fn(&DVector<f64>) -> Option<DVector<f64>>,
    solve_t: impl Fn(&DVector<f64>) -> Option<DVector<f64>>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let l1 = |v: &DVector<f64>| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut estimate = 0.0;
    let mut last_j = usize::MAX;
    for _ in 0..5 {
        let Some(y) = solve(&x) else { return f64::INFINITY };
        estimate = l1(&y);
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let Some(z) = solve_t(&xi) else { return f64::INFINITY };
        let j = z.iamax();
        if z[j].abs() <= z.dot(&x) || j == last_j {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
        last_j = j;
    }
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    let b = DVector::from_fn(n, |i, _| {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        sign * (1.0 + i as f64 / denom)
    });
    match solve(&b) {
        Some(y) => estimate.max(2.0 * l1(&y) / (3.0 * n as f64)),
        None => f64::INFINITY,
    }
}

/// Summary of a solve, serialized by the CLI.
#[derive(Debug, Clone, Serialize)]
pub struct CornerReport {
    pub k1: String,
    pub k2: String,
    pub space: String,
    pub nodes_xi1: usize,
    pub nodes_xi2: usize,
    pub residual_1: f64,
    pub residual_2: f64,
    pub condition_estimate: f64,
    pub pivot_growth: f64,
    pub norm_c: f64,
    pub norm_d: f64,
}

impl CornerReport {
    pub fn new(system: &CornerSystem, solution: &CornerSolution) -> Result<Self> {
        Ok(CornerReport {
            k1: system.k1.to_string(),
            k2: system.k2.to_string(),
            space: system.space.to_string(),
            nodes_xi1: solution.c.grid().len(),
            nodes_xi2: solution.d.grid().len(),
            residual_1: solution.residual_1,
            residual_2: solution.residual_2,
            condition_estimate: solution.condition_estimate,
            pivot_growth: solution.pivot_growth,
            norm_c: weighted_norm(&solution.c, &system.space)?,
            norm_d: weighted_norm(&solution.d, &system.space)?,
        })
    }
}

/// Convenience for building a system from closed-form right-hand sides.
pub fn system_from_specs(
    k1: KernelSpec,
    k2: KernelSpec,
    f: crate::spaces::FunctionSpec,
    g: crate::spaces::FunctionSpec,
    grid1: &Arc<Grid>,
    grid2: &Arc<Grid>,
    space: SpaceSpec,
) -> Result<CornerSystem> {
    Ok(CornerSystem {
        k1,
        k2,
        f: SampledFunction::from_spec(grid2.clone(), f)?,
        g: SampledFunction::from_spec(grid1.clone(), g)?,
        space,
    })
}
