//! Nyström discretization of `K` between two weighted spaces, and
//! `l^p1 -> l^p2` matrix-norm estimation.
//!
//! The weights are folded into the matrix:
//!
//! ```text
//! B[i][j] = wt_i^(1/p2) (1+|x_i|)^(w2/p2) K(x_i, y_j) (1+|y_j|)^(-w1/p1) ws_j^(1/q1)
//! ```
//!
//! so that with `u_j = ws_j^(1/p1) (1+|y_j|)^(w1/p1) f(y_j)` we get
//! `||u||_p1 = ||f||_source` and `||B u||_p2 = ||Kf||_target` on the grids.
//! The discrete operator norm is then the plain matrix norm of `B`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::Grid;
use crate::kernels::{flatten_weights, KernelSpec};
use crate::spaces::{conjugate_exponent, weighted_norm, SampledFunction, SpaceSpec};

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;
/// Largest dimension for which the dense SVD fallback is used.
pub const DENSE_FALLBACK_DIM: usize = 500;

#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub matrix: DMatrix<f64>,
    pub source_space: SpaceSpec,
    pub target_space: SpaceSpec,
    pub source_grid: Arc<Grid>,
    pub target_grid: Arc<Grid>,
    pub nonnegative_kernel: bool,
}

/// Result of an iterative norm estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// The value is the global maximum, not just a lower bound.
    pub certified: bool,
    pub converged: bool,
    pub iterations: usize,
}

pub fn assemble(
    k: &KernelSpec,
    source: &SpaceSpec,
    target: &SpaceSpec,
    source_grid: &Arc<Grid>,
    target_grid: &Arc<Grid>,
) -> Result<DiscretizedOperator> {
    k.validate()?;
    source.validate()?;
    target.validate()?;
    let flat = flatten_weights(k, source, target);
    let inv_p2 = 1.0 / target.p();
    let inv_q1 = 1.0 / conjugate_exponent(source.p())?;
    let rows = target_grid.len();
    let cols = source_grid.len();

    let col_factor: Vec<f64> = source_grid.weights().iter().map(|w| w.powf(inv_q1)).collect();
    let row_factor: Vec<f64> = target_grid.weights().iter().map(|w| w.powf(inv_p2)).collect();
    let xs = target_grid.nodes();
    let ys = source_grid.nodes();

    let fill_row = |i: usize, row: &mut [f64]| {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = row_factor[i] * flat.eval(xs[i], ys[j]) * col_factor[j];
        }
    };
    let mut data = vec![0.0; rows * cols];
    if cols > 0 {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            data.par_chunks_mut(cols).enumerate().for_each(|(i, row)| fill_row(i, row));
        }
        #[cfg(not(feature = "parallel"))]
        data.chunks_mut(cols).enumerate().for_each(|(i, row)| fill_row(i, row));
    }
    if let Some(idx) = data.iter().position(|v| !v.is_finite()) {
        let (i, j) = (idx / cols, idx % cols);
        return Err(LabError::Numerical(format!(
            "non-finite matrix entry {} at (i, j) = ({i}, {j}), x = {}, y = {}",
            data[idx], xs[i], ys[j]
        )));
    }
    Ok(DiscretizedOperator {
        matrix: DMatrix::from_row_slice(rows, cols, &data),
        source_space: *source,
        target_space: *target,
        source_grid: source_grid.clone(),
        target_grid: target_grid.clone(),
        nonnegative_kernel: k.is_nonnegative(),
    })
}

/// Quadrature value of `(Kf)(x)` on the grid `f` is sampled on.
pub fn apply_operator(k: &KernelSpec, f: &SampledFunction, x: f64) -> Result<f64> {
    let grid = f.grid();
    let mut sum = 0.0;
    for ((&y, &w), &v) in grid.nodes().iter().zip(grid.weights()).zip(f.values()) {
        sum += w * k.eval(x, y) * v;
    }
    if !sum.is_finite() {
        return Err(LabError::Numerical(format!("non-finite (Kf)({x}) = {sum}")));
    }
    Ok(sum)
}

/// `Kf` sampled at the nodes of `target_grid`.
pub fn apply_on_grid(k: &KernelSpec, f: &SampledFunction, target_grid: &Arc<Grid>) -> Result<SampledFunction> {
    let values = target_grid
        .nodes()
        .iter()
        .map(|&x| apply_operator(k, f, x))
        .collect::<Result<Vec<_>>>()?;
    SampledFunction::new(target_grid.clone(), values)
}

/// `||Kf||_target / ||f||_source`.
pub fn empirical_ratio(
    k: &KernelSpec,
    f: &SampledFunction,
    source: &SpaceSpec,
    target: &SpaceSpec,
    target_grid: &Arc<Grid>,
) -> Result<f64> {
    let denominator = weighted_norm(f, source)?;
    if !(denominator > 0.0) {
        return Err(LabError::Domain("source norm of the test function is zero".into()));
    }
    let kf = apply_on_grid(k, f, target_grid)?;
    Ok(weighted_norm(&kf, target)? / denominator)
}

/// Largest singular value of the operator matrix (both spaces with `p = 2`).
pub fn operator_norm_22(op: &DiscretizedOperator) -> Result<f64> {
    if op.source_space.p() != 2.0 || op.target_space.p() != 2.0 {
        return Err(LabError::Domain(format!(
            "2->2 norm requested for p1 = {}, p2 = {}",
            op.source_space.p(),
            op.target_space.p()
        )));
    }
    spectral_norm(&op.matrix)
}

/// `l^p1 -> l^p2` norm of the operator matrix.
pub fn operator_norm_pq(op: &DiscretizedOperator) -> Result<NormEstimate> {
    p_to_q_norm(&op.matrix, op.source_space.p(), op.target_space.p())
}

/// Largest singular value by power iteration on `B^T B` from the all-ones
/// vector, falling back to a dense SVD for small matrices that do not
/// converge.
pub fn spectral_norm(m: &DMatrix<f64>) -> Result<f64> {
    let (value, converged, iterations) = gram_power_iteration(m, POWER_TOL, POWER_MAX_ITER);
    if converged {
        return Ok(value);
    }
    if m.nrows().max(m.ncols()) <= DENSE_FALLBACK_DIM {
        return Ok(dense_spectral_norm(m));
    }
    Err(LabError::Numerical(format!(
        "power iteration did not converge after {iterations} iterations (last estimate {value:e})"
    )))
}

/// Largest singular value from a dense SVD.
pub fn dense_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

fn start_vector(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_element(m.ncols(), 1.0 / (m.ncols() as f64).sqrt())
}

/// Column with the largest Euclidean norm, as a unit basis vector. Used when
/// the all-ones start lies in the null space.
fn restart_vector(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let (j, norm) = m
        .column_iter()
        .map(|c| c.norm())
        .enumerate()
        .fold((0, 0.0), |best, (j, n)| if n > best.1 { (j, n) } else { best });
    (norm > 0.0).then(|| {
        let mut e = DVector::zeros(m.ncols());
        e[j] = 1.0;
        e
    })
}

/// Stopping rule for monotone power iterations: the last change must be
/// below `tol` and so must the geometric extrapolation of the remaining
/// distance to the limit, `delta r / (1 - r)` with `r` the observed
/// contraction ratio of successive changes.
struct Convergence {
    tol: f64,
    last_delta: Option<f64>,
}

impl Convergence {
    fn new(tol: f64) -> Self {
        Convergence { tol, last_delta: None }
    }

    fn update(&mut self, previous: f64, next: f64) -> bool {
        let delta = (next - previous).abs();
        let scale = self.tol * next.abs();
        if delta == 0.0 {
            return true;
        }
        let done = match self.last_delta {
            Some(last) if delta <= scale => {
                let ratio = delta / last;
                ratio < 1.0 && delta * ratio / (1.0 - ratio) <= scale
            }
            _ => false,
        };
        self.last_delta = Some(delta);
        done
    }
}

/// Power iteration on `B^T B` from the all-ones vector, without fallback.
/// Returns `(sigma_max estimate, converged, iterations)`.
pub fn gram_power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> (f64, bool, usize) {
    if m.is_empty() {
        return (0.0, true, 0);
    }
    let mut v = start_vector(m);
    let mut sigma = (m * &v).norm();
    if sigma == 0.0 {
        match restart_vector(m) {
            Some(e) => {
                v = e;
                sigma = (m * &v).norm();
            }
            None => return (0.0, true, 0),
        }
    }
    let mut stop = Convergence::new(tol);
    for it in 1..=max_iter {
        let u = m * &v;
        let w = m.transpose() * &u;
        let wn = w.norm();
        if wn == 0.0 {
            return (sigma, true, it);
        }
        v = w / wn;
        let next = (m * &v).norm();
        if stop.update(sigma, next) {
            return (next, true, it);
        }
        sigma = next;
    }
    (sigma, false, max_iter)
}

/// `|u|^(r-1) sign(u) / ||u||_r^(r-1)`: the unit vector of the dual space
/// attaining `<., u> = ||u||_r`.
fn dual_map(u: &DVector<f64>, r: f64) -> DVector<f64> {
    let norm = lp(u, r);
    if norm == 0.0 {
        return DVector::zeros(u.len());
    }
    u.map(|x| (x.abs() / norm).powf(r - 1.0) * x.signum())
}

pub fn lp(u: &DVector<f64>, r: f64) -> f64 {
    let scale = u.amax();
    if scale == 0.0 {
        return 0.0;
    }
    scale * u.iter().map(|x| (x.abs() / scale).powf(r)).sum::<f64>().powf(1.0 / r)
}

/// `max ||B x||_p2 / ||x||_p1` by the nonlinear power method.
///
/// Certified when `B` is entrywise nonnegative, `p2 <= p1` and the iteration
/// converged: the fixed point is then the global maximizer. Otherwise the
/// value is a lower bound.
pub fn p_to_q_norm(m: &DMatrix<f64>, p1: f64, p2: f64) -> Result<NormEstimate> {
    let q1 = conjugate_exponent(p1)?;
    conjugate_exponent(p2)?;
    let nonnegative = m.iter().all(|&x| x >= 0.0);
    if m.is_empty() {
        return Ok(NormEstimate { value: 0.0, certified: true, converged: true, iterations: 0 });
    }
    let mut x = DVector::from_element(m.ncols(), 1.0);
    x /= lp(&x, p1);
    let mut value = lp(&(m * &x), p2);
    if value == 0.0 {
        match restart_vector(m) {
            Some(e) => {
                x = e;
                value = lp(&(m * &x), p2);
            }
            None => return Ok(NormEstimate { value: 0.0, certified: true, converged: true, iterations: 0 }),
        }
    }
    let mut best = value;
    let mut stop = Convergence::new(POWER_TOL);
    let mut converged = false;
    let mut iterations = POWER_MAX_ITER;
    for it in 1..=POWER_MAX_ITER {
        let y = m * &x;
        let z = m.transpose() * dual_map(&y, p2);
        if z.amax() == 0.0 {
            converged = true;
            iterations = it;
            break;
        }
        x = dual_map(&z, q1);
        let next = lp(&(m * &x), p2);
        best = best.max(next);
        if stop.update(value, next) {
            converged = true;
            iterations = it;
            value = next;
            break;
        }
        value = next;
    }
    Ok(NormEstimate {
        value: best.max(value),
        certified: converged && nonnegative && p2 <= p1,
        converged,
        iterations,
    })
}

impl DiscretizedOperator {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// The appropriate norm estimate for the operator's exponents: the
    /// spectral norm when both are 2, the nonlinear power method otherwise.
    pub fn norm_estimate(&self) -> Result<NormEstimate> {
        if self.source_space.p() == 2.0 && self.target_space.p() == 2.0 {
            let (value, converged, iterations) = gram_power_iteration(&self.matrix, POWER_TOL, POWER_MAX_ITER);
            if converged {
                return Ok(NormEstimate { value, certified: true, converged, iterations });
            }
            let value = operator_norm_22(self)?;
            return Ok(NormEstimate { value, certified: true, converged: true, iterations });
        }
        let mut est = operator_norm_pq(self)?;
        est.certified &= self.nonnegative_kernel;
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::FunctionSpec;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64, nonneg: bool) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = if nonneg { 0.0 } else { -1.0 };
        DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(lo..1.0))
    }

    #[test]
    fn one_node_assembly() {
        let grid = Arc::new(Grid::build(1.0, 1, 1.0, 2).unwrap());
        let k = KernelSpec::envelope(2.0);
        let s = SpaceSpec::classic(0.0);
        let op = assemble(&k, &s, &s, &grid, &grid).unwrap();
        let (x, w) = (grid.nodes(), grid.weights());
        let expected = w[0].sqrt() * k.eval(x[0], x[0]) * w[0].sqrt();
        assert_relative_eq!(op.matrix[(0, 0)], expected, max_relative = 1e-15);
        assert_eq!((op.rows(), op.cols()), (4, 4));
    }

    #[test]
    fn flattened_entry_at_one_one() {
        // unit weights: the entry is just the flattened kernel
        let k = KernelSpec::envelope(2.0);
        let fl = flatten_weights(&k, &SpaceSpec::classic(-1.0), &SpaceSpec::classic(0.0));
        assert_relative_eq!(fl.eval(1.0, 1.0), 2.0 / 9.0, max_relative = 1e-15);
    }

    #[test]
    fn assembled_entries_match_formula() {
        let sg = Arc::new(Grid::build(20.0, 4, 1.3, 4).unwrap());
        let tg = Arc::new(Grid::build(10.0, 3, 1.2, 3).unwrap());
        let k = KernelSpec::cosine(1.7, 0.4);
        let src = SpaceSpec::variant_b(3.0, -0.4).unwrap();
        let tgt = SpaceSpec::variant_a(0.3, 1.5).unwrap();
        let op = assemble(&k, &src, &tgt, &sg, &tg).unwrap();
        assert_eq!((op.rows(), op.cols()), (tg.len(), sg.len()));
        for (i, j) in [(0, 0), (3, 7), (tg.len() - 1, sg.len() - 1), (5, 20)] {
            let (x, y) = (tg.nodes()[i], sg.nodes()[j]);
            let expected = tg.weights()[i].powf(1.0 / 1.5)
                * (1.0 + x.abs()).powf(0.3)
                * k.eval(x, y)
                * (1.0 + y.abs()).powf(2.0 * 0.4 / 3.0)
                * sg.weights()[j].powf(2.0 / 3.0);
            assert_relative_eq!(op.matrix[(i, j)], expected, max_relative = 1e-13);
        }
        assert!(op.matrix.iter().any(|&v| v < 0.0));
    }

    #[test]
    fn envelope_matrices_are_nonnegative() {
        for seed in 0..5u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let r = rng.gen_range(1.0..100.0);
            let grid = Arc::new(Grid::build(r, rng.gen_range(1..6), rng.gen_range(1.0..1.5), 4).unwrap());
            let s = SpaceSpec::classic(rng.gen_range(-2.0..0.0));
            let op = assemble(&KernelSpec::envelope(rng.gen_range(0.0..3.0)), &s, &s, &grid, &grid).unwrap();
            assert!(op.matrix.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn overflow_is_reported_with_indices() {
        let grid = Arc::new(Grid::build(1e6, 2, 1.0, 2).unwrap());
        let s = SpaceSpec::classic(-200.0);
        let err = assemble(&KernelSpec::envelope(0.0), &s, &SpaceSpec::classic(0.0), &grid, &grid).unwrap_err();
        assert!(matches!(err, LabError::Numerical(ref m) if m.contains("(i, j)")), "{err:?}");
    }

    #[test]
    fn applying_to_zero_and_indicator() {
        let grid = Arc::new(Grid::build(1.0, 4, 1.0, 8).unwrap());
        let k = KernelSpec::envelope(2.0);
        let zero = SampledFunction::zeros(grid.clone());
        assert_eq!(apply_operator(&k, &zero, 3.0).unwrap(), 0.0);
        let ind = SampledFunction::from_spec(grid, FunctionSpec::Indicator { a: 0.0, b: 1.0 }).unwrap();
        assert_relative_eq!(apply_operator(&k, &ind, 0.0).unwrap(), 0.5, max_relative = 1e-12);
        assert_relative_eq!(apply_operator(&k, &ind, 1.0).unwrap(), 1.0 / 6.0, max_relative = 1e-12);
    }

    #[test]
    fn small_spectral_norms() {
        assert_eq!(spectral_norm(&DMatrix::from_element(1, 1, -3.5)).unwrap(), 3.5);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        assert_relative_eq!(spectral_norm(&d).unwrap(), 2.0, max_relative = 1e-10);
        // all-ones start is in the null space
        let m = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert_relative_eq!(spectral_norm(&m).unwrap(), 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(spectral_norm(&DMatrix::zeros(3, 3)).unwrap(), 0.0);
    }

    #[test]
    fn power_iteration_matches_svd() {
        let m = random_matrix(50, 50, 42, false);
        assert_relative_eq!(spectral_norm(&m).unwrap(), dense_spectral_norm(&m), max_relative = 1e-8);
    }

    #[test]
    fn transpose_has_same_norm() {
        let m = random_matrix(30, 45, 5, true);
        let a = spectral_norm(&m).unwrap();
        let b = spectral_norm(&m.transpose()).unwrap();
        assert!((a - b).abs() <= 1e-10 * a);
    }

    #[test]
    fn pq_norm_basics() {
        let c = DMatrix::from_element(1, 1, 2.5);
        for (p1, p2) in [(2.0, 2.0), (1.5, 4.0), (4.0, 1.5)] {
            assert_relative_eq!(p_to_q_norm(&c, p1, p2).unwrap().value, 2.5, max_relative = 1e-14);
        }
        let m = random_matrix(40, 30, 8, false);
        let pq = p_to_q_norm(&m, 2.0, 2.0).unwrap();
        assert_relative_eq!(pq.value, spectral_norm(&m).unwrap(), max_relative = 1e-8);
        assert!(!pq.certified);
        assert!(p_to_q_norm(&m, 1.0, 2.0).is_err());
    }

    #[test]
    fn rank_one_holder_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DVector::from_fn(12, |_, _| rng.gen_range(0.0..1.0));
        let b = DVector::from_fn(9, |_, _| rng.gen_range(0.0..1.0));
        let m = &a * b.transpose();
        for (p1, p2) in [(3.0, 1.5), (2.0, 2.0), (1.5, 3.0), (4.0, 4.0)] {
            let q1 = p1 / (p1 - 1.0);
            let est = p_to_q_norm(&m, p1, p2).unwrap();
            assert_relative_eq!(est.value, lp(&a, p2) * lp(&b, q1), max_relative = 1e-10);
        }
    }

    #[test]
    fn certification_rules() {
        let m = random_matrix(20, 20, 1, true);
        assert!(p_to_q_norm(&m, 3.0, 2.0).unwrap().certified);
        assert!(p_to_q_norm(&m, 2.0, 2.0).unwrap().certified);
        assert!(!p_to_q_norm(&m, 2.0, 3.0).unwrap().certified);
    }

    #[test]
    fn pq_estimate_dominates_test_vectors() {
        let m = random_matrix(25, 25, 77, true);
        let (p1, p2) = (3.0, 2.0);
        let est = p_to_q_norm(&m, p1, p2).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(78);
        for _ in 0..200 {
            let x = DVector::from_fn(25, |_, _| rng.gen_range(-1.0..1.0));
            assert!(lp(&(&m * &x), p2) <= est * lp(&x, p1) * (1.0 + 1e-9));
        }
    }
}
