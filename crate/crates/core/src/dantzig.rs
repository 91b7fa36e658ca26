//! Dantzig selector baseline: minimize `‖h‖₁` subject to
//! `‖Xᵀ(y − Xh)‖_∞ ≤ λ`, solved as a linear program by the dense simplex.
//!
//! The variable split `h = h⁺ − h⁻` with `h⁺, h⁻ ≥ 0` yields 2L variables
//! and 2L inequality rows. By default the solve is followed by a debiasing
//! least-squares pass on the S strongest entries so the estimator is
//! compared as an S-sparse output like the pursuit methods.

use std::time::Instant;

use thiserror::Error;

use crate::estimators::Estimate;
use crate::float::Float;
use crate::linalg::{
    dot, matvec, norm2, restricted_least_squares, top_k_indices, DenseMatrix, LinalgError,
    SupportSet,
};
use crate::simplex::{
    solve_simplex, ConstraintSense, LinearProgram, SimplexOptions, SimplexOutcome,
};

#[derive(Debug, Error)]
pub enum DantzigError {
    #[error("constraint level lambda must be nonnegative")]
    NegativeLambda,
    #[error("noise level sigma must be nonnegative")]
    NegativeSigma,
    #[error("observation length {got} does not match the {expected} matrix rows")]
    ObservationLength { expected: usize, got: usize },
    #[error("dantzig LP reported infeasible (lambda too small for this data)")]
    Infeasible,
    #[error("dantzig LP reported unbounded; the instance is malformed")]
    Unbounded,
    #[error("simplex hit the pivot limit after {pivots} pivots")]
    PivotLimit { pivots: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Constraint level and solver knobs for the Dantzig selector.
#[derive(Clone, Copy, Debug)]
pub struct DantzigConfig<T> {
    pub lambda: T,
    pub simplex_max_pivots: usize,
    pub pivot_tolerance: T,
    /// Re-fit the S strongest entries by restricted least squares.
    pub debias: bool,
}

impl<T: Float> DantzigConfig<T> {
    pub fn new(lambda: T) -> Self {
        let defaults = SimplexOptions::<T>::default();
        Self {
            lambda,
            simplex_max_pivots: defaults.max_pivots,
            pivot_tolerance: defaults.tolerance,
            debias: true,
        }
    }
}

/// Canonical constraint level `λ = σ·√(2·ln L)`.
pub fn dantzig_lambda<T: Float>(sigma: T, l: usize) -> T {
    sigma * T::cast((2.0 * (l as f64).ln()).max(0.0)).sqrt()
}

/// Assembles the selector LP: variables `(h⁺, h⁻) ≥ 0`, objective
/// `Σ(h⁺ + h⁻)`, and the 2L rows encoding `−λ ≤ (XᵀXh − Xᵀy)_j ≤ λ`.
pub fn build_dantzig_lp<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    lambda: T,
) -> Result<LinearProgram<T>, DantzigError> {
    if lambda < T::zero() {
        return Err(DantzigError::NegativeLambda);
    }
    if y.len() != x.rows() {
        return Err(DantzigError::ObservationLength {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let l = x.cols();
    let gram = DenseMatrix::from_fn(l, l, |i, j| dot(&x.column(i), &x.column(j)));
    let correlation: Vec<T> = (0..l).map(|j| dot(&x.column(j), y)).collect();

    let mut constraints = DenseMatrix::zeros(2 * l, 2 * l);
    let mut rhs = vec![T::zero(); 2 * l];
    for j in 0..l {
        for k in 0..l {
            let g = gram.get(j, k);
            // (XᵀXh)_j <= λ + (Xᵀy)_j
            constraints.set(j, k, g);
            constraints.set(j, l + k, -g);
            // −(XᵀXh)_j <= λ − (Xᵀy)_j
            constraints.set(l + j, k, -g);
            constraints.set(l + j, l + k, g);
        }
        rhs[j] = lambda + correlation[j];
        rhs[l + j] = lambda - correlation[j];
    }
    let objective = vec![T::one(); 2 * l];
    LinearProgram::new(
        objective,
        constraints,
        rhs,
        vec![ConstraintSense::LessEq; 2 * l],
    )
    .map_err(|e| match e {
        crate::simplex::SimplexError::Linalg(inner) => DantzigError::Linalg(inner),
        // Shapes are consistent by construction.
        other => unreachable!("dantzig LP assembly produced a malformed program: {other}"),
    })
}

/// Dantzig selector with the canonical `λ = σ·√(2·ln L)` and debiasing on.
pub fn estimate_dantzig<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    sigma: T,
    sparsity: usize,
) -> Result<Estimate<T>, DantzigError> {
    if sigma < T::zero() {
        return Err(DantzigError::NegativeSigma);
    }
    let cfg = DantzigConfig::new(dantzig_lambda(sigma, x.cols()));
    estimate_dantzig_with(x, y, sparsity, &cfg)
}

/// Dantzig selector under an explicit configuration.
pub fn estimate_dantzig_with<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    sparsity: usize,
    cfg: &DantzigConfig<T>,
) -> Result<Estimate<T>, DantzigError> {
    let started = Instant::now();
    let l = x.cols();
    let lp = build_dantzig_lp(x, y, cfg.lambda)?;
    let options = SimplexOptions {
        max_pivots: cfg.simplex_max_pivots,
        tolerance: cfg.pivot_tolerance,
    };
    let (split, pivots) = match solve_simplex(&lp, &options) {
        SimplexOutcome::Optimal {
            solution, pivots, ..
        } => (solution, pivots),
        SimplexOutcome::Infeasible => return Err(DantzigError::Infeasible),
        SimplexOutcome::Unbounded => return Err(DantzigError::Unbounded),
        SimplexOutcome::PivotLimit { pivots } => {
            return Err(DantzigError::PivotLimit { pivots })
        }
    };
    let mut taps: Vec<T> = (0..l).map(|j| split[j] - split[l + j]).collect();
    if cfg.debias {
        let strongest = top_k_indices(&taps, sparsity.min(l))?;
        taps = restricted_least_squares(x, &strongest, y)?;
    }
    let support = SupportSet::nonzeros_of(&taps);
    let ax = matvec(x, &taps)?;
    let residual: Vec<T> = y.iter().zip(&ax).map(|(&yi, &axi)| yi - axi).collect();
    Ok(Estimate {
        taps,
        support,
        // For the LP-based estimator the iteration count is simplex pivots.
        iterations: pivots,
        residual_norms: vec![norm2(&residual)],
        elapsed_seconds: started.elapsed().as_secs_f64(),
    })
}

/// `‖Xᵀ(y − Xh)‖_∞ `, the quantity the selector constrains.
pub fn correlated_residual_norm<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    taps: &[T],
) -> Result<T, DantzigError> {
    let ax = matvec(x, taps)?;
    let residual: Vec<T> = y.iter().zip(&ax).map(|(&yi, &axi)| yi - axi).collect();
    let correlated = crate::linalg::transpose_matvec(x, &residual)?;
    Ok(correlated
        .into_iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs())))
}
