//! The four core channel estimators: CoSaMP, OMP, minimum-norm least
//! squares, and support-aware oracle least squares.
//!
//! All estimators are pure functions of `(X, y, config)` and return the same
//! [`Estimate`] record. Re-running with identical inputs produces bit-identical
//! taps; only the recorded wall-clock time differs.

use std::time::Instant;

use thiserror::Error;

use crate::float::Float;
use crate::linalg::{
    matvec, min_norm_least_squares, norm2, restricted_least_squares, top_k_indices,
    transpose_matvec, DenseMatrix, LinalgError, SupportSet,
};

/// Residual level, relative to `‖y‖`, below which an iterative estimator is
/// considered to have interpolated the data exactly (machine precision).
const EXACT_RESIDUAL_REL: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("observation length {got} does not match the {expected} matrix rows")]
    ObservationLength { expected: usize, got: usize },
    #[error(
        "merged support would reach {size} entries but only {rows} rows are available; \
         the sparsity target is too large for this training length"
    )]
    OverdeterminedSupport { size: usize, rows: usize },
    #[error("sparsity target {sparsity} must be at least 1 and at most min(N, L) = {limit}")]
    SparsityOutOfRange { sparsity: usize, limit: usize },
    #[error("oracle support of size {size} exceeds the {rows} matrix rows")]
    OracleSupportTooLarge { size: usize, rows: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Recovered tap vector with its support, iteration count, and per-iteration
/// residual norms.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate<T> {
    pub taps: Vec<T>,
    pub support: SupportSet,
    pub iterations: usize,
    pub residual_norms: Vec<T>,
    pub elapsed_seconds: f64,
}

impl<T: Float> Estimate<T> {
    fn new(
        taps: Vec<T>,
        support: SupportSet,
        iterations: usize,
        residual_norms: Vec<T>,
        started: Instant,
    ) -> Self {
        Self {
            taps,
            support,
            iterations,
            residual_norms,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        }
    }

    pub fn final_residual_norm(&self) -> Option<T> {
        self.residual_norms.last().copied()
    }
}

/// Stopping parameters for CoSaMP.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CosampConfig<T> {
    pub sparsity: usize,
    pub max_iterations: usize,
    pub halt_tolerance: T,
}

impl<T: Float> CosampConfig<T> {
    /// Defaults: at most `4·S` iterations, halting once successive iterates
    /// move by no more than `1e-4`.
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            max_iterations: 4 * sparsity,
            halt_tolerance: T::cast(1e-4),
        }
    }
}

/// CoSaMP: per iteration, correlate the residual against all columns, keep
/// the 2S strongest positions, merge them with the support of the previous
/// iterate, least-squares solve on the merged support, prune back to the S
/// strongest taps, and update the residual. Halts on the iteration budget,
/// on successive iterates moving less than the tolerance, on an exactly
/// interpolated residual, or after three iterations without residual decrease.
pub fn estimate_cosamp<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    cfg: &CosampConfig<T>,
) -> Result<Estimate<T>, EstimatorError> {
    let started = Instant::now();
    let (n, l) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(EstimatorError::ObservationLength {
            expected: n,
            got: y.len(),
        });
    }
    if cfg.sparsity == 0 || cfg.sparsity > l {
        return Err(EstimatorError::SparsityOutOfRange {
            sparsity: cfg.sparsity,
            limit: n.min(l),
        });
    }
    // The merged support can reach 3S entries; least squares needs that many rows.
    if 3 * cfg.sparsity > n {
        return Err(EstimatorError::OverdeterminedSupport {
            size: 3 * cfg.sparsity,
            rows: n,
        });
    }

    let y_norm = norm2(y);
    let exact_level = T::cast(EXACT_RESIDUAL_REL) * y_norm;
    let mut taps = vec![T::zero(); l];
    let mut support = SupportSet::empty(l);
    let mut residual = y.to_vec();
    let mut residual_norms = Vec::new();
    let mut prev_residual_norm = y_norm;
    let mut stall_count = 0usize;
    let mut iterations = 0usize;

    while iterations < cfg.max_iterations {
        iterations += 1;

        let proxy = transpose_matvec(x, &residual)?;
        let candidates = top_k_indices(&proxy, (2 * cfg.sparsity).min(l))?;
        let merged = candidates.union(&support);
        if merged.len() > n {
            return Err(EstimatorError::OverdeterminedSupport {
                size: merged.len(),
                rows: n,
            });
        }

        let solved = restricted_least_squares(x, &merged, y)?;
        let kept = top_k_indices(&solved, cfg.sparsity)?;
        let mut next = vec![T::zero(); l];
        for &index in kept.indices() {
            next[index] = solved[index];
        }

        let ax = matvec(x, &next)?;
        for (r, (&yi, &axi)) in residual.iter_mut().zip(y.iter().zip(&ax)) {
            *r = yi - axi;
        }
        let residual_norm = norm2(&residual);
        residual_norms.push(residual_norm);

        let change = taps
            .iter()
            .zip(&next)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b) * (a - b))
            .sqrt();
        support = SupportSet::nonzeros_of(&next);
        taps = next;

        if change <= cfg.halt_tolerance || residual_norm <= exact_level {
            break;
        }
        if residual_norm >= prev_residual_norm {
            stall_count += 1;
            if stall_count >= 3 {
                break;
            }
        } else {
            stall_count = 0;
        }
        prev_residual_norm = residual_norm;
    }

    Ok(Estimate::new(
        taps,
        support,
        iterations,
        residual_norms,
        started,
    ))
}

/// OMP: one support index per iteration, chosen as the column most
/// correlated with the current residual (ties toward the lower index,
/// already-selected columns skipped), followed by a least-squares re-solve
/// on the accumulated support.
pub fn estimate_omp<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    sparsity: usize,
) -> Result<Estimate<T>, EstimatorError> {
    let started = Instant::now();
    let (n, l) = (x.rows(), x.cols());
    if y.len() != n {
        return Err(EstimatorError::ObservationLength {
            expected: n,
            got: y.len(),
        });
    }
    if sparsity == 0 || sparsity > n.min(l) {
        return Err(EstimatorError::SparsityOutOfRange {
            sparsity,
            limit: n.min(l),
        });
    }

    let y_norm = norm2(y);
    let exact_level = T::cast(EXACT_RESIDUAL_REL) * y_norm;
    let mut selected: Vec<usize> = Vec::with_capacity(sparsity);
    let mut taps = vec![T::zero(); l];
    let mut residual = y.to_vec();
    let mut residual_norms = Vec::new();
    let mut iterations = 0usize;

    for _ in 0..sparsity {
        iterations += 1;
        let proxy = transpose_matvec(x, &residual)?;
        let mut best: Option<(usize, T)> = None;
        for (j, value) in proxy.iter().enumerate() {
            if selected.contains(&j) {
                continue;
            }
            let magnitude = value.abs();
            match best {
                Some((_, current)) if magnitude <= current => {}
                _ => best = Some((j, magnitude)),
            }
        }
        let (pick, _) = best.expect("sparsity <= L leaves an unselected column");
        selected.push(pick);

        let support = SupportSet::from_unsorted(selected.clone(), l)?;
        taps = restricted_least_squares(x, &support, y)?;
        let ax = matvec(x, &taps)?;
        for (r, (&yi, &axi)) in residual.iter_mut().zip(y.iter().zip(&ax)) {
            *r = yi - axi;
        }
        let residual_norm = norm2(&residual);
        residual_norms.push(residual_norm);
        if residual_norm <= exact_level {
            break;
        }
    }

    let support = SupportSet::nonzeros_of(&taps);
    Ok(Estimate::new(
        taps,
        support,
        iterations,
        residual_norms,
        started,
    ))
}

/// Plain least squares baseline: the minimum-norm solution of the
/// underdetermined system, reported with full support.
pub fn estimate_ls<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
) -> Result<Estimate<T>, EstimatorError> {
    let started = Instant::now();
    if y.len() != x.rows() {
        return Err(EstimatorError::ObservationLength {
            expected: x.rows(),
            got: y.len(),
        });
    }
    let taps = min_norm_least_squares(x, y)?;
    let ax = matvec(x, &taps)?;
    let residual: Vec<T> = y.iter().zip(&ax).map(|(&yi, &axi)| yi - axi).collect();
    let residual_norm = norm2(&residual);
    Ok(Estimate::new(
        taps,
        SupportSet::full(x.cols()),
        1,
        vec![residual_norm],
        started,
    ))
}

/// Least squares restricted to the true support: the empirical lower bound
/// among support-aware linear estimators.
pub fn estimate_oracle_ls<T: Float>(
    x: &DenseMatrix<T>,
    y: &[T],
    true_support: &SupportSet,
) -> Result<Estimate<T>, EstimatorError> {
    let started = Instant::now();
    if y.len() != x.rows() {
        return Err(EstimatorError::ObservationLength {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if true_support.len() > x.rows() {
        return Err(EstimatorError::OracleSupportTooLarge {
            size: true_support.len(),
            rows: x.rows(),
        });
    }
    let taps = restricted_least_squares(x, true_support, y)?;
    let ax = matvec(x, &taps)?;
    let residual: Vec<T> = y.iter().zip(&ax).map(|(&yi, &axi)| yi - axi).collect();
    let residual_norm = norm2(&residual);
    Ok(Estimate::new(
        taps,
        true_support.clone(),
        1,
        vec![residual_norm],
        started,
    ))
}
