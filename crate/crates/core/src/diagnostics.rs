//! Training-matrix quality diagnostics: coherence, the training-length
//! bound, and restricted isometry constants.
//!
//! The restricted isometry constant δ_S is the smallest δ with
//! `(1 − δ)‖h‖² ≤ ‖Xh‖² ≤ (1 + δ)‖h‖²` for every S-sparse h; it equals the
//! worst extreme-eigenvalue deviation of the S×S Gram blocks over all
//! supports, so the exact computation enumerates supports and is guarded to
//! desk-scale instances. The sampled variant reports a certified lower bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::float::Float;
use crate::linalg::{dot, DenseMatrix, SupportSet};

/// Exhaustive enumeration is refused above this many supports.
pub const BRUTEFORCE_SUPPORT_LIMIT: u128 = 1_000_000;

/// Recovery-gate threshold on δ_{2S}: `√2 − 1`.
pub fn recovery_gate_threshold<T: Float>() -> T {
    T::cast(std::f64::consts::SQRT_2 - 1.0)
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("order S={order} must be between 1 and the {cols} matrix columns")]
    OrderOutOfRange { order: usize, cols: usize },
    #[error(
        "C({cols}, {order}) = {count} supports exceeds the exhaustive limit of \
         {BRUTEFORCE_SUPPORT_LIMIT}; use rip_sample for a sampled lower bound"
    )]
    TooManySupports {
        cols: usize,
        order: usize,
        count: u128,
    },
    #[error("coherence bound needs L >= 2, got {0}")]
    LengthTooSmall(usize),
    #[error("sampling needs at least one trial")]
    NoTrials,
}

/// Restricted isometry constant report for one order.
#[derive(Clone, Debug, PartialEq)]
pub struct RipReport<T> {
    pub order: usize,
    pub delta: T,
    pub worst_support: SupportSet,
    /// True when every support was examined; false marks a sampled lower bound.
    pub exhaustive: bool,
}

impl<T: Float> RipReport<T> {
    /// δ_S ≥ 1 means the isometry inequality fails outright for some support.
    pub fn is_violated(&self) -> bool {
        self.delta >= T::one()
    }

    /// Whether this constant passes the `δ ≤ √2 − 1` recovery gate.
    pub fn meets_recovery_gate(&self) -> bool {
        self.delta <= recovery_gate_threshold::<T>()
    }
}

/// Coherence diagnostics plus the training-length advisory bound.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherenceReport<T> {
    /// Scaled entrywise maximum `√L · max |X_ij|`.
    pub mu: T,
    /// Largest off-diagonal column inner product, reported for comparison.
    pub mutual_coherence: T,
    /// `c1 · S · (ln L)⁴ · μ²`.
    pub bound_rhs: T,
    pub c1: T,
    /// Whether the row count meets the advisory bound.
    pub satisfied: bool,
}

/// Scaled entrywise maximum `μ = √L · max_{i,j} |X_ij|`.
pub fn coherence_mu<T: Float>(x: &DenseMatrix<T>) -> T {
    let max_entry = x
        .entries()
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()));
    T::cast(x.cols() as f64).sqrt() * max_entry
}

/// Mutual coherence `max_{i≠j} |⟨x_i, x_j⟩|`, the column-inner-product
/// alternative to [`coherence_mu`]. Zero for matrices with fewer than two
/// columns.
pub fn mutual_coherence<T: Float>(x: &DenseMatrix<T>) -> T {
    let mut max = T::zero();
    for i in 0..x.cols() {
        let ci = x.column(i);
        for j in i + 1..x.cols() {
            let inner = dot(&ci, &x.column(j)).abs();
            max = max.max(inner);
        }
    }
    max
}

/// Advisory lower bound on the training length: `c1 · S · (ln L)⁴ · μ²`
/// (natural log).
pub fn training_length_bound<T: Float>(
    l: usize,
    s: usize,
    mu: T,
    c1: T,
) -> Result<T, DiagnosticsError> {
    training_length_bound_with_base(l, s, mu, c1, std::f64::consts::E)
}

/// Same bound with an explicit logarithm base; changing the base only
/// rescales the constant.
pub fn training_length_bound_with_base<T: Float>(
    l: usize,
    s: usize,
    mu: T,
    c1: T,
    base: f64,
) -> Result<T, DiagnosticsError> {
    if l < 2 {
        return Err(DiagnosticsError::LengthTooSmall(l));
    }
    let log = T::cast((l as f64).log(base));
    Ok(c1 * T::cast(s as f64) * log.powi(4) * mu * mu)
}

/// Full coherence report for a matrix probed at sparsity `s`.
pub fn coherence_report<T: Float>(
    x: &DenseMatrix<T>,
    s: usize,
    c1: T,
) -> Result<CoherenceReport<T>, DiagnosticsError> {
    let mu = coherence_mu(x);
    let bound_rhs = training_length_bound(x.cols(), s, mu, c1)?;
    Ok(CoherenceReport {
        mu,
        mutual_coherence: mutual_coherence(x),
        bound_rhs,
        c1,
        satisfied: T::cast(x.rows() as f64) >= bound_rhs,
    })
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if result >= u128::MAX / (n as u128 + 1) {
            return u128::MAX;
        }
    }
    result
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// iterated to an off-diagonal norm of 1e-12 relative to the matrix scale.
fn symmetric_eigenvalues<T: Float>(m: &DenseMatrix<T>) -> Vec<T> {
    let n = m.rows();
    debug_assert_eq!(n, m.cols());
    if n == 1 {
        return vec![m.get(0, 0)];
    }
    let mut a = m.clone();
    let scale = a
        .entries()
        .iter()
        .fold(T::zero(), |acc, v| acc.max(v.abs()))
        .max(T::one());
    let target = T::cast(1e-12) * scale;
    for _ in 0..100 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.abs() <= target * T::cast(1e-3) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (T::cast(2.0) * apq);
                let t = {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
            }
        }
    }
    (0..n).map(|i| a.get(i, i)).collect()
}

fn support_deviation<T: Float>(gram: &DenseMatrix<T>, support: &[usize]) -> T {
    let s = support.len();
    if s == 1 {
        let g = gram.get(support[0], support[0]);
        return (g - T::one()).abs();
    }
    let block = DenseMatrix::from_fn(s, s, |i, j| gram.get(support[i], support[j]));
    let eigenvalues = symmetric_eigenvalues(&block);
    let mut max = T::neg_infinity();
    let mut min = T::infinity();
    for v in eigenvalues {
        max = max.max(v);
        min = min.min(v);
    }
    (max - T::one()).max(T::one() - min)
}

fn gram_matrix<T: Float>(x: &DenseMatrix<T>) -> DenseMatrix<T> {
    let l = x.cols();
    let columns: Vec<Vec<T>> = (0..l).map(|j| x.column(j)).collect();
    DenseMatrix::from_fn(l, l, |i, j| dot(&columns[i], &columns[j]))
}

/// Advances `support` to the next S-combination of `[0, cols)` in
/// lexicographic order; returns false once exhausted.
fn next_combination(support: &mut [usize], cols: usize) -> bool {
    let s = support.len();
    let mut i = s;
    while i > 0 {
        i -= 1;
        if support[i] < cols - (s - i) {
            support[i] += 1;
            for k in i + 1..s {
                support[k] = support[k - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Exact δ_S by enumerating every size-S support, guarded to 10⁶ supports.
pub fn ric_bruteforce<T: Float>(
    x: &DenseMatrix<T>,
    order: usize,
) -> Result<RipReport<T>, DiagnosticsError> {
    let cols = x.cols();
    if order == 0 || order > cols {
        return Err(DiagnosticsError::OrderOutOfRange { order, cols });
    }
    let count = binomial(cols, order);
    if count > BRUTEFORCE_SUPPORT_LIMIT {
        return Err(DiagnosticsError::TooManySupports {
            cols,
            order,
            count,
        });
    }
    let gram = gram_matrix(x);
    let mut support: Vec<usize> = (0..order).collect();
    let mut worst = support.clone();
    let mut delta = T::neg_infinity();
    loop {
        let deviation = support_deviation(&gram, &support);
        if deviation > delta {
            delta = deviation;
            worst.copy_from_slice(&support);
        }
        if !next_combination(&mut support, cols) {
            break;
        }
    }
    Ok(RipReport {
        order,
        delta,
        worst_support: SupportSet::new(worst, cols).expect("combination is sorted"),
        exhaustive: true,
    })
}

/// Sampled lower bound on δ_S: the worst deviation over randomly drawn
/// supports. When the trial budget covers every support (and the exhaustive
/// guard allows), the scan is exhaustive and the result exact.
pub fn rip_sample<T: Float>(
    x: &DenseMatrix<T>,
    order: usize,
    trials: usize,
    seed: u64,
) -> Result<RipReport<T>, DiagnosticsError> {
    let cols = x.cols();
    if order == 0 || order > cols {
        return Err(DiagnosticsError::OrderOutOfRange { order, cols });
    }
    if trials == 0 {
        return Err(DiagnosticsError::NoTrials);
    }
    let count = binomial(cols, order);
    if count <= trials as u128 && count <= BRUTEFORCE_SUPPORT_LIMIT {
        return ric_bruteforce(x, order);
    }
    let gram = gram_matrix(x);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut delta = T::neg_infinity();
    let mut worst: Vec<usize> = (0..order).collect();
    for _ in 0..trials {
        let mut support = rand::seq::index::sample(&mut rng, cols, order).into_vec();
        support.sort_unstable();
        let deviation = support_deviation(&gram, &support);
        if deviation > delta {
            delta = deviation;
            worst = support;
        }
    }
    Ok(RipReport {
        order,
        delta,
        worst_support: SupportSet::new(worst, cols).expect("sampled support is sorted"),
        exhaustive: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_toeplitz_training;

    fn two_column_correlated(rho: f64) -> DenseMatrix<f64> {
        // Unit columns with inner product rho.
        DenseMatrix::new(
            3,
            2,
            vec![1.0, rho, 0.0, (1.0 - rho * rho).sqrt(), 0.0, 0.0],
        )
        .unwrap()
    }

    #[test]
    fn coherence_of_identity_is_sqrt_l() {
        let x = DenseMatrix::<f64>::identity(4);
        assert_eq!(coherence_mu(&x), 2.0);
    }

    #[test]
    fn coherence_of_rademacher_toeplitz_is_sqrt_l_over_n() {
        let tm = build_toeplitz_training::<f64>(25, 50, 7).unwrap();
        let mu = coherence_mu(tm.matrix());
        assert_eq!(mu, 2f64.sqrt());
    }

    #[test]
    fn coherence_of_zero_matrix_is_zero() {
        let x = DenseMatrix::<f64>::zeros(3, 5);
        assert_eq!(coherence_mu(&x), 0.0);
    }

    #[test]
    fn mutual_coherence_reads_column_inner_products() {
        let x = two_column_correlated(0.5);
        assert!((mutual_coherence(&x) - 0.5).abs() <= 1e-15);
        assert_eq!(mutual_coherence(&DenseMatrix::<f64>::identity(3)), 0.0);
    }

    #[test]
    fn bound_is_zero_for_zero_sparsity() {
        assert_eq!(training_length_bound(50, 0, 1.0f64, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn bound_matches_direct_evaluation() {
        // Direct-evaluation oracle at L = 7 (nearest integer to e²).
        let l = 7usize;
        let expected = 1.0 * 1.0 * (l as f64).ln().powi(4) * 1.0;
        let got = training_length_bound(l, 1, 1.0f64, 1.0).unwrap();
        assert!((got - expected).abs() <= 1e-12);
    }

    #[test]
    fn doubling_mu_quadruples_the_bound() {
        let b1 = training_length_bound(50, 3, 1.0f64, 1.0).unwrap();
        let b2 = training_length_bound(50, 3, 2.0f64, 1.0).unwrap();
        assert!((b2 - 4.0 * b1).abs() <= 1e-9 * b1);
    }

    #[test]
    fn bound_rejects_tiny_length() {
        assert!(matches!(
            training_length_bound(1, 1, 1.0f64, 1.0),
            Err(DiagnosticsError::LengthTooSmall(1))
        ));
    }

    #[test]
    fn identity_has_zero_ric_at_every_order() {
        let x = DenseMatrix::<f64>::identity(6);
        for order in 1..=3 {
            let report = ric_bruteforce(&x, order).unwrap();
            assert_eq!(report.delta, 0.0);
            assert_eq!(report.worst_support.len(), order);
            assert!(report.exhaustive);
            assert!(report.meets_recovery_gate());
        }
    }

    #[test]
    fn correlated_pair_matches_eigenvalue_formula() {
        // Gram eigenvalues are 1 ± rho, so δ₂ = rho.
        let x = two_column_correlated(0.5);
        let report = ric_bruteforce(&x, 2).unwrap();
        assert!((report.delta - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn unit_column_matrices_have_exact_zero_delta_one() {
        let x = DenseMatrix::new(3, 2, vec![0.0, 1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
        let report = ric_bruteforce(&x, 1).unwrap();
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn delta_is_monotone_in_order() {
        for seed in 0..20u64 {
            let tm = build_toeplitz_training::<f64>(6, 9, seed).unwrap();
            let mut previous = 0.0f64;
            for order in 1..=3 {
                let report = ric_bruteforce(tm.matrix(), order).unwrap();
                assert!(
                    report.delta >= previous - 1e-12,
                    "seed {seed}: delta_{order} = {} < delta_{} = {previous}",
                    report.delta,
                    order - 1
                );
                previous = report.delta;
            }
        }
    }

    #[test]
    fn bruteforce_guard_refuses_huge_enumerations() {
        let x = DenseMatrix::<f64>::zeros(5, 40);
        let err = ric_bruteforce(&x, 10).unwrap_err();
        assert!(matches!(err, DiagnosticsError::TooManySupports { .. }));
        assert!(err.to_string().contains("rip_sample"));
    }

    #[test]
    fn sampling_is_a_lower_bound_and_exact_when_covering() {
        let tm = build_toeplitz_training::<f64>(6, 10, 3).unwrap();
        let exact = ric_bruteforce(tm.matrix(), 2).unwrap();
        let sampled = rip_sample(tm.matrix(), 2, 10, 99).unwrap();
        assert!(sampled.delta <= exact.delta + 1e-15);
        assert!(!sampled.exhaustive);
        // Budget covering C(10, 2) = 45 supports collapses to the exact scan.
        let covering = rip_sample(tm.matrix(), 2, 45, 99).unwrap();
        assert_eq!(covering.delta, exact.delta);
        assert!(covering.exhaustive);
    }

    #[test]
    fn sampling_on_identity_is_zero() {
        let x = DenseMatrix::<f64>::identity(12);
        let report = rip_sample(&x, 3, 25, 5).unwrap();
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn jacobi_agrees_with_closed_form_eigenvalues() {
        // 2x2 symmetric: eigenvalues of [[2, 1], [1, 2]] are 1 and 3.
        let m = DenseMatrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        let mut eig = symmetric_eigenvalues(&m);
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((eig[0] - 1.0).abs() <= 1e-12);
        assert!((eig[1] - 3.0).abs() <= 1e-12);

        // 3x3 with known spectrum {1, 2, 4}: diag + rotation-free case.
        let d = DenseMatrix::new(3, 3, vec![4.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let mut eig = symmetric_eigenvalues(&d);
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(eig, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn coherence_report_evaluates_the_advisory() {
        let tm = build_toeplitz_training::<f64>(25, 50, 13).unwrap();
        let report = coherence_report(tm.matrix(), 5, 1.0).unwrap();
        assert_eq!(report.mu, 2f64.sqrt());
        assert!(report.bound_rhs > 0.0);
        // (ln 50)^4 * 2 * 5 is far above 25 rows.
        assert!(!report.satisfied);
    }
}
