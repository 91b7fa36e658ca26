//! Dense real linear-algebra kernels shared by all estimators.
//!
//! Everything here is a pure function of its inputs: matrix-vector products,
//! least squares restricted to a column subset, minimum-norm least squares
//! for underdetermined systems, and magnitude-based top-k index selection.
//! Least-squares solves go through a Householder QR factorization rather
//! than normal equations, which keeps moderately correlated column subsets
//! (the usual case for Toeplitz training matrices) well conditioned.

use std::cmp::Ordering;

use thiserror::Error;

use crate::float::Float;

/// Relative tolerance below which a triangular factor diagonal is treated
/// as zero (rank deficiency).
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("{context}: expected length {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("selection k={k} exceeds vector length {len}")]
    SelectionTooLarge { k: usize, len: usize },
    #[error("support index {index} out of range for ambient dimension {ambient}")]
    IndexOutOfRange { index: usize, ambient: usize },
    #[error("support indices not strictly increasing at position {position}")]
    UnsortedSupport { position: usize },
    #[error("support of size {size} exceeds the {rows} rows of the system")]
    OverdeterminedSupport { size: usize, rows: usize },
    #[error("singular restricted system on support {support:?}")]
    SingularSupport { support: Vec<usize> },
    #[error("singular system: {0}")]
    SingularSystem(&'static str),
}

/// Dense real matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Float> DenseMatrix<T> {
    /// Builds a matrix from row-major entries, rejecting shape mismatches
    /// and non-finite values.
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self, LinalgError> {
        if entries.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch {
                context: "matrix entries",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        if let Some(index) = entries.iter().position(|e| !e.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Fills entry (i, j) with `f(i, j)`. The generator must yield finite values.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::DimensionMismatch {
                    context: "matrix row",
                    expected: c,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(r, c, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.entries[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Extracts the submatrix formed by the columns in `support`, in order.
    pub fn column_submatrix(&self, support: &SupportSet) -> Self {
        Self::from_fn(self.rows, support.len(), |i, k| {
            self.get(i, support.indices()[k])
        })
    }
}

/// Strictly increasing set of column indices inside an ambient dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
    ambient: usize,
}

impl SupportSet {
    /// Validates that `indices` is strictly increasing and within `[0, ambient)`.
    pub fn new(indices: Vec<usize>, ambient: usize) -> Result<Self, LinalgError> {
        for (pos, window) in indices.windows(2).enumerate() {
            if window[0] >= window[1] {
                return Err(LinalgError::UnsortedSupport { position: pos + 1 });
            }
        }
        if let Some(&index) = indices.iter().find(|&&i| i >= ambient) {
            return Err(LinalgError::IndexOutOfRange { index, ambient });
        }
        Ok(Self { indices, ambient })
    }

    /// Sorts and deduplicates `indices` before validation.
    pub fn from_unsorted(mut indices: Vec<usize>, ambient: usize) -> Result<Self, LinalgError> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, ambient)
    }

    pub fn empty(ambient: usize) -> Self {
        Self {
            indices: Vec::new(),
            ambient,
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            indices: (0..ambient).collect(),
            ambient,
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    /// Set union. Panics if the ambient dimensions differ.
    pub fn union(&self, other: &SupportSet) -> SupportSet {
        assert_eq!(
            self.ambient, other.ambient,
            "support sets live in different ambient dimensions"
        );
        let mut merged = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (0, 0);
        while a < self.indices.len() && b < other.indices.len() {
            match self.indices[a].cmp(&other.indices[b]) {
                Ordering::Less => {
                    merged.push(self.indices[a]);
                    a += 1;
                }
                Ordering::Greater => {
                    merged.push(other.indices[b]);
                    b += 1;
                }
                Ordering::Equal => {
                    merged.push(self.indices[a]);
                    a += 1;
                    b += 1;
                }
            }
        }
        merged.extend_from_slice(&self.indices[a..]);
        merged.extend_from_slice(&other.indices[b..]);
        SupportSet {
            indices: merged,
            ambient: self.ambient,
        }
    }

    /// Support of a vector: the indices holding nonzero values.
    pub fn nonzeros_of<T: Float>(values: &[T]) -> SupportSet {
        SupportSet {
            indices: values
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(i, _)| i)
                .collect(),
            ambient: values.len(),
        }
    }
}

/// Computes `A v`.
pub fn matvec<T: Float>(a: &DenseMatrix<T>, v: &[T]) -> Result<Vec<T>, LinalgError> {
    if v.len() != a.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: "matvec input",
            expected: a.cols(),
            got: v.len(),
        });
    }
    Ok((0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .zip(v)
                .fold(T::zero(), |acc, (&aij, &vj)| acc + aij * vj)
        })
        .collect())
}

/// Computes `Aᵀ v` without materializing the transpose. In the real-valued
/// setting this is also the adjoint used for pursuit proxies.
pub fn transpose_matvec<T: Float>(a: &DenseMatrix<T>, v: &[T]) -> Result<Vec<T>, LinalgError> {
    if v.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: "transpose_matvec input",
            expected: a.rows(),
            got: v.len(),
        });
    }
    let mut out = vec![T::zero(); a.cols()];
    for (i, &vi) in v.iter().enumerate() {
        for (o, &aij) in out.iter_mut().zip(a.row(i)) {
            *o += aij * vi;
        }
    }
    Ok(out)
}

/// Indices of the `k` largest entries of `v` by absolute value, ties broken
/// toward the lower index, returned sorted ascending.
pub fn top_k_indices<T: Float>(v: &[T], k: usize) -> Result<SupportSet, LinalgError> {
    if k > v.len() {
        return Err(LinalgError::SelectionTooLarge { k, len: v.len() });
    }
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        v[b].abs()
            .partial_cmp(&v[a].abs())
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order.sort_unstable();
    Ok(SupportSet {
        indices: order,
        ambient: v.len(),
    })
}

/// Least squares on the columns of `a` selected by `omega`.
///
/// Returns a full-length vector that is zero off `omega` and minimizes
/// `‖y − A_Ω u‖₂` on `omega`, solved via Householder QR of the column
/// submatrix.
pub fn restricted_least_squares<T: Float>(
    a: &DenseMatrix<T>,
    omega: &SupportSet,
    y: &[T],
) -> Result<Vec<T>, LinalgError> {
    if y.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: "restricted least squares rhs",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if omega.ambient() != a.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: "restricted least squares support",
            expected: a.cols(),
            got: omega.ambient(),
        });
    }
    if omega.len() > a.rows() {
        return Err(LinalgError::OverdeterminedSupport {
            size: omega.len(),
            rows: a.rows(),
        });
    }
    let mut full = vec![T::zero(); a.cols()];
    if omega.is_empty() {
        return Ok(full);
    }

    let sub = a.column_submatrix(omega);
    let qr = HouseholderQr::factor(sub);
    if qr.is_rank_deficient(T::cast(RANK_TOLERANCE)) {
        return Err(LinalgError::SingularSupport {
            support: omega.indices().to_vec(),
        });
    }
    let mut rhs = y.to_vec();
    qr.apply_q_transpose(&mut rhs);
    let coeffs = qr.solve_upper(&rhs);
    for (&index, &c) in omega.indices().iter().zip(&coeffs) {
        full[index] = c;
    }
    Ok(full)
}

/// Minimum-ℓ₂-norm solution of the underdetermined system `A x = y`
/// (`A.rows ≤ A.cols`, full row rank), i.e. `Aᵀ(AAᵀ)⁻¹y`, computed through
/// a QR factorization of `Aᵀ` for conditioning.
pub fn min_norm_least_squares<T: Float>(
    a: &DenseMatrix<T>,
    y: &[T],
) -> Result<Vec<T>, LinalgError> {
    if y.len() != a.rows() {
        return Err(LinalgError::DimensionMismatch {
            context: "min-norm least squares rhs",
            expected: a.rows(),
            got: y.len(),
        });
    }
    if a.rows() > a.cols() {
        return Err(LinalgError::DimensionMismatch {
            context: "min-norm least squares expects rows <= cols",
            expected: a.cols(),
            got: a.rows(),
        });
    }
    // Aᵀ = QR, so A = RᵀQᵀ and the min-norm solution is Q R⁻ᵀ y.
    let qr = HouseholderQr::factor(a.transpose());
    if qr.is_rank_deficient(T::cast(RANK_TOLERANCE)) {
        return Err(LinalgError::SingularSystem(
            "row Gram matrix is rank deficient",
        ));
    }
    let w = qr.solve_lower_transposed(y);
    let mut x = vec![T::zero(); a.cols()];
    x[..w.len()].copy_from_slice(&w);
    qr.apply_q(&mut x);
    Ok(x)
}

/// Euclidean norm.
pub fn norm2<T: Float>(v: &[T]) -> T {
    v.iter()
        .fold(T::zero(), |acc, &x| acc + x * x)
        .sqrt()
}

/// Inner product.
pub fn dot<T: Float>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Householder QR of an m×n matrix with m ≥ n.
///
/// Reflectors are stored below the diagonal in LAPACK style; the diagonal
/// and the strict upper triangle hold R.
pub(crate) struct HouseholderQr<T> {
    factors: DenseMatrix<T>,
    taus: Vec<T>,
}

impl<T: Float> HouseholderQr<T> {
    pub(crate) fn factor(mut m: DenseMatrix<T>) -> Self {
        let rows = m.rows();
        let cols = m.cols();
        debug_assert!(rows >= cols, "QR expects a tall matrix");
        let mut taus = vec![T::zero(); cols];
        for j in 0..cols {
            // Build the reflector annihilating column j below the diagonal.
            let mut norm_sq = T::zero();
            for i in j..rows {
                let v = m.get(i, j);
                norm_sq += v * v;
            }
            let norm = norm_sq.sqrt();
            if norm.is_zero() {
                continue;
            }
            let pivot = m.get(j, j);
            let alpha = if pivot >= T::zero() { -norm } else { norm };
            let v0 = pivot - alpha;
            // v = (v0, m[j+1.., j]); tau = -v0 / alpha normalizes so H = I - tau v vᵀ / v0².
            let mut v_norm_sq = v0 * v0;
            for i in j + 1..rows {
                let v = m.get(i, j);
                v_norm_sq += v * v;
            }
            let tau = T::cast(2.0) * v0 * v0 / v_norm_sq;
            // Store normalized reflector (first component 1) below the diagonal.
            for i in j + 1..rows {
                let v = m.get(i, j) / v0;
                m.set(i, j, v);
            }
            m.set(j, j, alpha);
            taus[j] = tau;
            // Apply the reflector to the trailing columns.
            for k in j + 1..cols {
                let mut s = m.get(j, k);
                for i in j + 1..rows {
                    s += m.get(i, j) * m.get(i, k);
                }
                s *= tau;
                let mjk = m.get(j, k);
                m.set(j, k, mjk - s);
                for i in j + 1..rows {
                    let v = m.get(i, k) - s * m.get(i, j);
                    m.set(i, k, v);
                }
            }
        }
        Self { factors: m, taus }
    }

    fn rank_bounds(&self) -> (T, T) {
        let n = self.factors.cols();
        let mut min = T::infinity();
        let mut max = T::zero();
        for j in 0..n {
            let d = self.factors.get(j, j).abs();
            if d < min {
                min = d;
            }
            if d > max {
                max = d;
            }
        }
        (min, max)
    }

    pub(crate) fn is_rank_deficient(&self, relative_tolerance: T) -> bool {
        let (min, max) = self.rank_bounds();
        min <= relative_tolerance * max
    }

    /// Applies Qᵀ to `v` in place (reflectors in forward order).
    pub(crate) fn apply_q_transpose(&self, v: &mut [T]) {
        let rows = self.factors.rows();
        let cols = self.factors.cols();
        debug_assert_eq!(v.len(), rows);
        for j in 0..cols {
            if self.taus[j].is_zero() {
                continue;
            }
            let mut s = v[j];
            for i in j + 1..rows {
                s += self.factors.get(i, j) * v[i];
            }
            s *= self.taus[j];
            v[j] -= s;
            for i in j + 1..rows {
                v[i] -= s * self.factors.get(i, j);
            }
        }
    }

    /// Applies Q to `v` in place (reflectors in reverse order).
    pub(crate) fn apply_q(&self, v: &mut [T]) {
        let rows = self.factors.rows();
        let cols = self.factors.cols();
        debug_assert_eq!(v.len(), rows);
        for j in (0..cols).rev() {
            if self.taus[j].is_zero() {
                continue;
            }
            let mut s = v[j];
            for i in j + 1..rows {
                s += self.factors.get(i, j) * v[i];
            }
            s *= self.taus[j];
            v[j] -= s;
            for i in j + 1..rows {
                v[i] -= s * self.factors.get(i, j);
            }
        }
    }

    /// Solves `R u = rhs[..n]` by back substitution.
    pub(crate) fn solve_upper(&self, rhs: &[T]) -> Vec<T> {
        let n = self.factors.cols();
        let mut u = vec![T::zero(); n];
        for j in (0..n).rev() {
            let mut s = rhs[j];
            for k in j + 1..n {
                s -= self.factors.get(j, k) * u[k];
            }
            u[j] = s / self.factors.get(j, j);
        }
        u
    }

    /// Solves `Rᵀ w = rhs` by forward substitution.
    pub(crate) fn solve_lower_transposed(&self, rhs: &[T]) -> Vec<T> {
        let n = self.factors.cols();
        debug_assert_eq!(rhs.len(), n);
        let mut w = vec![T::zero(); n];
        for j in 0..n {
            let mut s = rhs[j];
            for k in 0..j {
                s -= self.factors.get(k, j) * w[k];
            }
            w[j] = s / self.factors.get(j, j);
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_vector(len: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    // Oracle: explicit transpose followed by a plain matvec.
    fn explicit_transpose_matvec(a: &DenseMatrix<f64>, v: &[f64]) -> Vec<f64> {
        matvec(&a.transpose(), v).unwrap()
    }

    // Oracle: Gauss-Jordan inverse of a small dense matrix.
    fn dense_inverse(a: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let n = a.rows();
        assert_eq!(n, a.cols());
        let mut aug = DenseMatrix::from_fn(n, 2 * n, |i, j| {
            if j < n {
                a.get(i, j)
            } else if j - n == i {
                1.0
            } else {
                0.0
            }
        });
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r, &s| {
                    aug.get(r, col)
                        .abs()
                        .partial_cmp(&aug.get(s, col).abs())
                        .unwrap()
                })
                .unwrap();
            for j in 0..2 * n {
                let tmp = aug.get(col, j);
                aug.set(col, j, aug.get(pivot_row, j));
                aug.set(pivot_row, j, tmp);
            }
            let p = aug.get(col, col);
            assert!(p.abs() > 1e-12, "oracle needs a nonsingular matrix");
            for j in 0..2 * n {
                let v = aug.get(col, j) / p;
                aug.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = aug.get(r, col);
                for j in 0..2 * n {
                    let v = aug.get(r, j) - f * aug.get(col, j);
                    aug.set(r, j, v);
                }
            }
        }
        DenseMatrix::from_fn(n, n, |i, j| aug.get(i, j + n))
    }

    #[test]
    fn matvec_identity() {
        let a = DenseMatrix::<f64>::identity(2);
        assert_eq!(matvec(&a, &[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
    }

    #[test]
    fn matvec_row_sum() {
        let a = DenseMatrix::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(matvec(&a, &[1.0, 1.0, 1.0]).unwrap(), vec![6.0]);
    }

    #[test]
    fn matvec_basis_vector_extracts_column() {
        let a = random_matrix(4, 6, 11);
        let mut e2 = vec![0.0; 6];
        e2[2] = 1.0;
        assert_eq!(matvec(&a, &e2).unwrap(), a.column(2));
    }

    #[test]
    fn matvec_rejects_dimension_mismatch() {
        let a = DenseMatrix::<f64>::identity(2);
        assert!(matches!(
            matvec(&a, &[1.0]),
            Err(LinalgError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn transpose_matvec_identity_and_column() {
        let a = DenseMatrix::<f64>::identity(2);
        assert_eq!(transpose_matvec(&a, &[5.0, 0.0]).unwrap(), vec![5.0, 0.0]);
        let col = DenseMatrix::new(2, 1, vec![1.0, 1.0]).unwrap();
        assert_eq!(transpose_matvec(&col, &[2.0, 3.0]).unwrap(), vec![5.0]);
    }

    #[test]
    fn transpose_matvec_matches_explicit_transpose_oracle() {
        let a = random_matrix(5, 7, 3);
        let v = random_vector(5, 4);
        let got = transpose_matvec(&a, &v).unwrap();
        let expected = explicit_transpose_matvec(&a, &v);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() <= 1e-12);
        }
    }

    #[test]
    fn top_k_picks_largest_magnitudes() {
        let v = [3.0, -5.0, 2.0];
        assert_eq!(top_k_indices(&v, 2).unwrap().indices(), &[0, 1]);
    }

    #[test]
    fn top_k_breaks_ties_toward_lower_index() {
        let v = [1.0, 1.0, 0.0];
        assert_eq!(top_k_indices(&v, 1).unwrap().indices(), &[0]);
    }

    #[test]
    fn top_k_zero_selects_nothing() {
        let v = [4.0, 2.0];
        assert!(top_k_indices(&v, 0).unwrap().is_empty());
    }

    #[test]
    fn top_k_rejects_oversized_k() {
        assert!(matches!(
            top_k_indices(&[1.0], 2),
            Err(LinalgError::SelectionTooLarge { .. })
        ));
    }

    #[test]
    fn restricted_ls_identity_single_column() {
        let a = DenseMatrix::<f64>::identity(3);
        let omega = SupportSet::new(vec![2], 3).unwrap();
        let sol = restricted_least_squares(&a, &omega, &[0.0, 0.0, 5.0]).unwrap();
        assert_eq!(sol, vec![0.0, 0.0, 5.0]);
    }

    #[test]
    fn restricted_ls_empty_support_is_zero() {
        let a = DenseMatrix::<f64>::identity(3);
        let omega = SupportSet::empty(3);
        let sol = restricted_least_squares(&a, &omega, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol, vec![0.0; 3]);
    }

    #[test]
    fn restricted_ls_recovers_planted_coefficients() {
        let a = random_matrix(6, 8, 21);
        let omega = SupportSet::new(vec![1, 4, 6], 8).unwrap();
        let u = [0.7, -1.3, 0.4];
        let sub = a.column_submatrix(&omega);
        let y = matvec(&sub, &u).unwrap();
        let sol = restricted_least_squares(&a, &omega, &y).unwrap();
        for (k, &index) in omega.indices().iter().enumerate() {
            assert!((sol[index] - u[k]).abs() <= 1e-10);
        }
        for (j, &v) in sol.iter().enumerate() {
            if !omega.contains(j) {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn restricted_ls_residual_orthogonal_to_selected_columns() {
        let a = random_matrix(7, 9, 33);
        let omega = SupportSet::new(vec![0, 3, 8], 9).unwrap();
        let y = random_vector(7, 34);
        let sol = restricted_least_squares(&a, &omega, &y).unwrap();
        let ax = matvec(&a, &sol).unwrap();
        let residual: Vec<f64> = y.iter().zip(&ax).map(|(a, b)| a - b).collect();
        let y_norm = norm2(&y);
        for &j in omega.indices() {
            let col = a.column(j);
            let alignment = dot(&col, &residual).abs();
            assert!(alignment <= 1e-8 * y_norm * norm2(&col));
        }
    }

    #[test]
    fn restricted_ls_rejects_overdetermined_support() {
        let a = random_matrix(2, 5, 1);
        let omega = SupportSet::new(vec![0, 1, 2], 5).unwrap();
        assert!(matches!(
            restricted_least_squares(&a, &omega, &[1.0, 2.0]),
            Err(LinalgError::OverdeterminedSupport { size: 3, rows: 2 })
        ));
    }

    #[test]
    fn restricted_ls_flags_singular_support() {
        // Two identical columns.
        let a = DenseMatrix::new(3, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]).unwrap();
        let omega = SupportSet::new(vec![0, 1], 2).unwrap();
        let err = restricted_least_squares(&a, &omega, &[1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, LinalgError::SingularSupport { support } if support == vec![0, 1]));
    }

    #[test]
    fn min_norm_identity() {
        let a = DenseMatrix::<f64>::identity(2);
        let sol = min_norm_least_squares(&a, &[1.0, 2.0]).unwrap();
        assert!((sol[0] - 1.0).abs() <= 1e-14);
        assert!((sol[1] - 2.0).abs() <= 1e-14);
    }

    #[test]
    fn min_norm_splits_symmetric_row_equally() {
        let a = DenseMatrix::new(1, 2, vec![1.0, 1.0]).unwrap();
        let sol = min_norm_least_squares(&a, &[2.0]).unwrap();
        assert!((sol[0] - 1.0).abs() <= 1e-14);
        assert!((sol[1] - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn min_norm_matches_explicit_inverse_oracle() {
        let a = random_matrix(5, 10, 8);
        let y = random_vector(5, 9);
        let sol = min_norm_least_squares(&a, &y).unwrap();

        // Oracle: Aᵀ (A Aᵀ)⁻¹ y with an explicit dense inverse.
        let at = a.transpose();
        let gram = DenseMatrix::from_fn(5, 5, |i, j| dot(a.row(i), a.row(j)));
        let inv = dense_inverse(&gram);
        let w = matvec(&inv, &y).unwrap();
        let expected = matvec(&at, &w).unwrap();

        let diff: Vec<f64> = sol.iter().zip(&expected).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) <= 1e-10);

        let residual: Vec<f64> = matvec(&a, &sol)
            .unwrap()
            .iter()
            .zip(&y)
            .map(|(ax, yi)| yi - ax)
            .collect();
        assert!(norm2(&residual) <= 1e-8 * norm2(&y));
    }

    #[test]
    fn min_norm_has_smallest_norm_among_solutions() {
        let a = random_matrix(4, 9, 17);
        let y = random_vector(4, 18);
        let sol = min_norm_least_squares(&a, &y).unwrap();

        // Project a random vector onto the null space of A and perturb.
        let v = random_vector(9, 19);
        let av = matvec(&a, &v).unwrap();
        let correction = min_norm_least_squares(&a, &av).unwrap();
        let null: Vec<f64> = v.iter().zip(&correction).map(|(a, b)| a - b).collect();
        assert!(norm2(&null) > 1e-6, "perturbation must be nontrivial");
        let perturbed: Vec<f64> = sol.iter().zip(&null).map(|(a, b)| a + b).collect();
        assert!(norm2(&perturbed) > norm2(&sol));
    }

    #[test]
    fn min_norm_flags_rank_deficient_rows() {
        // Duplicate rows make A Aᵀ singular.
        let a = DenseMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(
            min_norm_least_squares(&a, &[1.0, 1.0]),
            Err(LinalgError::SingularSystem(_))
        ));
    }

    #[test]
    fn support_set_validates_input() {
        assert!(SupportSet::new(vec![0, 2, 2], 5).is_err());
        assert!(SupportSet::new(vec![3, 1], 5).is_err());
        assert!(SupportSet::new(vec![0, 5], 5).is_err());
        assert!(SupportSet::new(vec![0, 4], 5).is_ok());
    }

    #[test]
    fn support_set_union_merges() {
        let a = SupportSet::new(vec![0, 3], 6).unwrap();
        let b = SupportSet::new(vec![1, 3, 5], 6).unwrap();
        assert_eq!(a.union(&b).indices(), &[0, 1, 3, 5]);
    }

    #[test]
    fn matrix_constructor_rejects_bad_entries() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(LinalgError::NonFinite { index: 1 })
        ));
    }

    proptest! {
        // Adjoint identity: ⟨Au, v⟩ = ⟨u, Aᵀv⟩.
        #[test]
        fn adjoint_identity(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rows = rng.gen_range(1..8usize);
            let cols = rng.gen_range(1..8usize);
            let a = DenseMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-2.0..2.0));
            let u: Vec<f64> = (0..cols).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let v: Vec<f64> = (0..rows).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let lhs = dot(&matvec(&a, &u).unwrap(), &v);
            let rhs = dot(&u, &transpose_matvec(&a, &v).unwrap());
            let scale = 1.0_f64.max(lhs.abs()).max(rhs.abs());
            prop_assert!((lhs - rhs).abs() <= 1e-10 * scale);
        }

        // Permuting the input permutes the selected indices when magnitudes are distinct.
        #[test]
        fn top_k_is_permutation_consistent(seed in 0u64..200) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let len = rng.gen_range(1..12usize);
            let k = rng.gen_range(0..=len);
            // Distinct magnitudes by construction.
            let mut values: Vec<f64> = (0..len)
                .map(|i| (i as f64 + 1.0) * if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let mut perm: Vec<usize> = (0..len).collect();
            for i in (1..len).rev() {
                let j = rng.gen_range(0..=i);
                perm.swap(i, j);
                values.swap(i, j);
            }
            // After the shuffle, values[i] = original[perm[i]].
            let original: Vec<f64> = {
                let mut o = vec![0.0; len];
                for (i, &p) in perm.iter().enumerate() {
                    o[p] = values[i];
                }
                o
            };
            let base = top_k_indices(&original, k).unwrap();
            let permuted = top_k_indices(&values, k).unwrap();
            let mut mapped: Vec<usize> = permuted
                .indices()
                .iter()
                .map(|&i| perm[i])
                .collect();
            mapped.sort_unstable();
            prop_assert_eq!(mapped, base.indices().to_vec());
        }
    }
}
