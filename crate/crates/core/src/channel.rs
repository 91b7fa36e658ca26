//! Sparse channel, Toeplitz training matrix, and noisy observation generators.
//!
//! All generation is keyed by an explicit 64-bit seed through ChaCha8, so
//! every artifact is bit-reproducible across runs and platforms.

use rand::distributions::Uniform;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::float::Float;
use crate::linalg::{matvec, norm2, DenseMatrix, LinalgError, SupportSet};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("sparsity violation: S={sparsity} must satisfy 1 <= S <= L/2 for L={length}")]
    SparsityViolation { sparsity: usize, length: usize },
    #[error("amplitude range [{low}, {high}] must satisfy 0 < low <= high")]
    InvalidAmplitudeRange { low: f64, high: f64 },
    #[error("training shape N={n}, L={l} must satisfy 1 <= N < L")]
    InvalidTrainingShape { n: usize, l: usize },
    #[error("channel length {got} does not match training matrix columns {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("clean signal is zero; finite SNR is undefined")]
    DegenerateSignal,
    #[error("channel taps disagree with declared support at index {index}")]
    SupportMismatch { index: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Length-L real tap vector with exactly S nonzero dominant taps.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseChannel<T> {
    taps: Vec<T>,
    support: SupportSet,
}

impl<T: Float> SparseChannel<T> {
    /// Validates that `taps` is nonzero exactly on `support` and that the
    /// sparsity stays at or below half the channel length.
    pub fn new(taps: Vec<T>, support: SupportSet) -> Result<Self, ChannelError> {
        let length = taps.len();
        if support.ambient() != length {
            return Err(ChannelError::LengthMismatch {
                expected: length,
                got: support.ambient(),
            });
        }
        if support.is_empty() || 2 * support.len() > length {
            return Err(ChannelError::SparsityViolation {
                sparsity: support.len(),
                length,
            });
        }
        for (index, tap) in taps.iter().enumerate() {
            if tap.is_zero() == support.contains(index) {
                return Err(ChannelError::SupportMismatch { index });
            }
        }
        Ok(Self { taps, support })
    }

    pub fn length(&self) -> usize {
        self.taps.len()
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }
}

/// N×L Toeplitz training matrix together with the symbol sequence that
/// generated it.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingMatrix<T> {
    matrix: DenseMatrix<T>,
    generator_sequence: Vec<T>,
}

impl<T: Float> TrainingMatrix<T> {
    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.matrix
    }

    /// The N+L−1 symbols the Toeplitz diagonals were filled from.
    pub fn generator_sequence(&self) -> &[T] {
        &self.generator_sequence
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn l(&self) -> usize {
        self.matrix.cols()
    }
}

impl<T> AsRef<DenseMatrix<T>> for TrainingMatrix<T> {
    fn as_ref(&self) -> &DenseMatrix<T> {
        &self.matrix
    }
}

/// Signal-to-noise setting for observation synthesis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Snr {
    /// Zero noise; the observation equals the clean signal exactly.
    Noiseless,
    /// Per-received-sample SNR in decibels.
    Db(f64),
}

impl Snr {
    pub fn is_noiseless(&self) -> bool {
        matches!(self, Snr::Noiseless)
    }
}

impl std::fmt::Display for Snr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Snr::Noiseless => write!(f, "noiseless"),
            Snr::Db(db) => write!(f, "{db}"),
        }
    }
}

impl std::str::FromStr for Snr {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("noiseless") {
            return Ok(Snr::Noiseless);
        }
        s.parse::<f64>()
            .map(Snr::Db)
            .map_err(|_| format!("expected a dB value or \"noiseless\", got {s:?}"))
    }
}

/// Received vector plus the noise parameters used to produce it.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation<T> {
    pub received: Vec<T>,
    pub noise_variance: T,
    pub snr: Snr,
    pub noise_seed: u64,
}

/// Draws a channel with `sparsity` dominant taps placed uniformly without
/// replacement, magnitudes uniform in `[amp_low, amp_high]` and equiprobable
/// sign. Deterministic for a fixed seed.
pub fn generate_sparse_channel<T: Float>(
    length: usize,
    sparsity: usize,
    amp_low: f64,
    amp_high: f64,
    seed: u64,
) -> Result<SparseChannel<T>, ChannelError> {
    if sparsity == 0 || 2 * sparsity > length {
        return Err(ChannelError::SparsityViolation { sparsity, length });
    }
    if !(amp_low > 0.0 && amp_low <= amp_high && amp_high.is_finite()) {
        return Err(ChannelError::InvalidAmplitudeRange {
            low: amp_low,
            high: amp_high,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let positions = rand::seq::index::sample(&mut rng, length, sparsity).into_vec();
    let support = SupportSet::from_unsorted(positions, length)?;
    let magnitude = Uniform::new_inclusive(T::cast(amp_low), T::cast(amp_high));
    let mut taps = vec![T::zero(); length];
    for &index in support.indices() {
        let m: T = rng.sample(magnitude);
        let sign = if rng.gen::<bool>() { T::one() } else { -T::one() };
        taps[index] = sign * m;
    }
    SparseChannel::new(taps, support)
}

/// Builds an N×L Toeplitz training matrix from N+L−1 Rademacher symbols
/// scaled by 1/√N, so every column has unit norm. Entry (i, j) is
/// `s[i − j + L − 1]`, which makes each diagonal constant.
pub fn build_toeplitz_training<T: Float>(
    n: usize,
    l: usize,
    seed: u64,
) -> Result<TrainingMatrix<T>, ChannelError> {
    if n == 0 || n >= l {
        return Err(ChannelError::InvalidTrainingShape { n, l });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = T::one() / T::cast(n as f64).sqrt();
    let generator_sequence: Vec<T> = (0..n + l - 1)
        .map(|_| if rng.gen::<bool>() { scale } else { -scale })
        .collect();
    let matrix = DenseMatrix::from_fn(n, l, |i, j| generator_sequence[i + l - 1 - j]);
    Ok(TrainingMatrix {
        matrix,
        generator_sequence,
    })
}

/// Noise variance for a clean signal of energy `clean_energy` observed over
/// `n` samples at the given SNR: `σ² = ‖clean‖² / (n · 10^(SNR/10))`.
pub fn noise_variance<T: Float>(clean_energy: T, n: usize, snr: Snr) -> T {
    match snr {
        Snr::Noiseless => T::zero(),
        Snr::Db(db) => clean_energy / (T::cast(n as f64) * T::cast(10f64.powf(db / 10.0))),
    }
}

/// Synthesizes `y = Xh + z` with i.i.d. zero-mean Gaussian noise of the
/// variance dictated by `snr`. Deterministic for a fixed seed.
pub fn synthesize_observation<T: Float>(
    x: &DenseMatrix<T>,
    h: &SparseChannel<T>,
    snr: Snr,
    seed: u64,
) -> Result<Observation<T>, ChannelError> {
    if x.cols() != h.length() {
        return Err(ChannelError::LengthMismatch {
            expected: x.cols(),
            got: h.length(),
        });
    }
    let clean = matvec(x, h.taps())?;
    let clean_norm = norm2(&clean);
    if !snr.is_noiseless() && clean_norm.is_zero() {
        return Err(ChannelError::DegenerateSignal);
    }
    let variance = noise_variance(clean_norm * clean_norm, x.rows(), snr);
    let sigma = variance.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let received = clean
        .into_iter()
        .map(|c| {
            if sigma.is_zero() {
                c
            } else {
                c + sigma * T::standard_normal(&mut rng)
            }
        })
        .collect();
    Ok(Observation {
        received,
        noise_variance: variance,
        snr,
        noise_seed: seed,
    })
}
