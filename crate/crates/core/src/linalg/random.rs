//! Seeded randomness and Haar-distributed sampling.
//!
//! Every random draw in the crate flows through [`SeededRng`], a ChaCha8
//! stream keyed by a 64-bit seed. Independent workers derive their own
//! streams with [`split_seed`], so results never depend on scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::state::PureState;
use crate::scalar::{c, Real, C};

/// Identifier recorded alongside seeds in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8";

/// Derives the seed of sub-stream `index` from `master`.
///
/// seedᵢ = splitmix64(master + (i + 1)·0x9E3779B97F4A7C15), the SplitMix64
/// output function applied to a Weyl-sequence step.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic random stream tagged with its seed.
#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    /// Fresh stream for sub-task `index`, independent of this stream's position.
    pub fn split(&self, index: u64) -> Self {
        Self::new(split_seed(self.seed, index))
    }

    pub fn standard_normal<T: Real>(&mut self) -> T {
        T::lit(self.sample::<f64, _>(StandardNormal))
    }

    /// Standard complex Gaussian, E|z|² = 1.
    pub fn complex_normal<T: Real>(&mut self) -> C<T> {
        let s = T::FRAC_1_SQRT_2();
        c(self.standard_normal::<T>() * s, self.standard_normal::<T>() * s)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
}

/// Haar-random unitary: QR of a complex Ginibre matrix, with the phases of
/// R's diagonal absorbed so that R has a positive diagonal.
///
/// The QR step is modified Gram-Schmidt with one reorthogonalisation pass,
/// which yields the positive-diagonal R directly.
pub fn haar_random_unitary<T: Real>(dim: usize, rng: &mut SeededRng) -> ComplexMatrix<T> {
    assert!(dim >= 1, "dimension must be positive");
    // columns of the Ginibre matrix
    let mut cols: Vec<Vec<C<T>>> = (0..dim)
        .map(|_| (0..dim).map(|_| rng.complex_normal()).collect())
        .collect();
    for k in 0..dim {
        let (done, rest) = cols.split_at_mut(k);
        let v = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let proj: C<T> = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * *b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * *y;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
    }
    ComplexMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Haar-random pure state: a normalised complex Gaussian vector.
pub fn haar_random_state<T: Real>(dim: usize, rng: &mut SeededRng) -> PureState<T> {
    assert!(dim >= 1, "dimension must be positive");
    let amps: Vec<C<T>> = (0..dim).map(|_| rng.complex_normal()).collect();
    PureState::normalized(amps)
}

/// Hermitian matrix with independent Gaussian entries (GUE up to scale).
pub fn random_hermitian<T: Real>(dim: usize, rng: &mut SeededRng) -> ComplexMatrix<T> {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| rng.complex_normal::<T>());
    g.hermitian_part()
}

/// Random density matrix from a Ginibre matrix: G G† / tr(G G†).
pub fn random_density<T: Real>(dim: usize, rng: &mut SeededRng) -> ComplexMatrix<T> {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| rng.complex_normal::<T>());
    let rho = g.matmul(&g.dagger());
    let tr = rho.trace().re;
    rho.scale_real(T::one() / tr).hermitian_part()
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    #[test]
    fn identical_seeds_give_identical_streams() {
        let mut a = SeededRng::new(77);
        let mut b = SeededRng::new(77);
        let xs: Vec<u64> = (0..8).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..8).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(split_seed(77, 0), split_seed(77, 1));
        assert_eq!(a.split(3).seed(), split_seed(77, 3));
    }

    #[test]
    fn one_dimensional_unitary_is_a_phase() {
        let mut rng = SeededRng::new(1);
        let u: M = haar_random_unitary(1, &mut rng);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sampled_unitaries_are_unitary() {
        let mut rng = SeededRng::new(2);
        for dim in [2, 3, 8, 16, 64] {
            let u: M = haar_random_unitary(dim, &mut rng);
            assert!(u.unitarity_defect() < 1e-10, "dim {dim}");
        }
    }

    #[test]
    fn second_moment_of_trace_is_one() {
        let mut rng = SeededRng::new(20);
        let samples: Vec<f64> = (0..10_000)
            .map(|_| haar_random_unitary::<f64>(8, &mut rng).trace().norm_sqr())
            .collect();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sigma = (var / n).sqrt();
        assert!((mean - 1.0).abs() < 5.0 * sigma, "mean {mean}, sigma {sigma}");
    }

    #[test]
    fn unitary_entries_have_zero_mean() {
        let mut rng = SeededRng::new(21);
        let n = 2000;
        let mut sum = vec![C::<f64>::new(0.0, 0.0); 16];
        let mut sq = [0.0; 16];
        for _ in 0..n {
            let u: M = haar_random_unitary(4, &mut rng);
            for (k, z) in u.as_slice().iter().enumerate() {
                sum[k] += *z;
                sq[k] += z.norm_sqr();
            }
        }
        for k in 0..16 {
            let mean = sum[k] / n as f64;
            let sigma = (sq[k] / n as f64 / n as f64).sqrt();
            assert!(mean.norm() < 5.0 * sigma, "entry {k}: {mean}");
        }
    }

    #[test]
    fn state_is_normalised_and_scalar_case_is_a_phase() {
        let mut rng = SeededRng::new(4);
        let s: PureState<f64> = haar_random_state(1, &mut rng);
        assert!((s.amplitudes()[0].norm() - 1.0).abs() < 1e-15);
        for dim in [2, 4, 16] {
            let s: PureState<f64> = haar_random_state(dim, &mut rng);
            assert!((s.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn state_overlap_moment_is_one_over_dim() {
        let mut rng = SeededRng::new(5);
        let n = 100_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| haar_random_state::<f64>(4, &mut rng).amplitudes()[0].norm_sqr())
            .collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let sigma = (var / n as f64).sqrt();
        assert!((mean - 0.25).abs() < 5.0 * sigma, "mean {mean}");
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = SeededRng::new(6);
        let rho: M = random_density(8, &mut rng);
        assert!(rho.is_density(1e-10));
    }
}
