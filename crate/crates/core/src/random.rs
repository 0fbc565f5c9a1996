//! Deterministic, splittable randomness.
//!
//! Every random quantity in the crate is drawn from an [`RngStream`], a
//! ChaCha8 generator keyed by a 64-bit seed and positioned on one of its 2^64
//! independent streams. Parallel tasks take `stream_id = task index`; nested
//! fan-out uses [`RngStream::fork`]. There is no global generator.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qcore::{qr, ComplexMatrix, Statevector};

/// Name of the generator, echoed into result metadata.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9, seed_from_u64 + set_stream)";

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for sub-task `index`. Depends only on `(seed, stream_id,
    /// index)`, never on how many draws the parent has made.
    pub fn fork(&self, index: u64) -> RngStream {
        let child_seed = splitmix64(self.seed ^ splitmix64(self.stream_id ^ 0xA5A5_5A5A_C3C3_3C3C));
        RngStream::new(child_seed, index)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Standard complex Gaussian: `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(self.standard_normal() * s, self.standard_normal() * s)
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.random_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Haar-random `d x d` unitary: QR of a complex Ginibre matrix with each
/// column of `Q` rotated by the phase of the matching diagonal entry of `R`.
pub fn haar_unitary(d: usize, rng: &mut RngStream) -> Result<ComplexMatrix> {
    if d == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    crate::qcore::check_entries(d, d)?;
    let g = ComplexMatrix::from_fn(d, d, |_, _| rng.complex_normal());
    let (q, r) = qr(&g)?;
    let phases: Vec<Complex64> = (0..d)
        .map(|i| {
            let rii = r[(i, i)];
            if rii.norm() > 0.0 { rii / rii.norm() } else { Complex64::new(1.0, 0.0) }
        })
        .collect();
    let u = ComplexMatrix::from_fn(d, d, |i, j| q[(i, j)] * phases[j]);
    u.into_unitary()
}

/// Haar-random pure state of dimension `d` (normalized complex Gaussian vector).
pub fn haar_state(d: usize, rng: &mut RngStream) -> Result<Statevector> {
    let amps: Vec<Complex64> = (0..d).map(|_| rng.complex_normal()).collect();
    Statevector::from_amplitudes(amps)?.normalized()
}

/// `n` i.i.d. draws from `Uniform[-w, w]`.
pub fn sample_disorder(n: usize, w: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::Domain(format!("disorder strength must be finite and >= 0, got {w}")));
    }
    Ok((0..n).map(|_| w * (2.0 * rng.uniform() - 1.0)).collect())
}

/// Real symmetric GOE matrix (row-major): diagonal entries have variance 2,
/// off-diagonal entries variance 1.
pub fn goe_matrix(n: usize, rng: &mut RngStream) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = std::f64::consts::SQRT_2 * rng.standard_normal();
        for j in (i + 1)..n {
            let x = rng.standard_normal();
            m[i * n + j] = x;
            m[j * n + i] = x;
        }
    }
    m
}

/// Categorical distribution with precomputed cumulative weights.
#[derive(Clone, Debug)]
pub struct Categorical {
    cumulative: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Domain("no categories".into()));
        }
        let mut total = 0.0;
        let mut cumulative = Vec::with_capacity(weights.len());
        for &w in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::Domain(format!("weights must be finite and nonnegative, got {w}")));
            }
            total += w;
            cumulative.push(total);
        }
        if total <= 0.0 {
            return Err(Error::Domain("all weights are zero".into()));
        }
        Ok(Self { cumulative })
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u = rng.uniform() * self.total();
        let idx = self.cumulative.partition_point(|&c| c <= u);
        // zero-weight tail entries share the final cumulative value
        let idx = idx.min(self.cumulative.len() - 1);
        self.first_with_weight(idx)
    }

    fn first_with_weight(&self, idx: usize) -> usize {
        // partition_point already skips zero-weight entries before idx; guard
        // the rounding case u == total landing on a zero-weight entry
        let mut i = idx;
        while i > 0 && self.cumulative[i] == self.cumulative[i - 1] {
            i -= 1;
        }
        i
    }
}

/// Index `i` with probability `weights[i] / sum(weights)`.
pub fn sample_categorical(weights: &[f64], rng: &mut RngStream) -> Result<usize> {
    Ok(Categorical::new(weights)?.sample(rng))
}

/// Distribution `q(x)` over computational basis strings of `n_bits` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalSource {
    n_bits: usize,
    support: Vec<usize>,
    probs: Vec<f64>,
}

impl ClassicalSource {
    pub fn new(n_bits: usize, support: Vec<usize>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != probs.len() {
            return Err(Error::Domain("support and probabilities must be nonempty and equally long".into()));
        }
        if n_bits >= usize::BITS as usize {
            return Err(Error::Size(format!("{n_bits}-bit strings are not supported")));
        }
        let limit = 1usize << n_bits;
        let mut seen = std::collections::HashSet::with_capacity(support.len());
        for &x in &support {
            if x >= limit {
                return Err(Error::Domain(format!("string {x} does not fit in {n_bits} bits")));
            }
            if !seen.insert(x) {
                return Err(Error::Domain(format!("string {x} listed twice")));
            }
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Domain("probabilities must be finite and nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { n_bits, support, probs })
    }

    pub fn point(n_bits: usize, x: usize) -> Result<Self> {
        Self::new(n_bits, vec![x], vec![1.0])
    }

    pub fn uniform(n_bits: usize, support: Vec<usize>) -> Result<Self> {
        let p = 1.0 / support.len().max(1) as f64;
        let probs = vec![p; support.len()];
        Self::new(n_bits, support, probs)
    }

    /// Uniform over the lexicographically first `m` strings `0..m`.
    pub fn uniform_first(n_bits: usize, m: usize) -> Result<Self> {
        Self::uniform(n_bits, (0..m).collect())
    }

    /// Uniform over `m` distinct strings chosen at random, listed in
    /// ascending order.
    pub fn uniform_random(n_bits: usize, m: usize, rng: &mut RngStream) -> Result<Self> {
        if n_bits >= usize::BITS as usize || m > (1usize << n_bits) {
            return Err(Error::Domain(format!("cannot pick {m} distinct {n_bits}-bit strings")));
        }
        let mut pool: Vec<usize> = (0..1usize << n_bits).collect();
        for i in 0..m {
            let j = i + rng.below(pool.len() - i);
            pool.swap(i, j);
        }
        let mut chosen = pool[..m].to_vec();
        chosen.sort_unstable();
        Self::uniform(n_bits, chosen)
    }

    /// Uniform over all `2^n_bits` strings.
    pub fn uniform_all(n_bits: usize) -> Result<Self> {
        Self::uniform_first(n_bits, 1usize << n_bits)
    }

    /// Distribution on the first `m = ceil(2^s)` strings with Renyi-2 entropy
    /// exactly `s`. Uniform when `2^s` is an integer; otherwise string 0 gets
    /// the larger weight and the others share the rest equally.
    pub fn with_renyi2_first(n_bits: usize, s: f64) -> Result<Self> {
        if !(s >= 0.0) || s > n_bits as f64 {
            return Err(Error::Domain(format!("entropy {s} outside [0, {n_bits}]")));
        }
        let target = 2f64.powf(s);
        let nearest = target.round();
        if (target - nearest).abs() < 1e-9 {
            return Self::uniform_first(n_bits, nearest as usize);
        }
        let m = target.ceil() as usize;
        let (mf, c) = (m as f64, 1.0 / target);
        let p = (1.0 + ((mf - 1.0) * (c * mf - 1.0)).max(0.0).sqrt()) / mf;
        let mut probs = vec![(1.0 - p) / (mf - 1.0); m];
        probs[0] = p;
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|q| *q /= total);
        Self::new(n_bits, (0..m).collect(), probs)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    /// `sum_x q(x)^2`
    pub fn collision_probability(&self) -> f64 {
        self.probs.iter().map(|p| p * p).sum()
    }

    /// Renyi-2 entropy in bits, `-log2 sum_x q(x)^2`.
    pub fn renyi2_entropy(&self) -> f64 {
        -self.collision_probability().log2()
    }
}

/// Draw an initial string `x` with probability `q(x)`.
pub fn sample_initial(source: &ClassicalSource, rng: &mut RngStream) -> usize {
    if source.support.len() == 1 {
        return source.support[0];
    }
    let idx = Categorical::new(&source.probs).expect("validated source").sample(rng);
    source.support[idx]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let draw = |seed, stream| {
            let mut r = RngStream::new(seed, stream);
            (0..8).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(draw(7, 3), draw(7, 3));
        assert_ne!(draw(7, 3), draw(7, 4));
        assert_ne!(draw(7, 3), draw(8, 3));
    }

    #[test]
    fn fork_ignores_parent_position() {
        let a = RngStream::new(11, 2);
        let mut b = RngStream::new(11, 2);
        b.next_u64();
        let (mut fa, mut fb) = (a.fork(5), b.fork(5));
        assert_eq!(fa.next_u64(), fb.next_u64());
        assert_ne!(a.fork(5).next_u64(), a.fork(6).next_u64());
    }

    #[test]
    fn one_dimensional_haar_is_a_phase() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20 {
            let u = haar_unitary(1, &mut rng).unwrap();
            assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn haar_samples_are_unitary() {
        let mut rng = RngStream::new(2, 0);
        for d in [2, 3, 8, 32] {
            let u = haar_unitary(d, &mut rng).unwrap();
            assert!(u.unitarity_defect() <= 1e-10);
            assert!(u.is_flagged_unitary());
        }
    }

    #[test]
    fn zero_disorder_is_zero() {
        let mut rng = RngStream::new(3, 0);
        assert_eq!(sample_disorder(5, 0.0, &mut rng).unwrap(), vec![0.0; 5]);
        assert!(sample_disorder(5, -1.0, &mut rng).is_err());
    }

    #[test]
    fn disorder_support() {
        let mut rng = RngStream::new(4, 0);
        let xs = sample_disorder(10_000, 2.5, &mut rng).unwrap();
        assert!(xs.iter().all(|x| x.abs() <= 2.5));
    }

    #[test]
    fn categorical_edge_cases() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..1000 {
            assert_eq!(sample_categorical(&[1.0, 0.0, 0.0], &mut rng).unwrap(), 0);
            assert_ne!(sample_categorical(&[0.5, 0.5, 0.0], &mut rng).unwrap(), 2);
            assert_eq!(sample_categorical(&[0.0, 0.0, 3.0], &mut rng).unwrap(), 2);
        }
        assert!(matches!(sample_categorical(&[0.0, 0.0], &mut rng), Err(Error::Domain(_))));
        assert!(sample_categorical(&[-1.0, 2.0], &mut rng).is_err());
    }

    #[test]
    fn source_validation_and_entropy() {
        let s = ClassicalSource::uniform_first(4, 4).unwrap();
        assert!((s.renyi2_entropy() - 2.0).abs() < 1e-12);
        let p = ClassicalSource::point(3, 5).unwrap();
        assert_eq!(p.renyi2_entropy(), 0.0);
        let mut rng = RngStream::new(6, 0);
        assert!((0..100).all(|_| sample_initial(&p, &mut rng) == 5));
        assert!(ClassicalSource::new(2, vec![0, 1], vec![0.6, 0.6]).is_err());
        assert!(ClassicalSource::new(2, vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(ClassicalSource::new(2, vec![0, 4], vec![0.5, 0.5]).is_err());
        let r = ClassicalSource::uniform_random(5, 8, &mut rng).unwrap();
        assert_eq!(r.support().len(), 8);
        assert!(r.support().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fractional_entropy_source() {
        for s in [0.0, 1.5, 2.0, 2.5, 3.7] {
            let src = ClassicalSource::with_renyi2_first(4, s).unwrap();
            assert!((src.renyi2_entropy() - s).abs() < 1e-12, "s = {s}");
            assert_eq!(src.support().len(), 2f64.powf(s).ceil() as usize);
        }
        assert!(ClassicalSource::with_renyi2_first(3, 3.5).is_err());
    }
}
