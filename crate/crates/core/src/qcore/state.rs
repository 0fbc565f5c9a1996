use num_complex::Complex64;

use super::matrix::{ComplexMatrix, MAX_ENTRIES};
use crate::error::{Error, Result};

/// Branches whose probability does not exceed this are dropped from ensembles.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Pure state of `num_qubits` qubits; qubit 0 is the most significant bit of
/// the amplitude index.
#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Wrap raw amplitudes. The length must be a power of two; no
    /// normalization is applied.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Size(format!("amplitude count {len} is not a power of two")));
        }
        if len > MAX_ENTRIES {
            return Err(Error::Size(format!("statevector of length {len} exceeds the size limit")));
        }
        Ok(Self {
            num_qubits: len.trailing_zeros() as usize,
            amps,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize
            .checked_shl(num_qubits as u32)
            .filter(|&d| d <= MAX_ENTRIES)
            .ok_or_else(|| Error::Size(format!("{num_qubits} qubits exceed the size limit")))?;
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range for {num_qubits} qubits")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        let inv = 1.0 / n;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `<self|other>`
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        inner(&self.amps, &other.amps)
    }

    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.cols() != self.dim() || u.rows() != self.dim() {
            return Err(Error::Size(format!(
                "operator of shape {}x{} cannot act on a {}-dimensional state",
                u.rows(),
                u.cols(),
                self.dim()
            )));
        }
        Ok(Self {
            num_qubits: self.num_qubits,
            amps: u.mul_vec(&self.amps),
        })
    }

    /// `|self> (x) |other>`
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            amps.extend(other.amps.iter().map(|b| a * b));
        }
        Self::from_amplitudes(amps)
    }

    /// `|psi><psi|`
    pub fn projector(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::outer(&self.amps, &self.amps);
        m = m.hermitize();
        m
    }

    /// `<psi|M|psi>`
    pub fn expectation(&self, m: &ComplexMatrix) -> Complex64 {
        inner(&self.amps, &m.mul_vec(&self.amps))
    }
}

#[inline]
pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bipartition of a register into system A (leading qubits) and bath B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QubitSplit {
    n_a: usize,
    n_b: usize,
}

impl QubitSplit {
    pub fn new(n_a: usize, n_b: usize) -> Result<Self> {
        if n_a == 0 {
            return Err(Error::Domain("subsystem A needs at least one qubit".into()));
        }
        if n_a + n_b > 24 {
            return Err(Error::Size(format!("{} qubits exceed the size limit", n_a + n_b)));
        }
        Ok(Self { n_a, n_b })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn total(&self) -> usize {
        self.n_a + self.n_b
    }

    pub fn d_a(&self) -> usize {
        1 << self.n_a
    }

    pub fn d_b(&self) -> usize {
        1 << self.n_b
    }

    pub fn dim(&self) -> usize {
        1 << self.total()
    }

    /// Global index of `|a>_A |b>_B`.
    #[inline]
    pub fn join(&self, a: usize, b: usize) -> usize {
        (a << self.n_b) | b
    }

    /// Inverse of [`QubitSplit::join`].
    #[inline]
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index >> self.n_b, index & (self.d_b() - 1))
    }
}

/// Outcome of projecting the bath onto a computational basis string.
#[derive(Clone, Debug, PartialEq)]
pub enum BathProjection {
    /// Normalized post-measurement state on A with its probability.
    Branch { state: Statevector, prob: f64 },
    /// Probability at or below [`PRUNE_THRESHOLD`]; must not enter an ensemble.
    Negligible { prob: f64 },
}

impl BathProjection {
    pub fn prob(&self) -> f64 {
        match self {
            Self::Branch { prob, .. } | Self::Negligible { prob } => *prob,
        }
    }

    pub fn state(&self) -> Option<&Statevector> {
        match self {
            Self::Branch { state, .. } => Some(state),
            Self::Negligible { .. } => None,
        }
    }
}

/// `(I_A (x) <z|_B) |psi>`, normalized, together with its squared norm.
pub fn project_bath(psi: &Statevector, z: usize, split: QubitSplit) -> Result<BathProjection> {
    if psi.num_qubits() != split.total() {
        return Err(Error::Size(format!(
            "state has {} qubits but the split needs {}",
            psi.num_qubits(),
            split.total()
        )));
    }
    if z >= split.d_b() {
        return Err(Error::Domain(format!("bath string {z} out of range for {} qubits", split.n_b())));
    }
    let slice: Vec<Complex64> = (0..split.d_a()).map(|a| psi.amps[split.join(a, z)]).collect();
    let prob: f64 = slice.iter().map(|a| a.norm_sqr()).sum();
    if prob <= PRUNE_THRESHOLD {
        return Ok(BathProjection::Negligible { prob });
    }
    let inv = 1.0 / prob.sqrt();
    let state = Statevector {
        num_qubits: split.n_a(),
        amps: slice.into_iter().map(|a| a * inv).collect(),
    };
    Ok(BathProjection::Branch { state, prob })
}
