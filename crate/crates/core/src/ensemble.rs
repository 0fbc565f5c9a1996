//! Projected ensembles, moment operators, frame potentials and the
//! closed-form design-distance benchmarks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{add_disorder, DisorderRealization};
use crate::permutations::{symmetric_dimension, symmetric_projector_moment};
use crate::qcore::{
    check_entries, hermitian_eigvals, inner, project_bath, schatten_from_singular_values, BathProjection,
    ComplexMatrix, Eigh, QubitSplit, Statevector, PRUNE_THRESHOLD,
};
use crate::random::{Categorical, ClassicalSource, RngStream};

/// Tolerance on the total weight of an ensemble.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Weighted pure states on `n_a` qubits.
#[derive(Clone, Debug)]
pub struct StateEnsemble {
    n_a: usize,
    weights: Vec<f64>,
    states: Vec<Statevector>,
}

impl StateEnsemble {
    /// Drops members with weight at or below [`PRUNE_THRESHOLD`], then checks
    /// that the rest sum to 1 within [`WEIGHT_TOL`] and rescales them exactly.
    pub fn new(n_a: usize, members: Vec<(f64, Statevector)>) -> Result<Self> {
        let mut weights = Vec::with_capacity(members.len());
        let mut states = Vec::with_capacity(members.len());
        for (w, s) in members {
            if !(w >= 0.0) {
                return Err(Error::Contract(format!("negative member weight {w}")));
            }
            if s.num_qubits() != n_a {
                return Err(Error::Size(format!("member on {} qubits, expected {n_a}", s.num_qubits())));
            }
            if (s.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Contract(format!("member state has norm {}", s.norm())));
            }
            if w > PRUNE_THRESHOLD {
                weights.push(w);
                states.push(s);
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Contract(format!("ensemble weights sum to {total}")));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { n_a, weights, states })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn dim(&self) -> usize {
        1 << self.n_a
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn states(&self) -> &[Statevector] {
        &self.states
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &Statevector)> {
        self.weights.iter().copied().zip(&self.states)
    }
}

/// Projects each weighted global state onto every bath outcome `z`, giving
/// members `(q * p(z), psi(z))`.
pub fn project_generators(generators: &[(f64, Statevector)], split: QubitSplit) -> Result<StateEnsemble> {
    let per_generator: Vec<Vec<(f64, Statevector)>> = generators
        .par_iter()
        .map(|(q, psi)| {
            if psi.num_qubits() != split.total() {
                return Err(Error::Size(format!(
                    "state on {} qubits for a {}+{} split",
                    psi.num_qubits(),
                    split.n_a(),
                    split.n_b()
                )));
            }
            let mut out = Vec::new();
            for z in 0..split.d_b() {
                if let BathProjection::Branch { state, prob } = project_bath(psi, z, split)? {
                    out.push((q * prob, state));
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    StateEnsemble::new(split.n_a(), per_generator.into_iter().flatten().collect())
}

/// Projected ensemble of `U|x>` over `x ~ q` and bath outcomes `z`.
pub fn build_projected_ensemble(u: &ComplexMatrix, source: &ClassicalSource, split: QubitSplit) -> Result<StateEnsemble> {
    if !u.is_square() || u.rows() != split.dim() {
        return Err(Error::Size(format!(
            "unitary is {}x{}, split needs {}",
            u.rows(),
            u.cols(),
            split.dim()
        )));
    }
    if source.n_bits() != split.total() {
        return Err(Error::Size(format!(
            "source strings have {} bits, split has {}",
            source.n_bits(),
            split.total()
        )));
    }
    let generators = source
        .iter()
        .map(|(x, q)| Ok((q, Statevector::from_amplitudes(u.column(x))?)))
        .collect::<Result<Vec<_>>>()?;
    project_generators(&generators, split)
}

/// Same as [`build_projected_ensemble`] with `U = exp(-iHt)` given by its
/// spectral decomposition; only the needed columns are computed.
pub fn build_quench_ensemble(h: &Eigh, t: f64, source: &ClassicalSource, split: QubitSplit) -> Result<StateEnsemble> {
    if h.dim() != split.dim() || source.n_bits() != split.total() {
        return Err(Error::Size("Hamiltonian, source and split disagree on the qubit count".into()));
    }
    let generators = source
        .iter()
        .map(|(x, q)| Ok((q, h.evolve(&Statevector::basis(split.total(), x)?, t)?)))
        .collect::<Result<Vec<_>>>()?;
    project_generators(&generators, split)
}

/// Fixed initial string `x` evolved under `H_0 + V_r` for each realization,
/// weighted uniformly over realizations.
pub fn build_disorder_ensemble(
    h0: &ComplexMatrix,
    realizations: &[DisorderRealization],
    x: usize,
    t: f64,
    split: QubitSplit,
) -> Result<StateEnsemble> {
    if realizations.is_empty() {
        return Err(Error::Domain("need at least one disorder realization".into()));
    }
    let q = 1.0 / realizations.len() as f64;
    let psi0 = Statevector::basis(split.total(), x)?;
    let generators = realizations
        .par_iter()
        .map(|d| {
            let h = add_disorder(h0, d)?;
            let eig = crate::qcore::hermitian_eig(&h)?;
            Ok((q, eig.evolve(&psi0, t)?))
        })
        .collect::<Result<Vec<_>>>()?;
    project_generators(&generators, split)
}

/// `rho^(k) = sum_i w_i (|psi_i><psi_i|)^{(x)k}` on `d^k` dimensions.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    k: usize,
    d: usize,
    matrix: ComplexMatrix,
}

impl MomentOperator {
    pub fn new(k: usize, d: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = (d as u128).pow(k as u32);
        if matrix.rows() as u128 != dim || matrix.cols() as u128 != dim {
            return Err(Error::Size(format!("{}x{} matrix for d = {d}, k = {k}", matrix.rows(), matrix.cols())));
        }
        Ok(Self { k, d, matrix: matrix.into_hermitian()? })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigvals(&self.matrix)
    }

    /// `Tr(rho^2)`, which for Hermitian `rho` is the squared Frobenius norm.
    pub fn purity(&self) -> f64 {
        self.matrix.data().iter().map(|z| z.norm_sqr()).sum()
    }

    /// `-log2 Tr(rho^2)`.
    pub fn renyi2_entropy(&self) -> f64 {
        -self.purity().log2()
    }

    /// Renyi-2 entropy from the spectrum, `-log2 sum_j lambda_j^2`.
    pub fn renyi2_from_spectrum(&self) -> Result<f64> {
        Ok(-self.eigenvalues()?.iter().map(|l| l * l).sum::<f64>().log2())
    }

    /// `max |P_sym rho P_sym - rho|` entrywise.
    pub fn symmetric_support_defect(&self) -> Result<f64> {
        let dk = symmetric_dimension(self.d, self.k);
        let p = symmetric_projector_moment(self.d, self.k)?.matrix.scale_real(dk);
        Ok(p.matmul(&self.matrix).matmul(&p).max_abs_diff(&self.matrix))
    }

    /// Checks unit trace, positivity and symmetric support.
    pub fn validate(&self) -> Result<()> {
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::Contract(format!("moment operator has trace {tr}")));
        }
        let min = self.eigenvalues()?[0];
        if min < -1e-10 {
            return Err(Error::Contract(format!("moment operator has eigenvalue {min}")));
        }
        let defect = self.symmetric_support_defect()?;
        if defect > 1e-9 {
            return Err(Error::Contract(format!("moment operator leaks out of the symmetric subspace ({defect:e})")));
        }
        Ok(())
    }
}

fn tensor_power(psi: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..k {
        out = out.iter().flat_map(|a| psi.iter().map(move |b| a * b)).collect();
    }
    out
}

/// Moment operator of an ensemble, assembled as `V V^dagger` with columns
/// `sqrt(w_i) psi_i^{(x)k}`.
pub fn moment_operator(e: &StateEnsemble, k: usize) -> Result<MomentOperator> {
    if k == 0 {
        return Err(Error::Domain("moment order must be positive".into()));
    }
    let d = e.dim();
    let dim = d
        .checked_pow(k as u32)
        .ok_or_else(|| Error::Size(format!("{d}^{k} overflows")))?;
    check_entries(dim, dim)?;
    check_entries(dim, e.len())?;
    let mut v = ComplexMatrix::zeros(dim, e.len());
    for (col, (w, psi)) in e.iter().enumerate() {
        let s = w.sqrt();
        for (row, a) in tensor_power(psi.amplitudes(), k).into_iter().enumerate() {
            v[(row, col)] = a * s;
        }
    }
    MomentOperator::new(k, d, v.matmul(&v.adjoint()))
}

/// `F^(k) = sum_{ij} p_i p_j |<psi_i|psi_j>|^{2k}`.
pub fn frame_potential_exact(e: &StateEnsemble, k: usize) -> f64 {
    frame_potentials_exact(e, &[k])[0]
}

/// [`frame_potential_exact`] for several orders from one pass over the
/// pairwise overlaps.
pub fn frame_potentials_exact(e: &StateEnsemble, ks: &[usize]) -> Vec<f64> {
    let w = e.weights();
    let amps: Vec<&[Complex64]> = e.states().iter().map(|s| s.amplitudes()).collect();
    let m = amps.len();
    let partial: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![w[i] * w[i]; ks.len()];
            for j in i + 1..m {
                let o = inner(amps[i], amps[j]).norm_sqr();
                let pw = 2.0 * w[i] * w[j];
                for (a, &k) in acc.iter_mut().zip(ks) {
                    *a += pw * o.powi(k as i32);
                }
            }
            acc
        })
        .collect();
    (0..ks.len()).map(|kk| partial.iter().map(|p| p[kk]).sum()).collect()
}

/// Monte Carlo frame potential from `pair_samples` i.i.d. weighted pairs.
/// Returns the estimate and its standard error.
pub fn frame_potential_mc(e: &StateEnsemble, k: usize, pair_samples: usize, rng: &mut RngStream) -> Result<(f64, f64)> {
    if pair_samples < 100 {
        return Err(Error::Domain(format!("need at least 100 pair samples, got {pair_samples}")));
    }
    if e.len() == 1 {
        return Ok((1.0, 0.0));
    }
    let cat = Categorical::new(e.weights())?;
    let states = e.states();
    let draws: Vec<f64> = (0..pair_samples)
        .map(|_| {
            let i = cat.sample(rng);
            let j = cat.sample(rng);
            states[i].inner(&states[j]).norm_sqr().powi(k as i32)
        })
        .collect();
    let n = draws.len() as f64;
    let mean = draws.iter().sum::<f64>() / n;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

/// `F_Haar^(k)(d) = 1 / C(d+k-1, k)`.
pub fn haar_frame_potential(d: usize, k: usize) -> f64 {
    1.0 / symmetric_dimension(d, k)
}

/// Tolerance below the Haar floor accepted by [`delta_hs`].
pub const FLOOR_TOL: f64 = 1e-9;

/// Normalized Hilbert-Schmidt distance `sqrt(F / F_Haar - 1)`.
pub fn delta_hs(f: f64, d: usize, k: usize) -> Result<f64> {
    let floor = haar_frame_potential(d, k);
    if !(f >= floor - FLOOR_TOL) {
        return Err(Error::Contract(format!("frame potential {f} is below the Haar value {floor}")));
    }
    Ok((f / floor - 1.0).max(0.0).sqrt())
}

/// `||rho - rho_Haar||_alpha / ||rho_Haar||_alpha` for any Schatten index
/// `alpha >= 1`, including infinity.
pub fn delta_alpha(m: &MomentOperator, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::Domain(format!("Schatten index must be >= 1, got {alpha}")));
    }
    let haar = symmetric_projector_moment(m.d, m.k)?;
    let diff = (&m.matrix - &haar.matrix).into_hermitian()?;
    let sv: Vec<f64> = hermitian_eigvals(&diff)?.into_iter().map(f64::abs).collect();
    let dk = symmetric_dimension(m.d, m.k);
    let haar_norm = if alpha.is_infinite() { 1.0 / dk } else { dk.powf((1.0 - alpha) / alpha) };
    Ok(schatten_from_singular_values(&sv, alpha) / haar_norm)
}

/// `sqrt(2^{k n_a - n_b - s_c} / k!)`.
pub fn theorem1_rms(k: usize, n_a: usize, n_b: usize, s_c: f64) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    (2f64.powf(k as f64 * n_a as f64 - n_b as f64 - s_c) / fact).sqrt()
}

/// Whether `k < 2^{(n_a + n_b)/4}`, the regime where [`theorem1_rms`] is
/// controlled.
pub fn theorem1_hypothesis_holds(k: usize, n_a: usize, n_b: usize) -> bool {
    (k as f64) < 2f64.powf((n_a + n_b) as f64 / 4.0)
}

/// First-moment distance of the initial-state distribution,
/// `sqrt(2^{n - s_c} - 1)`.
pub fn delta_init(n: usize, s_c: f64) -> Result<f64> {
    if !(s_c >= 0.0 && s_c <= n as f64) {
        return Err(Error::Domain(format!("entropy {s_c} outside [0, {n}]")));
    }
    Ok((2f64.powf(n as f64 - s_c) - 1.0).max(0.0).sqrt())
}

/// Exact Haar-averaged first-moment distance,
/// `delta_init sqrt((d_a^2 - 1) / (d_a^2 d_b^2 - 1))`.
pub fn rms_k1_exact(d_a: usize, d_b: usize, delta_init: f64) -> f64 {
    let (a2, b2) = ((d_a * d_a) as f64, (d_b * d_b) as f64);
    if a2 * b2 == 1.0 {
        return delta_init;
    }
    delta_init * ((a2 - 1.0) / (a2 * b2 - 1.0)).sqrt()
}

/// Closed forms for the Haar-averaged frame potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FramePotentialForm {
    /// `F_Haar(d_a) + 2^{-s_c} / d_b`.
    Leading,
    /// Single initial state, exact in all dimensions:
    /// `(d_a + 1 + d_a (d_b - 1) F_Haar(d_a)) / (d_a d_b + 1)`. Ignores `s_c`.
    SingleStateExact,
}

pub fn expected_frame_potential(k: usize, d_a: usize, d_b: usize, s_c: f64, form: FramePotentialForm) -> f64 {
    let fh = haar_frame_potential(d_a, k);
    let (da, db) = (d_a as f64, d_b as f64);
    match form {
        FramePotentialForm::Leading => fh + 2f64.powf(-s_c) / db,
        FramePotentialForm::SingleStateExact => (da + 1.0 + da * (db - 1.0) * fh) / (da * db + 1.0),
    }
}

/// Exact Haar average of `F^(1)` for orthogonal initial states with
/// collision probability `sum_x q(x)^2`.
pub fn expected_frame_potential_k1(d_a: usize, d_b: usize, collision: f64) -> f64 {
    let (da, db) = (d_a as f64, d_b as f64);
    let d2 = da * da * db * db;
    if d2 == 1.0 {
        return 1.0;
    }
    (da * (db * db - 1.0) + db * (da * da - 1.0) * collision) / (d2 - 1.0)
}

/// Markov bound `delta_rms / delta`: the trace-norm distance exceeds it with
/// probability at most `delta`.
pub fn design_bounds(delta_rms: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!("failure probability must be in (0, 1], got {delta}")));
    }
    Ok(delta_rms / delta)
}

/// Design accuracy `epsilon` reached with probability `1 - delta`.
pub fn theorem2_epsilon(k: usize, n_a: usize, n_b: usize, s_c: f64, delta: f64) -> Result<f64> {
    design_bounds(theorem1_rms(k, n_a, n_b, s_c), delta)
}

/// Mean of `|<psi_i|psi_j>|^2` over distinct pairs.
pub fn mean_squared_overlap(states: &[Statevector]) -> f64 {
    let m = states.len();
    if m < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            acc += states[i].inner(&states[j]).norm_sqr();
        }
    }
    acc / (m * (m - 1) / 2) as f64
}
