//! Classical shadows from projected-ensemble measurements, exact bias
//! enumeration and the patched-quench energy estimator.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::IsingParams;
use crate::qcore::{
    check_entries, kron, pauli_x, pauli_y, pauli_z, ComplexMatrix, QubitSplit, Statevector, HERMITIAN_TOL,
};
use crate::random::{sample_initial, Categorical, ClassicalSource, RngStream};

/// Conditional weights at or below this make the estimator undefined.
pub const DEGENERATE_WEIGHT: f64 = 1e-12;

/// Largest grid handled by [`patched_energy_estimate`].
pub const MAX_GRID_QUBITS: usize = 20;

/// One measurement record: bath input `x`, outcomes `z_a` on A and `z_b` on B.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ShadowSample {
    pub x: usize,
    pub z_a: usize,
    pub z_b: usize,
}

/// Hermitian operator on subsystem A.
#[derive(Clone, Debug)]
pub struct Observable {
    matrix: ComplexMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows().is_power_of_two() {
            return Err(Error::Size(format!("observable must act on qubits, got {}x{}", matrix.rows(), matrix.cols())));
        }
        let defect = matrix.hermitian_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Contract(format!("observable is not Hermitian (defect {defect:e})")));
        }
        Ok(Self { matrix: matrix.into_hermitian()?, label: label.into() })
    }

    /// Tensor product of single-qubit Paulis, e.g. `"XIZ"`; qubit 0 first.
    pub fn pauli_string(label: &str) -> Result<Self> {
        if label.is_empty() {
            return Err(Error::Contract("empty Pauli string".into()));
        }
        let mut m = ComplexMatrix::identity(1);
        for c in label.chars() {
            let p = match c {
                'I' => ComplexMatrix::identity(2),
                'X' => pauli_x(),
                'Y' => pauli_y(),
                'Z' => pauli_z(),
                _ => return Err(Error::Contract(format!("unknown Pauli letter {c:?}"))),
            };
            m = kron(&m, &p)?;
        }
        Self::new(m, label)
    }

    /// Uniformly random non-identity Pauli string on `n` qubits.
    pub fn random_pauli(n: usize, rng: &mut RngStream) -> Result<Self> {
        if n == 0 || n > 12 {
            return Err(Error::Size(format!("Pauli strings on {n} qubits not supported")));
        }
        let code = 1 + rng.below((1usize << (2 * n)) - 1);
        let label: String = (0..n).map(|i| ['I', 'X', 'Y', 'Z'][(code >> (2 * (n - 1 - i))) & 3]).collect();
        Self::pauli_string(&label)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Tr(O rho)`.
    pub fn expectation(&self, rho: &ComplexMatrix) -> f64 {
        let d = self.matrix.rows();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..d {
            for j in 0..d {
                acc += self.matrix[(i, j)] * rho[(j, i)];
            }
        }
        acc.re
    }

    /// `<w|O|w>` for an unnormalized vector.
    fn quadratic_form(&self, w: &[Complex64]) -> f64 {
        let ow = self.matrix.mul_vec(w);
        w.iter().zip(&ow).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }
}

fn check_shadow_inputs(u: &ComplexMatrix, split: QubitSplit) -> Result<()> {
    if !u.is_square() || u.rows() != split.dim() {
        return Err(Error::Size(format!("unitary is {}x{}, split needs {}", u.rows(), u.cols(), split.dim())));
    }
    Ok(())
}

fn check_density(rho_a: &ComplexMatrix, split: QubitSplit) -> Result<()> {
    if !rho_a.is_square() || rho_a.rows() != split.d_a() {
        return Err(Error::Size(format!("density matrix must be {0}x{0}", split.d_a())));
    }
    let tr = rho_a.trace();
    if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
        return Err(Error::Contract(format!("density matrix has trace {tr}")));
    }
    Ok(())
}

/// `w[a] = conj(U[z, (a, x)])`, the conditional vector behind outcome `z`.
fn conditional_vector(u: &ComplexMatrix, split: QubitSplit, x: usize, z: usize) -> Vec<Complex64> {
    let row = u.row(z);
    (0..split.d_a()).map(|a| row[split.join(a, x)].conj()).collect()
}

/// Joint distribution of `z = (z_a, z_b)` given bath input `x`,
/// `p(z) = <z| U (rho_a (x) |x><x|) U^dagger |z>`, indexed by `split.join`.
pub fn outcome_probabilities(u: &ComplexMatrix, rho_a: &ComplexMatrix, x: usize, split: QubitSplit) -> Result<Vec<f64>> {
    check_shadow_inputs(u, split)?;
    check_density(rho_a, split)?;
    if x >= split.d_b() {
        return Err(Error::Contract(format!("bath string {x} out of range")));
    }
    Ok((0..split.dim())
        .map(|z| {
            let w = conditional_vector(u, split, x, z);
            // p = w^dagger rho w
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..w.len() {
                for b in 0..w.len() {
                    acc += w[a].conj() * rho_a[(a, b)] * w[b];
                }
            }
            acc.re.max(0.0)
        })
        .collect())
}

/// Draws `(x, z_a, z_b)` repeatedly, caching one outcome distribution per
/// bath input.
pub struct ShadowSampler<'a> {
    source: &'a ClassicalSource,
    split: QubitSplit,
    tables: HashMap<usize, Categorical>,
}

impl<'a> ShadowSampler<'a> {
    pub fn new(u: &ComplexMatrix, rho_a: &ComplexMatrix, source: &'a ClassicalSource, split: QubitSplit) -> Result<Self> {
        if source.n_bits() != split.n_b() {
            return Err(Error::Size(format!(
                "source strings have {} bits, bath has {}",
                source.n_bits(),
                split.n_b()
            )));
        }
        let mut tables = HashMap::new();
        for &x in source.support() {
            let p = outcome_probabilities(u, rho_a, x, split)?;
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::Contract(format!("outcome probabilities sum to {total}")));
            }
            tables.insert(x, Categorical::new(&p)?);
        }
        Ok(Self { source, split, tables })
    }

    pub fn sample(&self, rng: &mut RngStream) -> ShadowSample {
        let x = sample_initial(self.source, rng);
        let z = self.tables[&x].sample(rng);
        let (z_a, z_b) = self.split.split(z);
        ShadowSample { x, z_a, z_b }
    }
}

/// Single draw; see [`ShadowSampler`] for repeated sampling.
pub fn sample_shadow(
    u: &ComplexMatrix,
    rho_a: &ComplexMatrix,
    source: &ClassicalSource,
    split: QubitSplit,
    rng: &mut RngStream,
) -> Result<ShadowSample> {
    let x = sample_initial(source, rng);
    let single = ClassicalSource::point(source.n_bits(), x)?;
    Ok(ShadowSampler::new(u, rho_a, &single, split)?.sample(rng))
}

/// `rho_hat = (d_A + 1) chi - I` with `chi = w w^dagger / |w|^2`.
pub fn shadow_estimator(u: &ComplexMatrix, s: &ShadowSample, split: QubitSplit) -> Result<ComplexMatrix> {
    check_shadow_inputs(u, split)?;
    let w = conditional_vector(u, split, s.x, split.join(s.z_a, s.z_b));
    let norm: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if norm <= DEGENERATE_WEIGHT {
        return Err(Error::DegenerateSample(norm));
    }
    let d_a = split.d_a();
    let scale = Complex64::new((d_a as f64 + 1.0) / norm, 0.0);
    let mut rho = ComplexMatrix::outer(&w, &w).scale(scale);
    rho.add_scaled(&ComplexMatrix::identity(d_a), Complex64::new(-1.0, 0.0));
    rho.into_hermitian()
}

/// `Tr(O rho_hat)` without forming the estimator.
fn estimator_value(u: &ComplexMatrix, o: &Observable, s: &ShadowSample, split: QubitSplit, tr_o: f64) -> Result<f64> {
    let w = conditional_vector(u, split, s.x, split.join(s.z_a, s.z_b));
    let norm: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    if norm <= DEGENERATE_WEIGHT {
        return Err(Error::DegenerateSample(norm));
    }
    Ok((split.d_a() as f64 + 1.0) * o.quadratic_form(&w) / norm - tr_o)
}

fn check_observable(o: &Observable, split: QubitSplit) -> Result<()> {
    if o.matrix.rows() != split.d_a() {
        return Err(Error::Size(format!("observable acts on {} dims, A has {}", o.matrix.rows(), split.d_a())));
    }
    Ok(())
}

/// Infinite-shot bias `E[Tr(O rho_hat)] - Tr(O rho_a)` by full enumeration.
pub fn exact_bias(
    u: &ComplexMatrix,
    rho_a: &ComplexMatrix,
    o: &Observable,
    source: &ClassicalSource,
    split: QubitSplit,
) -> Result<f64> {
    check_observable(o, split)?;
    if source.n_bits() != split.n_b() {
        return Err(Error::Size("source strings must cover the bath".into()));
    }
    let tr_o = o.matrix.trace().re;
    let mut mean = 0.0;
    for (x, q) in source.iter() {
        let p = outcome_probabilities(u, rho_a, x, split)?;
        for (z, pz) in p.into_iter().enumerate() {
            if pz <= DEGENERATE_WEIGHT {
                continue;
            }
            let (z_a, z_b) = split.split(z);
            mean += q * pz * estimator_value(u, o, &ShadowSample { x, z_a, z_b }, split, tr_o)?;
        }
    }
    Ok(mean - o.expectation(rho_a))
}

/// Mean of `Tr(O rho_hat)` over shots and its standard error.
pub fn estimate_observable(
    samples: &[ShadowSample],
    u: &ComplexMatrix,
    o: &Observable,
    split: QubitSplit,
) -> Result<(f64, f64)> {
    check_shadow_inputs(u, split)?;
    check_observable(o, split)?;
    if samples.is_empty() {
        return Err(Error::Contract("no samples".into()));
    }
    let tr_o = o.matrix.trace().re;
    let values = samples
        .iter()
        .map(|s| estimator_value(u, o, s, split, tr_o))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_stderr(&values))
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Grid of `n_a` rows, each one system qubit followed by `n_b` bath qubits,
/// with the same patch unitary applied to every row.
#[derive(Clone, Debug)]
pub struct PatchLayout {
    n_a: usize,
    n_b: usize,
    patch_unitary: ComplexMatrix,
}

impl PatchLayout {
    pub fn new(n_a: usize, n_b: usize, patch_unitary: ComplexMatrix) -> Result<Self> {
        if n_a == 0 {
            return Err(Error::Domain("need at least one row".into()));
        }
        let qubits = n_a * (n_b + 1);
        if qubits > MAX_GRID_QUBITS {
            return Err(Error::Size(format!("{qubits} grid qubits exceed {MAX_GRID_QUBITS}")));
        }
        if patch_unitary.rows() != 1 << (n_b + 1) || !patch_unitary.is_square() {
            return Err(Error::Size(format!("patch unitary must act on {} qubits", n_b + 1)));
        }
        if !patch_unitary.is_flagged_unitary() {
            return Err(Error::Contract("patch unitary must be flagged unitary".into()));
        }
        Ok(Self { n_a, n_b, patch_unitary })
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn patch_unitary(&self) -> &ComplexMatrix {
        &self.patch_unitary
    }

    pub fn grid_qubits(&self) -> usize {
        self.n_a * (self.n_b + 1)
    }

    fn row_split(&self) -> QubitSplit {
        QubitSplit::new(1, self.n_b).expect("validated at construction")
    }
}

/// `psi_g (x) |x_0> ... |x_{n_a-1}>` on the grid, after `V` on every row.
fn evolved_grid_state(layout: &PatchLayout, psi_g: &Statevector, xs: &[usize]) -> Vec<Complex64> {
    let (n_a, n_b) = (layout.n_a, layout.n_b);
    let row_dim = 1usize << (n_b + 1);
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << layout.grid_qubits()];
    for (s, &a) in psi_g.amplitudes().iter().enumerate() {
        let mut idx = 0;
        for r in 0..n_a {
            let bit = (s >> (n_a - 1 - r)) & 1;
            idx = idx * row_dim + ((bit << n_b) | xs[r]);
        }
        amps[idx] = a;
    }
    let v = &layout.patch_unitary;
    let mut buf = vec![Complex64::new(0.0, 0.0); row_dim];
    for r in 0..n_a {
        let right = row_dim.pow((n_a - 1 - r) as u32);
        let left = row_dim.pow(r as u32);
        for l in 0..left {
            for rt in 0..right {
                let at = |j: usize| (l * row_dim + j) * right + rt;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = amps[at(j)];
                }
                for i in 0..row_dim {
                    amps[at(i)] = v.row(i).iter().zip(&buf).map(|(vij, bj)| vij * bj).sum();
                }
            }
        }
    }
    amps
}

/// Shot-averaged estimate of `<H>` for the Ising chain on the `n_a` system
/// qubits, and its standard error. Each shot draws fresh bath strings from
/// `row_source` for every row, samples the whole grid and combines one
/// single-qubit shadow per row; `X_i X_{i+1}` uses products of neighbouring
/// row estimators.
pub fn patched_energy_estimate(
    layout: &PatchLayout,
    params: &IsingParams,
    psi_g: &Statevector,
    row_source: &ClassicalSource,
    shots: usize,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let (n_a, n_b) = (layout.n_a, layout.n_b);
    if psi_g.num_qubits() != n_a || params.n != n_a {
        return Err(Error::Size(format!("ground state and Hamiltonian must live on {n_a} qubits")));
    }
    if row_source.n_bits() != n_b {
        return Err(Error::Size(format!("row source has {} bits, rows have {n_b} bath qubits", row_source.n_bits())));
    }
    if shots == 0 {
        return Err(Error::Domain("need at least one shot".into()));
    }
    check_entries(1 << layout.grid_qubits(), 1)?;
    let split = layout.row_split();
    let row_dim = 1usize << (n_b + 1);
    let v = &layout.patch_unitary;

    // Tr(X rho_hat), Tr(Y rho_hat) for each (x, z) of one row
    let (ox, oy) = (Observable::pauli_string("X")?, Observable::pauli_string("Y")?);
    let mut row_values: HashMap<(usize, usize), (f64, f64)> = HashMap::new();
    for &x in row_source.support() {
        for z in 0..row_dim {
            let (z_a, z_b) = split.split(z);
            let s = ShadowSample { x, z_a, z_b };
            match (estimator_value(v, &ox, &s, split, 0.0), estimator_value(v, &oy, &s, split, 0.0)) {
                (Ok(a), Ok(b)) => {
                    row_values.insert((x, z), (a, b));
                }
                (Err(Error::DegenerateSample(_)), _) | (_, Err(Error::DegenerateSample(_))) => {}
                (Err(e), _) | (_, Err(e)) => return Err(e),
            }
        }
    }

    let mut tables: HashMap<Vec<usize>, Categorical> = HashMap::new();
    let mut energies = Vec::with_capacity(shots);
    let mut xs = vec![0usize; n_a];
    let mut ex = vec![0.0; n_a];
    let mut ey = vec![0.0; n_a];
    while energies.len() < shots {
        for x in xs.iter_mut() {
            *x = sample_initial(row_source, rng);
        }
        if !tables.contains_key(&xs) {
            let probs: Vec<f64> = evolved_grid_state(layout, psi_g, &xs).iter().map(|a| a.norm_sqr()).collect();
            tables.insert(xs.clone(), Categorical::new(&probs)?);
        }
        let outcome = tables[&xs].sample(rng);
        let mut degenerate = false;
        for r in 0..n_a {
            let z = (outcome / row_dim.pow((n_a - 1 - r) as u32)) % row_dim;
            match row_values.get(&(xs[r], z)) {
                Some(&(a, b)) => {
                    ex[r] = a;
                    ey[r] = b;
                }
                None => degenerate = true,
            }
        }
        if degenerate {
            continue;
        }
        let mut e = 0.0;
        for r in 0..n_a {
            e += params.h_x * ex[r] + params.h_y * ey[r];
            if r + 1 < n_a {
                e += params.j * ex[r] * ex[r + 1];
            }
        }
        energies.push(e);
    }
    Ok(mean_and_stderr(&energies))
}
