use faer::{Mat, Side};
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use super::state::Statevector;
use crate::error::{Error, Result};

/// Spectral decomposition `H = V diag(values) V^dagger` of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: ComplexMatrix,
}

fn require_hermitian(h: &ComplexMatrix) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Contract(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if h.is_flagged_hermitian() {
        return Ok(());
    }
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::Contract(format!("matrix is not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

/// Full eigendecomposition of a Hermitian matrix.
pub fn hermitian_eig(h: &ComplexMatrix) -> Result<Eigh> {
    require_hermitian(h)?;
    let n = h.rows();
    let evd = h
        .to_faer()
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s[i].re).collect();
    let mut vectors = ComplexMatrix::from_faer(evd.U());
    vectors = vectors.into_unitary().unwrap_or_else(|v| panic!("eigenvectors lost orthonormality: {v}"));
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigvals(h: &ComplexMatrix) -> Result<Vec<f64>> {
    require_hermitian(h)?;
    h.to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

/// Eigenvalues of a real symmetric matrix given row-major, ascending.
pub fn real_symmetric_eigvals(n: usize, data: &[f64]) -> Result<Vec<f64>> {
    if data.len() != n * n {
        return Err(Error::Size(format!("expected {} entries, got {}", n * n, data.len())));
    }
    let m = Mat::<f64>::from_fn(n, n, |i, j| data[i * n + j]);
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `exp(-i H t) = V diag(exp(-i lambda_j t)) V^dagger`, flagged unitary.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let n = self.dim();
        let phases: Vec<Complex64> = self.values.iter().map(|&l| Complex64::from_polar(1.0, -l * t)).collect();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * phases[j]);
        let u = scaled.matmul(&self.vectors.adjoint());
        u.into_unitary().expect("spectral propagator is unitary")
    }

    /// `exp(-i H t) |psi>` without forming the propagator.
    pub fn evolve(&self, psi: &Statevector, t: f64) -> Result<Statevector> {
        if psi.dim() != self.dim() {
            return Err(Error::Size(format!(
                "state dimension {} does not match operator dimension {}",
                psi.dim(),
                self.dim()
            )));
        }
        let n = self.dim();
        let amps = psi.amplitudes();
        // c_j = <v_j|psi> exp(-i lambda_j t)
        let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let a = amps[i];
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let row = self.vectors.row(i);
            for (c, v) in coeffs.iter_mut().zip(row) {
                *c += v.conj() * a;
            }
        }
        for (c, &l) in coeffs.iter_mut().zip(&self.values) {
            *c *= Complex64::from_polar(1.0, -l * t);
        }
        Statevector::from_amplitudes(self.vectors.mul_vec(&coeffs))
    }
}

/// `U = exp(-i H t)` for Hermitian `H`.
pub fn evolve_unitary(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(hermitian_eig(h)?.propagator(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::matrix::{pauli_x, pauli_y, pauli_z};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    #[test]
    fn pauli_z_spectrum() {
        let e = hermitian_eig(&pauli_z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn pauli_x_eigenvectors_up_to_phase() {
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let minus = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
        let plus = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        for (col, target) in [(0, minus), (1, plus)] {
            let v = e.vectors.column(col);
            let overlap: Complex64 = v.iter().zip(target).map(|(a, b)| a.conj() * b).sum();
            assert!((overlap.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_qubit_mixed_field_slice() {
        let h = &pauli_x().scale_real(0.8090) + &pauli_y().scale_real(0.9045);
        let e = hermitian_eig(&h).unwrap();
        let expected = (0.8090f64.powi(2) + 0.9045f64.powi(2)).sqrt();
        assert!((e.values[0] + expected).abs() < 1e-12);
        assert!((e.values[1] - expected).abs() < 1e-12);
        assert!((expected - 1.2135).abs() < 1e-4);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::Contract(_))));
        assert!(matches!(hermitian_eigvals(&m), Err(Error::Contract(_))));
    }

    #[test]
    fn closed_form_propagators() {
        let u = evolve_unitary(&pauli_z(), PI).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-12);

        let u = evolve_unitary(&pauli_x(), FRAC_PI_2).unwrap();
        let target = pauli_x().scale(Complex64::new(0.0, -1.0));
        assert!(u.max_abs_diff(&target) < 1e-12);

        let h = &pauli_x() + &pauli_z();
        let u = evolve_unitary(&h, 0.0).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn evolve_matches_propagator() {
        let h = &(&pauli_x() + &pauli_y()) + &pauli_z().scale_real(0.3);
        let e = hermitian_eig(&h).unwrap();
        let psi = Statevector::basis(1, 0).unwrap();
        let direct = psi.apply(&e.propagator(1.7)).unwrap();
        let fast = e.evolve(&psi, 1.7).unwrap();
        assert!((direct.inner(&fast).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_symmetric_path() {
        let vals = real_symmetric_eigvals(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-14 && (vals[1] - 3.0).abs() < 1e-14);
    }
}
