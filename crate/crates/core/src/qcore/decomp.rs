use faer::Side;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Householder QR of a square matrix: `a = q r` with `q` unitary and `r`
/// upper triangular. The diagonal of `r` carries arbitrary phases.
pub fn qr(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if !a.is_square() {
        return Err(Error::Contract("qr expects a square matrix".into()));
    }
    let n = a.rows();
    let mut r = a.clone();
    let mut q = ComplexMatrix::identity(n);
    let zero = Complex64::new(0.0, 0.0);
    for k in 0..n.saturating_sub(1) {
        let norm: f64 = (k..n).map(|i| r[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm;
        // r <- (I - beta v v^dagger) r on rows k..n
        for j in k..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| vi.conj() * r[(k + i, j)]).sum();
            let s = s * beta;
            for (i, vi) in v.iter().enumerate() {
                let cur = r[(k + i, j)];
                r[(k + i, j)] = cur - vi * s;
            }
        }
        for i in (k + 1)..n {
            r[(i, k)] = zero;
        }
        // q <- q (I - beta v v^dagger) on columns k..n
        for row in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(i, vi)| q[(row, k + i)] * vi).sum();
            let s = s * beta;
            for (i, vi) in v.iter().enumerate() {
                let cur = q[(row, k + i)];
                q[(row, k + i)] = cur - s * vi.conj();
            }
        }
    }
    Ok((q, r))
}

/// Schatten `alpha`-norm `(sum_i s_i^alpha)^(1/alpha)`; `alpha = INFINITY`
/// gives the largest singular value.
pub fn schatten_norm(m: &ComplexMatrix, alpha: f64) -> Result<f64> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::Domain(format!("Schatten index must be >= 1, got {alpha}")));
    }
    if !m.is_square() {
        return Err(Error::Contract("Schatten norm expects a square matrix".into()));
    }
    Ok(schatten_from_singular_values(&singular_values(m)?, alpha))
}

pub(crate) fn schatten_from_singular_values(s: &[f64], alpha: f64) -> f64 {
    if alpha.is_infinite() {
        return s.iter().copied().fold(0.0, f64::max);
    }
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0.0;
    }
    // scale out the largest value to avoid under/overflow for large alpha
    let sum: f64 = s.iter().map(|&x| (x / smax).powf(alpha)).sum();
    smax * sum.powf(1.0 / alpha)
}

/// Singular values of a square matrix; Hermitian input uses `|eigenvalues|`.
pub fn singular_values(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let f = m.to_faer();
    if m.is_flagged_hermitian() || m.hermitian_defect() <= HERMITIAN_TOL * m.max_abs().max(1.0) {
        let ev = f
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?;
        return Ok(ev.into_iter().map(f64::abs).collect());
    }
    f.singular_values().map_err(|e| Error::Eigen(format!("{e:?}")))
}
