use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest number of entries any dense object may hold (2^24).
pub const MAX_ENTRIES: usize = 1 << 24;

/// Tolerance on `max |M - M^dagger|` for a matrix to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `max |U^dagger U - I|` for a matrix to count as unitary.
pub const UNITARY_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Structural properties that have been verified for a matrix.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Structure {
    pub hermitian: bool,
    pub unitary: bool,
}

/// Dense complex matrix stored row-major.
///
/// The `hermitian` and `unitary` flags are only ever set after the property
/// has been checked (or holds by construction); any mutable access clears them.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
    structure: Structure,
}

pub(crate) fn check_entries(rows: usize, cols: usize) -> Result<()> {
    match rows.checked_mul(cols) {
        Some(n) if n <= MAX_ENTRIES => Ok(()),
        _ => Err(Error::Size(format!(
            "{rows}x{cols} matrix exceeds the limit of {MAX_ENTRIES} entries"
        ))),
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
            structure: Structure::default(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m.structure = Structure {
            hermitian: true,
            unitary: true,
        };
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Size(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data,
            structure: Structure::default(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            data,
            structure: Structure::default(),
        }
    }

    /// Build from nested rows of real numbers; handy in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Size("ragged rows".into()));
        }
        Ok(Self::from_fn(n, m, |i, j| Complex64::new(rows[i][j], 0.0)))
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::diagonal(&diag.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>());
        m.structure.hermitian = true;
        m
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex64], b: &[Complex64]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn is_flagged_hermitian(&self) -> bool {
        self.structure.hermitian
    }

    pub fn is_flagged_unitary(&self) -> bool {
        self.structure.unitary
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj());
        m.structure = self.structure;
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols))
            .map(|i| self.data[i * self.cols + i])
            .sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut m = Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * s).collect(),
            structure: Structure::default(),
        };
        m.structure.hermitian = self.structure.hermitian && s.im == 0.0;
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Self, s: Complex64) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
        self.structure = Structure::default();
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_{ij} |M_ij - conj(M_ji)|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// `max |U^dagger U - I|` entrywise; infinite for non-square input.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let g = self.adjoint().matmul(self);
        g.max_abs_diff(&Self::identity(self.rows))
    }

    /// Check hermiticity (scaled by the entry magnitude for large matrices)
    /// and set the flag.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let tol = HERMITIAN_TOL * self.max_abs().max(1.0);
        let defect = self.hermitian_defect();
        if defect > tol {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (defect {defect:e})"
            )));
        }
        self.structure.hermitian = true;
        Ok(self)
    }

    pub fn into_unitary(mut self) -> Result<Self> {
        let defect = self.unitarity_defect();
        if defect > UNITARY_TOL {
            return Err(Error::Contract(format!(
                "matrix is not unitary (defect {defect:e})"
            )));
        }
        self.structure.unitary = true;
        Ok(self)
    }

    /// Average with the adjoint, then flag as Hermitian.
    pub fn hermitize(&self) -> Self {
        assert!(self.is_square(), "hermitize needs a square matrix");
        let n = self.rows;
        let mut m = Self::from_fn(n, n, |i, j| {
            0.5 * (self.data[i * n + j] + self.data[j * n + i].conj())
        });
        m.structure.hermitian = true;
        m
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, rhs.cols);
        if n * k * m < 32 * 32 * 32 {
            let mut out = vec![ZERO; n * m];
            for i in 0..n {
                let orow = &mut out[i * m..(i + 1) * m];
                for p in 0..k {
                    let a = self.data[i * k + p];
                    if a == ZERO {
                        continue;
                    }
                    let brow = &rhs.data[p * m..(p + 1) * m];
                    for (o, &b) in orow.iter_mut().zip(brow) {
                        *o += a * b;
                    }
                }
            }
            let mut res = Self::from_vec(n, m, out).expect("shape");
            res.structure.unitary = self.structure.unitary && rhs.structure.unitary;
            return res;
        }
        let c = self.to_faer() * rhs.to_faer();
        let mut res = Self::from_faer(c.as_ref());
        res.structure.unitary = self.structure.unitary && rhs.structure.unitary;
        res
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `U A U^dagger`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        let mut m = u.matmul(self).matmul(&u.adjoint());
        if self.structure.hermitian {
            m = m.hermitize();
        }
        m
    }

    pub(crate) fn to_faer(&self) -> Mat<Complex64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    pub(crate) fn from_faer(m: faer::MatRef<'_, Complex64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

/// Kronecker product; entry `((i1 i2),(j1 j2)) = a(i1,j1) b(i2,j2)`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let rows = a.rows.checked_mul(b.rows).ok_or_else(|| Error::Size("kron overflow".into()))?;
    let cols = a.cols.checked_mul(b.cols).ok_or_else(|| Error::Size("kron overflow".into()))?;
    check_entries(rows, cols)?;
    let mut data = vec![ZERO; rows * cols];
    for i1 in 0..a.rows {
        for j1 in 0..a.cols {
            let x = a.data[i1 * a.cols + j1];
            if x == ZERO {
                continue;
            }
            for i2 in 0..b.rows {
                let row = (i1 * b.rows + i2) * cols + j1 * b.cols;
                for j2 in 0..b.cols {
                    data[row + j2] = x * b.data[i2 * b.cols + j2];
                }
            }
        }
    }
    let mut m = ComplexMatrix::from_vec(rows, cols, data)?;
    m.structure = Structure {
        hermitian: a.structure.hermitian && b.structure.hermitian,
        unitary: a.structure.unitary && b.structure.unitary,
    };
    Ok(m)
}

pub fn pauli_x() -> ComplexMatrix {
    let mut m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    m.structure = Structure { hermitian: true, unitary: true };
    m
}

pub fn pauli_y() -> ComplexMatrix {
    let i = Complex64::i();
    let mut m = ComplexMatrix::from_vec(2, 2, vec![ZERO, -i, i, ZERO]).unwrap();
    m.structure = Structure { hermitian: true, unitary: true };
    m
}

pub fn pauli_z() -> ComplexMatrix {
    let mut m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap();
    m.structure = Structure { hermitian: true, unitary: true };
    m
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.structure = Structure::default();
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut m = self.clone();
        m.add_scaled(rhs, ONE);
        m.structure.hermitian = self.structure.hermitian && rhs.structure.hermitian;
        m
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        let mut m = self.clone();
        m.add_scaled(rhs, -ONE);
        m.structure.hermitian = self.structure.hermitian && rhs.structure.hermitian;
        m
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} {:?}", self.rows, self.cols, self.structure)?;
        if self.rows * self.cols > 64 {
            return Ok(());
        }
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let i4 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(i4.max_abs_diff(&ComplexMatrix::identity(4)), 0.0);
        assert!(i4.is_flagged_unitary());
    }

    #[test]
    fn kron_bit_flip_on_first_qubit() {
        let xi = kron(&pauli_x(), &ComplexMatrix::identity(2)).unwrap();
        let ket00 = vec![c(1.0), c(0.0), c(0.0), c(0.0)];
        // qubit 0 is the most significant bit: |10> has index 2
        assert_eq!(xi.mul_vec(&ket00), vec![c(0.0), c(0.0), c(1.0), c(0.0)]);
    }

    #[test]
    fn kron_of_diagonals() {
        let a = ComplexMatrix::real_diagonal(&[1.0, 2.0]);
        let b = ComplexMatrix::real_diagonal(&[3.0, 4.0]);
        let k = kron(&a, &b).unwrap();
        assert_eq!(k.max_abs_diff(&ComplexMatrix::real_diagonal(&[3.0, 4.0, 6.0, 8.0])), 0.0);
    }

    #[test]
    fn kron_rejects_oversized_result() {
        let a = ComplexMatrix::zeros(1 << 7, 1 << 7);
        let b = ComplexMatrix::zeros(1 << 9, 1 << 9);
        assert!(matches!(kron(&a, &b), Err(Error::Size(_))));
    }

    #[test]
    fn flags_require_the_property() {
        assert!(pauli_y().into_hermitian().is_ok());
        let upper = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(upper.clone().into_hermitian(), Err(Error::Contract(_))));
        assert!(matches!(upper.into_unitary(), Err(Error::Contract(_))));
    }

    #[test]
    fn index_mut_clears_flags() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(1.0);
        assert_eq!(m.structure(), Structure::default());
    }

    #[test]
    fn large_matmul_matches_naive_path() {
        let n = 40;
        let a = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new((i * 3 + j) as f64 % 7.0, (i + 2 * j) as f64 % 5.0));
        let b = a.adjoint();
        let fast = a.matmul(&b);
        let slow = ComplexMatrix::from_fn(n, n, |i, j| (0..n).map(|p| a[(i, p)] * b[(p, j)]).sum());
        assert!(fast.max_abs_diff(&slow) < 1e-9);
    }
}
