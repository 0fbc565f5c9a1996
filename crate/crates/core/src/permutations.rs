//! Symmetric-group tools: permutations, their tensor-space operators,
//! Weingarten functions and an exact Haar-moment evaluator.

use num_complex::Complex64;

use crate::ensemble::MomentOperator;
use crate::error::{Error, Result};
use crate::qcore::{check_entries, ComplexMatrix};

/// Largest order handled by [`WeingartenTable`] (6! = 720 group elements).
pub const MAX_WEINGARTEN_ORDER: usize = 6;

/// A bijection on `{0..k-1}` in one-line notation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || seen[i] {
                return Err(Error::Contract(format!("{images:?} is not a permutation")));
            }
            seen[i] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(k: usize) -> Self {
        Self { images: (0..k).collect() }
    }

    /// The transposition of `a` and `b` in `S_k`.
    pub fn transposition(k: usize, a: usize, b: usize) -> Result<Self> {
        if a >= k || b >= k {
            return Err(Error::Contract(format!("transposition ({a} {b}) outside S_{k}")));
        }
        let mut images: Vec<usize> = (0..k).collect();
        images.swap(a, b);
        Ok(Self { images })
    }

    /// On `2(m+k)` symbols laid out as `[m | k | k | m]`, exchanges the two
    /// middle blocks of length `k` and fixes the rest.
    pub fn block_swap(m: usize, k: usize) -> Self {
        let mut images: Vec<usize> = (0..2 * (m + k)).collect();
        for i in 0..k {
            images[m + i] = m + k + i;
            images[m + k + i] = m + i;
        }
        Self { images }
    }

    pub fn k(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &p)| i == p)
    }

    /// `(self . other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.k() != other.k() {
            return Err(Error::Size(format!("cannot compose S_{} with S_{}", self.k(), other.k())));
        }
        Ok(Self { images: other.images.iter().map(|&i| self.images[i]).collect() })
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.k()];
        for (i, &p) in self.images.iter().enumerate() {
            images[p] = i;
        }
        Self { images }
    }

    /// `self` acting on the first block and `other` on the following one.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let off = self.k();
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&i| i + off));
        Self { images }
    }

    /// Number of disjoint cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.k()];
        let mut cycles = 0;
        for start in 0..self.k() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
            }
        }
        cycles
    }

    /// Cycle lengths sorted descending.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut seen = vec![false; self.k()];
        let mut lens = Vec::new();
        for start in 0..self.k() {
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.images[i];
                len += 1;
            }
            if len > 0 {
                lens.push(len);
            }
        }
        lens.sort_unstable_by(|a, b| b.cmp(a));
        lens
    }

    /// Lexicographic rank (Lehmer code) in `0..k!`.
    pub fn rank(&self) -> usize {
        let k = self.k();
        let mut rank = 0;
        for i in 0..k {
            let smaller = self.images[i + 1..].iter().filter(|&&x| x < self.images[i]).count();
            rank = rank * (k - i) + smaller;
        }
        rank
    }

    /// Inverse of [`Permutation::rank`].
    pub fn unrank(k: usize, mut rank: usize) -> Result<Self> {
        let total = factorial(k);
        if rank >= total {
            return Err(Error::Contract(format!("rank {rank} out of range for S_{k}")));
        }
        let mut pool: Vec<usize> = (0..k).collect();
        let mut images = Vec::with_capacity(k);
        let mut f = total;
        for i in 0..k {
            f /= k - i;
            images.push(pool.remove(rank / f));
            rank %= f;
        }
        Ok(Self { images })
    }

    /// All of `S_k` in rank order.
    pub fn all(k: usize) -> Vec<Self> {
        (0..factorial(k)).map(|r| Self::unrank(k, r).expect("rank in range")).collect()
    }
}

pub fn factorial(k: usize) -> usize {
    (1..=k).product()
}

/// `D_k = C(d+k-1, k)`, the dimension of the symmetric subspace of
/// `(C^d)^{(x)k}`.
pub fn symmetric_dimension(d: usize, k: usize) -> f64 {
    (0..k).map(|i| (d + i) as f64 / (i + 1) as f64).product()
}

fn tensor_dim(d: usize, k: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..k {
        dim = dim
            .checked_mul(d)
            .ok_or_else(|| Error::Size(format!("{d}^{k} overflows")))?;
    }
    check_entries(dim, dim)?;
    Ok(dim)
}

/// For each basis index `i` of `(C^d)^{(x)k}`, the index of `P_p |i>`.
/// Tensor factor 0 is the most significant digit.
fn index_map(p: &Permutation, d: usize, dim: usize) -> Vec<usize> {
    let k = p.k();
    let mut digits = vec![0usize; k];
    let mut out = vec![0usize; k];
    let mut pow = vec![1usize; k];
    for m in (0..k.saturating_sub(1)).rev() {
        pow[m] = pow[m + 1] * d;
    }
    (0..dim)
        .map(|i| {
            let mut rest = i;
            for m in (0..k).rev() {
                digits[m] = rest % d;
                rest /= d;
            }
            // factor m moves to slot p(m)
            for m in 0..k {
                out[p.apply(m)] = digits[m];
            }
            out.iter().zip(&pow).map(|(x, w)| x * w).sum()
        })
        .collect()
}

/// `P_p |i_0 ... i_{k-1}> = |i_{p^-1(0)} ... i_{p^-1(k-1)}>` on `d^k`
/// dimensions, flagged unitary.
pub fn permutation_operator(p: &Permutation, d: usize) -> Result<ComplexMatrix> {
    let dim = tensor_dim(d, p.k())?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for (i, j) in index_map(p, d, dim).into_iter().enumerate() {
        m[(j, i)] = Complex64::new(1.0, 0.0);
    }
    m.into_unitary()
}

/// Haar moment operator `P_sym / D_k`.
pub fn symmetric_projector_moment(d: usize, k: usize) -> Result<MomentOperator> {
    if d == 0 || k == 0 {
        return Err(Error::Domain("dimension and order must be positive".into()));
    }
    let dim = tensor_dim(d, k)?;
    let weight = 1.0 / (factorial(k) as f64 * symmetric_dimension(d, k));
    let mut m = ComplexMatrix::zeros(dim, dim);
    for p in Permutation::all(k) {
        for (i, j) in index_map(&p, d, dim).into_iter().enumerate() {
            m[(j, i)] += Complex64::new(weight, 0.0);
        }
    }
    MomentOperator::new(k, d, m.into_hermitian()?)
}

/// Weingarten function `Wg(., d)` on `S_k`, obtained by solving
/// `sum_pi d^{#cycles(sigma^-1 pi)} Wg(pi) = [sigma = id]`.
#[derive(Clone, Debug)]
pub struct WeingartenTable {
    k: usize,
    d: usize,
    /// Indexed by permutation rank.
    values: Vec<f64>,
}

impl WeingartenTable {
    pub fn new(k: usize, d: usize) -> Result<Self> {
        if k == 0 || k > MAX_WEINGARTEN_ORDER {
            return Err(Error::Domain(format!("Weingarten order must be in 1..={MAX_WEINGARTEN_ORDER}, got {k}")));
        }
        if d < k {
            return Err(Error::Domain(format!("Gram matrix is singular for d = {d} < k = {k}")));
        }
        let gram = gram_matrix(k, d);
        let n = gram.len();
        let mut rhs = vec![0.0; n];
        rhs[0] = 1.0; // rank 0 is the identity
        let values = solve_refined(&gram, &rhs)?;
        Ok(Self { k, d, values })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn value(&self, p: &Permutation) -> f64 {
        assert_eq!(p.k(), self.k, "permutation from the wrong group");
        self.values[p.rank()]
    }

    /// Values in permutation-rank order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn abs_sum(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    /// Largest deviation of `Gram . Wg` from the identity indicator, over all
    /// `sigma`.
    pub fn gram_residual(&self) -> f64 {
        let gram = gram_matrix(self.k, self.d);
        gram.iter()
            .enumerate()
            .map(|(s, row)| {
                let lhs: f64 = row.iter().zip(&self.values).map(|(g, w)| g * w).sum();
                (lhs - if s == 0 { 1.0 } else { 0.0 }).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn gram_matrix(k: usize, d: usize) -> Vec<Vec<f64>> {
    let perms = Permutation::all(k);
    let powers: Vec<f64> = (0..=k).map(|c| (d as f64).powi(c as i32)).collect();
    perms
        .iter()
        .map(|s| {
            let s_inv = s.inverse();
            perms
                .iter()
                .map(|p| powers[s_inv.compose(p).expect("same order").cycle_count()])
                .collect()
        })
        .collect()
}

/// LU with partial pivoting plus a few rounds of iterative refinement.
fn solve_refined(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = a.len();
    let mut lu: Vec<Vec<f64>> = a.to_vec();
    let mut piv: Vec<usize> = (0..n).collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| lu[i][c].abs().total_cmp(&lu[j][c].abs()))
            .expect("nonempty");
        if lu[p][c].abs() < 1e-300 {
            return Err(Error::Domain("singular Gram matrix".into()));
        }
        lu.swap(c, p);
        piv.swap(c, p);
        let pivot = lu[c][c];
        let (upper, lower) = lu.split_at_mut(c + 1);
        let prow = &upper[c];
        for row in lower.iter_mut() {
            let f = row[c] / pivot;
            row[c] = f;
            if f != 0.0 {
                for j in c + 1..n {
                    row[j] -= f * prow[j];
                }
            }
        }
    }
    let solve = |rhs: &[f64]| -> Vec<f64> {
        let mut y: Vec<f64> = piv.iter().map(|&i| rhs[i]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| lu[i][j] * y[j]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| lu[i][j] * y[j]).sum();
            y[i] = (y[i] - s) / lu[i][i];
        }
        y
    };
    let mut x = solve(b);
    for _ in 0..3 {
        let r: Vec<f64> = a
            .iter()
            .zip(b)
            .map(|(row, bi)| bi - row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>())
            .collect();
        let dx = solve(&r);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
    }
    Ok(x)
}

/// Exact `E_U[U^{(x)k} A U^{dagger (x)k}]` over Haar `U` on `C^d`, evaluated as
/// `sum_{sigma,pi} Wg(sigma^-1 pi, d) Tr(A P_sigma^dagger) P_pi`.
pub fn haar_moment_oracle(a: &ComplexMatrix, k: usize, d: usize) -> Result<ComplexMatrix> {
    let table = WeingartenTable::new(k, d)?;
    haar_moment_with_table(a, &table)
}

/// [`haar_moment_oracle`] with a prebuilt table.
pub fn haar_moment_with_table(a: &ComplexMatrix, table: &WeingartenTable) -> Result<ComplexMatrix> {
    let (k, d) = (table.k(), table.d());
    let dim = tensor_dim(d, k)?;
    if a.rows() != dim || a.cols() != dim {
        return Err(Error::Size(format!(
            "operator is {}x{}, expected {dim}x{dim}",
            a.rows(),
            a.cols()
        )));
    }
    let perms = Permutation::all(k);
    let maps: Vec<Vec<usize>> = perms.iter().map(|p| index_map(p, d, dim)).collect();
    // Tr(A P_s^dagger) = sum_i A[i, s^-1 i]
    let traces: Vec<Complex64> = perms
        .iter()
        .map(|s| {
            let inv = index_map(&s.inverse(), d, dim);
            (0..dim).map(|i| a[(i, inv[i])]).sum()
        })
        .collect();
    let coeffs: Vec<Complex64> = perms
        .iter()
        .map(|p| {
            perms
                .iter()
                .zip(&traces)
                .map(|(s, t)| t * table.value(&s.inverse().compose(p).expect("same order")))
                .sum()
        })
        .collect();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (map, c) in maps.iter().zip(&coeffs) {
        for (i, &j) in map.iter().enumerate() {
            out[(j, i)] += *c;
        }
    }
    Ok(out)
}
