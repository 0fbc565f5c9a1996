//! Mixed-field Ising chain, disorder injection and spectral diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qcore::{check_entries, hermitian_eig, real_symmetric_eigvals, ComplexMatrix, Statevector};
use crate::random::{sample_disorder, RngStream};

/// Mean gap ratio of the Gaussian orthogonal ensemble.
pub const GOE_MEAN_GAP_RATIO: f64 = 0.53590;
/// Mean gap ratio of Poisson level statistics.
pub const POISSON_MEAN_GAP_RATIO: f64 = 0.38629;

/// Largest chain length accepted by the dense builders.
pub const MAX_CHAIN: usize = 12;

/// Parameters of `H_0 = sum_i (h_x X_i + h_y Y_i + J X_i X_{i+1})` with open
/// boundaries. Fields are in units of `J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsingParams {
    pub n: usize,
    pub h_x: f64,
    pub h_y: f64,
    pub j: f64,
}

impl IsingParams {
    pub const CHAOTIC_H_X: f64 = 0.8090;
    pub const CHAOTIC_H_Y: f64 = 0.9045;
    pub const CHAOTIC_J: f64 = 1.0;

    /// The non-integrable point `(h_x, h_y, J) = (0.8090, 0.9045, 1)`.
    pub fn chaotic(n: usize) -> Self {
        Self {
            n,
            h_x: Self::CHAOTIC_H_X,
            h_y: Self::CHAOTIC_H_Y,
            j: Self::CHAOTIC_J,
        }
    }

    pub fn with_n(self, n: usize) -> Self {
        Self { n, ..self }
    }
}

/// Static longitudinal disorder `sum_i xi_i X_i` with `|xi_i| <= w`.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    xi: Vec<f64>,
    w: f64,
}

impl DisorderRealization {
    pub fn new(xi: Vec<f64>, w: f64) -> Result<Self> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Domain(format!("disorder strength must be finite and >= 0, got {w}")));
        }
        if let Some(x) = xi.iter().find(|x| !(x.abs() <= w)) {
            return Err(Error::Contract(format!("field {x} exceeds strength {w}")));
        }
        Ok(Self { xi, w })
    }

    pub fn zero(n: usize) -> Self {
        Self { xi: vec![0.0; n], w: 0.0 }
    }

    /// i.i.d. `Uniform[-w, w]` fields on `n` sites.
    pub fn sample(n: usize, w: f64, rng: &mut RngStream) -> Result<Self> {
        Ok(Self { xi: sample_disorder(n, w, rng)?, w })
    }

    /// Global detuning `xi sum_i X_i`.
    pub fn global(n: usize, xi: f64, w: f64) -> Result<Self> {
        Self::new(vec![xi; n], w)
    }

    /// Global detuning with `xi ~ Uniform[-w, w]`.
    pub fn sample_global(n: usize, w: f64, rng: &mut RngStream) -> Result<Self> {
        let xi = sample_disorder(1, w, rng)?[0];
        Self::global(n, xi, w)
    }

    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn n(&self) -> usize {
        self.xi.len()
    }
}

#[inline]
fn site_bit(n: usize, site: usize) -> usize {
    1 << (n - 1 - site)
}

fn check_chain(n: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::Domain("chain needs at least one site".into()));
    }
    if n > MAX_CHAIN {
        return Err(Error::Size(format!("{n} sites exceed the dense limit of {MAX_CHAIN}")));
    }
    let dim = 1usize << n;
    check_entries(dim, dim)?;
    Ok(dim)
}

/// Dense mixed-field Ising Hamiltonian. All computational-basis diagonal
/// entries vanish.
pub fn build_mfim(p: &IsingParams) -> Result<ComplexMatrix> {
    let n = p.n;
    let dim = check_chain(n)?;
    let mut h = ComplexMatrix::zeros(dim, dim);
    let i = Complex64::i();
    for x in 0..dim {
        for site in 0..n {
            let b = site_bit(n, site);
            let y = x ^ b;
            h[(y, x)] += Complex64::new(p.h_x, 0.0);
            // Y|0> = i|1>, Y|1> = -i|0>
            let yphase = if x & b == 0 { i } else { -i };
            h[(y, x)] += yphase * p.h_y;
            if site + 1 < n {
                let y2 = x ^ b ^ site_bit(n, site + 1);
                h[(y2, x)] += Complex64::new(p.j, 0.0);
            }
        }
    }
    h.into_hermitian()
}

/// `H_0 + sum_i xi_i X_i`.
pub fn add_disorder(h0: &ComplexMatrix, d: &DisorderRealization) -> Result<ComplexMatrix> {
    let n = d.n();
    if n == 0 || n > MAX_CHAIN || h0.rows() != 1 << n || !h0.is_square() {
        return Err(Error::Size(format!(
            "disorder on {n} sites does not fit a {}x{} Hamiltonian",
            h0.rows(),
            h0.cols()
        )));
    }
    let mut h = h0.clone();
    for x in 0..h0.rows() {
        for (site, &xi) in d.xi.iter().enumerate() {
            if xi != 0.0 {
                h[(x ^ site_bit(n, site), x)] += Complex64::new(xi, 0.0);
            }
        }
    }
    h.into_hermitian()
}

/// Spectrum of `H_0 + sum_i xi_i X_i`, computed in the frame rotated by
/// `exp(-i pi/4 X)` on every site, where the Hamiltonian is real symmetric
/// (`Y -> Z`). The spectrum is basis independent.
pub fn mfim_spectrum(p: &IsingParams, d: Option<&DisorderRealization>) -> Result<Vec<f64>> {
    let n = p.n;
    let dim = check_chain(n)?;
    if let Some(d) = d {
        if d.n() != n {
            return Err(Error::Size(format!("disorder on {} sites for a {n}-site chain", d.n())));
        }
    }
    let mut h = vec![0.0; dim * dim];
    for x in 0..dim {
        for site in 0..n {
            let b = site_bit(n, site);
            let field = p.h_x + d.map_or(0.0, |d| d.xi[site]);
            h[(x ^ b) * dim + x] += field;
            h[x * dim + x] += if x & b == 0 { p.h_y } else { -p.h_y };
            if site + 1 < n {
                h[(x ^ b ^ site_bit(n, site + 1)) * dim + x] += p.j;
            }
        }
    }
    real_symmetric_eigvals(dim, &h)
}

/// `F(t) = |<psi0| exp(i H_2 t) exp(-i H_1 t) |psi0>|^2` with
/// `H_j = H_0 + V_j`.
pub fn loschmidt_echo(
    h0: &ComplexMatrix,
    d1: &DisorderRealization,
    d2: &DisorderRealization,
    psi0: &Statevector,
    t: f64,
) -> Result<f64> {
    Ok(loschmidt_curve(h0, d1, d2, psi0, &[t])?[0])
}

/// [`loschmidt_echo`] at several times, diagonalizing each Hamiltonian once.
pub fn loschmidt_curve(
    h0: &ComplexMatrix,
    d1: &DisorderRealization,
    d2: &DisorderRealization,
    psi0: &Statevector,
    times: &[f64],
) -> Result<Vec<f64>> {
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::Contract("initial state must be normalized".into()));
    }
    let e1 = hermitian_eig(&add_disorder(h0, d1)?)?;
    let e2 = if d1 == d2 { e1.clone() } else { hermitian_eig(&add_disorder(h0, d2)?)? };
    times
        .iter()
        .map(|&t| {
            let a = e1.evolve(psi0, t)?;
            let b = e2.evolve(psi0, t)?;
            Ok(b.inner(&a).norm_sqr().min(1.0))
        })
        .collect()
}

/// Short-time Gaussian estimate `exp(-(2/3) n W^2 t^2)` of the disorder echo
/// averaged over realizations, for computational-basis initial states.
pub fn echo_gaussian_estimate(n: usize, w: f64, t: f64) -> f64 {
    (-(2.0 / 3.0) * n as f64 * w * w * t * t).exp()
}

/// Largest gap below which a consecutive pair counts as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-12;

/// Ratios `min(g_n, g_{n+1}) / max(g_n, g_{n+1})` of consecutive level
/// spacings. Pairs whose larger gap is below [`DEGENERATE_GAP`] are skipped.
pub fn gap_ratios(eigenvalues: &[f64]) -> Result<Vec<f64>> {
    if eigenvalues.len() < 3 {
        return Err(Error::Contract(format!("need at least 3 levels, got {}", eigenvalues.len())));
    }
    if eigenvalues.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::Contract("eigenvalues must be sorted ascending".into()));
    }
    let gaps: Vec<f64> = eigenvalues.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(gaps
        .windows(2)
        .filter_map(|g| {
            let (lo, hi) = if g[0] <= g[1] { (g[0], g[1]) } else { (g[1], g[0]) };
            (hi >= DEGENERATE_GAP).then(|| lo / hi)
        })
        .collect())
}

/// One point of a disorder scan of the mean gap ratio.
#[derive(Clone, Debug, PartialEq)]
pub struct GapRatioPoint {
    pub w: f64,
    /// Mean over all pooled ratios.
    pub mean: f64,
    /// Standard error from the spread of per-realization means.
    pub stderr: f64,
    pub ratios: usize,
}

/// Mean gap ratio of `H_0 + sum xi_i X_i` for each `w`, pooling the ratios of
/// `realizations` disorder draws. Realization `r` at sweep index `i` draws
/// from `rng.fork(i).fork(r)`.
pub fn mean_gap_ratio_scan(
    params: &IsingParams,
    w_values: &[f64],
    realizations: usize,
    rng: &RngStream,
) -> Result<Vec<GapRatioPoint>> {
    if realizations == 0 {
        return Err(Error::Domain("need at least one realization".into()));
    }
    w_values
        .iter()
        .enumerate()
        .map(|(wi, &w)| {
            let per_w = rng.fork(wi as u64);
            let per_realization: Vec<Vec<f64>> = (0..realizations)
                .into_par_iter()
                .map(|r| {
                    let mut stream = per_w.fork(r as u64);
                    let d = DisorderRealization::sample(params.n, w, &mut stream)?;
                    gap_ratios(&mfim_spectrum(params, Some(&d))?)
                })
                .collect::<Result<_>>()?;
            Ok(summarize_gap_ratios(w, &per_realization))
        })
        .collect()
}

fn summarize_gap_ratios(w: f64, per_realization: &[Vec<f64>]) -> GapRatioPoint {
    let ratios: usize = per_realization.iter().map(Vec::len).sum();
    let mean = per_realization.iter().flatten().sum::<f64>() / ratios.max(1) as f64;
    let means: Vec<f64> = per_realization
        .iter()
        .filter(|r| !r.is_empty())
        .map(|r| r.iter().sum::<f64>() / r.len() as f64)
        .collect();
    let stderr = if means.len() > 1 {
        let m = means.iter().sum::<f64>() / means.len() as f64;
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
        (var / means.len() as f64).sqrt()
    } else {
        0.0
    };
    GapRatioPoint { w, mean, stderr, ratios }
}

/// First disorder value where two curves sampled on the same grid cross,
/// by linear interpolation of their difference.
pub fn crossing_point(w_values: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    for i in 0..diff.len().min(w_values.len()).saturating_sub(1) {
        let (d0, d1) = (diff[i], diff[i + 1]);
        if d0 == 0.0 {
            return Some(w_values[i]);
        }
        if d0 * d1 < 0.0 {
            let f = d0 / (d0 - d1);
            return Some(w_values[i] + f * (w_values[i + 1] - w_values[i]));
        }
    }
    None
}
