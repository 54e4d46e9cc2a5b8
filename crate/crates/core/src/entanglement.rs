//! Entanglement entropies of the Gaussian steady state.
//!
//! The Majorana correlation matrix of a block of `ell` sites is block Toeplitz
//! with 2x2 blocks `Pi_j = [[-phi_j, psi_j], [-psi_{-j}, phi_j]]`. Its spectrum
//! `+-i nu_p` gives `S_m = sum_p H_m(nu_p)`.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jacobi::{symmetric_eigenvalues, SquareMatrix};
use crate::mobius::{ProjectiveAmplitude, TransferMatrix};
use crate::models::{critical_window, lambda_c_volume, CriticalWindow, VolumeParams};
use crate::quadrature::{gauss_legendre, linear_fit, midpoint};
use crate::steady::{averaged_bloch, Coefficients, SymbolPair, UAverage};

/// Antisymmetry tolerance for `Gamma + Gamma^T`.
pub const ANTISYMMETRY_TOL: f64 = 1e-9;
/// `nu` below `1 - HARTLEY_EPS` counts towards `S_0`.
pub const HARTLEY_EPS: f64 = 1e-8;
/// Nodes of the midpoint rule for the `gamma` integral (doubled once for the check).
pub const GAMMA_NODES: usize = 4096;

/// Real antisymmetric `2 ell x 2 ell` Majorana correlation matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    ell: usize,
    gamma: SquareMatrix,
}

impl CorrelationMatrix {
    /// Wraps an explicit matrix after checking antisymmetry.
    pub fn from_matrix(gamma: SquareMatrix) -> Result<Self> {
        if !gamma.dim().is_multiple_of(2) {
            return Err(Error::InvalidInput(
                "correlation matrix must have even dimension".into(),
            ));
        }
        let deviation = gamma.antisymmetry_defect();
        if deviation > ANTISYMMETRY_TOL {
            return Err(Error::NotAntisymmetric { deviation });
        }
        Ok(Self {
            ell: gamma.dim() / 2,
            gamma,
        })
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.gamma
    }
}

/// Assembles `Gamma` for a block of `ell` sites; block `(a, b)` is `Pi_{b-a}`.
pub fn build_correlation_matrix(co: &Coefficients, ell: usize) -> Result<CorrelationMatrix> {
    if ell == 0 {
        return Err(Error::InvalidInput("subsystem must contain at least one site".into()));
    }
    if co.jmax() + 1 < ell {
        return Err(Error::CoefficientRangeTooSmall {
            needed: ell - 1,
            available: co.jmax(),
        });
    }
    let gamma = SquareMatrix::from_fn(2 * ell, |r, c| {
        let d = (c / 2) as isize - (r / 2) as isize;
        match (r % 2, c % 2) {
            (0, 0) => -co.phi(d),
            (0, 1) => co.psi(d),
            (1, 0) => -co.psi(-d),
            _ => co.phi(d),
        }
    });
    CorrelationMatrix::from_matrix(gamma)
}

/// `nu_p`, sorted descending and clamped to `[0, 1]`, from the eigenvalues of
/// the positive semidefinite `-Gamma^2 = Gamma^T Gamma`, which come in pairs.
pub fn entanglement_spectrum(g: &CorrelationMatrix) -> Result<Vec<f64>> {
    let m = &g.gamma;
    let squared = m.transpose().matmul(m);
    let ev = symmetric_eigenvalues(squared)?;
    let mut nu: Vec<f64> = ev.iter().step_by(2).map(|v| v.max(0.0).sqrt().min(1.0)).collect();
    nu.sort_by(|a, b| b.total_cmp(a));
    Ok(nu)
}

/// `H_m(x)` of one mode: the indicator of `|x| < 1` for `m = 0`, the binary
/// entropy for `m = 1` and the Rényi form otherwise.
pub fn h_m(m: u32, x: f64) -> f64 {
    let x = x.abs().min(1.0);
    if m == 0 {
        return if x < 1.0 - HARTLEY_EPS { 1.0 } else { 0.0 };
    }
    if x == 1.0 {
        return 0.0;
    }
    let p = 0.5 * (1.0 + x);
    let q = 0.5 * (1.0 - x);
    if m == 1 {
        let xlx = |v: f64| if v > 0.0 { v * v.ln() } else { 0.0 };
        return -xlx(p) - xlx(q);
    }
    let mf = m as f64;
    (p.powf(mf) + q.powf(mf)).ln() / (1.0 - mf)
}

/// `sum_p H_m(nu_p)`; for `m = 0` this counts the modes with `nu_p < 1`.
pub fn entropy_from_spectrum(nu: &[f64], m: u32) -> f64 {
    nu.iter().map(|&v| h_m(m, v)).sum()
}

/// Entropies `S_m` of one subsystem, in nats. `S_0` is the logarithm of the rank.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub ell: usize,
    pub orders: Vec<u32>,
    pub values: Vec<f64>,
}

impl EntropyReport {
    pub fn from_spectrum(ell: usize, nu: &[f64], orders: &[u32]) -> Self {
        let values = orders
            .iter()
            .map(|&m| {
                let s = entropy_from_spectrum(nu, m);
                if m == 0 {
                    s * LN_2
                } else {
                    s
                }
            })
            .collect();
        Self {
            ell,
            orders: orders.to_vec(),
            values,
        }
    }

    pub fn get(&self, m: u32) -> Option<f64> {
        self.orders.iter().position(|&o| o == m).map(|i| self.values[i])
    }
}

/// `S_m(ell)` for every requested order, straight from the coefficients.
pub fn block_entropies(co: &Coefficients, ell: usize, orders: &[u32]) -> Result<EntropyReport> {
    let g = build_correlation_matrix(co, ell)?;
    let nu = entanglement_spectrum(&g)?;
    Ok(EntropyReport::from_spectrum(ell, &nu, orders))
}

/// Volume-law slope `s_m = (1/2 pi) int H_m(nu(k)) dk`, as the grid mean.
/// For `m = 0` this is the fraction of critical momenta.
pub fn entropy_density_integral(sym: &SymbolPair, m: u32) -> f64 {
    let n = sym.grid().len();
    (0..n).map(|j| h_m(m, sym.nu(j))).sum::<f64>() / n as f64
}

/// `s_m` of the volume-law circuit, integrating only over the critical window
/// with Gauss–Legendre nodes in `alpha`, `k = pi/2 + (pi/2 - k_c) sin alpha`.
/// The substitution absorbs the square-root behaviour at the window edges.
pub fn window_entropy_density(p: &VolumeParams, m: u32, nodes: usize) -> Result<f64> {
    let half = match critical_window(p) {
        CriticalWindow::Empty => return Ok(0.0),
        CriticalWindow::Full => FRAC_PI_2,
        CriticalWindow::Interval { k_lo, .. } => FRAC_PI_2 - k_lo,
    };
    let (xs, ws) = gauss_legendre(nodes);
    let mut total = 0.0;
    for (x, w) in xs.iter().zip(&ws) {
        let alpha = x * FRAC_PI_2;
        let k = FRAC_PI_2 + half * alpha.sin();
        let b = averaged_bloch(&p.at(k)?, &ProjectiveAmplitude::ZERO, UAverage::Exact);
        let nu = (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt();
        total += w * FRAC_PI_2 * half * alpha.cos() * h_m(m, nu);
    }
    Ok(total / PI)
}

/// How a slope was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeMethod {
    Fit,
    Integral,
    Asymptotic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeResult {
    pub m: u32,
    pub slope: f64,
    pub intercept: f64,
    /// RMS deviation of the fit.
    pub residual: f64,
    pub method: SlopeMethod,
}

/// Least-squares line `S = slope * ell + intercept` through `(ell, S)` points.
pub fn fit_slope(m: u32, points: &[(f64, f64)]) -> Result<SlopeResult> {
    if points.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "need at least 5 points, got {}",
            points.len()
        )));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) && points.iter().any(|p| p.0 != points[0].0) {
        return Err(Error::InvalidInput(
            "subsystem sizes must be strictly increasing".into(),
        ));
    }
    let (slope, intercept, residual) =
        linear_fit(points).ok_or_else(|| Error::DegenerateFit("all subsystem sizes are equal".into()))?;
    Ok(SlopeResult {
        m,
        slope,
        intercept,
        residual,
        method: SlopeMethod::Fit,
    })
}

/// Least-squares `S = a log(ell) + b`; returns `(a, b, residual)`.
pub fn fit_log_coefficient(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(l, s)| (l.ln(), s)).collect();
    linear_fit(&logs).ok_or_else(|| Error::DegenerateFit("all subsystem sizes are equal".into()))
}

/// The coefficient `gamma` of `1 - nu(k) = gamma |theta_k| + O(theta_k^2)` at the
/// closing window, `k = pi/2`, `lambda = lambda_c`:
/// `(4/pi) int_0^inf (B u^2 + B/C) / (C^2 u^4 + 2 (C - 2 R^2) u^2 + 1) du`
/// with `B = |b|^2`, `C = |b|^2 + |1 - a|^2`, `R = Re(1 - a)`.
pub fn gamma_coefficient(x: f64) -> Result<f64> {
    if !(x > 0.0 && x < std::f64::consts::FRAC_PI_4) {
        return Err(Error::InvalidInput(format!("x = {x} outside (0, pi/4)")));
    }
    let (a, b) = closing_entries(x)?;
    let bb = b.norm_sqr();
    let cc = bb + (1.0 - a).norm_sqr();
    let rr = (1.0 - a).re;
    let integrand = |theta: f64| {
        let u = theta.tan();
        let sec2 = 1.0 + u * u;
        (bb * u * u + bb / cc) / (cc * cc * u.powi(4) + 2.0 * (cc - 2.0 * rr * rr) * u * u + 1.0) * sec2
    };
    let coarse = midpoint(0.0, FRAC_PI_2, GAMMA_NODES, integrand);
    let fine = midpoint(0.0, FRAC_PI_2, 2 * GAMMA_NODES, integrand);
    // midpoint error is O(h^2)
    Ok(4.0 / PI * (4.0 * fine - coarse) / 3.0)
}

/// `a(pi/2)` and `b(pi/2)` of the volume-law round at `lambda = lambda_c`.
fn closing_entries(x: f64) -> Result<(num_complex::Complex64, num_complex::Complex64)> {
    use num_complex::Complex64 as C64;
    let lc = lambda_c_volume(x)?;
    let e = (-4.0 * lc).exp();
    let e4x = C64::from_polar(1.0, 4.0 * x);
    let (s, c) = (2.0 * x).sin_cos();
    let a = s * s * e - c * c * e4x;
    let b = (e4x + e) * (s * c);
    Ok((a, b))
}

/// `sin^2 2x cosh 2 lambda_c`, the common prefactor of the near-threshold slopes.
fn threshold_prefactor(x: f64) -> Result<f64> {
    let lc = lambda_c_volume(x)?;
    Ok((2.0 * x).sin().powi(2) * (2.0 * lc).cosh())
}

/// Coefficient `C` of the leading term `s_1 = C (lambda_c - lambda) log(lambda_c - lambda)`.
pub fn von_neumann_log_coefficient(x: f64) -> Result<f64> {
    Ok(-gamma_coefficient(x)? * threshold_prefactor(x)?)
}

/// Leading behaviour of `s_m` as `lambda -> lambda_c^-`, with `delta = lambda_c - lambda`:
/// `s_0 = 4 sin 2x / (pi sqrt(tanh 2 lambda_c)) sqrt(delta)`,
/// `s_1 = C delta log delta` and
/// `s_m = 2 gamma sin^2 2x cosh 2 lambda_c m/(m-1) delta` for `m >= 2`.
pub fn asymptotic_slope(m: u32, x: f64, lambda: f64) -> Result<f64> {
    let lc = lambda_c_volume(x)?;
    let delta = lc - lambda;
    if delta <= 0.0 {
        return Ok(0.0);
    }
    Ok(match m {
        0 => 4.0 * (2.0 * x).sin() / (PI * (2.0 * lc).tanh().sqrt()) * delta.sqrt(),
        1 => von_neumann_log_coefficient(x)? * delta * delta.ln(),
        _ => {
            let mf = m as f64;
            2.0 * gamma_coefficient(x)? * threshold_prefactor(x)? * mf / (mf - 1.0) * delta
        }
    })
}

/// Power law `s = amplitude (lambda_c - lambda)^nu` fitted on a log-log scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub nu: f64,
    pub amplitude: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    /// RMS deviation in `log s`.
    pub residual: f64,
}

/// Fits `log s = nu log(lambda_c - lambda) + log amplitude` to `(lambda, s)` samples.
pub fn fit_exponent(samples: &[(f64, f64)], lambda_c: f64) -> Result<ExponentFit> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit("need at least two samples".into()));
    }
    let mut pts = Vec::with_capacity(samples.len());
    for &(lambda, s) in samples {
        let delta = lambda_c - lambda;
        if !(delta > 0.0) || !(s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "sample (lambda = {lambda}, s = {s}) needs lambda < lambda_c and s > 0"
            )));
        }
        pts.push((delta.ln(), s.ln()));
    }
    let delta_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min).exp();
    let delta_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max).exp();
    let ratio = delta_max / delta_min;
    if ratio < 10.0 {
        return Err(Error::InsufficientRange { ratio });
    }
    let (nu, log_amp, residual) = linear_fit(&pts).ok_or_else(|| Error::DegenerateFit("coincident samples".into()))?;
    Ok(ExponentFit {
        nu,
        amplitude: log_amp.exp(),
        delta_min,
        delta_max,
        residual,
    })
}
