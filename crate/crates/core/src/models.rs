//! The single-cycle log-law circuit and the two-cycle volume-law circuit.
//!
//! A cycle is `U(t, h, lambda) = U_X(i lambda) U_X(h) U_ZZ(t)`. The volume-law
//! round is `U(pi/4 + x, pi/4 + x, lambda) U(pi/4 - x, pi/4 - x, lambda)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{compose_round, LayerSpec, MobiusMatrix, RoundSpec, TransferMatrix};

/// Parameters of one elementary cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLawParams {
    pub t: f64,
    pub h: f64,
    pub lambda: f64,
}

impl LogLawParams {
    pub fn new(t: f64, h: f64, lambda: f64) -> Self {
        Self { t, h, lambda }
    }

    pub fn round(&self) -> RoundSpec {
        cycle_spec(self.t, self.h, self.lambda)
    }

    pub fn lambda_c(&self) -> Option<f64> {
        lambda_c_loglaw(self.t, self.h)
    }
}

/// Two-cycle round with `t1 = h1 = pi/4 - x`, `t2 = h2 = pi/4 + x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeParams {
    pub x: f64,
    pub lambda: f64,
}

impl VolumeParams {
    pub fn new(x: f64, lambda: f64) -> Self {
        Self { x, lambda }
    }

    pub fn t1(&self) -> f64 {
        FRAC_PI_4 - self.x
    }

    pub fn t2(&self) -> f64 {
        FRAC_PI_4 + self.x
    }

    pub fn round(&self) -> RoundSpec {
        cycle_spec(self.t1(), self.t1(), self.lambda).then(&cycle_spec(self.t2(), self.t2(), self.lambda))
    }

    pub fn lambda_c(&self) -> Result<f64> {
        lambda_c_volume(self.x)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { x: self.x, lambda }
    }
}

/// The set of critical momenta in `(0, pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CriticalWindow {
    Empty,
    Full,
    /// `[k_lo, k_hi]`; for the volume-law circuit `k_lo = pi - k_hi < pi/2`.
    Interval {
        k_lo: f64,
        k_hi: f64,
    },
}

impl CriticalWindow {
    pub fn is_empty(&self) -> bool {
        matches!(self, CriticalWindow::Empty)
    }

    /// Lower edge, `0` for a full window.
    pub fn k_c(&self) -> Option<f64> {
        match self {
            CriticalWindow::Empty => None,
            CriticalWindow::Full => Some(0.0),
            CriticalWindow::Interval { k_lo, .. } => Some(*k_lo),
        }
    }

    /// Measure of the window in `(0, pi)`.
    pub fn width(&self) -> f64 {
        match self {
            CriticalWindow::Empty => 0.0,
            CriticalWindow::Full => PI,
            CriticalWindow::Interval { k_lo, k_hi } => k_hi - k_lo,
        }
    }

    pub fn contains(&self, k: f64) -> bool {
        let k = k.abs();
        match self {
            CriticalWindow::Empty => false,
            CriticalWindow::Full => true,
            CriticalWindow::Interval { k_lo, k_hi } => (*k_lo..=*k_hi).contains(&k),
        }
    }
}

// The closed forms divide by sin 2t and tan(k/2); fall back to layer composition there.
impl TransferMatrix for LogLawParams {
    fn at(&self, k: f64) -> Result<MobiusMatrix> {
        match loglaw_matrix(k, self) {
            Err(_) => compose_round(&self.round(), k),
            other => other,
        }
    }
}

impl TransferMatrix for VolumeParams {
    fn at(&self, k: f64) -> Result<MobiusMatrix> {
        match volume_matrix(k, self) {
            Err(_) => compose_round(&self.round(), k),
            other => other,
        }
    }
}

/// `[ZZ(t), X(h), X(i lambda)]` in application order.
pub fn cycle_spec(t: f64, h: f64, lambda: f64) -> RoundSpec {
    RoundSpec::new(vec![LayerSpec::zz(t), LayerSpec::x(h), LayerSpec::measurement(lambda)])
}

/// `z_{k,t} = (e^{2it} tan(k/2) + e^{-2it} / tan(k/2)) / (2 sin 2t)`.
pub fn z_coefficient(k: f64, t: f64) -> Result<C64> {
    let s2t = (2.0 * t).sin();
    if s2t.abs() < 1e-15 {
        return Err(Error::DivergentZ { t });
    }
    let tn = (k / 2.0).tan();
    if tn == 0.0 || !tn.is_finite() {
        return Err(Error::InvalidInput(format!("z coefficient undefined at k = {k}")));
    }
    let e = C64::from_polar(1.0, 2.0 * t);
    Ok((e * tn + e.conj() / tn) / (2.0 * s2t))
}

/// Closed-form cycle matrix
/// `(1 + |z|^2)^{-1/2} [[z e^{-2l+2ih}, e^{-2l+2ih}], [-e^{2l-2ih}, z* e^{2l-2ih}]]`.
pub fn loglaw_matrix(k: f64, p: &LogLawParams) -> Result<MobiusMatrix> {
    let z = z_coefficient(k, p.t)?;
    let norm = (1.0 + z.norm_sqr()).sqrt().recip();
    let down = C64::from_polar((-2.0 * p.lambda).exp(), 2.0 * p.h);
    let up = down.inv();
    Ok(MobiusMatrix::new_unchecked(
        z * down * norm,
        down * norm,
        -up * norm,
        z.conj() * up * norm,
    ))
}

/// Closed-form matrix of the two-cycle round, using `z_{k,t1} = -z*_{k,t2}`.
pub fn volume_matrix(k: f64, p: &VolumeParams) -> Result<MobiusMatrix> {
    let z = z_coefficient(k, p.t1())?;
    let r = z.norm_sqr();
    let norm = (1.0 + r).recip();
    let l4 = (4.0 * p.lambda).exp();
    let e4x = C64::from_polar(1.0, 4.0 * p.x);
    Ok(MobiusMatrix::new_unchecked(
        (-e4x + r / l4) * norm,
        z.conj() * (e4x + 1.0 / l4) * norm,
        -z * (e4x.conj() + l4) * norm,
        (-e4x.conj() + r * l4) * norm,
    ))
}

/// Closed-form trace of the two-cycle round, `2 (|z|^2 cosh 4l - cos 4x) / (1 + |z|^2)`.
pub fn volume_trace(k: f64, p: &VolumeParams) -> Result<f64> {
    let r = z_coefficient(k, p.t1())?.norm_sqr();
    Ok(2.0 * (r * (4.0 * p.lambda).cosh() - (4.0 * p.x).cos()) / (1.0 + r))
}

/// Critical coupling of the log-law circuit, or `None` when `|tan 2h| >= |tan 2t|`
/// (no critical momentum for any `lambda > 0`).
pub fn lambda_c_loglaw(t: f64, h: f64) -> Option<f64> {
    let tt = (2.0 * t).tan().powi(2);
    let th = (2.0 * h).tan().powi(2);
    if !(th < tt) {
        return None;
    }
    let denom = (4.0 * t).cos() + (tt + th) / (tt - th);
    let arg = 2.0 * (2.0 * t).sin().powi(2) / denom;
    Some(0.5 * arg.sqrt().asinh())
}

/// The isolated critical momentum `arccos(tan 2h / tan 2t)` in `(0, pi)`.
pub fn loglaw_critical_momentum(t: f64, h: f64) -> Option<f64> {
    let ratio = (2.0 * h).tan() / (2.0 * t).tan();
    (ratio.abs() < 1.0).then(|| ratio.acos())
}

/// `lambda_c = asinh(cos^2 2x / sin 2x) / 2` for the volume-law circuit.
pub fn lambda_c_volume(x: f64) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::DivergesAtZero);
    }
    if x > FRAC_PI_4 + 1e-15 {
        return Err(Error::InvalidInput(format!("x = {x} outside (0, pi/4]")));
    }
    let c = (2.0 * x).cos();
    Ok(0.5 * (c * c / (2.0 * x).sin()).asinh())
}

/// Right-hand side of the window condition `tan^2(k/2) + tan^{-2}(k/2) <= R`.
fn window_bound(p: &VolumeParams) -> f64 {
    4.0 * (2.0 * p.x).cos().powi(4) / (2.0 * p.lambda).sinh().powi(2) + 2.0 * (4.0 * p.x).cos()
}

/// Critical window `[k_c, pi - k_c]` of the volume-law circuit, from the root
/// `y <= 1` of `y^2 - R y + 1 = 0` with `y = tan^2(k_c / 2)`.
pub fn critical_window(p: &VolumeParams) -> CriticalWindow {
    if p.lambda == 0.0 {
        return CriticalWindow::Full;
    }
    if let Ok(lc) = lambda_c_volume(p.x) {
        if p.lambda.abs() >= lc {
            return CriticalWindow::Empty;
        }
    }
    let r = window_bound(p);
    if !(r > 2.0) {
        return CriticalWindow::Empty;
    }
    // smaller root, written to avoid cancellation
    let y = 2.0 / (r + (r * r - 4.0).sqrt());
    let k_lo = 2.0 * y.sqrt().atan();
    CriticalWindow::Interval { k_lo, k_hi: PI - k_lo }
}

/// Leading behaviour of the window edge as `lambda -> lambda_c^-`:
/// `k_c = pi/2 - 2 sin(2x) / sqrt(tanh 2 lambda_c) * sqrt(lambda_c - lambda)`.
pub fn window_edge_asymptotic(p: &VolumeParams) -> Result<f64> {
    let lc = lambda_c_volume(p.x)?;
    let delta = (lc - p.lambda).max(0.0);
    Ok(FRAC_PI_2 - 2.0 * (2.0 * p.x).sin() / (2.0 * lc).tanh().sqrt() * delta.sqrt())
}
