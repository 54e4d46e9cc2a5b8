//! Long-time behaviour of the coherent-state amplitude `f_n(k)`, the symbols
//! `phi_hat`, `psi_hat` and their Fourier coefficients, and phase classification.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mobius::{Criticality, MobiusMatrix, ProjectiveAmplitude, TransferMatrix, DEFAULT_CRITICALITY_TOL};
use crate::models::{CriticalWindow, VolumeParams};

/// Default number of momentum nodes.
pub const DEFAULT_K_GRID: usize = 4096;
/// Default number of nodes for the uniform u-average.
pub const DEFAULT_U_GRID: usize = 2048;
/// Tolerance on `max |f(-k) + f(k)|` (chordal) for sampled amplitudes.
pub const ASYMMETRY_TOL: f64 = 1e-8;
/// Tolerance on the imaginary parts of the Fourier coefficients.
pub const IMAGINARY_TOL: f64 = 1e-9;
/// Bisection tolerance in `k` for window edges and isolated critical points.
pub const REFINE_TOL: f64 = 1e-10;

/// Uniform grid `k_j = -pi + 2 pi (j + 1/2) / N`, `j = 0..N`.
///
/// `N` is even, so the nodes avoid `0` and `+-pi` and `k_{N-1-j} = -k_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumGrid {
    n: usize,
}

impl MomentumGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "momentum grid size {n} must be even and >= 2"
            )));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + 2.0 * PI * (j as f64 + 0.5) / self.n as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Index of `-k_j`.
    pub fn mirror(&self, j: usize) -> usize {
        self.n - 1 - j
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Indices of the nodes in `(0, pi)`, ascending in `k`.
    pub fn positive(&self) -> std::ops::Range<usize> {
        self.n / 2..self.n
    }
}

/// `M^n` applied projectively to `f0`, by repeated squaring with the running
/// matrices rescaled to unit max-modulus entry.
pub fn evolve_amplitude(m: &MobiusMatrix, n: u64, f0: &ProjectiveAmplitude) -> ProjectiveAmplitude {
    let mut result = *f0;
    let mut base = m.projectively_rescaled();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            result = base.apply(&result);
        }
        n >>= 1;
        if n > 0 {
            base = (base * base).projectively_rescaled();
        }
    }
    result
}

/// `f_n(k)` of the volume-law circuit from the diagonalized round,
/// `b sin n theta / ((cos theta - a) sin n theta + sin theta cos n theta)`.
pub fn closed_form_fn(k: f64, n: u64, p: &VolumeParams) -> Result<ProjectiveAmplitude> {
    let m = p.at(k)?;
    let theta = match m.classify(DEFAULT_CRITICALITY_TOL) {
        Criticality::Critical { theta } => theta,
        Criticality::NonCritical { .. } => return Err(Error::NotCritical { k }),
    };
    let nf = n as f64;
    let (sn, cn) = (nf * theta).sin_cos();
    let st = theta.sin();
    // divide through by sin theta so the parabolic limit stays finite
    let chebyshev = if st.abs() > 1e-12 {
        sn / st
    } else if theta.cos() > 0.0 || n % 2 == 1 {
        nf
    } else {
        -nf
    };
    let x = m.b * chebyshev;
    let y = (theta.cos() - m.a) * chebyshev + cn;
    Ok(ProjectiveAmplitude::new(x, y).unwrap_or(ProjectiveAmplitude::INFINITY))
}

/// How the fast oscillation in `n` is averaged at critical momenta.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UAverage {
    /// Closed-form average of the ratio of trigonometric quadratics.
    Exact,
    /// Midpoint rule with the given number of nodes on `[0, 2 pi)`.
    Uniform { nodes: usize },
}

/// Long-time average of the Bloch vector of `f_n` under `m`, starting from `f0`.
///
/// Non-critical maps flow to the stable fixed point. At critical momenta
/// `f_n = x(n theta) / y(n theta)` with `(x, y)(u) = w sin u + sin theta v0 cos u`,
/// `w = (M - cos theta) v0`, and the average over `u` replaces the average over `n`.
pub fn averaged_bloch(m: &MobiusMatrix, f0: &ProjectiveAmplitude, method: UAverage) -> [f64; 3] {
    let theta = match m.classify(DEFAULT_CRITICALITY_TOL) {
        Criticality::NonCritical { f_stable, .. } => return f_stable.bloch(),
        Criticality::Critical { theta } => theta,
    };
    let st = theta.sin();
    if st.abs() < 1e-12 {
        // parabolic maps flow to their fixed point; +-identity fixes everything
        return match m.fixed_points() {
            Ok(fp) => fp.stable.bloch(),
            Err(_) => f0.bloch(),
        };
    }
    let ct = theta.cos();
    let p1 = m.a * f0.x() + m.b * f0.y() - f0.x() * ct;
    let p2 = m.c * f0.x() + m.d * f0.y() - f0.y() * ct;
    let q1 = f0.x() * st;
    let q2 = f0.y() * st;
    match method {
        UAverage::Exact => exact_u_average(p1, q1, p2, q2),
        UAverage::Uniform { nodes } => {
            let mut acc = [0.0; 3];
            let mut count = 0usize;
            for i in 0..nodes.max(1) {
                let u = 2.0 * PI * (i as f64 + 0.5) / nodes.max(1) as f64;
                let (s, c) = u.sin_cos();
                if let Some(f) = ProjectiveAmplitude::new(p1 * s + q1 * c, p2 * s + q2 * c) {
                    let b = f.bloch();
                    for (a, v) in acc.iter_mut().zip(b) {
                        *a += v;
                    }
                    count += 1;
                }
            }
            acc.map(|a| a / count.max(1) as f64)
        }
    }
}

/// Quadratic form `a s^2 + b s c + c c^2` in `(sin u, cos u)`, re-expressed in
/// `v = 2u` as `(c0, c1, c2)` with value `c0 + c1 cos v + c2 sin v`.
fn harmonic(a: f64, b: f64, c: f64) -> [f64; 3] {
    [(a + c) / 2.0, (c - a) / 2.0, b / 2.0]
}

fn exact_u_average(p1: C64, q1: C64, p2: C64, q2: C64) -> [f64; 3] {
    let den = harmonic(
        p1.norm_sqr() + p2.norm_sqr(),
        2.0 * (p1 * q1.conj() + p2 * q2.conj()).re,
        q1.norm_sqr() + q2.norm_sqr(),
    );
    let xy = [p1 * p2.conj(), p1 * q2.conj() + q1 * p2.conj(), q1 * q2.conj()];
    let re = harmonic(2.0 * xy[0].re, 2.0 * xy[1].re, 2.0 * xy[2].re);
    let im = harmonic(2.0 * xy[0].im, 2.0 * xy[1].im, 2.0 * xy[2].im);
    let dz = harmonic(
        p1.norm_sqr() - p2.norm_sqr(),
        2.0 * (p1 * q1.conj() - p2 * q2.conj()).re,
        q1.norm_sqr() - q2.norm_sqr(),
    );
    let s2 = den[0] * den[0] - den[1] * den[1] - den[2] * den[2];
    if s2 <= 1e-24 * den[0] * den[0] {
        // (x, y)(u) is a real multiple of one vector: f is constant where defined
        let u = 0.5 * den[2].atan2(den[1]);
        let (s, c) = u.sin_cos();
        return ProjectiveAmplitude::new(p1 * s + q1 * c, p2 * s + q2 * c)
            .map(|f| f.bloch())
            .unwrap_or([0.0, 0.0, -1.0]);
    }
    let s = s2.sqrt();
    let avg = |n: [f64; 3]| n[0] / s - (n[1] * den[1] + n[2] * den[2]) / (s * (s + den[0]));
    [avg(re), avg(im), avg(dz)]
}

/// The symbols `phi_hat(k) = i g_1(k)` and `psi_hat(k) = g_3(k) + i g_2(k)`
/// built from a Bloch vector `g` per grid node.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolPair {
    grid: MomentumGrid,
    bloch: Vec<[f64; 3]>,
}

impl SymbolPair {
    /// Symbols from per-node Bloch vectors.
    pub fn from_bloch(grid: MomentumGrid, bloch: Vec<[f64; 3]>) -> Result<Self> {
        if bloch.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {}",
                bloch.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, bloch })
    }

    /// Symbols of literal amplitudes `f(k_j)`, checking `f(-k) = -f(k)`.
    pub fn from_amplitudes(grid: MomentumGrid, f: &[ProjectiveAmplitude]) -> Result<Self> {
        if f.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a grid of {}",
                f.len(),
                grid.len()
            )));
        }
        let deviation = (0..grid.len())
            .map(|j| f[grid.mirror(j)].distance(&f[j].mirrored()))
            .fold(0.0, f64::max);
        if deviation > ASYMMETRY_TOL {
            return Err(Error::AsymmetryViolation { deviation });
        }
        Self::from_bloch(grid, f.iter().map(|p| p.bloch()).collect())
    }

    pub fn grid(&self) -> MomentumGrid {
        self.grid
    }

    pub fn bloch(&self) -> &[[f64; 3]] {
        &self.bloch
    }

    pub fn phi_hat(&self, j: usize) -> C64 {
        C64::new(0.0, self.bloch[j][0])
    }

    pub fn psi_hat(&self, j: usize) -> C64 {
        C64::new(self.bloch[j][2], self.bloch[j][1])
    }

    /// `sqrt(|phi_hat|^2 + |psi_hat|^2)` at node `j`.
    pub fn nu(&self, j: usize) -> f64 {
        let b = self.bloch[j];
        (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt()
    }

    /// `phi_j = (1/N) sum_k e^{-ikj} phi_hat(k)` and likewise `psi_j`, for `|j| <= jmax`.
    pub fn coefficients(&self, jmax: usize) -> Result<Coefficients> {
        let nodes = self.grid.nodes();
        let nf = self.grid.len() as f64;
        let per_j: Vec<(C64, C64)> = (-(jmax as isize)..=jmax as isize)
            .into_par_iter()
            .map(|j| {
                let mut phi = C64::new(0.0, 0.0);
                let mut psi = C64::new(0.0, 0.0);
                for (idx, &k) in nodes.iter().enumerate() {
                    let e = C64::from_polar(1.0, -k * j as f64);
                    phi += e * self.phi_hat(idx);
                    psi += e * self.psi_hat(idx);
                }
                (phi / nf, psi / nf)
            })
            .collect();
        let deviation = per_j
            .iter()
            .map(|(p, s)| p.im.abs().max(s.im.abs()))
            .fold(0.0, f64::max);
        if deviation > IMAGINARY_TOL {
            return Err(Error::AsymmetryViolation { deviation });
        }
        Ok(Coefficients {
            jmax,
            phi: per_j.iter().map(|(p, _)| p.re).collect(),
            psi: per_j.iter().map(|(_, s)| s.re).collect(),
        })
    }
}

/// Real-space coefficients `phi_j`, `psi_j` for `|j| <= jmax`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    jmax: usize,
    phi: Vec<f64>,
    psi: Vec<f64>,
}

impl Coefficients {
    /// Builds from values indexed by `j + jmax`.
    pub fn new(phi: Vec<f64>, psi: Vec<f64>) -> Result<Self> {
        if phi.len() != psi.len() || phi.len().is_multiple_of(2) {
            return Err(Error::InvalidInput(
                "coefficient lists must have equal odd length".into(),
            ));
        }
        Ok(Self {
            jmax: phi.len() / 2,
            phi,
            psi,
        })
    }

    pub fn jmax(&self) -> usize {
        self.jmax
    }

    pub fn phi(&self, j: isize) -> f64 {
        self.phi[(j + self.jmax as isize) as usize]
    }

    pub fn psi(&self, j: isize) -> f64 {
        self.psi[(j + self.jmax as isize) as usize]
    }
}

/// Fourier coefficients of literal amplitudes sampled on `grid`.
pub fn correlation_coefficients(grid: MomentumGrid, f: &[ProjectiveAmplitude], jmax: usize) -> Result<Coefficients> {
    SymbolPair::from_amplitudes(grid, f)?.coefficients(jmax)
}

/// Evaluates `g(k)` on the positive half of the grid and fills `-k` by `mirror`.
fn on_grid<T, F, G>(grid: MomentumGrid, eval: F, mirror: G) -> Result<Vec<T>>
where
    T: Send + Clone,
    F: Fn(f64) -> Result<T> + Sync,
    G: Fn(&T) -> T,
{
    let half: Vec<T> = grid
        .positive()
        .into_par_iter()
        .map(|j| eval(grid.node(j)))
        .collect::<Result<_>>()?;
    let mut out: Vec<T> = half.iter().rev().map(&mirror).collect();
    out.extend(half);
    Ok(out)
}

/// `f_n(k)` on the grid, with `f0` the amplitude at `k > 0` and `-f0` at `k < 0`.
pub fn evolved_amplitudes(
    tm: &impl TransferMatrix,
    grid: MomentumGrid,
    n: u64,
    f0: &ProjectiveAmplitude,
) -> Result<Vec<ProjectiveAmplitude>> {
    on_grid(grid, |k| Ok(evolve_amplitude(&tm.at(k)?, n, f0)), |f| f.mirrored())
}

/// Time-averaged symbols of a round on `grid`.
pub fn averaged_symbols(
    tm: &impl TransferMatrix,
    grid: MomentumGrid,
    f0: &ProjectiveAmplitude,
    method: UAverage,
) -> Result<SymbolPair> {
    let bloch = on_grid(
        grid,
        |k| Ok(averaged_bloch(&tm.at(k)?, f0, method)),
        |b| [-b[0], -b[1], b[2]],
    )?;
    SymbolPair::from_bloch(grid, bloch)
}

/// Entanglement phase of the steady state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Phase {
    AreaLaw,
    /// Isolated critical momenta, as `+-k` pairs sorted ascending.
    LogLaw {
        critical_momenta: Vec<f64>,
    },
    VolumeLaw {
        window: CriticalWindow,
    },
}

impl Phase {
    pub fn name(&self) -> &'static str {
        match self {
            Phase::AreaLaw => "AreaLaw",
            Phase::LogLaw { .. } => "LogLaw",
            Phase::VolumeLaw { .. } => "VolumeLaw",
        }
    }
}

/// `max(|Im Tr|, |Re Tr| - 2)`; the map is critical when this is `<= tol`.
fn defect(m: &MobiusMatrix) -> f64 {
    let tr = m.trace();
    tr.im.abs().max(tr.re.abs() - 2.0)
}

/// Classifies the steady state from the critical momenta in `(0, pi)`.
///
/// Runs of at least three critical nodes give a volume law, with the longest run's
/// edges refined by bisection. Otherwise isolated critical points are located
/// from sign changes of `Im Tr` and from local minima of the criticality defect
/// between nodes, so a single critical momentum narrower than the grid is found.
pub fn classify_phase(tm: &impl TransferMatrix, grid: MomentumGrid) -> Result<Phase> {
    let tol = DEFAULT_CRITICALITY_TOL;
    let ks: Vec<f64> = grid.positive().map(|j| grid.node(j)).collect();
    let mats: Vec<MobiusMatrix> = ks.par_iter().map(|&k| tm.at(k)).collect::<Result<_>>()?;
    let h: Vec<f64> = mats.iter().map(defect).collect();
    let crit: Vec<bool> = h.iter().map(|&v| v <= tol).collect();
    // edges of a run sit where |Re Tr| crosses 2; Im Tr is already within tol there
    let inside_edge = |k: f64| tm.at(k).map(|m| m.trace().re.abs() <= 2.0);

    if crit.iter().all(|&c| c) {
        return Ok(Phase::VolumeLaw {
            window: CriticalWindow::Full,
        });
    }

    // longest run of critical nodes
    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < crit.len() {
        if crit[i] {
            let start = i;
            while i < crit.len() && crit[i] {
                i += 1;
            }
            if best.is_none_or(|(s, e)| i - start > e - s) {
                best = Some((start, i));
            }
        } else {
            i += 1;
        }
    }
    if let Some((s, e)) = best {
        if e - s >= 3 {
            let k_lo = if s == 0 {
                0.0
            } else {
                bisect_bool(ks[s - 1], ks[s], &inside_edge)?
            };
            let k_hi = if e == ks.len() {
                PI
            } else {
                bisect_bool(ks[e], ks[e - 1], &inside_edge)?
            };
            return Ok(Phase::VolumeLaw {
                window: CriticalWindow::Interval { k_lo, k_hi },
            });
        }
    }

    let mut roots: Vec<f64> = Vec::new();
    let im: Vec<f64> = mats.iter().map(|m| m.trace().im).collect();
    for i in 0..ks.len() {
        let strict_left = i == 0 || h[i] < h[i - 1];
        let right = i + 1 == ks.len() || h[i] <= h[i + 1];
        if !(crit[i] || (strict_left && right)) {
            continue;
        }
        let lo = if i == 0 { ks[i] } else { ks[i - 1] };
        let hi = if i + 1 == ks.len() { ks[i] } else { ks[i + 1] };
        let candidate = if i > 0 && im[i - 1] * im[i] < 0.0 {
            bisect_sign(ks[i - 1], ks[i], tm)?
        } else if i + 1 < ks.len() && im[i] * im[i + 1] < 0.0 {
            bisect_sign(ks[i], ks[i + 1], tm)?
        } else if crit[i] {
            ks[i]
        } else {
            golden_min(lo, hi, |k| tm.at(k).map(|m| defect(&m)))?
        };
        if defect(&tm.at(candidate)?) <= tol && !roots.iter().any(|r| (r - candidate).abs() < 1e-8) {
            roots.push(candidate);
        }
    }
    if roots.is_empty() {
        return Ok(Phase::AreaLaw);
    }
    let mut critical_momenta: Vec<f64> = roots.iter().map(|r| -r).chain(roots.iter().copied()).collect();
    critical_momenta.sort_by(f64::total_cmp);
    Ok(Phase::LogLaw { critical_momenta })
}

/// Boundary between `outside` (non-critical) and `inside` (critical).
fn bisect_bool(mut outside: f64, mut inside: f64, is_crit: &impl Fn(f64) -> Result<bool>) -> Result<f64> {
    while (inside - outside).abs() > REFINE_TOL {
        let mid = 0.5 * (outside + inside);
        if is_crit(mid)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (outside + inside))
}

/// Root of `Im Tr` in `[a, b]`, given a sign change.
fn bisect_sign(mut a: f64, mut b: f64, tm: &impl TransferMatrix) -> Result<f64> {
    let mut fa = tm.at(a)?.trace().im;
    while b - a > REFINE_TOL {
        let mid = 0.5 * (a + b);
        let fm = tm.at(mid)?.trace().im;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > REFINE_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}
