//! Per-momentum SL(2,C) representation of the circuit layers.
//!
//! Every translation-invariant layer acts on the coherent-state amplitude
//! `f(k)` by a Möbius map. The maps are stored as determinant-one 2x2
//! complex matrices acting on homogeneous coordinates `(x, y)`, `f = x / y`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance on `Im Tr` and on `|Re Tr| - 2` used to decide criticality.
pub const DEFAULT_CRITICALITY_TOL: f64 = 1e-9;

const SINGULAR_DET: f64 = 1e-14;
/// Entry scale (squared) below which a composed round is renormalized by its
/// computed determinant.
const POLISH_SCALE: f64 = 1e8;

/// A point of the Riemann sphere in homogeneous coordinates, `f = x / y`.
///
/// Always stored with `max(|x|, |y|) = 1`, so `y = 0` is the point at infinity
/// and repeated non-unitary action never overflows.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveAmplitude {
    x: C64,
    y: C64,
}

impl ProjectiveAmplitude {
    pub const ZERO: Self = Self {
        x: C64::new(0.0, 0.0),
        y: C64::new(1.0, 0.0),
    };
    pub const INFINITY: Self = Self {
        x: C64::new(1.0, 0.0),
        y: C64::new(0.0, 0.0),
    };

    /// Builds a normalized point. Returns `None` for `(0, 0)` or non-finite input.
    pub fn new(x: C64, y: C64) -> Option<Self> {
        let scale = x.norm().max(y.norm());
        if !(scale.is_finite() && scale > 0.0) {
            return None;
        }
        Some(Self {
            x: x / scale,
            y: y / scale,
        })
    }

    pub fn from_value(f: C64) -> Self {
        Self::new(f, C64::new(1.0, 0.0)).unwrap_or(Self::INFINITY)
    }

    pub fn x(&self) -> C64 {
        self.x
    }

    pub fn y(&self) -> C64 {
        self.y
    }

    pub fn is_infinite(&self) -> bool {
        self.y == C64::new(0.0, 0.0)
    }

    /// `x / y`, or `None` at the pole.
    pub fn value(&self) -> Option<C64> {
        if self.is_infinite() {
            None
        } else {
            Some(self.x / self.y)
        }
    }

    /// The amplitude at `-k` given this one at `k` (`f(-k) = -f(k)`).
    pub fn mirrored(&self) -> Self {
        Self { x: -self.x, y: self.y }
    }

    /// Chordal distance on the Riemann sphere, in `[0, 1]`.
    pub fn distance(&self, other: &Self) -> f64 {
        let cross = (self.x * other.y - other.x * self.y).norm();
        let n1 = (self.x.norm_sqr() + self.y.norm_sqr()).sqrt();
        let n2 = (other.x.norm_sqr() + other.y.norm_sqr()).sqrt();
        cross / (n1 * n2)
    }

    /// The three real quantities entering the correlation integrals:
    /// `2 Re f / (1 + |f|^2)`, `2 Im f / (1 + |f|^2)` and `(|f|^2 - 1) / (1 + |f|^2)`.
    ///
    /// They form a unit vector (the Bloch vector of the pair mode).
    pub fn bloch(&self) -> [f64; 3] {
        let xy = self.x * self.y.conj();
        let nx = self.x.norm_sqr();
        let ny = self.y.norm_sqr();
        let n = nx + ny;
        [2.0 * xy.re / n, 2.0 * xy.im / n, (nx - ny) / n]
    }
}

impl fmt::Display for ProjectiveAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => write!(f, "inf"),
        }
    }
}

/// A 2x2 complex matrix representing a Möbius map `f -> (a f + b) / (c f + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MobiusMatrix {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl MobiusMatrix {
    pub const IDENTITY: Self = Self {
        a: C64::new(1.0, 0.0),
        b: C64::new(0.0, 0.0),
        c: C64::new(0.0, 0.0),
        d: C64::new(1.0, 0.0),
    };

    /// Stores the entries as given, without normalization.
    pub const fn new_unchecked(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self { a, b, c, d }
    }

    /// Builds a determinant-one matrix by dividing the entries by the principal
    /// square root of `ad - bc`.
    pub fn from_entries(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        Self { a, b, c, d }.normalized()
    }

    pub fn diagonal(a: C64, d: C64) -> Result<Self> {
        Self::from_entries(a, C64::new(0.0, 0.0), C64::new(0.0, 0.0), d)
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn max_modulus(&self) -> f64 {
        self.a.norm().max(self.b.norm()).max(self.c.norm()).max(self.d.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.is_finite())
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
            d: self.d * s,
        }
    }

    /// Divides by the principal square root of the determinant.
    pub fn normalized(&self) -> Result<Self> {
        let det = self.det();
        // compare against the entry scale so tiny-but-regular matrices survive
        let scale = self.max_modulus().powi(2);
        if !det.is_finite() || det.norm() <= SINGULAR_DET * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NormalizationSingular { det: det.norm() });
        }
        Ok(self.scaled(det.sqrt().inv()))
    }

    /// Rescales by the largest entry modulus; the projective action is unchanged.
    pub fn projectively_rescaled(&self) -> Self {
        let m = self.max_modulus();
        if m > 0.0 && m.is_finite() {
            self.scaled(C64::new(1.0 / m, 0.0))
        } else {
            *self
        }
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            a: self.d / det,
            b: -self.b / det,
            c: -self.c / det,
            d: self.a / det,
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            a: self.a.conj(),
            b: self.c.conj(),
            c: self.b.conj(),
            d: self.d.conj(),
        }
    }

    /// Projective action on homogeneous coordinates.
    pub fn apply(&self, f: &ProjectiveAmplitude) -> ProjectiveAmplitude {
        let x = self.a * f.x + self.b * f.y;
        let y = self.c * f.x + self.d * f.y;
        // a nonsingular matrix never maps a nonzero vector to zero
        ProjectiveAmplitude::new(x, y).unwrap_or(ProjectiveAmplitude::INFINITY)
    }

    /// Eigenvalues `(mu_plus, mu_minus)` with `|mu_plus| >= |mu_minus|`.
    pub fn eigenvalues(&self) -> (C64, C64) {
        let tr = self.trace();
        let det = self.det();
        let mut disc = (tr * tr - det * 4.0).sqrt();
        // pick the sign that avoids cancellation in the larger root
        if (disc * tr.conj()).re < 0.0 {
            disc = -disc;
        }
        let big = (tr + disc) * 0.5;
        if big.norm() == 0.0 {
            return (big, big);
        }
        (big, det / big)
    }

    /// Fixed points of the Möbius map and the stability ratio `|mu_-| / |mu_+|`.
    ///
    /// The stable point is the eigenvector of the larger-modulus eigenvalue, where
    /// `|F'(f)| = |mu_-/mu_+|`. For a parabolic map the single fixed point is
    /// returned twice with contraction 1.
    pub fn fixed_points(&self) -> Result<FixedPoints> {
        let scale = self.max_modulus();
        let eps = 1e-14 * scale;
        if self.b.norm() <= eps && self.c.norm() <= eps && (self.a - self.d).norm() <= eps {
            return Err(Error::DegenerateMap);
        }
        let (mu_plus, mu_minus) = self.eigenvalues();
        let stable = self.eigenvector(mu_plus)?;
        let unstable = self.eigenvector(mu_minus)?;
        let contraction = if mu_plus.norm() > 0.0 {
            (mu_minus.norm() / mu_plus.norm()).min(1.0)
        } else {
            1.0
        };
        Ok(FixedPoints {
            stable,
            unstable,
            contraction,
        })
    }

    fn eigenvector(&self, mu: C64) -> Result<ProjectiveAmplitude> {
        let v1 = (self.b, mu - self.a);
        let v2 = (mu - self.d, self.c);
        let n1 = v1.0.norm_sqr() + v1.1.norm_sqr();
        let n2 = v2.0.norm_sqr() + v2.1.norm_sqr();
        let (x, y) = if n1 >= n2 { v1 } else { v2 };
        ProjectiveAmplitude::new(x, y).ok_or(Error::DegenerateMap)
    }

    /// Decides whether the two eigenvalues have equal modulus, using the trace test
    /// `Im Tr = 0` and `|Re Tr| <= 2` (valid for determinant one).
    pub fn classify(&self, tol: f64) -> Criticality {
        let tr = self.trace();
        if tr.im.abs() <= tol && tr.re.abs() <= 2.0 + tol {
            let theta = (tr.re / 2.0).clamp(-1.0, 1.0).acos();
            return Criticality::Critical { theta };
        }
        match self.fixed_points() {
            Ok(fp) => Criticality::NonCritical {
                f_stable: fp.stable,
                f_unstable: fp.unstable,
                contraction: fp.contraction,
            },
            // only scalar matrices are degenerate, and those have |Tr| = 2
            Err(_) => Criticality::Critical {
                theta: if tr.re >= 0.0 { 0.0 } else { std::f64::consts::PI },
            },
        }
    }

    pub fn is_critical(&self, tol: f64) -> bool {
        let tr = self.trace();
        tr.im.abs() <= tol && tr.re.abs() <= 2.0 + tol
    }

    /// Entrywise distance to `other` or `-other`, whichever is smaller.
    pub fn distance_up_to_sign(&self, other: &Self) -> f64 {
        let diff = |s: f64| {
            [
                self.a - other.a * s,
                self.b - other.b * s,
                self.c - other.c * s,
                self.d - other.d * s,
            ]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
        };
        diff(1.0).min(diff(-1.0))
    }
}

impl Mul for MobiusMatrix {
    type Output = MobiusMatrix;

    fn mul(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }
}

/// Result of [`MobiusMatrix::fixed_points`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPoints {
    pub stable: ProjectiveAmplitude,
    pub unstable: ProjectiveAmplitude,
    /// `|mu_-| / |mu_+|`, in `[0, 1]`.
    pub contraction: f64,
}

/// Whether a momentum mode keeps oscillating (critical) or flows to a fixed point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Criticality {
    /// Eigenvalues `e^{+-i theta}`.
    Critical { theta: f64 },
    NonCritical {
        f_stable: ProjectiveAmplitude,
        f_unstable: ProjectiveAmplitude,
        contraction: f64,
    },
}

impl Criticality {
    pub fn is_critical(&self) -> bool {
        matches!(self, Criticality::Critical { .. })
    }

    pub fn theta(&self) -> Option<f64> {
        match self {
            Criticality::Critical { theta } => Some(*theta),
            Criticality::NonCritical { .. } => None,
        }
    }
}

/// The three layer families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    /// `exp(-i t sum_j Z_j Z_{j+1})`
    ZZ,
    /// `exp(-i t sum_j Y_j Y_{j+1})`
    YY,
    /// `exp(-i t sum_j X_j)`
    X,
}

/// One layer with a possibly complex time. A weak measurement of strength
/// `lambda` is an `X` layer with time `i lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub time: C64,
}

impl LayerSpec {
    pub fn new(kind: LayerKind, time: C64) -> Self {
        Self { kind, time }
    }

    pub fn zz(t: f64) -> Self {
        Self::new(LayerKind::ZZ, C64::new(t, 0.0))
    }

    pub fn yy(t: f64) -> Self {
        Self::new(LayerKind::YY, C64::new(t, 0.0))
    }

    pub fn x(h: f64) -> Self {
        Self::new(LayerKind::X, C64::new(h, 0.0))
    }

    /// `exp(lambda sum_j X_j)`, the post-selected weak measurement.
    pub fn measurement(lambda: f64) -> Self {
        Self::new(LayerKind::X, C64::new(0.0, lambda))
    }

    pub fn is_unitary(&self) -> bool {
        self.time.im == 0.0
    }
}

/// Layers in application order: `layers[0]` acts first.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RoundSpec {
    layers: Vec<LayerSpec>,
}

impl RoundSpec {
    pub fn new(layers: Vec<LayerSpec>) -> Self {
        Self { layers }
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn push(&mut self, layer: LayerSpec) {
        self.layers.push(layer);
    }

    /// `self` followed by `next`.
    pub fn then(mut self, next: &RoundSpec) -> Self {
        self.layers.extend_from_slice(&next.layers);
        self
    }

    pub fn is_unitary(&self) -> bool {
        self.layers.iter().all(LayerSpec::is_unitary)
    }
}

impl FromIterator<LayerSpec> for RoundSpec {
    fn from_iter<I: IntoIterator<Item = LayerSpec>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Anything that yields a round's Möbius matrix at momentum `k`.
pub trait TransferMatrix: Sync {
    fn at(&self, k: f64) -> Result<MobiusMatrix>;
}

impl TransferMatrix for RoundSpec {
    fn at(&self, k: f64) -> Result<MobiusMatrix> {
        compose_round(self, k)
    }
}

impl TransferMatrix for MobiusMatrix {
    fn at(&self, _k: f64) -> Result<MobiusMatrix> {
        Ok(*self)
    }
}

/// Möbius matrix of a single layer at momentum `k`.
///
/// Entries are written with `sin(k/2)`, `cos(k/2)` and normalized by the
/// analytic square root `e^{2it}` of the determinant `e^{4it}`, so the result has
/// determinant one for every `k` in the Brillouin zone, including `k = +-pi`,
/// and depends continuously on `k` and `t`.
pub fn layer_mobius(layer: &LayerSpec, k: f64) -> MobiusMatrix {
    let t = layer.time;
    let i = C64::i();
    let ep = (i * t * 2.0).exp();
    let em = (-i * t * 2.0).exp();
    match layer.kind {
        LayerKind::X => MobiusMatrix::new_unchecked(ep, C64::new(0.0, 0.0), C64::new(0.0, 0.0), em),
        LayerKind::ZZ | LayerKind::YY => {
            let (s, c) = (k / 2.0).sin_cos();
            let (s2, c2) = (s * s, c * c);
            let off = (t * 2.0).sin() * k.sin();
            let sign = if layer.kind == LayerKind::ZZ { 1.0 } else { -1.0 };
            MobiusMatrix::new_unchecked(em * c2 + ep * s2, off * sign, -off * sign, em * s2 + ep * c2)
        }
    }
}

/// Möbius matrix of a whole round: the product of the layer matrices with the
/// first-applied layer rightmost, renormalized to determinant one.
pub fn compose_round(round: &RoundSpec, k: f64) -> Result<MobiusMatrix> {
    if round.is_empty() {
        return Err(Error::EmptyRound);
    }
    let m = round
        .layers
        .iter()
        .fold(MobiusMatrix::IDENTITY, |acc, layer| layer_mobius(layer, k) * acc);
    // every layer has unit determinant; ad - bc is only worth polishing
    // while it can be computed to better than the drift it corrects
    if m.max_modulus().powi(2) < POLISH_SCALE {
        m.normalized()
    } else if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::NormalizationSingular { det: f64::NAN })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn x_quarter_turn_negates_amplitude() {
        let m = layer_mobius(&LayerSpec::x(FRAC_PI_4), 0.7);
        let target = MobiusMatrix::new_unchecked(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0));
        assert!(m.distance_up_to_sign(&target) < 1e-15);
        let f = ProjectiveAmplitude::from_value(c(0.3, -0.2));
        let g = m.apply(&f).value().unwrap();
        assert!((g + c(0.3, -0.2)).norm() < 1e-15);
    }

    #[test]
    fn zz_at_zero_time_is_identity() {
        for &k in &[-3.0, -0.5, 0.1, 1.0, PI] {
            let m = layer_mobius(&LayerSpec::zz(0.0), k);
            assert!(m.distance_up_to_sign(&MobiusMatrix::IDENTITY) < 1e-15);
        }
    }

    #[test]
    fn zz_quarter_turn_at_half_pi_inverts() {
        let m = layer_mobius(&LayerSpec::zz(FRAC_PI_4), FRAC_PI_2);
        for f in [c(0.5, 0.1), c(-2.0, 3.0)] {
            let g = m.apply(&ProjectiveAmplitude::from_value(f)).value().unwrap();
            assert!((g + f.inv()).norm() < 1e-14);
        }
    }

    // the raw map with tan(k/2), straight from the layer formula
    fn raw_layer_map(kind: LayerKind, t: C64, k: f64, f: C64) -> C64 {
        let tn = (k / 2.0).tan();
        let e = (C64::i() * t * 4.0).exp();
        let i = C64::i();
        match kind {
            LayerKind::X => e * f,
            LayerKind::ZZ => ((e * tn * tn + 1.0) * f + i * tn * (-e + 1.0)) / (-i * tn * (-e + 1.0) * f + e + tn * tn),
            LayerKind::YY => ((e * tn * tn + 1.0) * f - i * tn * (-e + 1.0)) / (i * tn * (-e + 1.0) * f + e + tn * tn),
        }
    }

    #[test]
    fn regularized_layers_reproduce_raw_maps() {
        let f = c(0.37, -0.81);
        for kind in [LayerKind::ZZ, LayerKind::YY, LayerKind::X] {
            for &t in &[c(0.3, 0.0), c(1.1, 0.4), c(0.0, -0.7)] {
                for &k in &[0.2, 1.3, 2.9, -1.7] {
                    let m = layer_mobius(&LayerSpec::new(kind, t), k);
                    assert!((m.det() - 1.0).norm() < 1e-13, "{kind:?} det {}", m.det());
                    let got = m.apply(&ProjectiveAmplitude::from_value(f)).value().unwrap();
                    let want = raw_layer_map(kind, t, k, f);
                    assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()), "{kind:?} {t} {k}");
                }
            }
        }
    }

    #[test]
    fn inverse_x_layers_compose_to_identity() {
        let round = RoundSpec::new(vec![LayerSpec::x(0.37), LayerSpec::x(-0.37)]);
        let m = compose_round(&round, 1.1).unwrap();
        assert!(m.distance_up_to_sign(&MobiusMatrix::IDENTITY) < 1e-14);
    }

    #[test]
    fn single_layer_round_matches_layer() {
        let layer = LayerSpec::new(LayerKind::YY, c(0.4, 0.2));
        let m = compose_round(&RoundSpec::new(vec![layer]), 0.9).unwrap();
        assert!(m.distance_up_to_sign(&layer_mobius(&layer, 0.9)) < 1e-14);
    }

    #[test]
    fn empty_round_is_rejected() {
        assert_eq!(compose_round(&RoundSpec::default(), 1.0), Err(Error::EmptyRound));
    }

    #[test]
    fn apply_examples() {
        let f = ProjectiveAmplitude::from_value(c(0.3, 0.2));
        assert!(MobiusMatrix::IDENTITY.apply(&f).distance(&f) < 1e-16);

        let m = MobiusMatrix::from_entries(c(1.0, 0.5), c(0.2, -0.3), c(0.7, 0.1), c(1.5, 0.0)).unwrap();
        let pole = ProjectiveAmplitude::from_value(-m.d / m.c);
        assert!(m.apply(&pole).y().norm() < 1e-15);

        let at_zero = m.apply(&ProjectiveAmplitude::ZERO).value().unwrap();
        assert!((at_zero - m.b / m.d).norm() < 1e-15);
    }

    #[test]
    fn normalization_rejects_singular() {
        let r = MobiusMatrix::from_entries(c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(1.0, 0.0));
        assert!(matches!(r, Err(Error::NormalizationSingular { .. })));
    }

    #[test]
    fn diagonal_fixed_points() {
        let mu = c(0.3, 0.4);
        let m = MobiusMatrix::diagonal(mu, mu.inv()).unwrap();
        let fp = m.fixed_points().unwrap();
        assert!(fp.stable.distance(&ProjectiveAmplitude::ZERO) < 1e-15);
        assert!(fp.unstable.is_infinite());
        assert!((fp.contraction - mu.norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn parabolic_fixed_point_reported_twice() {
        let m = MobiusMatrix::new_unchecked(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        let fp = m.fixed_points().unwrap();
        assert!(fp.stable.is_infinite() && fp.unstable.is_infinite());
        assert_eq!(fp.contraction, 1.0);
    }

    #[test]
    fn identity_has_no_isolated_fixed_points() {
        assert_eq!(MobiusMatrix::IDENTITY.fixed_points(), Err(Error::DegenerateMap));
    }

    #[test]
    fn classify_examples() {
        let m = MobiusMatrix::diagonal(c(2.0, 0.0), c(0.5, 0.0)).unwrap();
        match m.classify(DEFAULT_CRITICALITY_TOL) {
            Criticality::NonCritical {
                contraction, f_stable, ..
            } => {
                assert!((contraction - 0.25).abs() < 1e-15);
                assert!(f_stable.is_infinite());
            }
            other => panic!("expected non-critical, got {other:?}"),
        }
        let u = layer_mobius(&LayerSpec::zz(0.3), 1.2) * layer_mobius(&LayerSpec::x(0.8), 1.2);
        assert!(u.classify(DEFAULT_CRITICALITY_TOL).is_critical());
    }

    #[test]
    fn parabolic_boundary_is_critical() {
        let m = MobiusMatrix::new_unchecked(c(-1.0, 0.0), c(3.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0));
        assert_eq!(m.classify(1e-9), Criticality::Critical { theta: PI });
    }
}
