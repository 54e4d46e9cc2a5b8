//! Dense statevector simulation of the same circuits on a periodic chain.
//!
//! Site `j` is bit `j` of the basis index, with `Z|0> = |0>`. The reference for
//! the Gaussian machinery: both routes must agree on every entropy.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::entanglement::{block_entropies, EntropyReport};
use crate::error::{Error, Result};
use crate::jacobi::{symmetric_eigenvalues, SquareMatrix};
use crate::mobius::{LayerKind, LayerSpec, ProjectiveAmplitude, RoundSpec};
use crate::steady::{correlation_coefficients, evolved_amplitudes, MomentumGrid};

/// Largest chain handled by the dense simulator.
pub const MAX_SITES: usize = 14;
/// Norms below this signal a vanished trajectory weight.
pub const NORM_FLOOR: f64 = 1e-300;
/// Post-selection probabilities below this count as vanishing.
pub const POST_SELECTION_FLOOR: f64 = 1e-28;
/// Eigenvalues of `rho` above this count towards the rank.
pub const RANK_TOL: f64 = 1e-10;

/// Normalized state of `L` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    sites: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// All spins in the `+1` eigenstate of `X`.
    pub fn all_plus(sites: usize) -> Result<Self> {
        check_sites(sites)?;
        let dim = 1usize << sites;
        let a = C64::new((dim as f64).sqrt().recip(), 0.0);
        Ok(Self {
            sites,
            amps: vec![a; dim],
        })
    }

    /// The computational basis state `|index>`.
    pub fn basis(sites: usize, index: usize) -> Result<Self> {
        check_sites(sites)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << sites];
        *amps
            .get_mut(index)
            .ok_or_else(|| Error::InvalidInput(format!("basis index {index} out of range")))? = C64::new(1.0, 0.0);
        Ok(Self { sites, amps })
    }

    /// Normalizes the given amplitudes.
    pub fn from_amplitudes(sites: usize, amps: Vec<C64>) -> Result<Self> {
        check_sites(sites)?;
        if amps.len() != 1 << sites {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for {} sites",
                amps.len(),
                sites
            )));
        }
        let mut s = Self { sites, amps };
        s.renormalize()?;
        Ok(s)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `|<self|other>|`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }

    /// Renormalizes and returns the norm before rescaling.
    fn renormalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm >= NORM_FLOOR) || !norm.is_finite() {
            return Err(Error::NormUnderflow { norm });
        }
        let inv = norm.recip();
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(norm)
    }

    /// Applies a 2x2 gate `g` (row-major) to one site without renormalizing.
    pub fn apply_site_gate(&mut self, site: usize, g: [[C64; 2]; 2]) {
        let mask = 1usize << site;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let (a0, a1) = (self.amps[i], self.amps[i | mask]);
                self.amps[i] = g[0][0] * a0 + g[0][1] * a1;
                self.amps[i | mask] = g[1][0] * a0 + g[1][1] * a1;
            }
        }
    }

    /// Applies every gate of a layer over all sites or bonds, including the
    /// bond `(L-1, 0)`, then renormalizes. Returns the norm before rescaling.
    pub fn apply_layer(&mut self, layer: &LayerSpec) -> Result<f64> {
        let t = layer.time;
        let (cos, sin) = (t.cos(), t.sin());
        let minus_i_sin = C64::new(0.0, -1.0) * sin;
        let l = self.sites;
        match layer.kind {
            LayerKind::X => {
                let g = [[cos, minus_i_sin], [minus_i_sin, cos]];
                for j in 0..l {
                    self.apply_site_gate(j, g);
                }
            }
            LayerKind::ZZ => {
                let up = (C64::new(0.0, -1.0) * t).exp();
                let down = up.inv();
                for (i, a) in self.amps.iter_mut().enumerate() {
                    // sum_j z_j z_{j+1} = L - 2 * (number of domain walls)
                    let walls = (i ^ rotate_sites(i, l)).count_ones();
                    let e = l as i32 - 2 * walls as i32;
                    *a *= if e >= 0 { up.powi(e) } else { down.powi(-e) };
                }
            }
            LayerKind::YY => {
                for j in 0..l {
                    self.apply_yy_bond(j, cos, minus_i_sin);
                }
            }
        }
        self.renormalize()
    }

    /// `cos t - i sin t Y_j Y_{j+1}` on the bond `(j, j + 1 mod L)`.
    fn apply_yy_bond(&mut self, j: usize, cos: C64, minus_i_sin: C64) {
        let k = (j + 1) % self.sites;
        let flip = (1usize << j) | (1usize << k);
        for i in 0..self.amps.len() {
            let p = i ^ flip;
            if i < p {
                // YY|00> = -|11>, YY|01> = |10>
                let same = ((i >> j) & 1) == ((i >> k) & 1);
                let phase = if same { -1.0 } else { 1.0 };
                let (a, b) = (self.amps[i], self.amps[p]);
                self.amps[i] = cos * a + minus_i_sin * phase * b;
                self.amps[p] = cos * b + minus_i_sin * phase * a;
            }
        }
    }

    /// Moves site `j` to site `j + 1 (mod L)`.
    pub fn cyclic_shift(&self) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            amps[rotate_sites(i, self.sites)] = *a;
        }
        Self {
            sites: self.sites,
            amps,
        }
    }
}

/// Index with every site's bit moved one site up, cyclically.
fn rotate_sites(i: usize, l: usize) -> usize {
    let top = (i >> (l - 1)) & 1;
    ((i << 1) & ((1usize << l) - 1)) | top
}

fn check_sites(sites: usize) -> Result<()> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::InvalidInput(format!(
            "chain length {sites} outside 1..={MAX_SITES}"
        )));
    }
    Ok(())
}

/// Returns `layer` applied to a copy of `psi`.
pub fn apply_layer_dense(psi: &StateVector, layer: &LayerSpec) -> Result<StateVector> {
    let mut out = psi.clone();
    out.apply_layer(layer)?;
    Ok(out)
}

/// `n` repetitions of `round` applied to `psi0`.
pub fn run_circuit(round: &RoundSpec, n: usize, psi0: &StateVector) -> Result<StateVector> {
    let mut psi = psi0.clone();
    for _ in 0..n {
        for layer in round.layers() {
            psi.apply_layer(layer)?;
        }
    }
    Ok(psi)
}

/// Eigenvalues of the reduced density matrix of sites `0..ell`, descending.
pub fn reduced_density_spectrum(psi: &StateVector, ell: usize) -> Result<Vec<f64>> {
    let l = psi.sites;
    if ell == 0 || ell >= l {
        return Err(Error::InvalidInput(format!("subsystem size {ell} outside 1..{l}")));
    }
    // rho and the reduced state of the complement share their nonzero spectrum
    let (keep_low, small) = if 2 * ell <= l { (true, ell) } else { (false, l - ell) };
    let dim = 1usize << small;
    let other = 1usize << (l - small);
    let index = |s: usize, e: usize| if keep_low { e << ell | s } else { s << ell | e };
    let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
    for r in 0..dim {
        for c in r..dim {
            let v: C64 = (0..other)
                .map(|e| psi.amps[index(r, e)] * psi.amps[index(c, e)].conj())
                .sum();
            rho[r * dim + c] = v;
            rho[c * dim + r] = v.conj();
        }
    }
    // real symmetric embedding [[Re, -Im], [Im, Re]] doubles every eigenvalue
    let big = SquareMatrix::from_fn(2 * dim, |i, j| {
        let v = rho[(i % dim) * dim + (j % dim)];
        match (i < dim, j < dim) {
            (true, true) | (false, false) => v.re,
            (true, false) => -v.im,
            (false, true) => v.im,
        }
    });
    let ev = symmetric_eigenvalues(big)?;
    let mut p: Vec<f64> = ev.iter().step_by(2).copied().collect();
    p.sort_by(|a, b| b.total_cmp(a));
    Ok(p)
}

/// `S_0 = log rank`, `S_1 = -sum p log p`, `S_m = log(sum p^m) / (1 - m)`.
pub fn reduced_entropies(psi: &StateVector, ell: usize, orders: &[u32]) -> Result<EntropyReport> {
    let p = reduced_density_spectrum(psi, ell)?;
    let values = orders
        .iter()
        .map(|&m| match m {
            0 => (p.iter().filter(|&&v| v > RANK_TOL).count() as f64).ln(),
            1 => -p.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>(),
            _ => {
                let mf = m as f64;
                p.iter().map(|v| v.max(0.0).powf(mf)).sum::<f64>().ln() / (1.0 - mf)
            }
        })
        .collect();
    Ok(EntropyReport {
        ell,
        orders: orders.to_vec(),
        values,
    })
}

/// Even chain length with antiperiodic momenta `K_L = {pi (2m + 1) / L}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteLatticeSpec {
    sites: usize,
}

impl FiniteLatticeSpec {
    pub fn new(sites: usize) -> Result<Self> {
        if sites < 2 || !sites.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "chain length {sites} must be even and >= 2"
            )));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// `K_L^+`, the `L/2` momenta in `(0, pi)`.
    pub fn positive_momenta(&self) -> Vec<f64> {
        let l = self.sites as f64;
        (0..self.sites / 2)
            .map(|m| std::f64::consts::PI * (2 * m + 1) as f64 / l)
            .collect()
    }

    /// `K_L` as a momentum grid.
    pub fn grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.sites).expect("even length")
    }
}

/// Entropies of the exact Gaussian state after `n` rounds from the all-`+x`
/// state (`f = 0`), with the correlation sums taken over `K_L`.
pub fn finite_lattice_entropies(
    spec: &FiniteLatticeSpec,
    round: &RoundSpec,
    n: u64,
    ell: usize,
    orders: &[u32],
) -> Result<EntropyReport> {
    if ell == 0 || ell > spec.sites {
        return Err(Error::InvalidInput(format!(
            "subsystem size {ell} outside 1..={}",
            spec.sites
        )));
    }
    let grid = spec.grid();
    let f = evolved_amplitudes(round, grid, n, &ProjectiveAmplitude::ZERO)?;
    let co = correlation_coefficients(grid, &f, ell - 1)?;
    block_entropies(&co, ell, orders)
}

/// `e^{lambda X}` on one site, renormalized.
pub fn apply_weak_measurement(psi: &StateVector, site: usize, lambda: f64) -> Result<StateVector> {
    let (c, s) = (C64::new(lambda.cosh(), 0.0), C64::new(lambda.sinh(), 0.0));
    let mut out = psi.clone();
    out.apply_site_gate(site, [[c, s], [s, c]]);
    out.renormalize()?;
    Ok(out)
}

/// Weak measurement of `X` at `site` through an ancilla: couple with
/// `exp(i (alpha + beta X_site) Y_a)`, `alpha = (theta + theta')/2`,
/// `beta = (theta - theta')/2`, then post-select the ancilla on `|0>`.
/// Equivalent to `e^{lambda X}` with `e^{2 lambda} = cos theta / cos theta'`.
pub fn ancilla_weak_measurement(psi: &StateVector, site: usize, theta: f64, theta_prime: f64) -> Result<StateVector> {
    let l = psi.sites;
    if site >= l {
        return Err(Error::InvalidInput(format!("site {site} outside 0..{l}")));
    }
    if l + 1 > MAX_SITES + 1 {
        return Err(Error::InvalidInput("no room for the ancilla".into()));
    }
    let alpha = 0.5 * (theta + theta_prime);
    let beta = 0.5 * (theta - theta_prime);
    let dim = psi.amps.len();
    let anc = dim; // ancilla is the top bit
    let mut ext = vec![C64::new(0.0, 0.0); 2 * dim];
    ext[..dim].copy_from_slice(&psi.amps);

    // Y|0> = i|1>, Y|1> = -i|0>
    let apply_y = |v: &[C64], i: usize| -> C64 {
        if i & anc == 0 {
            C64::new(0.0, -1.0) * v[i | anc]
        } else {
            C64::new(0.0, 1.0) * v[i & !anc]
        }
    };
    let mask = 1usize << site;
    // exp(i beta X_site Y_a) = cos beta + i sin beta X_site Y_a
    let xy: Vec<C64> = (0..2 * dim).map(|i| apply_y(&ext, i ^ mask)).collect();
    let (sb, cb) = beta.sin_cos();
    let stage: Vec<C64> = (0..2 * dim).map(|i| ext[i] * cb + C64::new(0.0, sb) * xy[i]).collect();
    let (sa, ca) = alpha.sin_cos();
    let y: Vec<C64> = (0..2 * dim).map(|i| apply_y(&stage, i)).collect();
    let out: Vec<C64> = (0..dim).map(|i| stage[i] * ca + C64::new(0.0, sa) * y[i]).collect();

    let prob = out.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if !(prob > POST_SELECTION_FLOOR) {
        return Err(Error::ZeroPostSelection);
    }
    Ok(StateVector {
        sites: l,
        amps: out.into_iter().map(|a| a / prob.sqrt()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, LN_2};

    #[test]
    fn measurement_leaves_all_plus_invariant() {
        let psi = StateVector::all_plus(6).unwrap();
        let out = apply_layer_dense(&psi, &LayerSpec::measurement(0.7)).unwrap();
        assert!((out.overlap(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zz_is_a_phase_on_basis_states() {
        let psi = StateVector::basis(6, 0b101101).unwrap();
        let mut out = psi.clone();
        let norm = out.apply_layer(&LayerSpec::zz(0.3)).unwrap();
        assert!((norm - 1.0).abs() < 1e-14);
        for (a, b) in psi.amplitudes().iter().zip(out.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        // bonds: 1-0 wall, 0-1, 1-1, 1-0, 0-1, wrap 1-1 -> four walls, sum = -2
        let want = C64::new(0.0, 0.6).exp();
        assert!((out.amplitudes()[0b101101] - want).norm() < 1e-14);
    }

    #[test]
    fn unitary_layers_preserve_norm() {
        let psi = run_circuit(
            &RoundSpec::new(vec![LayerSpec::x(0.4)]),
            1,
            &StateVector::basis(4, 3).unwrap(),
        )
        .unwrap();
        for layer in [LayerSpec::zz(0.3), LayerSpec::x(0.7), LayerSpec::yy(1.1)] {
            let mut s = psi.clone();
            assert!((s.apply_layer(&layer).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_rounds_return_initial_state() {
        let psi = StateVector::all_plus(4).unwrap();
        let r = RoundSpec::new(vec![LayerSpec::zz(0.3)]);
        assert_eq!(run_circuit(&r, 0, &psi).unwrap(), psi);
    }

    #[test]
    fn bell_pair_entropies() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![
            C64::new(s, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
        ];
        let psi = StateVector::from_amplitudes(2, amps).unwrap();
        let r = reduced_entropies(&psi, 1, &[0, 1, 2]).unwrap();
        for v in r.values {
            assert!((v - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_entropies() {
        let mut amps = vec![C64::new(0.0, 0.0); 64];
        amps[0] = C64::new(1.0, 0.0);
        amps[63] = C64::new(1.0, 0.0);
        let psi = StateVector::from_amplitudes(6, amps).unwrap();
        let r = reduced_entropies(&psi, 3, &[0, 1, 2, 3]).unwrap();
        for v in r.values {
            assert!((v - LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn product_state_has_no_entropy() {
        let psi = StateVector::all_plus(5).unwrap();
        for ell in 1..5 {
            let r = reduced_entropies(&psi, ell, &[0, 1, 2]).unwrap();
            assert!(r.values.iter().all(|v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn ancilla_with_equal_angles_is_trivial() {
        let psi = run_circuit(
            &RoundSpec::new(vec![LayerSpec::zz(0.3), LayerSpec::x(0.5)]),
            2,
            &StateVector::all_plus(4).unwrap(),
        )
        .unwrap();
        let out = ancilla_weak_measurement(&psi, 2, 0.4, 0.4).unwrap();
        assert!((out.overlap(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ancilla_reproduces_weak_measurement() {
        let psi = run_circuit(
            &RoundSpec::new(vec![LayerSpec::zz(0.3), LayerSpec::x(0.5), LayerSpec::yy(0.2)]),
            2,
            &StateVector::basis(4, 5).unwrap(),
        )
        .unwrap();
        let lambda = 0.5 * (0.5f64.cos() / 0.2f64.cos()).ln();
        let a = ancilla_weak_measurement(&psi, 1, 0.5, 0.2).unwrap();
        let b = apply_weak_measurement(&psi, 1, lambda).unwrap();
        assert!((a.overlap(&b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn yy_bond_order_is_irrelevant() {
        let t = C64::new(0.37, 0.21);
        let mut forward = StateVector::all_plus(6).unwrap();
        forward.apply_layer(&LayerSpec::zz(0.4)).unwrap();
        let mut reversed = forward.clone();
        forward.apply_layer(&LayerSpec::new(LayerKind::YY, t)).unwrap();
        let minus_i_sin = C64::new(0.0, -1.0) * t.sin();
        for j in (0..6).rev() {
            reversed.apply_yy_bond(j, t.cos(), minus_i_sin);
        }
        reversed.renormalize().unwrap();
        assert!((forward.overlap(&reversed) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn vanishing_post_selection() {
        // cos theta = cos theta' = 0 annihilates every state
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = StateVector::from_amplitudes(1, vec![C64::new(h, 0.0), C64::new(-h, 0.0)]).unwrap();
        assert_eq!(
            ancilla_weak_measurement(&psi, 0, 2.0 * FRAC_PI_4, 2.0 * FRAC_PI_4),
            Err(Error::ZeroPostSelection)
        );
    }

    #[test]
    fn lattice_momenta() {
        let s = FiniteLatticeSpec::new(8).unwrap();
        let k = s.positive_momenta();
        assert_eq!(k.len(), 4);
        assert!(k.iter().all(|&v| v > 0.0 && v < std::f64::consts::PI));
        assert!(FiniteLatticeSpec::new(7).is_err());
    }
}
