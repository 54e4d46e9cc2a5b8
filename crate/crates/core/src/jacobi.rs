//! Cyclic Jacobi eigenvalue iteration for dense real symmetric matrices.

use crate::error::{Error, Result};

/// Sweep budget before giving up.
pub const MAX_SWEEPS: usize = 100;

/// Convergence threshold on the off-diagonal Frobenius norm, relative to
/// `max(1, ||A||_F)`.
pub const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `max |A_ij - A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// `max |A_ij + A_ji|`.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..=i {
                worst = worst.max((self.get(i, j) + self.get(j, i)).abs());
            }
        }
        worst
    }

    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    s += self.get(i, j).powi(2);
                }
            }
        }
        s.sqrt()
    }
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
///
/// Only the lower triangle's symmetric partner is assumed equal; the input is
/// consumed and overwritten by the iteration.
pub fn symmetric_eigenvalues(mut a: SquareMatrix) -> Result<Vec<f64>> {
    let n = a.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let target = OFF_DIAGONAL_TOL * a.frobenius().max(1.0);
    let mut sweeps = 0;
    let mut off = a.off_diagonal_norm();
    while off > target {
        if sweeps == MAX_SWEEPS {
            return Err(Error::SpectralFailure { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
        off = a.off_diagonal_norm();
    }
    let mut values: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn rotate(a: &mut SquareMatrix, p: usize, q: usize) {
    let n = a.n;
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let app = a.get(p, p);
    let aqq = a.get(q, q);
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    // theta may overflow to infinity for a negligible apq; t is then 0
    let t = if t.is_finite() { t } else { 0.0 };
    if t == 0.0 {
        a.set(p, q, 0.0);
        a.set(q, p, 0.0);
        return;
    }
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);
    a.set(p, p, app - t * apq);
    a.set(q, q, aqq + t * apq);
    a.set(p, q, 0.0);
    a.set(q, p, 0.0);
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let g = a.data[k * n + p];
        let h = a.data[k * n + q];
        let new_p = g - s * (h + g * tau);
        let new_q = h + s * (g - h * tau);
        a.data[k * n + p] = new_p;
        a.data[k * n + q] = new_q;
        a.data[p * n + k] = new_p;
        a.data[q * n + k] = new_q;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, d) = (1.3, -0.7, 0.2);
        let m = SquareMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => a,
            (1, 1) => d,
            _ => b,
        });
        let ev = symmetric_eigenvalues(m).unwrap();
        let mean = 0.5 * (a + d);
        let r = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        assert!((ev[0] - (mean - r)).abs() < 1e-14);
        assert!((ev[1] - (mean + r)).abs() < 1e-14);
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let m = SquareMatrix::from_fn(4, |i, j| if i == j { [3.0, -1.0, 2.0, 0.5][i] } else { 0.0 });
        assert_eq!(symmetric_eigenvalues(m).unwrap(), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let n = 30;
        let m = SquareMatrix::from_fn(n, |i, j| {
            let (i, j) = (i.min(j) as f64, i.max(j) as f64);
            ((1.0 + i) * 0.37 + j * 1.13).sin()
        });
        let tr: f64 = (0..n).map(|i| m.get(i, i)).sum();
        let fro2 = m.frobenius().powi(2);
        let ev = symmetric_eigenvalues(m).unwrap();
        assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10);
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - fro2).abs() < 1e-9);
    }

    #[test]
    fn repeated_eigenvalues_converge() {
        // block diagonal with identical 2x2 blocks
        let m = SquareMatrix::from_fn(6, |i, j| {
            if i / 2 != j / 2 {
                0.0
            } else if i == j {
                0.5
            } else {
                0.25
            }
        });
        let ev = symmetric_eigenvalues(m).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let want = if k < 3 { 0.25 } else { 0.75 };
            assert!((v - want).abs() < 1e-14);
        }
    }
}
