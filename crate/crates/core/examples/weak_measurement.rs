//! A weak measurement `e^{lambda X}` realised by coupling to an ancilla and
//! post-selecting it.
//!
//! ```text
//! cargo run --example weak_measurement
//! ```

use mipt_core::ed::{ancilla_weak_measurement, apply_weak_measurement, StateVector};
use num_complex::Complex64 as C64;

fn main() -> mipt_core::Result<()> {
    let amps: Vec<C64> = (0..8)
        .map(|i| C64::new((i as f64).cos(), (0.7 * i as f64).sin()))
        .collect();
    let psi = StateVector::from_amplitudes(3, amps)?;
    for (theta, theta_p) in [(0.2, 0.9), (0.6, 0.6), (1.2, 0.1)] {
        let lambda = 0.5 * (f64::cos(theta) / f64::cos(theta_p)).ln();
        let a = ancilla_weak_measurement(&psi, 0, theta, theta_p)?;
        let b = apply_weak_measurement(&psi, 0, lambda)?;
        println!(
            "theta = {theta}, theta' = {theta_p}: lambda = {lambda:+.5}, overlap = {:.12}",
            a.overlap(&b)
        );
    }
    Ok(())
}
