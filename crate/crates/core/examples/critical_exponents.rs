//! Exponents and amplitudes of the entropy densities as the volume-law window
//! closes.
//!
//! ```text
//! cargo run --release --example critical_exponents
//! ```

use std::f64::consts::PI;

use mipt_core::entanglement::{
    asymptotic_slope, fit_exponent, gamma_coefficient, von_neumann_log_coefficient, window_entropy_density,
};
use mipt_core::models::{lambda_c_volume, VolumeParams};

fn main() -> mipt_core::Result<()> {
    let x = PI / 8.0;
    let lc = lambda_c_volume(x)?;
    println!("x = pi/8: lambda_c = {lc:.6}, gamma = {:.8}", gamma_coefficient(x)?);

    let deltas: Vec<f64> = (0..=8).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect();
    for m in [0u32, 1, 2, 3] {
        let samples: Vec<(f64, f64)> = deltas
            .iter()
            .map(|&d| Ok((lc - d, window_entropy_density(&VolumeParams::new(x, lc - d), m, 400)?)))
            .collect::<mipt_core::Result<_>>()?;
        let fit = fit_exponent(&samples, lc)?;
        let (l0, s0) = samples[0];
        println!(
            "m = {m}: nu = {:.4}, s_m / leading term at delta = 1e-4: {:.4}",
            fit.nu,
            s0 / asymptotic_slope(m, x, l0)?
        );
    }
    println!(
        "m = 1 leading coefficient of delta log delta: {:.6}",
        von_neumann_log_coefficient(x)?
    );
    Ok(())
}
