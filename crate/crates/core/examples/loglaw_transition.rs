//! The two-layer log-law circuit: isolated critical momenta below `lambda_c`,
//! none above.
//!
//! ```text
//! cargo run --release --example loglaw_transition
//! ```

use mipt_core::entanglement::{block_entropies, fit_log_coefficient};
use mipt_core::mobius::ProjectiveAmplitude;
use mipt_core::models::{lambda_c_loglaw, loglaw_critical_momentum, LogLawParams};
use mipt_core::steady::{averaged_symbols, classify_phase, MomentumGrid, UAverage};

fn main() -> mipt_core::Result<()> {
    let (t, h) = (0.6, 0.4);
    let lc = lambda_c_loglaw(t, h).expect("tan 2h < tan 2t");
    let k_star = loglaw_critical_momentum(t, h).expect("critical momentum exists");
    println!("t = {t}, h = {h}: lambda_c = {lc:.6}, critical momenta +-{k_star:.6}");

    let grid = MomentumGrid::new(4096)?;
    for frac in [0.25, 0.5, 0.9, 1.2] {
        let p = LogLawParams::new(t, h, frac * lc);
        let phase = classify_phase(&p, grid)?;
        let co = averaged_symbols(&p, grid, &ProjectiveAmplitude::ZERO, UAverage::Exact)?.coefficients(200)?;
        let pts: Vec<(f64, f64)> = [10, 20, 40, 80, 160]
            .iter()
            .map(|&ell| Ok((ell as f64, block_entropies(&co, ell, &[1])?.values[0])))
            .collect::<mipt_core::Result<_>>()?;
        let (a, b, _) = fit_log_coefficient(&pts)?;
        println!(
            "lambda = {:.4}  {:<9}  S_1 ~ {a:.4} log ell + {b:.4}",
            frac * lc,
            phase.name()
        );
    }
    Ok(())
}
