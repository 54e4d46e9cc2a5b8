//! Volume-law slope of `S_1(ell)`: a finite-`n` snapshot fitted on
//! `ell in [20, 100]` against the steady-state window integral.
//!
//! ```text
//! cargo run --release --example volume_slope [n]
//! ```

use std::f64::consts::PI;

use mipt_core::cli::{slope_rows, Command, RunConfig};
use mipt_core::models::lambda_c_volume;

fn main() -> mipt_core::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let mut cfg = RunConfig::defaults_for(Command::Slope);
    cfg.n = n;
    cfg.m = vec![1, 2];
    let x = PI / 8.0;
    let lc = lambda_c_volume(x)?;
    println!("x = pi/8, lambda_c = {lc:.6}, n = {n}");
    for frac in [0.2, 0.5, 0.8, 1.2] {
        for r in slope_rows(x, frac * lc, &cfg)? {
            println!(
                "lambda/lambda_c = {frac:.1}  m = {}  fit {:.5}  integral {:.5}  rel {:+.4}",
                r.m, r.slope_fit, r.slope_integral, r.rel_diff
            );
        }
    }
    Ok(())
}
