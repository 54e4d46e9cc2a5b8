//! Volume-law/area-law boundary of the brickwork circuit compared with the
//! closed-form `lambda_c(x)`.
//!
//! ```text
//! cargo run --release --example phase_diagram
//! ```

use std::f64::consts::PI;

use mipt_core::models::{critical_window, lambda_c_volume, VolumeParams};
use mipt_core::steady::{classify_phase, MomentumGrid, Phase};

fn main() -> mipt_core::Result<()> {
    let grid = MomentumGrid::new(1024)?;
    println!("{:>8} {:>10} {:>10}  window at lambda_c/2", "x", "lambda_c", "scan");
    for i in 1..=8 {
        let x = i as f64 * PI / 32.0;
        let lc = lambda_c_volume(x)?;
        // first lambda on a 1e-3 grid that is no longer volume law
        let scan = (0..)
            .map(|j| j as f64 * 1e-3)
            .find(|&l| {
                !matches!(
                    classify_phase(&VolumeParams::new(x, l), grid),
                    Ok(Phase::VolumeLaw { .. })
                )
            })
            .unwrap_or(f64::NAN);
        let w = critical_window(&VolumeParams::new(x, lc / 2.0));
        println!("{x:>8.4} {lc:>10.6} {scan:>10.3}  {w:?}");
    }
    Ok(())
}
