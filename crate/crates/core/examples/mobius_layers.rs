//! Layer matrices, round composition and the fixed-point classification of a
//! single momentum mode.
//!
//! ```text
//! cargo run --example mobius_layers
//! ```

use mipt_core::mobius::{compose_round, Criticality, LayerSpec, ProjectiveAmplitude, RoundSpec};
use mipt_core::steady::evolve_amplitude;

fn main() -> mipt_core::Result<()> {
    let round = RoundSpec::new(vec![
        LayerSpec::zz(0.4),
        LayerSpec::x(0.3),
        LayerSpec::measurement(0.25),
    ]);
    println!("round with {} layers, unitary: {}", round.len(), round.is_unitary());

    for k in [0.3, 1.2, std::f64::consts::FRAC_PI_2, 2.6] {
        let m = compose_round(&round, k)?;
        let tr = m.trace();
        print!("k = {k:.4}  Tr = {:.6}{:+.6}i  ", tr.re, tr.im);
        match m.classify(1e-9) {
            Criticality::Critical { theta } => println!("critical, theta = {theta:.6}"),
            Criticality::NonCritical {
                f_stable, contraction, ..
            } => {
                let f = evolve_amplitude(&m, 200, &ProjectiveAmplitude::ZERO);
                println!(
                    "attracted to f* = {f_stable} at rate {contraction:.4}; f_200 is {:.2e} away",
                    f.distance(&f_stable)
                );
            }
        }
    }
    Ok(())
}
