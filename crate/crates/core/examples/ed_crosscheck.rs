//! Dense statevector evolution of a short chain against the Gaussian
//! finite-lattice formulas.
//!
//! ```text
//! cargo run --release --example ed_crosscheck
//! ```

use mipt_core::ed::{finite_lattice_entropies, reduced_entropies, run_circuit, FiniteLatticeSpec, StateVector};
use mipt_core::models::VolumeParams;

fn main() -> mipt_core::Result<()> {
    let l = 8;
    let spec = FiniteLatticeSpec::new(l)?;
    let round = VolumeParams::new(std::f64::consts::PI / 6.0, 0.1).round();
    let mut psi = StateVector::all_plus(l)?;
    let mut done = 0;
    for n in [1u64, 5, 20, 50] {
        psi = run_circuit(&round, (n - done) as usize, &psi)?;
        done = n;
        let ed = reduced_entropies(&psi, l / 2, &[1, 2])?;
        let g = finite_lattice_entropies(&spec, &round, n, l / 2, &[1, 2])?;
        println!(
            "n = {n:>2}: S_1 ED {:.10} Gaussian {:.10}   S_2 ED {:.10} Gaussian {:.10}",
            ed.values[0], g.values[0], ed.values[1], g.values[1]
        );
    }
    Ok(())
}
