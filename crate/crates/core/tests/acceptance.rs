//! Acceptance suite. Runs every criterion at its stated tolerance, prints one
//! PASS/FAIL line per criterion and exits non-zero if any criterion fails.
//!
//! Extra `info` lines are diagnostics only and never gate.

use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, LN_2, PI};
use std::time::{Duration, Instant};

use mipt_core::cli::{slope_rows, Command, RunConfig};
use mipt_core::ed::{finite_lattice_entropies, reduced_entropies, run_circuit, FiniteLatticeSpec, StateVector};
use mipt_core::entanglement::{
    asymptotic_slope, block_entropies, fit_exponent, fit_log_coefficient, gamma_coefficient,
    von_neumann_log_coefficient, window_entropy_density,
};
use mipt_core::mobius::{Criticality, MobiusMatrix, ProjectiveAmplitude, TransferMatrix, DEFAULT_CRITICALITY_TOL};
use mipt_core::models::{lambda_c_volume, VolumeParams};
use mipt_core::steady::{
    averaged_bloch, averaged_symbols, classify_phase, correlation_coefficients, evolved_amplitudes, MomentumGrid,
    Phase, UAverage,
};
use num_complex::Complex64 as C64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn run(id: &str, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_budget = budget.is_none_or(|b| elapsed <= b);
    let pass = out.pass && in_budget;
    let budget_note = match budget {
        Some(b) if !in_budget => format!(" [over budget {:.0}s]", b.as_secs_f64()),
        _ => String::new(),
    };
    println!(
        "criterion {id} ({title}): {} {}; {:.1}s{budget_note}",
        if pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    pass
}

fn info(line: String) {
    println!("    info: {line}");
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for l in [4usize, 6, 8] {
        let spec = FiniteLatticeSpec::new(l).unwrap();
        for x in [FRAC_PI_8, PI / 6.0] {
            for lambda in [0.0, 0.1, 0.5] {
                let round = VolumeParams::new(x, lambda).round();
                let mut psi = StateVector::all_plus(l).unwrap();
                let mut done = 0;
                for n in [1u64, 5, 20, 50] {
                    psi = run_circuit(&round, (n - done) as usize, &psi).unwrap();
                    done = n;
                    let ed = reduced_entropies(&psi, l / 2, &[1, 2, 3]).unwrap();
                    let g = finite_lattice_entropies(&spec, &round, n, l / 2, &[1, 2, 3]).unwrap();
                    for (a, b) in ed.values.iter().zip(&g.values) {
                        worst = worst.max((a - b).abs());
                        cases += 1;
                    }
                }
            }
        }
    }
    Outcome {
        pass: worst < 1e-6,
        detail: format!("{cases} comparisons, max |S_ed - S_gauss| = {worst:.2e} (< 1e-6)"),
    }
}

fn criterion_2() -> Outcome {
    let grid = MomentumGrid::new(4096).unwrap();
    let step = 1e-3;
    let mut pass = true;
    let mut parts = Vec::new();
    for x in [PI / 16.0, PI / 12.0, FRAC_PI_8, 3.0 * PI / 16.0, FRAC_PI_4] {
        let lc = lambda_c_volume(x).unwrap();
        let mut i = 0;
        let (flip, phase) = loop {
            let lambda = i as f64 * step;
            let phase = classify_phase(&VolumeParams::new(x, lambda), grid).unwrap();
            if !matches!(phase, Phase::VolumeLaw { .. }) {
                break (lambda, phase);
            }
            i += 1;
        };
        let ok = (flip - lc).abs() <= step + 1e-12 && phase == Phase::AreaLaw;
        pass &= ok;
        parts.push(format!("x={x:.4}: flip {flip:.3} vs {lc:.6}"));
    }
    let spot = lambda_c_volume(FRAC_PI_8).unwrap();
    pass &= (spot - 0.329239).abs() < 5e-7;
    Outcome {
        pass,
        detail: format!("{}; lambda_c(pi/8) = {spot:.6}", parts.join(", ")),
    }
}

fn slope_config(n: u64) -> RunConfig {
    let mut cfg = RunConfig::defaults_for(Command::Slope);
    cfg.n = n;
    cfg.m = vec![1];
    cfg
}

fn criterion_3() -> Outcome {
    let cfg = slope_config(500);
    let mut worst_rel: f64 = 0.0;
    let mut worst_area: f64 = 0.0;
    let mut lines = Vec::new();
    for x in [FRAC_PI_8, PI / 6.0] {
        let lc = lambda_c_volume(x).unwrap();
        for i in 1..=8 {
            let r = slope_rows(x, 0.1 * i as f64 * lc, &cfg).unwrap()[0];
            worst_rel = worst_rel.max(r.rel_diff.abs());
            lines.push(format!(
                "x={x:.4} lambda/lambda_c={:.1}: fit {:.5} integral {:.5} rel {:+.4}",
                0.1 * i as f64,
                r.slope_fit,
                r.slope_integral,
                r.rel_diff
            ));
        }
        for fr in [1.1, 1.5] {
            let r = slope_rows(x, fr * lc, &cfg).unwrap()[0];
            worst_area = worst_area.max(r.slope_fit.abs());
        }
    }
    lines.iter().for_each(|l| info(l.clone()));
    // the same comparison at a later snapshot shows the deficit shrinking with n
    let late = slope_config(4000);
    for x in [FRAC_PI_8, PI / 6.0] {
        let lc = lambda_c_volume(x).unwrap();
        let r = slope_rows(x, 0.5 * lc, &late).unwrap()[0];
        info(format!(
            "x={x:.4} lambda/lambda_c=0.5 at n=4000: rel {:+.4}",
            r.rel_diff
        ));
    }
    Outcome {
        pass: worst_rel < 0.02 && worst_area < 1e-3,
        detail: format!(
            "n=500: max |rel diff| = {worst_rel:.4} (< 0.02), max area-law slope = {worst_area:.2e} (< 1e-3)"
        ),
    }
}

fn deltas() -> Vec<f64> {
    (0..=8).map(|i| 10f64.powf(-4.0 + 0.25 * i as f64)).collect()
}

fn density_samples(m: u32) -> Vec<(f64, f64)> {
    let lc = lambda_c_volume(FRAC_PI_8).unwrap();
    deltas()
        .into_iter()
        .map(|d| {
            (
                lc - d,
                window_entropy_density(&VolumeParams::new(FRAC_PI_8, lc - d), m, 400).unwrap(),
            )
        })
        .collect()
}

fn criterion_4a() -> Outcome {
    let lc = lambda_c_volume(FRAC_PI_8).unwrap();
    let fit = fit_exponent(&density_samples(0), lc).unwrap();
    Outcome {
        pass: (fit.nu - 0.5).abs() <= 0.05,
        detail: format!("m=0: nu = {:.4} (0.50 +- 0.05)", fit.nu),
    }
}

fn criterion_4b() -> Outcome {
    let lc = lambda_c_volume(FRAC_PI_8).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2, 3] {
        let fit = fit_exponent(&density_samples(m), lc).unwrap();
        pass &= (fit.nu - 1.0).abs() <= 0.1;
        parts.push(format!("m={m}: nu = {:.4}", fit.nu));
    }
    Outcome {
        pass,
        detail: format!("{} (1.00 +- 0.10)", parts.join(", ")),
    }
}

fn criterion_4c() -> Outcome {
    let x = FRAC_PI_8;
    let lc = lambda_c_volume(x).unwrap();
    let gamma = gamma_coefficient(x).unwrap();
    let prefactor = gamma * (2.0 * x).sin().powi(2) * (2.0 * lc).cosh();
    let stated = prefactor * (1.0 - 2.0 * LN_2) / 2.0;
    let samples = density_samples(1);
    let (lambda, s1) = samples[0];
    let d = lc - lambda;
    let ratio = s1 / (d * d.ln());
    // two-term fit s_1 = C d log d + D d over the whole window
    let (mut a11, mut a12, mut a22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(l, s) in &samples {
        let d = lc - l;
        let (u, v) = (d * d.ln(), d);
        a11 += u * u;
        a12 += u * v;
        a22 += v * v;
        b1 += u * s;
        b2 += v * s;
    }
    let c_fit = (b1 * a22 - b2 * a12) / (a11 * a22 - a12 * a12);
    let leading = von_neumann_log_coefficient(x).unwrap();
    info(format!(
        "s_1/(d log d) at d=1e-4: {ratio:.5}; two-term fit C = {c_fit:.5}; -gamma sin^2 2x cosh 2lambda_c = {leading:.5}"
    ));
    Outcome {
        pass: ((ratio - stated) / stated).abs() <= 0.05,
        detail: format!(
            "m=1: s_1/(d log d) = {ratio:.5} vs gamma sin^2 2x cosh 2lambda_c (1-2log2)/2 = {stated:.5} (5%)"
        ),
    }
}

fn criterion_5() -> Outcome {
    let x = FRAC_PI_8;
    let lc = lambda_c_volume(x).unwrap();
    let d = 1e-4;
    let mut pass = true;
    let mut parts = Vec::new();
    for m in [2u32, 3, 5] {
        let s = window_entropy_density(&VolumeParams::new(x, lc - d), m, 400).unwrap();
        let want = asymptotic_slope(m, x, lc - d).unwrap();
        let rel = (s - want) / want;
        pass &= rel.abs() <= 0.03;
        parts.push(format!("m={m}: {rel:+.4}"));
    }
    info(format!("gamma(pi/8) = {:.10}", gamma_coefficient(x).unwrap()));
    Outcome {
        pass,
        detail: format!(
            "relative deviation from 2 gamma sin^2 2x cosh 2lambda_c m/(m-1): {} (3%)",
            parts.join(", ")
        ),
    }
}

fn random_c64(rng: &mut StdRng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn criterion_6() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut mismatches = 0;
    let total = 10_000;
    for i in 0..total {
        // well-conditioned change of basis P
        let (p, q, r, s) = loop {
            let (p, q, r, s) = (
                random_c64(&mut rng),
                random_c64(&mut rng),
                random_c64(&mut rng),
                random_c64(&mut rng),
            );
            let det = p * s - q * r;
            let scale = [p, q, r, s].iter().map(|z| z.norm_sqr()).sum::<f64>();
            if det.norm() > 0.3 * scale {
                break (p, q, r, s);
            }
        };
        let det = p * s - q * r;
        let phase = rng.random_range(0.0..2.0 * PI);
        let critical = i % 2 == 0;
        let modulus = if critical {
            1.0
        } else {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            (sign * rng.random_range(1e-3f64.ln()..2f64.ln()).exp()).exp()
        };
        let mu = C64::from_polar(modulus, phase);
        let nu = mu.inv();
        // P diag(mu, 1/mu) P^{-1}
        let a = (p * mu * s - q * nu * r) / det;
        let b = (-p * mu * q + q * nu * p) / det;
        let c = (r * mu * s - s * nu * r) / det;
        let d = (-r * mu * q + s * nu * p) / det;
        let m = MobiusMatrix::from_entries(a, b, c, d).unwrap();
        if m.classify(DEFAULT_CRITICALITY_TOL).is_critical() != critical {
            mismatches += 1;
        }
    }
    Outcome {
        pass: mismatches == 0,
        detail: format!("{mismatches} mismatches in {total} matrices"),
    }
}

fn criterion_7() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut crit, mut noncrit) = (0, 0);
    let (mut worst_crit, mut worst_non): (f64, f64) = (0.0, 0.0);
    while crit < 200 || noncrit < 200 {
        let x = rng.random_range(0.05..0.75);
        let lc = lambda_c_volume(x).unwrap();
        let lambda = rng.random_range(0.05..1.5) * lc;
        let p = VolumeParams::new(x, lambda);
        let k = rng.random_range(0.01..PI - 0.01);
        let m = p.at(k).unwrap();
        let b = averaged_bloch(&m, &ProjectiveAmplitude::ZERO, UAverage::Exact);
        let r2 = b.iter().map(|v| v * v).sum::<f64>();
        match m.classify(DEFAULT_CRITICALITY_TOL) {
            Criticality::Critical { .. } if crit < 200 => {
                crit += 1;
                worst_crit = worst_crit.max(r2);
            }
            Criticality::NonCritical { .. } if noncrit < 200 => {
                noncrit += 1;
                worst_non = worst_non.max((r2 - 1.0).abs());
            }
            _ => {}
        }
    }
    Outcome {
        pass: worst_crit < 1.0 - 1e-6 && worst_non <= 1e-9,
        detail: format!(
            "max |phi|^2+|psi|^2 over critical = {worst_crit:.8} (< 1 - 1e-6), max deviation over non-critical = {worst_non:.1e} (<= 1e-9)"
        ),
    }
}

fn criterion_8() -> Outcome {
    let p = VolumeParams::new(FRAC_PI_8, 0.1);
    let grid = MomentumGrid::new(1 << 17).unwrap();
    let jmax = 20;
    let bar = averaged_symbols(&p, grid, &ProjectiveAmplitude::ZERO, UAverage::Exact)
        .unwrap()
        .coefficients(jmax)
        .unwrap();
    let at = |n: u64| {
        let f = evolved_amplitudes(&p, grid, n, &ProjectiveAmplitude::ZERO).unwrap();
        correlation_coefficients(grid, &f, jmax).unwrap()
    };
    let (c2, c4) = (at(2000), at(4000));
    let mut violations = 0;
    let (mut e2max, mut e4max): (f64, f64) = (0.0, 0.0);
    for j in -(jmax as isize)..=jmax as isize {
        let e2 = (c2.phi(j) - bar.phi(j)).abs();
        let e4 = (c4.phi(j) - bar.phi(j)).abs();
        e2max = e2max.max(e2);
        e4max = e4max.max(e4);
        if e4 > (0.5 * e2).max(1e-4) {
            violations += 1;
        }
    }
    // a longer ladder exposes the actual rate
    let mut ladder = Vec::new();
    for n in [1000u64, 4000, 16000] {
        let c = at(n);
        let e = (-(jmax as isize)..=jmax as isize)
            .map(|j| (c.phi(j) - bar.phi(j)).abs())
            .fold(0.0, f64::max);
        ladder.push(format!("n={n}: {e:.2e}"));
    }
    info(format!("max_j |phi_j(n) - phi_bar_j|: {}", ladder.join(", ")));
    Outcome {
        pass: violations == 0,
        detail: format!(
            "{violations}/{} coefficients violate e(4000) <= max(e(2000)/2, 1e-4); max e(2000) = {e2max:.2e}, max e(4000) = {e4max:.2e}",
            2 * jmax + 1
        ),
    }
}

fn criterion_9() -> Outcome {
    let x = FRAC_PI_8;
    let lc = lambda_c_volume(x).unwrap();
    let p = VolumeParams::new(x, lc);
    let grid = MomentumGrid::new(1 << 14).unwrap();
    let co = averaged_symbols(&p, grid, &ProjectiveAmplitude::ZERO, UAverage::Exact)
        .unwrap()
        .coefficients(100)
        .unwrap();
    let pts: Vec<(f64, f64)> = (20..=100)
        .step_by(5)
        .map(|ell| (ell as f64, block_entropies(&co, ell, &[1]).unwrap().values[0]))
        .collect();
    let (a, b, _) = fit_log_coefficient(&pts).unwrap();
    Outcome {
        pass: a.abs() < 0.05,
        detail: format!("S_1 = a log ell + b at lambda_c: a = {a:.2e}, b = {b:.4} (|a| < 0.05)"),
    }
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; none apply here
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |id: &str| filter.is_empty() || filter.iter().any(|f| id.starts_with(f.as_str()));
    let mins = |m: u64| Some(Duration::from_secs(60 * m));

    let mut results = Vec::new();
    let mut check = |id: &str, title: &str, budget: Option<Duration>, f: fn() -> Outcome| {
        if wanted(id) {
            results.push(run(id, title, budget, f));
        }
    };
    check("1", "ED equals finite-lattice Gaussian", mins(2), criterion_1);
    check("2", "phase boundary", mins(1), criterion_2);
    check("3", "fitted slopes versus integral", mins(5), criterion_3);
    check("4a", "Hartley exponent", mins(2), criterion_4a);
    check("4b", "Renyi exponents", mins(2), criterion_4b);
    check("4c", "von Neumann log coefficient", mins(2), criterion_4c);
    check("5", "Renyi amplitudes", None, criterion_5);
    check("6", "criticality condition", None, criterion_6);
    check("7", "convexity strictness", None, criterion_7);
    check("8", "time-average convergence rate", None, criterion_8);
    check("9", "vanishing log term at lambda_c", None, criterion_9);

    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
