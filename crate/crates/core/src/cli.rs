//! Batch front-end: parameter sweeps written as CSV or JSON.
//!
//! Every command reads an optional JSON config, applies flag overrides and
//! renders its whole output in memory before writing, so a failed run never
//! leaves a partial file behind.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ed::{finite_lattice_entropies, reduced_entropies, run_circuit, FiniteLatticeSpec, StateVector};
use crate::entanglement::{
    asymptotic_slope, block_entropies, entropy_density_integral, fit_exponent, fit_slope, gamma_coefficient,
    von_neumann_log_coefficient, window_entropy_density,
};
use crate::error::{Error, Result};
use crate::mobius::{Criticality, ProjectiveAmplitude, RoundSpec, TransferMatrix, DEFAULT_CRITICALITY_TOL};
use crate::models::{critical_window, lambda_c_loglaw, lambda_c_volume, LogLawParams, VolumeParams};
use crate::steady::{
    averaged_symbols, classify_phase, correlation_coefficients, evolved_amplitudes, MomentumGrid, Phase, UAverage,
};

/// Tolerance of the ED versus Gaussian comparison.
pub const CROSSCHECK_TOL: f64 = 1e-6;
/// Version written in the `# schema=` line of every CSV.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: u8 = 0;
pub const EXIT_THRESHOLD: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Volume,
    Loglaw,
}

/// `steps + 1` evenly spaced values from `min` to `max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Sweep {
    pub fn linear(&self) -> Vec<f64> {
        (0..=self.steps)
            .map(|i| self.min + (self.max - self.min) * i as f64 / self.steps as f64)
            .collect()
    }

    pub fn logarithmic(&self) -> Vec<f64> {
        let (a, b) = (self.min.ln(), self.max.ln());
        (0..=self.steps)
            .map(|i| (a + (b - a) * i as f64 / self.steps as f64).exp())
            .collect()
    }
}

/// A list of values or an evenly spaced sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Sweep(Sweep),
}

impl Values {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Values::List(v) => v.clone(),
            Values::Sweep(s) => s.linear(),
        }
    }
}

/// All run parameters. Unset fields take per-command defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Model,
    /// Volume-law `x` values.
    pub x: Vec<f64>,
    /// Log-law couplings.
    pub t: f64,
    pub h: f64,
    /// Measurement strengths.
    pub lambda: Values,
    /// When set, `slope` uses `lambda = fraction * lambda_c(x)` instead of `lambda`.
    pub lambda_fraction: Option<Vec<f64>>,
    pub k_grid: usize,
    /// Nodes of the uniform u-average; `0` selects the closed-form average.
    pub u_grid: usize,
    /// Gauss–Legendre nodes for window integrals.
    pub window_nodes: usize,
    pub ell_min: usize,
    pub ell_max: usize,
    pub ell_step: usize,
    /// Rounds for finite-n snapshots.
    pub n: u64,
    pub m: Vec<u32>,
    /// Chain lengths and round counts of `crosscheck`.
    pub sizes: Vec<usize>,
    pub rounds: Vec<u64>,
    /// `lambda_c - lambda` sweep of `exponents`, log-spaced.
    pub delta: Sweep,
    /// Largest accepted `|S_ed - S_gaussian|` in `crosscheck`.
    pub tolerance: f64,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
}

/// The five batch commands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Phase of the steady state on an (x, lambda) grid.
    PhaseDiagram,
    /// Fitted and integrated volume-law slopes.
    Slope,
    /// Critical exponents of s_m near lambda_c (JSON).
    Exponents,
    /// Exact diagonalization against the Gaussian formulas.
    Crosscheck,
    /// Per-momentum transfer matrices of one parameter point (JSON).
    Mobius,
}

impl RunConfig {
    pub fn defaults_for(cmd: Command) -> Self {
        use std::f64::consts::PI;
        let base = Self {
            model: Model::Volume,
            x: vec![PI / 8.0],
            t: 0.3,
            h: 0.2,
            lambda: Values::List(vec![0.1]),
            lambda_fraction: None,
            k_grid: 4096,
            u_grid: 0,
            window_nodes: 400,
            ell_min: 20,
            ell_max: 100,
            ell_step: 5,
            n: 500,
            m: vec![1],
            sizes: vec![4, 6, 8],
            rounds: vec![0, 1, 5, 20, 50],
            delta: Sweep {
                min: 1e-4,
                max: 1e-2,
                steps: 8,
            },
            tolerance: CROSSCHECK_TOL,
            threads: None,
            out: None,
        };
        match cmd {
            Command::PhaseDiagram => Self {
                x: vec![PI / 16.0, PI / 8.0, 3.0 * PI / 16.0, PI / 4.0],
                lambda: Values::Sweep(Sweep {
                    min: 0.0,
                    max: 1.0,
                    steps: 100,
                }),
                k_grid: 1024,
                ..base
            },
            Command::Slope => Self {
                x: vec![PI / 8.0, PI / 6.0],
                lambda_fraction: Some(vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.1, 1.5]),
                k_grid: 8192,
                ..base
            },
            Command::Exponents => Self {
                m: vec![0, 1, 2, 3],
                ..base
            },
            Command::Crosscheck => Self {
                x: vec![PI / 8.0, PI / 6.0],
                lambda: Values::List(vec![0.0, 0.1, 0.5]),
                m: vec![1, 2, 3],
                ..base
            },
            Command::Mobius => Self { k_grid: 64, ..base },
        }
    }

    /// Defaults for `cmd`, overlaid with the fields present in `json`.
    pub fn from_json(cmd: Command, json: &str) -> Result<Self> {
        let overlay: Value =
            serde_json::from_str(json).map_err(|e| Error::InvalidInput(format!("config is not valid JSON: {e}")))?;
        let Value::Object(fields) = overlay else {
            return Err(Error::InvalidInput("config must be a JSON object".into()));
        };
        let mut merged = serde_json::to_value(Self::defaults_for(cmd)).expect("config serializes");
        let target = merged.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            target.insert(k, v);
        }
        serde_json::from_value(merged).map_err(|e| Error::InvalidInput(format!("bad config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        if self.x.is_empty() || self.m.is_empty() {
            return bad("x and m must be non-empty".into());
        }
        if let Values::Sweep(s) = &self.lambda {
            if s.steps == 0 {
                return bad("lambda sweep needs steps >= 1".into());
            }
        }
        if self.lambda.values().is_empty() {
            return bad("lambda must be non-empty".into());
        }
        if self.lambda.values().iter().chain(&self.x).any(|v| !v.is_finite()) {
            return bad("parameters must be finite".into());
        }
        MomentumGrid::new(self.k_grid)?;
        if self.ell_min == 0 || self.ell_max < self.ell_min || self.ell_step == 0 || self.ell_max > 200 {
            return bad(format!(
                "need 1 <= ell_min <= ell_max <= 200 and ell_step >= 1, got {}..{} step {}",
                self.ell_min, self.ell_max, self.ell_step
            ));
        }
        if self.delta.steps == 0 || !(self.delta.min > 0.0 && self.delta.max > self.delta.min) {
            return bad("delta sweep needs 0 < min < max and steps >= 1".into());
        }
        if self.window_nodes == 0 {
            return bad("window_nodes must be positive".into());
        }
        if self
            .sizes
            .iter()
            .any(|&l| l < 2 || l % 2 != 0 || l > crate::ed::MAX_SITES)
        {
            return bad("sizes must be even and between 2 and 14".into());
        }
        if !(self.tolerance >= 0.0) {
            return bad("tolerance must be non-negative".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be positive".into());
        }
        Ok(())
    }

    fn u_average(&self) -> UAverage {
        if self.u_grid == 0 {
            UAverage::Exact
        } else {
            UAverage::Uniform { nodes: self.u_grid }
        }
    }

    fn ells(&self) -> Vec<usize> {
        (self.ell_min..=self.ell_max).step_by(self.ell_step).collect()
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_header(columns: &[&str]) -> String {
    format!("# schema={SCHEMA_VERSION}\n{}\n", columns.join(","))
}

/// Rows `x, lambda, phase, k_c, lambda_c_closed_form, s_1_integral`
/// (`t, h` instead of `x` for the log-law circuit).
pub fn cmd_phase_diagram(cfg: &RunConfig) -> Result<String> {
    let grid = MomentumGrid::new(cfg.k_grid)?;
    let lambdas = cfg.lambda.values();
    match cfg.model {
        Model::Volume => {
            let points: Vec<(f64, f64)> = cfg
                .x
                .iter()
                .flat_map(|&x| lambdas.iter().map(move |&l| (x, l)))
                .collect();
            let rows: Vec<String> = points
                .par_iter()
                .map(|&(x, lambda)| {
                    let p = VolumeParams::new(x, lambda);
                    let phase = classify_phase(&p, grid)?;
                    let s1 = window_entropy_density(&p, 1, cfg.window_nodes)?;
                    Ok(format!(
                        "{x},{lambda},{},{},{},{s1}",
                        phase.name(),
                        fmt_opt(phase_edge(&phase)),
                        lambda_c_volume(x)?
                    ))
                })
                .collect::<Result<_>>()?;
            let mut out = csv_header(&["x", "lambda", "phase", "k_c", "lambda_c_closed_form", "s_1_integral"]);
            rows.iter().for_each(|r| out.push_str(&format!("{r}\n")));
            Ok(out)
        }
        Model::Loglaw => {
            let rows: Vec<String> = lambdas
                .par_iter()
                .map(|&lambda| {
                    let p = LogLawParams::new(cfg.t, cfg.h, lambda);
                    let phase = classify_phase(&p, grid)?;
                    let sym = averaged_symbols(&p, grid, &ProjectiveAmplitude::ZERO, cfg.u_average())?;
                    Ok(format!(
                        "{},{},{lambda},{},{},{},{}",
                        cfg.t,
                        cfg.h,
                        phase.name(),
                        fmt_opt(phase_edge(&phase)),
                        fmt_opt(lambda_c_loglaw(cfg.t, cfg.h)),
                        entropy_density_integral(&sym, 1)
                    ))
                })
                .collect::<Result<_>>()?;
            let mut out = csv_header(&[
                "t",
                "h",
                "lambda",
                "phase",
                "k_c",
                "lambda_c_closed_form",
                "s_1_integral",
            ]);
            rows.iter().for_each(|r| out.push_str(&format!("{r}\n")));
            Ok(out)
        }
    }
}

/// Lower window edge, or the positive isolated critical momentum.
fn phase_edge(phase: &Phase) -> Option<f64> {
    match phase {
        Phase::AreaLaw => None,
        Phase::LogLaw { critical_momenta } => critical_momenta.iter().copied().find(|&k| k > 0.0),
        Phase::VolumeLaw { window } => window.k_c(),
    }
}

/// Slope of a finite-n snapshot against the window integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeRow {
    pub x: f64,
    pub lambda: f64,
    pub m: u32,
    pub slope_fit: f64,
    pub slope_integral: f64,
    pub intercept: f64,
    pub residual: f64,
    /// `(fit - integral) / integral`; zero when the integral vanishes.
    pub rel_diff: f64,
}

/// Fits `S_m(ell)` of the state after `n` rounds and compares with the integral.
pub fn slope_rows(x: f64, lambda: f64, cfg: &RunConfig) -> Result<Vec<SlopeRow>> {
    let p = VolumeParams::new(x, lambda);
    let grid = MomentumGrid::new(cfg.k_grid)?;
    let f = evolved_amplitudes(&p, grid, cfg.n, &ProjectiveAmplitude::ZERO)?;
    let co = correlation_coefficients(grid, &f, cfg.ell_max)?;
    let ells = cfg.ells();
    let reports = ells
        .par_iter()
        .map(|&ell| block_entropies(&co, ell, &cfg.m))
        .collect::<Result<Vec<_>>>()?;
    cfg.m
        .iter()
        .map(|&m| {
            let pts: Vec<(f64, f64)> = reports
                .iter()
                .map(|r| (r.ell as f64, r.get(m).expect("requested order")))
                .collect();
            let fit = fit_slope(m, &pts)?;
            // S_0 is reported in nats; the integral counts modes
            let scale = if m == 0 { std::f64::consts::LN_2 } else { 1.0 };
            let integral = window_entropy_density(&p, m, cfg.window_nodes)? * scale;
            let rel_diff = if integral > 0.0 {
                (fit.slope - integral) / integral
            } else {
                0.0
            };
            Ok(SlopeRow {
                x,
                lambda,
                m,
                slope_fit: fit.slope,
                slope_integral: integral,
                intercept: fit.intercept,
                residual: fit.residual,
                rel_diff,
            })
        })
        .collect()
}

/// Rows `x, lambda, m, slope_fit, slope_integral, intercept, residual, rel_diff`.
pub fn cmd_slope(cfg: &RunConfig) -> Result<String> {
    let mut points = Vec::new();
    for &x in &cfg.x {
        let lambdas = match &cfg.lambda_fraction {
            Some(fr) => {
                let lc = lambda_c_volume(x)?;
                fr.iter().map(|f| f * lc).collect()
            }
            None => cfg.lambda.values(),
        };
        points.extend(lambdas.into_iter().map(|l| (x, l)));
    }
    let rows: Vec<Vec<SlopeRow>> = points
        .par_iter()
        .map(|&(x, l)| slope_rows(x, l, cfg))
        .collect::<Result<_>>()?;
    let mut out = csv_header(&[
        "x",
        "lambda",
        "m",
        "slope_fit",
        "slope_integral",
        "intercept",
        "residual",
        "rel_diff",
    ]);
    for r in rows.iter().flatten() {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.x, r.lambda, r.m, r.slope_fit, r.slope_integral, r.intercept, r.residual, r.rel_diff
        )
        .expect("writing to a string");
    }
    Ok(out)
}

/// JSON report of exponent fits of `s_m` on `lambda_c - lambda` in the `delta` sweep.
pub fn cmd_exponents(cfg: &RunConfig) -> Result<String> {
    let x = cfg.x[0];
    let lc = lambda_c_volume(x)?;
    let deltas = cfg.delta.logarithmic();
    let gamma = gamma_coefficient(x)?;
    let mut results = Vec::new();
    for &m in &cfg.m {
        let samples: Vec<(f64, f64)> = deltas
            .par_iter()
            .map(|&d| {
                Ok((
                    lc - d,
                    window_entropy_density(&VolumeParams::new(x, lc - d), m, cfg.window_nodes)?,
                ))
            })
            .collect::<Result<_>>()?;
        let fit = fit_exponent(&samples, lc)?;
        let closest = samples[0];
        let asymptotic = asymptotic_slope(m, x, closest.0)?;
        let mut entry = json!({
            "m": m,
            "nu": fit.nu,
            "amplitude": fit.amplitude,
            "delta_min": fit.delta_min,
            "delta_max": fit.delta_max,
            "residual": fit.residual,
            "s_at_delta_min": closest.1,
            "asymptotic_at_delta_min": asymptotic,
            "ratio_to_asymptotic": closest.1 / asymptotic,
            "samples": samples.iter().map(|(l, s)| json!({"lambda": l, "delta": lc - l, "s": s})).collect::<Vec<_>>(),
        });
        if m == 1 {
            let d = lc - closest.0;
            entry["log_coefficient_at_delta_min"] = json!(closest.1 / (d * d.ln()));
            entry["log_coefficient_leading"] = json!(von_neumann_log_coefficient(x)?);
        }
        results.push(entry);
    }
    let report = json!({
        "inputs": serde_json::to_value(cfg).expect("config serializes"),
        "results": results,
        "diagnostics": {
            "lambda_c": lc,
            "gamma": gamma,
            "window_nodes": cfg.window_nodes,
        },
    });
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

/// Crosscheck CSV with the largest difference and the tolerance it is held to.
pub struct CrosscheckOutput {
    pub csv: String,
    pub max_abs_diff: f64,
    pub tolerance: f64,
}

impl CrosscheckOutput {
    pub fn passed(&self) -> bool {
        self.max_abs_diff <= self.tolerance
    }
}

fn model_round(cfg: &RunConfig, x: f64, lambda: f64) -> RoundSpec {
    match cfg.model {
        Model::Volume => VolumeParams::new(x, lambda).round(),
        Model::Loglaw => LogLawParams::new(cfg.t, cfg.h, lambda).round(),
    }
}

/// Rows `L, x, lambda, n, ell, m, S_ed, S_gaussian, abs_diff` at `ell = L/2`.
pub fn cmd_crosscheck(cfg: &RunConfig) -> Result<CrosscheckOutput> {
    let xs = match cfg.model {
        Model::Volume => cfg.x.clone(),
        Model::Loglaw => vec![f64::NAN],
    };
    let mut cases = Vec::new();
    for &l in &cfg.sizes {
        for &x in &xs {
            for lambda in cfg.lambda.values() {
                cases.push((l, x, lambda));
            }
        }
    }
    let blocks: Vec<Vec<(String, f64)>> = cases
        .par_iter()
        .map(|&(l, x, lambda)| {
            let round = model_round(cfg, x, lambda);
            let spec = FiniteLatticeSpec::new(l)?;
            let ell = l / 2;
            let mut rows = Vec::new();
            let mut psi = StateVector::all_plus(l)?;
            let mut done = 0u64;
            let mut rounds = cfg.rounds.clone();
            rounds.sort_unstable();
            for n in rounds {
                psi = run_circuit(&round, (n - done) as usize, &psi)?;
                done = n;
                let ed = reduced_entropies(&psi, ell, &cfg.m)?;
                let gauss = finite_lattice_entropies(&spec, &round, n, ell, &cfg.m)?;
                for (i, &m) in cfg.m.iter().enumerate() {
                    let diff = (ed.values[i] - gauss.values[i]).abs();
                    let xcol = if x.is_nan() { String::new() } else { x.to_string() };
                    rows.push((
                        format!(
                            "{l},{xcol},{lambda},{n},{ell},{m},{},{},{diff}",
                            ed.values[i], gauss.values[i]
                        ),
                        diff,
                    ));
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let mut csv = csv_header(&["L", "x", "lambda", "n", "ell", "m", "S_ed", "S_gaussian", "abs_diff"]);
    let mut max_abs_diff = 0.0f64;
    for (row, diff) in blocks.iter().flatten() {
        csv.push_str(row);
        csv.push('\n');
        max_abs_diff = max_abs_diff.max(*diff);
    }
    Ok(CrosscheckOutput {
        csv,
        max_abs_diff,
        tolerance: cfg.tolerance,
    })
}

/// JSON dump of the round matrix at every grid momentum of one parameter point.
pub fn cmd_mobius(cfg: &RunConfig) -> Result<String> {
    let grid = MomentumGrid::new(cfg.k_grid)?;
    let lambda = cfg.lambda.values()[0];
    let x = cfg.x[0];
    let records: Vec<Value> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let k = grid.node(j);
            let m = match cfg.model {
                Model::Volume => VolumeParams::new(x, lambda).at(k)?,
                Model::Loglaw => LogLawParams::new(cfg.t, cfg.h, lambda).at(k)?,
            };
            let c = |z: num_complex::Complex64| json!([z.re, z.im]);
            let mut rec = json!({
                "k": k,
                "a": c(m.a), "b": c(m.b), "c": c(m.c), "d": c(m.d),
                "trace": c(m.trace()),
            });
            match m.classify(DEFAULT_CRITICALITY_TOL) {
                Criticality::Critical { theta } => {
                    rec["critical"] = json!(true);
                    rec["theta"] = json!(theta);
                }
                Criticality::NonCritical {
                    f_stable,
                    f_unstable,
                    contraction,
                } => {
                    let h = |f: ProjectiveAmplitude| json!({"x": c(f.x()), "y": c(f.y())});
                    rec["critical"] = json!(false);
                    rec["f_stable"] = h(f_stable);
                    rec["f_unstable"] = h(f_unstable);
                    rec["contraction"] = json!(contraction);
                }
            }
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let n_critical = records.iter().filter(|r| r["critical"] == json!(true)).count();
    let mut diagnostics = json!({ "critical_count": n_critical });
    match cfg.model {
        Model::Volume => {
            diagnostics["lambda_c"] = json!(lambda_c_volume(x)?);
            diagnostics["window_k_c"] = json!(critical_window(&VolumeParams::new(x, lambda)).k_c());
        }
        Model::Loglaw => diagnostics["lambda_c"] = json!(lambda_c_loglaw(cfg.t, cfg.h)),
    }
    let report = json!({
        "inputs": serde_json::to_value(cfg).expect("config serializes"),
        "results": records,
        "diagnostics": diagnostics,
    });
    Ok(serde_json::to_string_pretty(&report).expect("report serializes") + "\n")
}

/// gnuplot script plotting the CSV written to `data`.
pub fn plot_script(cmd: Command, data: &Path) -> String {
    let d = data.display();
    let body = match cmd {
        Command::PhaseDiagram => format!(
            "set xlabel 'x'\nset ylabel 'lambda'\n\
             plot '{d}' using 1:($3 eq 'VolumeLaw' ? $2 : 1/0) with points title 'volume', \\\n  \
             '{d}' using 1:($3 eq 'AreaLaw' ? $2 : 1/0) with points title 'area', \\\n  \
             '{d}' using 1:5 with lines title 'lambda_c'\n"
        ),
        Command::Slope => format!(
            "set xlabel 'lambda'\nset ylabel 'slope'\n\
             plot '{d}' using 2:4 with points title 'fit', '{d}' using 2:5 with lines title 'integral'\n"
        ),
        Command::Crosscheck => format!(
            "set logscale y\nset xlabel 'row'\nset ylabel '|S_ed - S_gaussian|'\n\
             plot '{d}' using 0:9 with points title 'abs diff'\n"
        ),
        Command::Exponents | Command::Mobius => format!("# {d} is JSON; nothing to plot directly\n"),
    };
    format!("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnhead\n{body}")
}

#[derive(Debug, Parser)]
#[command(
    name = "mipt",
    version,
    about = "Steady-state entanglement of non-unitary free-fermion circuits"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long = "k-grid", global = true)]
    pub k_grid: Option<usize>,
    /// Uniform u-average nodes; 0 selects the closed-form average.
    #[arg(long = "u-grid", global = true)]
    pub u_grid: Option<usize>,
    /// Also write a gnuplot script for the CSV to this path.
    #[arg(long = "plot-script", global = true)]
    pub plot_script: Option<PathBuf>,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(cli.command, &text)?
        }
        None => RunConfig::defaults_for(cli.command),
    };
    let c = &cli.common;
    if let Some(v) = &c.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = c.threads {
        cfg.threads = Some(v);
    }
    if let Some(v) = c.k_grid {
        cfg.k_grid = v;
    }
    if let Some(v) = c.u_grid {
        cfg.u_grid = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cmd: Command, cfg: &RunConfig) -> Result<(String, bool)> {
    Ok(match cmd {
        Command::PhaseDiagram => (cmd_phase_diagram(cfg)?, true),
        Command::Slope => (cmd_slope(cfg)?, true),
        Command::Exponents => (cmd_exponents(cfg)?, true),
        Command::Crosscheck => {
            let out = cmd_crosscheck(cfg)?;
            let ok = out.passed();
            (out.csv, ok)
        }
        Command::Mobius => (cmd_mobius(cfg)?, true),
    })
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let (text, ok) = match pool.install(|| execute(cli.command, &cfg)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = emit(&cli, &cfg, &text) {
        eprintln!("error: {e}");
        return EXIT_CONFIG;
    }
    if ok {
        EXIT_OK
    } else {
        eprintln!("threshold violated");
        EXIT_THRESHOLD
    }
}

fn emit(cli: &Cli, cfg: &RunConfig, text: &str) -> std::io::Result<()> {
    match &cfg.out {
        Some(path) => {
            // write-then-rename so readers never see a partial file
            let tmp = path.with_extension("partial");
            std::fs::write(&tmp, text)?;
            if let Err(e) = std::fs::rename(&tmp, path) {
                let _ = std::fs::remove_file(&tmp);
                return Err(e);
            }
        }
        None => print!("{text}"),
    }
    if let Some(script) = &cli.common.plot_script {
        let data = cfg.out.clone().unwrap_or_else(|| PathBuf::from("data.csv"));
        std::fs::write(script, plot_script(cli.command, &data))?;
    }
    Ok(())
}

/// Entry point for the `mipt` binary.
pub fn main_entry() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
