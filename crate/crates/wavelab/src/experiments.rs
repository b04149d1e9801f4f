//! Experiment drivers behind the CLI subcommands.
//!
//! Every driver consumes a validated [`ExperimentConfig`] and produces CSV
//! rows (plus, for `simulate`, binary field snapshots).  The convergence
//! driver measures the distance between the fully nonlinear surface
//! evolution, started on the reconstructed ansatz, and the first-order
//! two-scale reconstruction, over one macroscopic time unit and a descending
//! steepness list; the residual driver measures how well the reconstructions
//! themselves satisfy the evolution equations.  Both report log-log slope
//! fits with per-point fit residuals so thresholds can be audited from the
//! CSV alone.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use wavecore::dispersion::{bfun, g0, grad_omega, omega, PhysicalParams};
use wavecore::dno::DnoConfig;
use wavecore::fit::{fit_loglog, SlopeFit};
use wavecore::macrosolver::{
    band_limit, reconstruct, MacroConfig, MacroSolver, MacroState, ReconstructionOrder,
};
use wavecore::resonance::{scan_resonances, WaveTriple};
use wavecore::waterwaves::{
    error_norm, hyperbolicity, integrate_ww, residual_evaluator, SurfaceState,
};
use wavecore::{SpectralField, WaveError};

use crate::csvout::Cell;
use crate::{ExperimentConfig, HarnessError};

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn physical(cfg: &ExperimentConfig, eps: f64) -> Result<PhysicalParams, HarnessError> {
    Ok(PhysicalParams::new(cfg.mu, cfg.inv_bond, eps, cfg.dim)?)
}

fn dno_config(cfg: &ExperimentConfig) -> DnoConfig {
    DnoConfig {
        order: cfg.dno_order,
        dealias_frac: 2.0 / 3.0,
        h_min: cfg.h_min,
    }
}

fn macro_grid(cfg: &ExperimentConfig) -> Result<wavecore::Grid, HarnessError> {
    Ok(wavecore::Grid::new(cfg.dim, cfg.macro_n, 2.0 * PI)?)
}

/// Initial leading-order envelopes on the macroscopic grid, band-limited to
/// half the Nyquist mode so derived products stay resolved.
pub fn envelopes(cfg: &ExperimentConfig) -> Result<[SpectralField; 3], HarnessError> {
    let grid = macro_grid(cfg)?;
    let mut out: Vec<SpectralField> = Vec::with_capacity(3);
    for j in 0..3 {
        let amp = cfg.envelope_amplitude[j];
        let field = match cfg.envelope_family.as_str() {
            "gaussian" => {
                let shift = 2.0 * PI * j as f64 / 3.0;
                let mut vals = Vec::with_capacity(grid.total());
                for i in 0..grid.total() {
                    let x = grid.point(i);
                    let mut bump = 0.0;
                    for axis in 0..grid.dim() {
                        bump += (x[axis] + shift).cos() - 1.0;
                    }
                    vals.push(re(amp * (cfg.envelope_width * bump).exp()));
                }
                SpectralField::from_values(&grid, &vals, false)?
            }
            "mode" => {
                let mut f = SpectralField::zeros(&grid, false);
                f.set_coeff([cfg.envelope_mode, 0], re(amp));
                f
            }
            other => {
                return Err(HarnessError::InvalidValue {
                    key: String::from("envelope.family"),
                    message: format!("unsupported family `{other}`"),
                })
            }
        };
        out.push(band_limit(&field, 0.5));
    }
    Ok([out[0].clone(), out[1].clone(), out[2].clone()])
}

fn carrier_vectors(cfg: &ExperimentConfig) -> [[f64; 2]; 3] {
    let mut out = [[0.0; 2]; 3];
    for (o, c) in out.iter_mut().zip(cfg.carriers.iter()) {
        *o = [c[0] as f64, c[1] as f64];
    }
    out
}

/// Modulation solver and initial macro state for one steepness.
pub fn macro_setup(
    cfg: &ExperimentConfig,
    eps: f64,
) -> Result<(MacroSolver, MacroState), HarnessError> {
    let p = physical(cfg, eps)?;
    let waves = WaveTriple::from_wavevectors(carrier_vectors(cfg), p)?;
    let solver = MacroSolver::new(
        waves,
        MacroConfig {
            dt: cfg.dt_macro,
            gate_tol: cfg.resonance_tol,
        },
    );
    let base = MacroState::from_leading(envelopes(cfg)?);
    Ok((solver, base))
}

fn fine_points(cfg: &ExperimentConfig, m: u32) -> Result<usize, HarnessError> {
    let m0 = cfg.m_list[0] as usize;
    let raw = cfg.micro_n * m as usize;
    if raw % m0 != 0 {
        return Err(HarnessError::InvalidValue {
            key: String::from("scale.micro_n"),
            message: format!("micro resolution does not scale evenly to M = {m}"),
        });
    }
    Ok(raw / m0)
}

/// Reconstruct the unscaled ansatz surface at one instant.
fn ansatz_surface(
    solver: &MacroSolver,
    base: &MacroState,
    order: ReconstructionOrder,
    eps: f64,
    fine_n: usize,
    t_micro: f64,
) -> Result<SurfaceState, HarnessError> {
    let state = solver.integrate(base, eps * t_micro)?;
    let cs = solver.coefficient_set(&state)?;
    let (zeta, psi) = reconstruct(&cs, order, eps, fine_n, t_micro)?;
    Ok(SurfaceState::new(t_micro, zeta, psi)?)
}

/// Reconstruct the steepness-scaled physical surface at one instant.
fn physical_surface(
    solver: &MacroSolver,
    base: &MacroState,
    order: ReconstructionOrder,
    eps: f64,
    fine_n: usize,
    t_micro: f64,
) -> Result<SurfaceState, HarnessError> {
    let state = solver.integrate(base, eps * t_micro)?;
    let cs = solver.coefficient_set(&state)?;
    let (zeta, psi) = reconstruct(&cs, order, eps, fine_n, t_micro)?;
    Ok(SurfaceState::new(t_micro, zeta.scale(re(eps)), psi.scale(re(eps)))?)
}

/// Dispersion-table rows: wavenumber, frequency, group velocity, symbols.
pub fn dispersion_table(cfg: &ExperimentConfig) -> Result<Vec<Vec<Cell>>, HarnessError> {
    if !(cfg.table_k_min > 0.0 && cfg.table_k_max > cfg.table_k_min) {
        return Err(HarnessError::InvalidValue {
            key: String::from("table.k_min"),
            message: String::from("need 0 < k_min < k_max"),
        });
    }
    if cfg.table_samples < 2 {
        return Err(HarnessError::InvalidValue {
            key: String::from("table.samples"),
            message: String::from("need at least two samples"),
        });
    }
    let p = physical(cfg, 1.0)?;
    let mut rows = Vec::with_capacity(cfg.table_samples);
    for i in 0..cfg.table_samples {
        let k = cfg.table_k_min
            + (cfg.table_k_max - cfg.table_k_min) * i as f64 / (cfg.table_samples - 1) as f64;
        let xi = [k, 0.0];
        let grad = grad_omega(xi, &p)?;
        rows.push(vec![
            Cell::Num(k),
            Cell::Num(omega(xi, &p)),
            Cell::Num(grad[0]),
            Cell::Num(grad[1]),
            Cell::Num(bfun(xi, &p)),
            Cell::Num(g0(xi, &p)),
        ]);
    }
    Ok(rows)
}

/// Header for [`dispersion_table`].
pub const DISPERSION_HEADER: [&str; 6] = ["k", "omega", "group_vel_x", "group_vel_y", "b", "g"];

/// Resonance-scan rows over the configured parameter and wavenumber grids.
pub fn resonance_scan(cfg: &ExperimentConfig) -> Result<Vec<Vec<Cell>>, HarnessError> {
    let linspace = |(lo, hi, n): (f64, f64, usize)| -> Vec<f64> {
        if n <= 1 {
            vec![lo]
        } else {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        }
    };
    let rows = scan_resonances(
        &linspace(cfg.scan_mu),
        &linspace(cfg.scan_ib),
        &linspace(cfg.scan_k),
        cfg.scan_order as u8,
    )?;
    Ok(rows
        .into_iter()
        .map(|r| {
            vec![
                Cell::Num(r.mu),
                Cell::Num(r.inv_bond),
                Cell::Num(r.k),
                Cell::Int(r.order as i64),
                Cell::Num(r.defect),
                match r.refined_root {
                    Some(root) => Cell::Num(root),
                    None => Cell::Text(String::new()),
                },
            ]
        })
        .collect())
}

/// Header for [`resonance_scan`].
pub const SCAN_HEADER: [&str; 6] = ["mu", "inv_bond", "k", "order", "defect", "refined_root"];

/// Amplitude summary of the full coefficient hierarchy at the initial state.
pub fn coeff_dump(cfg: &ExperimentConfig) -> Result<Vec<Vec<Cell>>, HarnessError> {
    let eps = cfg.eps_list()[0];
    let (solver, base) = macro_setup(cfg, eps)?;
    let cs = solver.coefficient_set(&base)?;
    let mut rows = Vec::new();
    let txt = |s: String| Cell::Text(s);
    for j in 0..3 {
        let w = cs.waves.wave((j + 1) as i32);
        rows.push(vec![
            txt(String::from("carrier")),
            txt(format!("{}", j + 1)),
            Cell::Num(w.xi[0]),
            Cell::Num(w.xi[1]),
            Cell::Num(w.omega),
            Cell::Num(0.0),
            Cell::Num(cs.zeta0[j].value.l2_norm()),
            Cell::Num(cs.psi0[j].value.l2_norm()),
            Cell::Num(cs.zeta1[j].value.l2_norm()),
            Cell::Num(cs.zeta2[j].l2_norm()),
        ]);
    }
    for block in &cs.pairs {
        rows.push(vec![
            txt(String::from("pair")),
            txt(format!("{:?}", block.label)),
            Cell::Num(block.entry.xi[0]),
            Cell::Num(block.entry.xi[1]),
            Cell::Num(block.entry.omega),
            Cell::Num(block.entry.defect),
            Cell::Num(block.zeta1.value.l2_norm()),
            Cell::Num(block.psi1.value.l2_norm()),
            Cell::Num(block.zeta2.l2_norm()),
            Cell::Num(block.psi2.l2_norm()),
        ]);
    }
    for block in &cs.triples {
        rows.push(vec![
            txt(String::from("triple")),
            txt(format!("{:?}", block.label)),
            Cell::Num(block.entry.xi[0]),
            Cell::Num(block.entry.xi[1]),
            Cell::Num(block.entry.omega),
            Cell::Num(block.entry.defect),
            Cell::Num(0.0),
            Cell::Num(0.0),
            Cell::Num(block.zeta2.l2_norm()),
            Cell::Num(block.psi2.l2_norm()),
        ]);
    }
    rows.push(vec![
        txt(String::from("mean")),
        txt(String::from("0")),
        Cell::Num(0.0),
        Cell::Num(0.0),
        Cell::Num(0.0),
        Cell::Num(0.0),
        Cell::Num(cs.zeta10.value.l2_norm()),
        Cell::Num(cs.psi00.value.l2_norm()),
        Cell::Num(cs.zeta20.l2_norm()),
        Cell::Num(cs.d0.l2_norm()),
    ]);
    Ok(rows)
}

/// Header for [`coeff_dump`].
pub const COEFF_HEADER: [&str; 10] = [
    "block", "label", "xi_x", "xi_y", "omega", "defect", "norm_a", "norm_b", "norm_c", "norm_d",
];

/// Snapshot metadata produced by [`run_simulate`].
#[derive(Debug)]
pub struct SimulateReport {
    /// Summary rows: slow time, micro time, field norms.
    pub rows: Vec<Vec<Cell>>,
    /// Snapshot file stems, relative to the output directory.
    pub stems: Vec<String>,
}

/// Header for [`run_simulate`] summary rows.
pub const SIMULATE_HEADER: [&str; 5] = ["t_slow", "t_micro", "zeta_l2", "psi_l2", "zeta_linf"];

/// Integrate the modulation system at the first steepness and write
/// steepness-scaled surface snapshots in the flat binary format.
pub fn run_simulate(cfg: &ExperimentConfig) -> Result<SimulateReport, HarnessError> {
    let m = cfg.m_list[0];
    let eps = 1.0 / m as f64;
    let fine_n = fine_points(cfg, m)?;
    let (solver, base) = macro_setup(cfg, eps)?;
    let count = ((cfg.snapshots as f64 * cfg.t0).round() as usize).max(1);
    let dir = std::path::Path::new(&cfg.out_dir);
    std::fs::create_dir_all(dir)?;
    let mut rows = Vec::new();
    let mut stems = Vec::new();
    for s in 0..=count {
        let t_slow = cfg.t0 * s as f64 / count as f64;
        let t_micro = t_slow / eps;
        let u = physical_surface(&solver, &base, ReconstructionOrder::Full, eps, fine_n, t_micro)?;
        let stem = format!("snap_{s:03}");
        crate::fieldio::save_field(&dir.join(format!("{stem}_zeta.bin")), &u.zeta)?;
        crate::fieldio::save_field(&dir.join(format!("{stem}_psi.bin")), &u.psi)?;
        rows.push(vec![
            Cell::Num(t_slow),
            Cell::Num(t_micro),
            Cell::Num(u.zeta.l2_norm()),
            Cell::Num(u.psi.l2_norm()),
            Cell::Num(u.zeta.linf_norm()),
        ]);
        stems.push(stem);
    }
    Ok(SimulateReport { rows, stems })
}

/// Residual-study output: per-sample rows and the per-order slope fits.
#[derive(Debug)]
pub struct ResidualReport {
    /// Sample rows, see [`RESIDUAL_HEADER`].
    pub rows: Vec<Vec<Cell>>,
    /// `(order tag, fitted slope)` for the full and truncated ansatz.
    pub slopes: Vec<(String, SlopeFit)>,
}

/// Header for [`run_residual`] rows.
pub const RESIDUAL_HEADER: [&str; 10] = [
    "kind",
    "order",
    "eps",
    "t",
    "zeta_l2",
    "zeta_h1",
    "psi_l2",
    "psi_weighted",
    "combined",
    "fit_residual",
];

/// Evaluate the consistency residual of both reconstruction orders over the
/// steepness list and fit the scaling exponents.
pub fn run_residual(cfg: &ExperimentConfig) -> Result<ResidualReport, HarnessError> {
    let dno = dno_config(cfg);
    let orders = [
        ("full", ReconstructionOrder::Full),
        ("first", ReconstructionOrder::First),
    ];
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (tag, order) in orders {
        let per_eps: Vec<Result<(f64, Vec<Vec<Cell>>, f64), HarnessError>> = cfg
            .m_list
            .par_iter()
            .map(|&m| {
                let eps = 1.0 / m as f64;
                let fine_n = fine_points(cfg, m)?;
                let (solver, base) = macro_setup(cfg, eps)?;
                let p = physical(cfg, eps)?;
                let mut provider = |t: f64| {
                    ansatz_surface(&solver, &base, order, eps, fine_n, t).map_err(|e| match e {
                        HarnessError::Wave(w) => w,
                        other => WaveError::InvalidArgument(other.to_string()),
                    })
                };
                let samples =
                    residual_evaluator(&mut provider, &cfg.residual_times, 0.01, &dno, &p)?;
                let mut worst = 0.0_f64;
                let mut local = Vec::new();
                for s in &samples {
                    worst = worst.max(s.combined());
                    local.push(vec![
                        Cell::from("sample"),
                        Cell::from(tag),
                        Cell::Num(eps),
                        Cell::Num(s.t),
                        Cell::Num(s.zeta_l2),
                        Cell::Num(s.zeta_h1),
                        Cell::Num(s.psi_l2),
                        Cell::Num(s.psi_weighted),
                        Cell::Num(s.combined()),
                        Cell::Text(String::new()),
                    ]);
                }
                Ok((eps, local, worst))
            })
            .collect();
        let mut epss = Vec::new();
        let mut worsts = Vec::new();
        for r in per_eps {
            let (eps, local, worst) = r?;
            rows.extend(local);
            epss.push(eps);
            worsts.push(worst);
        }
        let fit = fit_loglog(&epss, &worsts);
        for (i, eps) in epss.iter().enumerate() {
            rows.push(vec![
                Cell::from("fit"),
                Cell::from(tag),
                Cell::Num(*eps),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
                Cell::Num(fit.slope),
                Cell::Num(fit.residuals[i]),
            ]);
        }
        slopes.push((tag.to_string(), fit));
    }
    Ok(ResidualReport { rows, slopes })
}

/// Convergence-study output: per-snapshot rows and the headline slope fit.
#[derive(Debug)]
pub struct ConvergenceReport {
    /// Sample and fit rows, see [`CONVERGENCE_HEADER`].
    pub rows: Vec<Vec<Cell>>,
    /// `(eps, sup-over-snapshots error)` pairs, descending in eps.
    pub sup_errors: Vec<(f64, f64)>,
    /// Log-log fit of the sup error against eps.
    pub slope: SlopeFit,
}

/// Header for [`run_convergence`] rows.
pub const CONVERGENCE_HEADER: [&str; 6] = ["kind", "eps", "t_slow", "error", "sup_error", "fit"];

/// The headline experiment: evolve the full system from the reconstructed
/// ansatz and measure its distance to the first-order reconstruction.
pub fn run_convergence(cfg: &ExperimentConfig) -> Result<ConvergenceReport, HarnessError> {
    if cfg.inv_bond != 0.0 {
        return Err(HarnessError::InvalidValue {
            key: String::from("params.inv_bond"),
            message: String::from("the convergence study covers gravity waves only"),
        });
    }
    let dno = dno_config(cfg);
    let p_one = physical(cfg, 1.0)?;
    let count = ((cfg.snapshots as f64 * cfg.t0).round() as usize).max(1);

    let per_eps: Vec<Result<(f64, Vec<(f64, f64)>), HarnessError>> = cfg
        .m_list
        .par_iter()
        .map(|&m| {
            let eps = 1.0 / m as f64;
            let fine_n = fine_points(cfg, m)?;
            let (solver, base) = macro_setup(cfg, eps)?;
            let mut u = physical_surface(
                &solver,
                &base,
                ReconstructionOrder::Full,
                eps,
                fine_n,
                0.0,
            )?;

            let margin = 1.0 - u.zeta.linf_norm();
            if margin < cfg.h_min {
                return Err(HarnessError::Wave(WaveError::DepthViolation { margin }));
            }
            let (_, min_a) = hyperbolicity(&u, &dno, &p_one)?;
            if min_a < cfg.a0 {
                return Err(HarnessError::Wave(WaveError::HyperbolicityViolation {
                    min_a,
                }));
            }

            let mut samples = Vec::with_capacity(count + 1);
            for s in 0..=count {
                let t_slow = cfg.t0 * s as f64 / count as f64;
                let t_micro = t_slow / eps;
                u = integrate_ww(&u, t_micro, cfg.dt_micro, &dno, &p_one)?;
                let ua1 = physical_surface(
                    &solver,
                    &base,
                    ReconstructionOrder::First,
                    eps,
                    fine_n,
                    t_micro,
                )?;
                samples.push((t_slow, error_norm(&u, &ua1, cfg.norm_index)?));
            }
            Ok((eps, samples))
        })
        .collect();

    let mut rows = Vec::new();
    let mut epss = Vec::new();
    let mut sups = Vec::new();
    for r in per_eps {
        let (eps, samples) = r?;
        let mut sup = 0.0_f64;
        for (t_slow, err) in &samples {
            sup = sup.max(*err);
            rows.push(vec![
                Cell::from("sample"),
                Cell::Num(eps),
                Cell::Num(*t_slow),
                Cell::Num(*err),
                Cell::Text(String::new()),
                Cell::Text(String::new()),
            ]);
        }
        epss.push(eps);
        sups.push(sup);
    }
    let fit = fit_loglog(&epss, &sups);
    for (i, &eps) in epss.iter().enumerate() {
        rows.push(vec![
            Cell::from("fit"),
            Cell::Num(eps),
            Cell::Text(String::new()),
            Cell::Text(String::new()),
            Cell::Num(sups[i]),
            Cell::Num(fit.residuals[i]),
        ]);
    }
    rows.push(vec![
        Cell::from("slope"),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        Cell::Text(String::new()),
        Cell::Num(fit.slope),
    ]);
    let sup_errors = epss.into_iter().zip(sups).collect();
    Ok(ConvergenceReport {
        rows,
        sup_errors,
        slope: fit,
    })
}
