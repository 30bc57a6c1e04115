//! The four experiment commands.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use nlpml::discretize::{build_grid, support_leak, AssemblyOptions, Grid1D, InitialData, SemiDiscreteSystem};
use nlpml::integrate::{run as integrate, RunOptions, Trajectory};
use nlpml::metrics::{error_edelta, error_eh, ErrorReport, Metric};
use nlpml::reference::{solve_local_pml, solve_nonlocal_reference, Coefficient, LocalPmlSystem};
use nlpml::stretch::{AbsorberProfile, PmlParams};
use nlpml::talbot::{build_contour, validate_contour, ContourDiagnostics, TalbotContour};
use nlpml::{KernelKind, KernelSpec};
use rayon::prelude::*;

use crate::config::{ExampleChoice, ReferenceKind, RunConfig};
use crate::output::{write_snapshot, write_table};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn profile(cfg: &RunConfig) -> Result<AbsorberProfile> {
    Ok(AbsorberProfile::linear(cfg.l, cfg.d_p)?)
}

pub fn initial_data(cfg: &RunConfig) -> InitialData {
    match cfg.example {
        ExampleChoice::Preset(e) => e.initial_data(),
        ExampleChoice::Custom => InitialData::zero(),
    }
}

pub fn kernel(cfg: &RunConfig, delta: f64) -> Result<KernelSpec> {
    Ok(match cfg.kernel {
        KernelKind::Exponential => KernelSpec::exponential(delta, cfg.c0)?,
        KernelKind::Gaussian => KernelSpec::gaussian(delta)?,
        KernelKind::Inhomogeneous => KernelSpec::inhomogeneous(delta)?,
        KernelKind::Custom => unreachable!("custom kernels are not configurable from a file"),
    })
}

pub fn contour(cfg: &RunConfig) -> Result<TalbotContour> {
    Ok(build_contour(cfg.omega, cfg.mu, cfg.nu, cfg.m)?)
}

pub fn assemble(cfg: &RunConfig, delta: f64, h: f64) -> Result<SemiDiscreteSystem> {
    let k = kernel(cfg, delta)?;
    let p = profile(cfg)?;
    let grid = build_grid(&p, k.horizon(), h)?;
    let options = AssemblyOptions { quad_order: cfg.quad_order, conjugate_pairs: cfg.conjugate_pairs, ..AssemblyOptions::default() };
    Ok(SemiDiscreteSystem::assemble(grid, k, p, PmlParams::new(cfg.z), contour(cfg)?, &initial_data(cfg), options)?)
}

/// One PML run; a blow-up is left in `Trajectory::failure`.
pub fn simulate(cfg: &RunConfig, delta: f64, h: f64, times: &[f64]) -> Result<(Grid1D, Trajectory)> {
    let sys = assemble(cfg, delta, h)?;
    let traj = integrate(&sys, cfg.t_final, cfg.tau, times, RunOptions { half_step: cfg.half_step })?;
    Ok((sys.grid, traj))
}

/// Like [`simulate`] but turns a blow-up into an error and returns `Re q(T)`.
fn final_state(cfg: &RunConfig, delta: f64, h: f64) -> Result<(Grid1D, Vec<f64>)> {
    let (grid, mut traj) = simulate(cfg, delta, h, &[cfg.t_final])?;
    if let Some(e) = traj.failure.take() {
        return Err(e.into());
    }
    let q = traj.at(cfg.t_final).map(|s| s.real()).unwrap_or_default();
    Ok((grid, q))
}

/// Diffusion coefficient of the local limit of `k`.
pub fn local_coefficient(k: &KernelSpec) -> Result<Coefficient> {
    if k.is_homogeneous() {
        return Ok(Coefficient::Constant(k.local_coefficient(0.0)?));
    }
    k.local_coefficient(0.0)?;
    let k = k.clone();
    Ok(Coefficient::Field(Arc::new(move |x| k.local_coefficient(x).unwrap_or(f64::NAN))))
}

/// Step for the local reference: stable on its mesh, no larger than `tau`,
/// and dividing `T` exactly.
pub fn local_reference_tau(cfg: &RunConfig, coefficient: &Coefficient) -> f64 {
    let outer = cfg.l + cfg.d_p;
    let peak = (0..=200).map(|i| coefficient.at(-outer + 2.0 * outer * i as f64 / 200.0)).fold(0.0f64, f64::max);
    let cap = cfg.tau.min(0.5 * cfg.local_ref_h / peak.sqrt());
    if cfg.t_final > 0.0 {
        cfg.t_final / (cfg.t_final / cap).ceil()
    } else {
        cap
    }
}

fn solve_local(cfg: &RunConfig, k: &KernelSpec, times: &[f64]) -> Result<nlpml::reference::LocalSolution> {
    let coefficient = local_coefficient(k)?;
    let tau = local_reference_tau(cfg, &coefficient);
    let system = LocalPmlSystem { coefficient, profile: profile(cfg)?, z: cfg.z };
    Ok(solve_local_pml(&system, &initial_data(cfg), cfg.t_final, tau, cfg.local_ref_h, times)?)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[derive(Debug)]
pub struct RunSummary {
    pub manifest: PathBuf,
    pub snapshots: Vec<PathBuf>,
    pub health: f64,
    pub steps: usize,
    pub diagnostics: ContourDiagnostics,
}

/// Snapshot CSVs plus a manifest. A blow-up still writes the manifest (with
/// `status = blowup`) before the error is returned.
pub fn run(cfg: &RunConfig, out: &Path) -> Result<RunSummary> {
    create_dir(out)?;
    let sys = assemble(cfg, cfg.delta, cfg.h)?;
    let diagnostics = validate_contour(&sys.contour, &sys.pml, sys.kernel.kind());
    let mut traj = integrate(&sys, cfg.t_final, cfg.tau, &cfg.snapshot_times, RunOptions { half_step: cfg.half_step })?;
    let leak = support_leak(&*initial_data(cfg).psi0, &sys.profile, sys.kernel.horizon());

    let mut manifest = cfg.to_manifest();
    let status = if traj.failure.is_some() { "blowup" } else { "ok" };
    manifest.push_str(&format!(
        "# status = {status}\n# steps = {}\n# health = {:e}\n# unknowns = {}\n# contour_worst_margin = {:e}\n# support_leak = {:e}\n",
        traj.steps,
        traj.health,
        sys.grid.len(),
        diagnostics.worst_margin,
        leak
    ));
    let manifest_path = out.join("manifest.cfg");
    if let Some(e) = traj.failure.take() {
        write_text(&manifest_path, &manifest)?;
        return Err(e.into());
    }

    let nodes = sys.grid.nodes();
    let reference: Option<Box<dyn Fn(f64) -> Option<Vec<f64>>>> = match cfg.reference {
        ReferenceKind::None => None,
        ReferenceKind::Nonlocal => {
            let r = solve_nonlocal_reference(&sys.kernel, &initial_data(cfg), cfg.t_final, cfg.tau, cfg.ref_h, cfg.ref_halfwidth, &cfg.snapshot_times, cfg.quad_order)?;
            let nodes = nodes.clone();
            Some(Box::new(move |t| r.sample(t, &nodes)))
        }
        ReferenceKind::Local => {
            let r = solve_local(cfg, &sys.kernel, &cfg.snapshot_times)?;
            let nodes = nodes.clone();
            Some(Box::new(move |t| r.sample(t, &nodes)))
        }
    };

    let mut snapshots = Vec::new();
    for &t in &cfg.snapshot_times {
        let snap = traj.at(t).expect("initial state is always recorded");
        let refv = reference.as_ref().and_then(|f| f(t));
        let path = out.join(format!("snapshot_t{t}.csv"));
        write_snapshot(&path, &nodes, &snap.q, refv.as_deref())?;
        snapshots.push(path);
    }
    write_text(&manifest_path, &manifest)?;
    Ok(RunSummary { manifest: manifest_path, snapshots, health: traj.health, steps: traj.steps, diagnostics })
}

/// `e_h` against the nonlocal reference: one reference per `δ`, one PML run
/// per `(h, δ)`.
pub fn table_eh(cfg: &RunConfig) -> Result<ErrorReport> {
    if cfg.h_list.is_empty() || cfg.delta_list.is_empty() {
        return Err(CliError::Usage("table-eh needs nonempty h_list and delta_list".into()));
    }
    let mut report = ErrorReport::new(Metric::Eh, cfg.t_final);
    for &delta in &cfg.delta_list {
        let k = kernel(cfg, delta)?;
        let reference = solve_nonlocal_reference(&k, &initial_data(cfg), cfg.t_final, cfg.tau, cfg.ref_h, cfg.ref_halfwidth, &[cfg.t_final], cfg.quad_order)?;
        let errors: Vec<f64> = cfg
            .h_list
            .par_iter()
            .map(|&h| {
                let (grid, q) = final_state(cfg, delta, h)?;
                let r = reference.sample(cfg.t_final, &grid.nodes()).unwrap_or_default();
                Ok(error_eh(&q, &r, &grid)?)
            })
            .collect::<Result<_>>()?;
        let rows: Vec<(f64, f64, f64)> = cfg.h_list.iter().zip(&errors).map(|(&h, &e)| (h, delta, e)).collect();
        report.push_sweep(&rows)?;
    }
    Ok(report)
}

/// `e_δ` against the local PML reference with `δ = M h` for each ratio `M`.
pub fn table_edelta(cfg: &RunConfig) -> Result<ErrorReport> {
    if cfg.h_list.is_empty() || cfg.ratio_list.is_empty() {
        return Err(CliError::Usage("table-edelta needs nonempty h_list and ratio_list".into()));
    }
    let probe = kernel(cfg, cfg.h_list[0] * cfg.ratio_list[0] as f64)?;
    let reference = solve_local(cfg, &probe, &[cfg.t_final])?;
    let jobs: Vec<(usize, f64)> = cfg.ratio_list.iter().flat_map(|&r| cfg.h_list.iter().map(move |&h| (r, h))).collect();
    let errors: Vec<f64> = jobs
        .par_iter()
        .map(|&(ratio, h)| {
            let (grid, q) = final_state(cfg, ratio as f64 * h, h)?;
            let r = reference.sample(cfg.t_final, &grid.nodes()).unwrap_or_default();
            Ok(error_edelta(&q, &r, &grid)?)
        })
        .collect::<Result<_>>()?;
    let mut report = ErrorReport::new(Metric::Edelta, cfg.t_final);
    for (chunk, jobs) in errors.chunks(cfg.h_list.len()).zip(jobs.chunks(cfg.h_list.len())) {
        let rows: Vec<(f64, f64, f64)> = jobs.iter().zip(chunk).map(|(&(r, h), &e)| (h, r as f64 * h, e)).collect();
        report.push_sweep(&rows)?;
    }
    Ok(report)
}

/// Runs a table command and writes `<name>.csv` and the manifest to `out`.
pub fn write_table_command(cfg: &RunConfig, out: &Path, name: &str, report: &ErrorReport) -> Result<PathBuf> {
    create_dir(out)?;
    let path = out.join(format!("{name}.csv"));
    write_table(&path, report)?;
    write_text(&out.join("manifest.cfg"), &format!("{}# status = ok\n# table = {name}\n", cfg.to_manifest()))?;
    Ok(path)
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub kind: KernelKind,
    pub diagnostics: ContourDiagnostics,
    pub contour_ok: bool,
    /// Largest `|ψ0|` outside `(x_l + δ, x_r - δ)`, relative to its peak.
    pub psi0_leak: f64,
    /// Largest `|ψ1|` outside `(x_l, x_r)`, relative to its peak.
    pub psi1_leak: f64,
    /// `δ ≤ x_r - x_l`.
    pub horizon_ok: bool,
    /// Largest relative change of `γ(0, β)` across either layer.
    pub layer_variation: f64,
}

impl ValidationReport {
    /// The contour and horizon checks gate; the support and homogeneity
    /// numbers are reported only.
    pub fn passed(&self) -> bool {
        self.contour_ok && self.horizon_ok
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.diagnostics;
        writeln!(f, "kernel = {:?}", self.kind)?;
        writeln!(f, "enclosure_ok = {}", d.enclosure_ok)?;
        writeln!(f, "stability_ok = {}", d.stability_ok)?;
        writeln!(f, "sufficient_ok = {}", d.sufficient_ok)?;
        writeln!(f, "worst_margin = {:e}", d.worst_margin)?;
        writeln!(f, "contour_ok = {}", self.contour_ok)?;
        writeln!(f, "a1_psi0_leak = {:e}", self.psi0_leak)?;
        writeln!(f, "a1_psi1_leak = {:e}", self.psi1_leak)?;
        writeln!(f, "a2_horizon_ok = {}", self.horizon_ok)?;
        writeln!(f, "a3_layer_variation = {:e}", self.layer_variation)?;
        write!(f, "passed = {}", self.passed())
    }
}

pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let k = kernel(cfg, cfg.delta)?;
    let p = profile(cfg)?;
    let c = contour(cfg)?;
    let diagnostics = validate_contour(&c, &PmlParams::new(cfg.z), k.kind());
    let data = initial_data(cfg);
    let layer_variation = if k.is_homogeneous() {
        0.0
    } else {
        let mut worst = 0.0f64;
        for side in [-1.0, 1.0] {
            let base = k.value(0.0, side * cfg.l);
            for i in 0..=200 {
                let beta = side * (cfg.l + (cfg.d_p + k.horizon()) * i as f64 / 200.0);
                worst = worst.max((k.value(0.0, beta) - base).abs() / base.abs());
            }
        }
        worst
    };
    Ok(ValidationReport {
        kind: k.kind(),
        contour_ok: diagnostics.passes(k.kind()),
        diagnostics,
        psi0_leak: support_leak(&*data.psi0, &p, cfg.delta),
        psi1_leak: support_leak(&*data.psi1, &p, 0.0),
        horizon_ok: cfg.delta <= 2.0 * cfg.l,
        layer_variation,
    })
}
