//! Scenario runners. Each writes its tables into the run directory and
//! records parameters and diagnostics for the manifest.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use quantum_vdp::classical::{
    analytic_wc_grid, classical_sync_threshold, ensemble_wigner_histogram, integrate_vdp_ode, order_parameter_series,
    phase_difference_samples, simulate_langevin, steady_order_parameter, write_records, ClassicalVdpState,
    LangevinParams, Recording, SampleOptions, ThresholdOptions, TrajectoryEnsemble,
};
use quantum_vdp::export::{
    write_boundary_csv, write_columns, write_json, write_phase_csv, write_phase_diagram_csv, write_radial_csv,
    write_wigner_csv, PhaseJson,
};
use quantum_vdp::ion::{
    angular_to_hz, effective_rates, hz_to_angular, lamb_dicke_budget, IonParams, DEFAULT_LAMB_DICKE_TOLERANCE,
};
use quantum_vdp::lindblad::{adaptive_steady_state, AdaptiveSolution};
use quantum_vdp::meanfield::{
    hysteresis_scan, phase_boundary, BoundaryPoint, solve_synchronized, unsynchronized_growth_rate, Branch, PhasePoint,
};
use quantum_vdp::wigner::{
    default_extent, mean_amplitude, phase_difference_distribution, phase_marginal, wigner_single_mode,
    PhaseDistribution, DEFAULT_RESOLUTION,
};
use quantum_vdp::{DissipatorSpec, HamiltonianSpec, VdpError};

use crate::config::{Config, ConfigError};

pub const SCENARIOS: [&str; 7] = [
    "single",
    "single-driven",
    "two-coupled",
    "meanfield",
    "classical-ensemble",
    "ion-plan",
    "vdp-ode",
];

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(VdpError),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<VdpError> for RunError {
    fn from(e: VdpError) -> Self {
        match e {
            // bad physical parameters are configuration errors
            VdpError::InvalidParameter(m) | VdpError::InvalidSpace(m) => RunError::Config(ConfigError(m)),
            other => RunError::Numerical(other),
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "invalid config: {e}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
        }
    }
}

impl RunError {
    /// 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub rows: usize,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub library_version: String,
    pub command: String,
    pub scenario: String,
    pub label: String,
    /// The configuration as given.
    pub config: BTreeMap<String, String>,
    /// Every parameter the run used, defaults included.
    pub parameters: BTreeMap<String, Value>,
    pub workers: usize,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub status: String,
    pub error: Option<String>,
    pub diagnostics: BTreeMap<String, Value>,
    pub outputs: Vec<OutputFile>,
}

/// State of one run: output directory plus manifest contents.
pub struct Run {
    pub dir: PathBuf,
    pub manifest: Manifest,
    started: Instant,
}

impl Run {
    pub fn new(command: &str, cfg: &Config, workers: usize) -> RunResult<Self> {
        let scenario = cfg.require::<String>("scenario")?;
        if !SCENARIOS.contains(&scenario.as_str()) {
            return Err(ConfigError(format!("unknown scenario `{scenario}`")).into());
        }
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let label = cfg.get::<String>("label")?.unwrap_or_else(|| format!("t{now}"));
        if label.is_empty() || label.contains(['/', '\\']) || label == ".." {
            return Err(ConfigError(format!("invalid label `{label}`")).into());
        }
        let root = cfg.get::<String>("out_dir")?.unwrap_or_else(|| "out".into());
        let dir = Path::new(&root).join(&scenario).join(&label);
        std::fs::create_dir_all(&dir).map_err(|e| RunError::Numerical(e.into()))?;
        Ok(Self {
            dir,
            manifest: Manifest {
                schema: "qvdp manifest v1".into(),
                tool_version: env!("CARGO_PKG_VERSION").into(),
                library_version: quantum_vdp::VERSION.into(),
                command: command.into(),
                scenario,
                label,
                config: cfg.entries().clone(),
                parameters: BTreeMap::new(),
                workers,
                started_unix: now,
                wall_time_s: 0.0,
                status: "running".into(),
                error: None,
                diagnostics: BTreeMap::new(),
                outputs: Vec::new(),
            },
            started: Instant::now(),
        })
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        self.manifest.parameters.insert(key.into(), json!(value));
    }

    pub fn diag(&mut self, key: &str, value: impl Serialize) {
        self.manifest.diagnostics.insert(key.into(), json!(value));
    }

    pub fn path(&self, file: &str) -> PathBuf {
        self.dir.join(file)
    }

    pub fn output(&mut self, file: &str, rows: usize) {
        self.manifest.outputs.push(OutputFile { file: file.into(), rows });
    }

    /// Writes `manifest.json`; called on success and on failure.
    pub fn finish(mut self, outcome: &RunResult<()>) -> std::io::Result<PathBuf> {
        self.manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        match outcome {
            Ok(()) => self.manifest.status = "ok".into(),
            Err(e) => {
                self.manifest.status = "failed".into();
                self.manifest.error = Some(e.to_string());
            }
        }
        let path = self.dir.join("manifest.json");
        write_json(&path, &self.manifest).map_err(|e| std::io::Error::other(e.to_string()))?;
        Ok(path)
    }
}

fn dissipator(cfg: &Config, run: &mut Run) -> RunResult<DissipatorSpec> {
    let kappa2 = cfg.positive("kappa2", None)?;
    run.param("kappa1", 1.0);
    run.param("kappa2", kappa2);
    Ok(DissipatorSpec::new(1.0, kappa2)?)
}

fn seed(cfg: &Config, run: &mut Run) -> RunResult<u64> {
    let s = cfg
        .get::<u64>("seed")?
        .ok_or_else(|| ConfigError("stochastic runs need an explicit `seed`".into()))?;
    run.param("seed", s);
    Ok(s)
}

pub fn simulate(cfg: &Config, run: &mut Run) -> RunResult<()> {
    match run.manifest.scenario.as_str() {
        "single" => single(cfg, run, false),
        "single-driven" => single(cfg, run, true),
        "two-coupled" => two_coupled(cfg, run),
        "meanfield" => meanfield_point(cfg, run),
        "classical-ensemble" => classical_ensemble(cfg, run),
        "ion-plan" => ion_plan(cfg, run).map(|_| ()),
        "vdp-ode" => vdp_ode(cfg, run),
        _ => unreachable!("scenario validated in Run::new"),
    }
}

pub fn sweep(cfg: &Config, run: &mut Run) -> RunResult<()> {
    match run.manifest.scenario.as_str() {
        "meanfield" => meanfield_sweep(cfg, run),
        "classical-ensemble" => classical_sweep(cfg, run),
        other => Err(ConfigError(format!("scenario `{other}` has no sweep; use meanfield or classical-ensemble")).into()),
    }
}

fn steady(cfg: &Config, run: &mut Run, modes: usize, diss: DissipatorSpec, ham: HamiltonianSpec) -> RunResult<AdaptiveSolution> {
    let n_start = cfg.get::<usize>("n_max")?;
    let sol = adaptive_steady_state(modes, diss, ham, n_start)?;
    run.param("n_max", sol.n_max);
    run.diag("top_population", sol.top_population);
    run.diag("steady_state_method", &sol.report.method);
    run.diag("steady_state_residual", sol.report.residual);
    let d = sol.rho.diagnostics();
    run.diag("hermiticity", d.hermiticity);
    run.diag("trace_error", d.trace_error);
    run.diag("min_eigenvalue", d.min_eigenvalue);
    Ok(sol)
}

fn write_phase(run: &mut Run, name: &str, dist: &PhaseDistribution, points: usize) -> RunResult<()> {
    let csv = format!("{name}.csv");
    let rows = write_phase_csv(&run.path(&csv), dist, points)?;
    run.output(&csv, rows);
    let json = format!("{name}.json");
    write_json(&run.path(&json), &PhaseJson::new(dist))?;
    run.output(&json, 1);
    let (peak_phi, peak) = dist.peak();
    let (_, trough) = dist.trough();
    run.diag(&format!("{name}_peak_phase"), peak_phi);
    run.diag(&format!("{name}_peak_to_trough"), peak / trough);
    Ok(())
}

fn single(cfg: &Config, run: &mut Run, driven: bool) -> RunResult<()> {
    let diss = dissipator(cfg, run)?;
    let ham = if driven {
        let e = cfg.positive("e", None)?;
        let delta = cfg.get_or("delta", 0.0)?;
        run.param("e", e);
        run.param("delta", delta);
        HamiltonianSpec::Drive { delta, e }
    } else {
        HamiltonianSpec::None
    };
    let sol = steady(cfg, run, 1, diss, ham)?;
    let rho = &sol.rho;

    let pops = rho.populations();
    let rows: Vec<Vec<f64>> = pops.iter().enumerate().map(|(n, &p)| vec![n as f64, p]).collect();
    let count = write_columns(&run.path("populations.csv"), "populations", &["n", "p"], &rows)?;
    run.output("populations.csv", count);
    let mean_n: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    run.diag("mean_number", mean_n);
    run.diag("mean_amplitude", mean_amplitude(rho)?);

    let extent = cfg.get::<f64>("extent")?.unwrap_or_else(|| default_extent(rho));
    let resolution = cfg.get_or("resolution", DEFAULT_RESOLUTION)?;
    if !(extent > 0.0) || resolution < 3 {
        return Err(ConfigError("need extent > 0 and resolution >= 3".into()).into());
    }
    run.param("extent", extent);
    run.param("resolution", resolution);
    let grid = wigner_single_mode(rho, extent, resolution)?;
    let count = write_wigner_csv(&run.path("wigner.csv"), &grid)?;
    run.output("wigner.csv", count);
    run.diag("wigner_mass", grid.mass());
    run.diag("wigner_min", grid.min());
    run.diag("wigner_radial_peak", grid.radial_peak(resolution / 2));
    run.diag("warnings", &grid.warnings);
    let (r, w) = grid.radial_profile(resolution / 2);
    let count = write_radial_csv(&run.path("radial.csv"), &r, &w)?;
    run.output("radial.csv", count);

    let points = cfg.get_or("phase_points", 360usize)?;
    run.param("phase_points", points);
    write_phase(run, "phase", &phase_marginal(rho)?, points)?;

    if cfg.get_or("classical", false)? {
        let e = if driven { Some(cfg.positive("e", None)?) } else { None };
        let mut params = LangevinParams::new(1.0, diss.kappa2)?;
        if let Some(e) = e {
            params = params.with_drive(cfg.get_or("delta", 0.0)?, e);
        }
        let ens = langevin(cfg, run, &params)?;
        let hist = ensemble_wigner_histogram(&ens, extent, resolution)?;
        let count = write_wigner_csv(&run.path("wigner_classical.csv"), &hist)?;
        run.output("wigner_classical.csv", count);
        run.diag("classical_tv_distance", grid.normalized().total_variation(&hist)?);
        run.diag("classical_radial_peak", hist.radial_peak(resolution / 2));
        run.diag("classical_warnings", &hist.warnings);
        let delta = cfg.get_or("delta", 0.0)?;
        if delta == 0.0 {
            let analytic = analytic_wc_grid(extent, resolution, 1.0, diss.kappa2, e);
            let count = write_wigner_csv(&run.path("wigner_analytic.csv"), &analytic)?;
            run.output("wigner_analytic.csv", count);
        }
        let angles: Vec<f64> = ens
            .post_burn_in()
            .flat_map(|t| (0..ens.n_realizations).map(move |r| (r, t)))
            .map(|(r, t)| ens.sample(r, t)[0].arg())
            .collect();
        let (dist, _) = PhaseDistribution::from_samples(&angles, 24);
        write_phase(run, "phase_classical", &dist, points)?;
    }
    Ok(())
}

/// Runs the Langevin ensemble described by the config's numerical keys.
fn langevin(cfg: &Config, run: &mut Run, params: &LangevinParams) -> RunResult<TrajectoryEnsemble> {
    let seed = seed(cfg, run)?;
    let realizations = cfg.get_or("realizations", 100usize)?;
    let burn_in = cfg.get_or("burn_in", 20.0)?;
    let sample_interval = cfg.positive("sample_interval", Some(1.0))?;
    let t_final = cfg.positive("t_final", Some(burn_in + 1000.0 * sample_interval))?;
    let dt = cfg.positive("dt", Some(params.max_dt()))?;
    if realizations == 0 {
        return Err(ConfigError("`realizations` must be at least 1".into()).into());
    }
    run.param("realizations", realizations);
    run.param("burn_in", burn_in);
    run.param("sample_interval", sample_interval);
    run.param("t_final", t_final);
    run.param("dt", dt);
    run.param("langevin", params);
    let recording = if params.n_oscillators > 2 && !cfg.get_or("records", false)? {
        Recording::MeanField
    } else {
        Recording::Oscillators
    };
    let opts = SampleOptions { burn_in, sample_interval, recording, initial: None };
    run.param("sampling", &opts);
    let ens = simulate_langevin(params, realizations, t_final, dt, seed, &opts)?;
    run.diag("post_burn_in_samples", ens.post_burn_in_count());
    if cfg.get_or("records", false)? {
        let n = write_records(&run.path("trajectories.bin"), &ens)?;
        run.output("trajectories.bin", n);
    }
    Ok(ens)
}

fn two_coupled(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let diss = dissipator(cfg, run)?;
    let v = cfg.positive("v", None)?;
    run.param("v", v);
    let sol = steady(cfg, run, 2, diss, HamiltonianSpec::Coupling { v })?;
    let points = cfg.get_or("phase_points", 360usize)?;
    run.param("phase_points", points);
    let dist = phase_difference_distribution(&sol.rho)?;
    run.diag("cos2_amplitude", dist.cosine_amplitude(2));
    write_phase(run, "phase_difference", &dist, points)?;

    if cfg.get_or("classical", false)? {
        let params = LangevinParams::new(1.0, diss.kappa2)?.with_pair_coupling(v);
        let ens = langevin(cfg, run, &params)?;
        let theta = phase_difference_samples(&ens, 0, 1)?;
        let (dist, _) = PhaseDistribution::from_samples(&theta, 24);
        run.diag("classical_cos2_amplitude", dist.cosine_amplitude(2));
        write_phase(run, "phase_difference_classical", &dist, points)?;
    }
    Ok(())
}

fn meanfield_point(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let diss = dissipator(cfg, run)?;
    let v = cfg.positive("v", None)?;
    run.param("v", v);
    let n_max = cfg.get::<usize>("n_max")?;
    let synced = solve_synchronized(diss, v, None, n_max);
    let rate = unsynchronized_growth_rate(diss, v, n_max)?;
    run.diag("unsynchronized_growth_rate", rate);
    let threshold = quantum_vdp::meanfield::SYNC_FRACTION * diss.classical_occupation().sqrt();
    let sync_point = match &synced {
        Ok(s) if s.r > threshold => {
            run.diag("synchronized", s);
            PhasePoint { v, kappa2: diss.kappa2, seed: Branch::Synchronized, branch: Branch::Synchronized, r: s.r, converged: true }
        }
        other => {
            if let Err(e) = other {
                run.diag("synchronized_search", e.to_string());
            }
            PhasePoint { v, kappa2: diss.kappa2, seed: Branch::Synchronized, branch: Branch::Unsynchronized, r: 0.0, converged: true }
        }
    };
    let unsync_point =
        PhasePoint { v, kappa2: diss.kappa2, seed: Branch::Unsynchronized, branch: Branch::Unsynchronized, r: 0.0, converged: rate < 0.0 };
    let count = write_phase_diagram_csv(&run.path("phase_diagram.csv"), &[sync_point, unsync_point])?;
    run.output("phase_diagram.csv", count);
    Ok(())
}

fn kappa2_values(cfg: &Config, run: &mut Run) -> RunResult<Vec<f64>> {
    let list = match cfg.list("kappa2_list")? {
        Some(l) => l,
        None => vec![cfg.positive("kappa2", None)?],
    };
    if list.is_empty() || list.iter().any(|&k| !(k > 0.0 && k.is_finite())) {
        return Err(ConfigError("kappa2 values must be positive".into()).into());
    }
    run.param("kappa1", 1.0);
    run.param("kappa2_list", &list);
    Ok(list)
}

fn bracket(cfg: &Config, run: &mut Run) -> RunResult<(f64, f64, f64)> {
    let lo = cfg.positive("v_min", None)?;
    let hi = cfg.positive("v_max", None)?;
    if hi <= lo {
        return Err(ConfigError(format!("need v_max > v_min, got [{lo}, {hi}]")).into());
    }
    let rel_tol = cfg.positive("rel_tol", Some(0.02))?;
    run.param("v_min", lo);
    run.param("v_max", hi);
    run.param("rel_tol", rel_tol);
    Ok((lo, hi, rel_tol))
}

fn meanfield_sweep(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let kappa2s = kappa2_values(cfg, run)?;
    let mut points = Vec::new();
    if let Some(vs) = cfg.list("v_values")? {
        run.param("v_values", &vs);
        let scans: Vec<_> = {
            use rayon::prelude::*;
            kappa2s
                .par_iter()
                .map(|&k2| DissipatorSpec::new(1.0, k2).and_then(|d| hysteresis_scan(d, &vs)))
                .collect::<Result<_, _>>()?
        };
        for scan in scans {
            for (s, u) in scan {
                points.push(s);
                points.push(u);
            }
        }
        let count = write_phase_diagram_csv(&run.path("phase_diagram.csv"), &points)?;
        run.output("phase_diagram.csv", count);
    }
    if cfg.get_or("boundary", false)? {
        let (lo, hi, rel_tol) = bracket(cfg, run)?;
        let mut found = Vec::new();
        let mut missing = Vec::new();
        for &k2 in &kappa2s {
            match phase_boundary(1.0, &[k2], (lo, hi), rel_tol) {
                Ok(mut b) => found.append(&mut b),
                Err(VdpError::Bracket(msg)) => {
                    // no finite critical coupling: recorded as inf
                    missing.push(json!({ "kappa2": k2, "reason": msg }));
                    found.push(BoundaryPoint {
                        kappa2: k2,
                        v_critical: f64::INFINITY,
                        tolerance: f64::NAN,
                        r_above: 0.0,
                        first_order: false,
                        evaluations: Vec::new(),
                        widened: true,
                    });
                }
                Err(e) => return Err(e.into()),
            }
        }
        run.diag("boundary", &found);
        run.diag("no_transition", &missing);
        let count = write_boundary_csv(&run.path("boundary.csv"), &found)?;
        run.output("boundary.csv", count);
    } else if !cfg.contains("v_values") {
        return Err(ConfigError("meanfield sweep needs `v_values` or `boundary = true`".into()).into());
    }
    Ok(())
}

fn classical_sweep(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let kappa2s = kappa2_values(cfg, run)?;
    let (lo, hi, rel_tol) = bracket(cfg, run)?;
    let opts = ThresholdOptions {
        n_oscillators: cfg.get_or("n", 3000usize)?,
        t_final: cfg.get::<f64>("t_final")?,
        dt: cfg.get::<f64>("dt")?,
        seed: seed(cfg, run)?,
        rel_tol,
        ..ThresholdOptions::default()
    };
    run.param("threshold", &opts);
    let mut rows = Vec::new();
    let mut results = Vec::new();
    for &k2 in &kappa2s {
        let res = classical_sync_threshold(1.0, k2, lo, hi, &opts)?;
        rows.push(vec![k2, res.v_critical.unwrap_or(f64::INFINITY), res.tolerance, res.v_lower_bound]);
        results.push(res);
    }
    run.diag("thresholds", &results);
    let count = write_columns(
        &run.path("classical_boundary.csv"),
        "classical_boundary",
        &["kappa2", "v_critical", "tolerance", "v_lower_bound"],
        &rows,
    )?;
    run.output("classical_boundary.csv", count);
    Ok(())
}

fn classical_ensemble(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let diss = dissipator(cfg, run)?;
    let n = cfg.get_or("n", 1usize)?;
    let mut params = LangevinParams::new(1.0, diss.kappa2)?;
    if let Some(e) = cfg.get::<f64>("e")? {
        params = params.with_drive(cfg.get_or("delta", 0.0)?, e);
    }
    params = match (n, cfg.get::<f64>("v")?) {
        (0, _) => return Err(ConfigError("`n` must be at least 1".into()).into()),
        (1, None) => params,
        (1, Some(_)) => return Err(ConfigError("coupling `v` needs n >= 2".into()).into()),
        (2, v) => params.with_pair_coupling(v.unwrap_or(0.0)),
        (n, v) => params.with_global_coupling(v.unwrap_or(0.0), n)?,
    };
    let ens = langevin(cfg, run, &params)?;
    let points = cfg.get_or("phase_points", 360usize)?;
    run.param("phase_points", points);
    match n {
        1 => {
            let r_cl = params.classical_amplitude();
            let extent = cfg.get::<f64>("extent")?.unwrap_or(2.0 + 2.0 * (r_cl * r_cl + 1.0).sqrt());
            let resolution = cfg.get_or("resolution", DEFAULT_RESOLUTION)?;
            run.param("extent", extent);
            run.param("resolution", resolution);
            let hist = ensemble_wigner_histogram(&ens, extent, resolution)?;
            let count = write_wigner_csv(&run.path("wigner_classical.csv"), &hist)?;
            run.output("wigner_classical.csv", count);
            run.diag("radial_peak", hist.radial_peak(resolution / 2));
            run.diag("warnings", &hist.warnings);
            let angles: Vec<f64> = ens
                .post_burn_in()
                .flat_map(|t| (0..ens.n_realizations).map(move |r| (r, t)))
                .map(|(r, t)| ens.sample(r, t)[0].arg())
                .collect();
            let (dist, _) = PhaseDistribution::from_samples(&angles, 24);
            write_phase(run, "phase_classical", &dist, points)?;
        }
        2 => {
            let theta = phase_difference_samples(&ens, 0, 1)?;
            let (dist, _) = PhaseDistribution::from_samples(&theta, 24);
            run.diag("cos2_amplitude", dist.cosine_amplitude(2));
            write_phase(run, "phase_difference_classical", &dist, points)?;
        }
        _ => {
            let op = steady_order_parameter(&ens)?;
            run.diag("order_parameter", &op);
            let series = order_parameter_series(&ens)?;
            let rows: Vec<Vec<f64>> = ens
                .times
                .iter()
                .enumerate()
                .map(|(k, &t)| vec![t, series.iter().map(|s| s[k]).sum::<f64>() / series.len() as f64])
                .collect();
            let count = write_columns(&run.path("order_parameter.csv"), "order_parameter", &["t", "r"], &rows)?;
            run.output("order_parameter.csv", count);
        }
    }
    Ok(())
}

/// Rates report; also used by the `ion-plan` subcommand.
pub fn ion_plan(cfg: &Config, run: &mut Run) -> RunResult<String> {
    let d = IonParams::ytterbium_171();
    let p = IonParams {
        wavelength: cfg.positive("wavelength_nm", Some(d.wavelength * 1e9))? * 1e-9,
        trap_frequency: hz_to_angular(cfg.positive("trap_frequency_hz", Some(angular_to_hz(d.trap_frequency)))?),
        beam_angle: cfg.get_or("beam_angle_deg", d.beam_angle.to_degrees())?.to_radians(),
        mass_number: cfg.positive("mass_number", Some(d.mass_number))?,
        omega1: hz_to_angular(cfg.positive("omega1_hz", Some(angular_to_hz(d.omega1)))?),
        omega2: hz_to_angular(cfg.positive("omega2_hz", Some(angular_to_hz(d.omega2)))?),
        omega_c: hz_to_angular(cfg.positive("omega_c_hz", Some(angular_to_hz(d.omega_c)))?),
        delta_c: hz_to_angular(cfg.positive("delta_c_hz", Some(angular_to_hz(d.delta_c)))?),
    };
    let tol = cfg.get_or("lamb_dicke_tolerance", DEFAULT_LAMB_DICKE_TOLERANCE)?;
    run.param("ion", p);
    run.param("lamb_dicke_tolerance", tol);
    let mut rates = effective_rates(&p)?;
    rates.n_max_lamb_dicke = lamb_dicke_budget(rates.eta, tol)?;
    run.diag("rates", rates);
    write_json(&run.path("rates.json"), &rates)?;
    run.output("rates.json", 1);
    let (k2, v) = rates.in_units_of_kappa1();
    let report = format!(
        "Lamb-Dicke parameter  eta   = {:.6}\n\
         one-phonon gain       2k1   = 2pi x {:.1} Hz\n\
         two-phonon loss       2k2   = 2pi x {:.1} Hz   (k2 = {:.5} k1)\n\
         mode coupling         V     = 2pi x {:.1} Hz   (V = {:.5} k1)\n\
         Lamb-Dicke budget     n_max = {}   (eta^2(2n+1) <= {})\n",
        rates.eta,
        angular_to_hz(2.0 * rates.kappa1),
        angular_to_hz(2.0 * rates.kappa2),
        k2,
        angular_to_hz(rates.v),
        v,
        rates.n_max_lamb_dicke,
        tol
    );
    std::fs::write(run.path("report.txt"), &report).map_err(|e| RunError::Numerical(e.into()))?;
    run.output("report.txt", report.lines().count());
    Ok(report)
}

fn vdp_ode(cfg: &Config, run: &mut Run) -> RunResult<()> {
    let x0 = cfg.get_or("x0", 0.1)?;
    let xdot0 = cfg.get_or("xdot0", 0.0)?;
    let omega0 = cfg.positive("omega0", Some(1.0))?;
    let epsilon = cfg.positive("epsilon", Some(0.1))?;
    let t_final = cfg.positive("t_final", Some(200.0 * PI / omega0))?;
    let dt = cfg.positive("dt", Some(0.01 / omega0))?;
    for (k, v) in [("x0", x0), ("xdot0", xdot0), ("omega0", omega0), ("epsilon", epsilon), ("t_final", t_final), ("dt", dt)] {
        run.param(k, v);
    }
    let traj = integrate_vdp_ode(ClassicalVdpState::new(x0, xdot0, omega0, epsilon)?, t_final, dt)?;
    let stride = (traj.times.len() / 20_000).max(1);
    run.param("output_stride", stride);
    let rows: Vec<Vec<f64>> = (0..traj.times.len())
        .step_by(stride)
        .map(|k| vec![traj.times[k], traj.x[k], traj.xdot[k]])
        .collect();
    let count = write_columns(&run.path("trajectory.csv"), "trajectory", &["t", "x", "xdot"], &rows)?;
    run.output("trajectory.csv", count);
    run.diag("late_amplitude", traj.amplitude(0.1));
    run.diag("limit_cycle_amplitude", 2.0);
    run.diag("period", TAU / omega0);
    Ok(())
}
