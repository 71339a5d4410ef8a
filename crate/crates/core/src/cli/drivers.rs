//! Experiment drivers behind the CLI subcommands: single runs, the
//! regularisation and truncation sweeps, and the manufactured-solution
//! ladders. All file output funnels through here.

use super::config::{ForceConfig, InitialSpec, RunConfig};
use crate::checkpoint;
use crate::constitutive::{ConstitutiveParams, RadialProfile, Regularisation};
use crate::diagnostics::{self, format_g17, AprioriReport, DiagnosticsRecord};
use crate::mms::{ManufacturedSolution, MmsForce};
use crate::solver::{
    self, ForceSpec, InitialData, RunOptions, RunSink, SolverState, TimeIntegrator,
};
use crate::spectral::{grid_mean, SpectralConfig, SpectralField};
use crate::tensors::SymTensorField;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(#[from] super::config::ConfigError),
    #[error("spectral setup: {0}")]
    Spectral(#[from] crate::spectral::SpectralError),
    #[error("constitutive setup: {0}")]
    Constitutive(#[from] crate::constitutive::ConstitutiveError),
    #[error("manufactured setup: {0}")]
    Mms(#[from] crate::mms::MmsError),
    #[error("run: {0}")]
    Run(#[from] solver::RunError),
    #[error("step: {0}")]
    Step(#[from] solver::StepError),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] checkpoint::CheckpointError),
    #[error("io at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Deterministic seeded field: coefficients `~ U(-1,1) |k|^{-3}` per mode
/// and component, in canonical order.
pub fn random_decay_field(seed: u64, config: &SpectralConfig) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = SpectralField::zeros(*config);
    let modes = config.canonical_modes();
    for c in 0..config.dim() {
        let coeffs = f.component_coeffs_mut(c);
        for (pos, k) in modes.iter().enumerate() {
            let knorm = ((k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) as f64).sqrt();
            let amp = knorm.powf(-3.0);
            coeffs[2 * pos] = amp * rng.gen_range(-1.0..1.0);
            coeffs[2 * pos + 1] = amp * rng.gen_range(-1.0..1.0);
        }
    }
    f
}

fn single_mode_field(config: &SpectralConfig, mode: [i64; 3], component: usize, amplitude: f64) -> SpectralField {
    let mut f = SpectralField::zeros(*config);
    f.set_mode(component, mode, 0.0, amplitude / std::f64::consts::SQRT_2);
    f
}

/// Builds the initial data named by the config, measured and (if needed)
/// rescaled through the admissibility check.
pub fn build_initial_data(
    config: &RunConfig,
    spectral: &SpectralConfig,
    params: &ConstitutiveParams,
) -> Result<InitialData, CliError> {
    let zero = SpectralField::zeros(*spectral);
    let (u0, v0) = match &config.ic {
        InitialSpec::Zero => (zero.clone(), zero),
        InitialSpec::Random { c_star } => {
            let mut u0 = random_decay_field(config.seed, spectral);
            let probe = solver::prepare_initial_data(&u0, &zero, params, spectral);
            if probe.c_star > 0.0 {
                u0.scale_in_place(c_star / probe.c_star);
            }
            (u0, zero)
        }
        InitialSpec::SingleMode { apply_to_velocity, mode, component, amplitude } => {
            let f = single_mode_field(spectral, *mode, *component, *amplitude);
            if *apply_to_velocity {
                (zero, f)
            } else {
                (f, zero)
            }
        }
    };
    Ok(solver::prepare_initial_data(&u0, &v0, params, spectral))
}

/// Resolves the force description against the run space.
pub fn build_force(
    config: &RunConfig,
    spectral: &SpectralConfig,
    params: &ConstitutiveParams,
) -> Result<ForceSpec, CliError> {
    Ok(match &config.force {
        ForceConfig::Zero => ForceSpec::Zero,
        ForceConfig::SingleMode { mode, component, amplitude, omega } => ForceSpec::SingleMode {
            mode: *mode,
            component: *component,
            amplitude: *amplitude,
            omega: *omega,
        },
        ForceConfig::Manufactured { amplitude, omega } => {
            let sol = ManufacturedSolution::new(*amplitude, *omega, *params);
            MmsForce::new(sol, *spectral)?.into_force_spec()
        }
        ForceConfig::Tabulated { path } => {
            let mut file = File::open(path).map_err(io_err(path))?;
            ForceSpec::Tabulated(checkpoint::read_force_table(&mut file)?)
        }
    })
}

/// CSV + checkpoint sink for a run directory.
struct DirectorySink {
    csv: BufWriter<File>,
    csv_path: PathBuf,
    out_dir: PathBuf,
    checkpoints: usize,
}

impl DirectorySink {
    fn create(out_dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
        let csv_path = out_dir.join("diagnostics.csv");
        let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
        let mut csv = BufWriter::new(file);
        writeln!(csv, "{}", DiagnosticsRecord::CSV_HEADER).map_err(io_err(&csv_path))?;
        Ok(DirectorySink { csv, csv_path, out_dir: out_dir.to_path_buf(), checkpoints: 0 })
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.csv.flush().map_err(io_err(&self.csv_path))
    }
}

impl RunSink for DirectorySink {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> std::io::Result<()> {
        writeln!(self.csv, "{}", record.csv_row())
    }

    fn on_checkpoint(&mut self, state: &SolverState) -> std::io::Result<()> {
        self.checkpoints += 1;
        let path = self.out_dir.join(format!("checkpoint_{:06}.slvc", state.step_index));
        let mut file = BufWriter::new(File::create(path)?);
        checkpoint::write_checkpoint(&mut file, state)?;
        file.flush()
    }
}

pub struct RunSummary {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SolverState,
    pub steps: u64,
    pub max_subdivision: u32,
    pub out_dir: PathBuf,
}

fn solver_params(config: &RunConfig) -> Result<ConstitutiveParams, CliError> {
    let n = match config.n {
        Regularisation::Finite(n) => n,
        Regularisation::Unregularised => {
            return Err(CliError::Invalid(
                "time stepping requires a finite n; the unregularised map is reached only by sweep-n comparisons"
                    .into(),
            ))
        }
    };
    Ok(ConstitutiveParams::regularised(config.a, config.alpha, n)?)
}

/// Executes the configured run and writes `diagnostics.csv`, checkpoints
/// and the final-state snapshot under the output directory.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary, CliError> {
    let spectral = config.spectral_config()?;
    let params = solver_params(config)?;
    let initial = build_initial_data(config, &spectral, &params)?;
    let force = build_force(config, &spectral, &params)?;
    let opts = RunOptions {
        t_final: config.t_final,
        dt: config.dt,
        method: config.method,
        cadence: config.cadence,
        checkpoint_every: config.checkpoint_every,
    };
    let mut sink = DirectorySink::create(&config.out_dir)?;
    let result = solver::run(&initial, &params, &force, &opts, &mut sink)?;
    sink.finish()?;
    let snap_path = config.out_dir.join("final_state.slvf");
    let mut snap = BufWriter::new(File::create(&snap_path).map_err(io_err(&snap_path))?);
    checkpoint::write_snapshot(&mut snap, &result.final_state).map_err(io_err(&snap_path))?;
    snap.flush().map_err(io_err(&snap_path))?;
    Ok(RunSummary {
        records: result.records,
        final_state: result.final_state,
        steps: result.steps,
        max_subdivision: result.max_subdivision,
        out_dir: config.out_dir.clone(),
    })
}

/// Sink wrapper that additionally snapshots the stress field at every
/// cadence point, for cross-run comparisons.
struct StressRecordingSink<'a> {
    inner: &'a mut dyn RunSink,
    times: Vec<f64>,
    stresses: Vec<SymTensorField>,
}

impl RunSink for StressRecordingSink<'_> {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> std::io::Result<()> {
        self.inner.on_record(record)
    }

    fn on_checkpoint(&mut self, state: &SolverState) -> std::io::Result<()> {
        self.inner.on_checkpoint(state)
    }

    fn on_cadence_state(&mut self, state: &SolverState) -> std::io::Result<()> {
        let fields = solver::constitutive_fields(state)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        self.times.push(state.t);
        self.stresses.push(fields.stress);
        Ok(())
    }
}

pub struct SweepEntry {
    pub n: u32,
    pub records: Vec<DiagnosticsRecord>,
    pub apriori: AprioriReport,
    /// `|| T/(n(1+|T|^{1-1/n})) ||_{L^2(Q)}`, the regulariser magnitude.
    pub regulariser_l2: f64,
    pub t_l1pd_sup: f64,
    pub final_state: SolverState,
}

pub struct SweepPair {
    pub n_lo: u32,
    pub n_hi: u32,
    /// `|| T^{n_hi} - T^{n_lo} ||_{L^1(Q)}` on the shared cadence lattice.
    pub stress_l1_diff: f64,
    /// `|| v^{n_hi} - v^{n_lo} ||_{L^2}` at the final time.
    pub velocity_l2_diff: f64,
}

pub struct SweepNReport {
    pub entries: Vec<SweepEntry>,
    pub pairs: Vec<SweepPair>,
}

fn time_trapezoid(times: &[f64], values: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..times.len() {
        acc += 0.5 * (values[i - 1] + values[i]) * (times[i] - times[i - 1]);
    }
    acc
}

/// Runs the identical configuration for each `n`, comparing successive
/// stresses in `L^1(Q)` and collecting the a priori quantities.
pub fn cmd_sweep_n(config: &RunConfig, n_list: &[u32]) -> Result<SweepNReport, CliError> {
    if n_list.len() < 2 {
        return Err(CliError::Invalid("n_list needs at least two entries".into()));
    }
    if n_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Invalid("n_list must be ascending".into()));
    }
    let spectral = config.spectral_config()?;
    let mut entries: Vec<SweepEntry> = Vec::new();
    let mut pairs = Vec::new();
    let mut prev: Option<(u32, Vec<f64>, Vec<SymTensorField>, SpectralField)> = None;
    for &n in n_list {
        let params = ConstitutiveParams::regularised(config.a, config.alpha, n)?;
        let initial = build_initial_data(config, &spectral, &params)?;
        let force = build_force(config, &spectral, &params)?;
        let opts = RunOptions {
            t_final: config.t_final,
            dt: config.dt,
            method: config.method,
            cadence: config.cadence,
            checkpoint_every: 0,
        };
        let out_dir = config.out_dir.join(format!("n_{n:03}"));
        let mut dir_sink = DirectorySink::create(&out_dir)?;
        let mut sink = StressRecordingSink { inner: &mut dir_sink, times: Vec::new(), stresses: Vec::new() };
        let result = solver::run(&initial, &params, &force, &opts, &mut sink)?;
        let (times, stresses) = (sink.times, sink.stresses);
        dir_sink.finish()?;

        // regulariser magnitude over Q: reg(s) = f_n(s) - f(s)
        let reg_profile = RadialProfile::regularised(&params)?;
        let bounded = RadialProfile::bounded(&params);
        let mut reg_sq = Vec::with_capacity(times.len());
        for stress in &stresses {
            let norms = stress.frobenius_plane();
            let mut acc = 0.0;
            for &s in &norms {
                let r = reg_profile.value(s) - bounded.value(s);
                acc += r * r;
            }
            reg_sq.push(acc / norms.len() as f64);
        }
        let regulariser_l2 = time_trapezoid(&times, &reg_sq).sqrt();
        let apriori = diagnostics::apriori_report(&result.records)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let t_l1pd_sup = result.records.iter().map(|r| r.t_l1pd).fold(0.0, f64::max);

        if let Some((n_lo, prev_times, prev_stresses, prev_v)) = &prev {
            if prev_times.len() != times.len() {
                return Err(CliError::Invalid("sweep runs disagree on cadence".into()));
            }
            let mut diffs = Vec::with_capacity(times.len());
            for (a, b) in prev_stresses.iter().zip(stresses.iter()) {
                diffs.push(grid_mean(&a.sub(b).frobenius_plane()));
            }
            let stress_l1_diff = time_trapezoid(&times, &diffs);
            let velocity_l2_diff = result.final_state.v.sub(prev_v).l2_norm();
            pairs.push(SweepPair { n_lo: *n_lo, n_hi: n, stress_l1_diff, velocity_l2_diff });
        }
        prev = Some((n, times, stresses, result.final_state.v.clone()));
        entries.push(SweepEntry {
            n,
            records: result.records,
            apriori,
            regulariser_l2,
            t_l1pd_sup,
            final_state: result.final_state,
        });
    }
    let report = SweepNReport { entries, pairs };
    write_sweep_n_tables(config, &report)?;
    Ok(report)
}

fn write_sweep_n_tables(config: &RunConfig, report: &SweepNReport) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let path = config.out_dir.join("sweep_n.csv");
    let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    let head: Vec<&str> = vec![
        "n",
        "reg_l2_Q",
        "t_l1pd_sup",
        "sup_v_l2",
        "sup_strain_rate",
        "t_l1_q",
        "sup_t_l1me",
        "grad_diss_total",
        "sup_accel_l2",
    ];
    writeln!(f, "{}", head.join(",")).map_err(io_err(&path))?;
    for e in &report.entries {
        let ap = &e.apriori;
        let cols = [
            e.n as f64,
            e.regulariser_l2,
            e.t_l1pd_sup,
            ap.sup_v_l2,
            ap.sup_strain_rate,
            ap.t_l1_q,
            ap.sup_t_l1me,
            ap.grad_diss_total,
            ap.sup_accel_l2,
        ];
        let row: Vec<String> = cols.iter().map(|v| format_g17(*v)).collect();
        writeln!(f, "{}", row.join(",")).map_err(io_err(&path))?;
    }
    f.flush().map_err(io_err(&path))?;

    let path2 = config.out_dir.join("sweep_n_pairs.csv");
    let mut f2 = BufWriter::new(File::create(&path2).map_err(io_err(&path2))?);
    writeln!(f2, "n_lo,n_hi,stress_l1_diff,velocity_l2_diff").map_err(io_err(&path2))?;
    for p in &report.pairs {
        writeln!(
            f2,
            "{},{},{},{}",
            p.n_lo,
            p.n_hi,
            format_g17(p.stress_l1_diff),
            format_g17(p.velocity_l2_diff)
        )
        .map_err(io_err(&path2))?;
    }
    f2.flush().map_err(io_err(&path2))
}

pub struct SweepMEntry {
    pub m: usize,
    pub records: Vec<DiagnosticsRecord>,
    pub apriori: AprioriReport,
    pub final_state: SolverState,
}

pub struct SweepMPair {
    pub m_lo: usize,
    pub m_hi: usize,
    pub u_l2_diff: f64,
    pub v_l2_diff: f64,
}

pub struct SweepMReport {
    pub entries: Vec<SweepMEntry>,
    pub pairs: Vec<SweepMPair>,
    /// Per a-priori entry: max/min across the sweep.
    pub diagnostic_spreads: Vec<(&'static str, f64)>,
}

/// Runs the configuration at each truncation degree (default grid per
/// degree), comparing final-time fields on the common mode set.
pub fn cmd_sweep_m(config: &RunConfig, m_list: &[usize]) -> Result<SweepMReport, CliError> {
    if m_list.is_empty() {
        return Err(CliError::Invalid("m_list must be nonempty".into()));
    }
    if m_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(CliError::Invalid("m_list must be ascending".into()));
    }
    let params = solver_params(config)?;
    let mut entries: Vec<SweepMEntry> = Vec::new();
    let mut pairs = Vec::new();
    for &m in m_list {
        let spectral = SpectralConfig::with_default_grid(config.dim, m)?;
        let initial = build_initial_data(config, &spectral, &params)?;
        let force = build_force(config, &spectral, &params)?;
        let opts = RunOptions {
            t_final: config.t_final,
            dt: config.dt,
            method: config.method,
            cadence: config.cadence,
            checkpoint_every: 0,
        };
        let out_dir = config.out_dir.join(format!("m_{m:03}"));
        let mut sink = DirectorySink::create(&out_dir)?;
        let result = solver::run(&initial, &params, &force, &opts, &mut sink)?;
        sink.finish()?;
        let apriori = diagnostics::apriori_report(&result.records)
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        if let Some(prev) = entries.last() {
            let big = *result.final_state.config();
            let u_prev = prev.final_state.u.project_to(big);
            let v_prev = prev.final_state.v.project_to(big);
            pairs.push(SweepMPair {
                m_lo: prev.m,
                m_hi: m,
                u_l2_diff: result.final_state.u.sub(&u_prev).l2_norm(),
                v_l2_diff: result.final_state.v.sub(&v_prev).l2_norm(),
            });
        }
        entries.push(SweepMEntry { m, records: result.records, apriori, final_state: result.final_state });
    }
    let mut diagnostic_spreads = Vec::new();
    if let Some(first) = entries.first() {
        for (idx, (name, _)) in first.apriori.entries().iter().enumerate() {
            let vals: Vec<f64> = entries.iter().map(|e| e.apriori.entries()[idx].1).collect();
            let max = vals.iter().cloned().fold(f64::MIN, f64::max);
            let min = vals.iter().cloned().fold(f64::MAX, f64::min);
            let spread = if min > 1e-300 { max / min } else if max <= 1e-12 { 1.0 } else { f64::INFINITY };
            diagnostic_spreads.push((*name, spread));
        }
    }
    let report = SweepMReport { entries, pairs, diagnostic_spreads };
    write_sweep_m_tables(config, &report)?;
    Ok(report)
}

fn write_sweep_m_tables(config: &RunConfig, report: &SweepMReport) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let path = config.out_dir.join("sweep_m.csv");
    let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    writeln!(f, "m_lo,m_hi,u_l2_diff,v_l2_diff").map_err(io_err(&path))?;
    for p in &report.pairs {
        writeln!(f, "{},{},{},{}", p.m_lo, p.m_hi, format_g17(p.u_l2_diff), format_g17(p.v_l2_diff))
            .map_err(io_err(&path))?;
    }
    f.flush().map_err(io_err(&path))
}

pub struct MmsLadderPoint {
    pub dt: f64,
    pub err_u: f64,
    pub err_v: f64,
}

pub struct MmsReport {
    pub temporal: Vec<MmsLadderPoint>,
    pub temporal_order_u: f64,
    pub temporal_order_v: f64,
    pub spatial: Vec<(usize, f64)>,
    pub spatial_drop: f64,
}

/// Fixed-step integration against the manufactured force, accumulating the
/// space-time error; no guard subdivision so the ladder isolates `dt`.
fn mms_error_run(
    sol: &ManufacturedSolution,
    run_config: &SpectralConfig,
    force: &ForceSpec,
    t_final: f64,
    dt: f64,
    method: TimeIntegrator,
) -> Result<(f64, f64), CliError> {
    let params = sol.params;
    let u0 = sol.exact_u(0.0, run_config);
    let v0 = sol.exact_v(0.0, run_config);
    let mut state = SolverState::new(u0, v0, params);
    let steps = (t_final / dt).round() as u64;
    let mut err_u_sq = 0.0;
    let mut err_v_sq = 0.0;
    for k in 0..steps {
        let outcome = solver::step(&state, dt, force, method)?;
        state = outcome.state;
        state.t = (k + 1) as f64 * dt;
        let eu = state.u.sub(&sol.exact_u(state.t, run_config)).l2_norm();
        let ev = state.v.sub(&sol.exact_v(state.t, run_config)).l2_norm();
        err_u_sq += eu * eu * dt;
        err_v_sq += ev * ev * dt;
    }
    Ok((err_u_sq.sqrt(), err_v_sq.sqrt()))
}

fn fit_order(points: &[(f64, f64)]) -> f64 {
    // least-squares slope of log err against log dt
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (dt, err) in points {
        let x = dt.ln();
        let y = err.max(1e-300).ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Temporal ladder with the force evaluated on the run grid (exact in
/// space), then the spatial ladder against a fixed reference-resolution
/// force at small `dt`.
pub fn cmd_mms(config: &RunConfig) -> Result<MmsReport, CliError> {
    let params = solver_params(config)?;
    let sol = ManufacturedSolution::new(config.mms_amplitude, config.mms_omega, params);

    // temporal ladder on the configured space
    let run_space = config.spectral_config()?;
    let self_force = MmsForce::new(sol, run_space)?.into_force_spec();
    let mut temporal = Vec::new();
    for &dt in &config.mms_dt_list {
        let (err_u, err_v) = mms_error_run(&sol, &run_space, &self_force, config.t_final, dt, config.method)?;
        temporal.push(MmsLadderPoint { dt, err_u, err_v });
    }
    let temporal_order_u = fit_order(&temporal.iter().map(|p| (p.dt, p.err_u)).collect::<Vec<_>>());
    let temporal_order_v = fit_order(&temporal.iter().map(|p| (p.dt, p.err_v)).collect::<Vec<_>>());

    // spatial ladder against the reference force
    let ref_space = SpectralConfig::with_default_grid(config.dim, config.mms_m_ref)?;
    let ref_force = MmsForce::new(sol, ref_space)?.into_force_spec();
    let mut spatial = Vec::new();
    for &m in &config.m_list {
        let space = SpectralConfig::with_default_grid(config.dim, m)?;
        let (err_u, _) = mms_error_run(
            &sol,
            &space,
            &ref_force,
            0.5 * config.t_final,
            config.mms_dt_spatial,
            config.method,
        )?;
        spatial.push((m, err_u));
    }
    let spatial_drop = if spatial.len() >= 2 {
        let first = spatial.first().unwrap().1;
        let last = spatial.last().unwrap().1;
        if last > 0.0 {
            first / last
        } else {
            f64::INFINITY
        }
    } else {
        1.0
    };

    let report = MmsReport { temporal, temporal_order_u, temporal_order_v, spatial, spatial_drop };
    write_mms_table(config, &report)?;
    Ok(report)
}

fn write_mms_table(config: &RunConfig, report: &MmsReport) -> Result<(), CliError> {
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let path = config.out_dir.join("mms.csv");
    let mut f = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    writeln!(f, "kind,param,err_u,err_v").map_err(io_err(&path))?;
    for p in &report.temporal {
        writeln!(f, "temporal,{},{},{}", format_g17(p.dt), format_g17(p.err_u), format_g17(p.err_v))
            .map_err(io_err(&path))?;
    }
    for (m, err) in &report.spatial {
        writeln!(f, "spatial,{},{},", m, format_g17(*err)).map_err(io_err(&path))?;
    }
    writeln!(f, "order,,{},{}", format_g17(report.temporal_order_u), format_g17(report.temporal_order_v))
        .map_err(io_err(&path))?;
    f.flush().map_err(io_err(&path))
}
