//! `key = value` run configuration.
//!
//! One assignment per line, `#` comments, unknown keys are hard errors.
//! Defaults: `method = rk4`, `cadence = 10 dt`, `seed = 0`, grid shape the
//! smallest admissible power of two, experiment lists as documented in the
//! README.

use crate::constitutive::Regularisation;
use crate::solver::TimeIntegrator;
use crate::spectral::SpectralConfig;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: cannot parse value for `{key}`: {value}")]
    BadValue { line: usize, key: String, value: String },
    #[error("line {line}: expected `key = value`")]
    NotAnAssignment { line: usize },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
    #[error("key `{key}` violates: {constraint}")]
    Constraint { key: &'static str, constraint: String },
}

/// Initial-data specification.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Zero,
    /// Seeded coefficients with `|k|^-3` decay on `u0` (and `v0 = 0`),
    /// rescaled so the measured `C_*` equals the target.
    Random { c_star: f64 },
    /// `A sin(2 pi k.x) e_component` assigned to `u0` or `v0`.
    SingleMode {
        apply_to_velocity: bool,
        mode: [i64; 3],
        component: usize,
        amplitude: f64,
    },
}

/// Force specification (resolved to a `ForceSpec` by the drivers).
#[derive(Clone, Debug, PartialEq)]
pub enum ForceConfig {
    Zero,
    SingleMode {
        mode: [i64; 3],
        component: usize,
        amplitude: f64,
        omega: f64,
    },
    Manufactured { amplitude: f64, omega: f64 },
    Tabulated { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub m: usize,
    pub grid_shape: Vec<usize>,
    pub a: f64,
    pub alpha: f64,
    pub n: Regularisation,
    pub t_final: f64,
    pub dt: f64,
    pub method: TimeIntegrator,
    pub ic: InitialSpec,
    pub force: ForceConfig,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub cadence: f64,
    pub checkpoint_every: u64,
    pub n_list: Vec<u32>,
    pub m_list: Vec<usize>,
    pub mms_amplitude: f64,
    pub mms_omega: f64,
    pub mms_m_ref: usize,
    pub mms_dt_list: Vec<f64>,
    pub mms_dt_spatial: f64,
}

pub const DEFAULT_N_LIST: [u32; 4] = [4, 8, 16, 32];
pub const DEFAULT_M_LIST: [usize; 2] = [4, 8];
pub const DEFAULT_MMS_AMPLITUDE: f64 = 0.021;
pub const DEFAULT_MMS_OMEGA: f64 = 10.0;
pub const DEFAULT_MMS_M_REF: usize = 16;
pub const DEFAULT_MMS_DT_LIST: [f64; 4] = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
pub const DEFAULT_MMS_DT_SPATIAL: f64 = 1e-4;

impl RunConfig {
    pub fn spectral_config(&self) -> Result<SpectralConfig, ConfigError> {
        SpectralConfig::new(self.dim, self.m, &self.grid_shape).map_err(|e| ConfigError::Constraint {
            key: "grid_shape",
            constraint: e.to_string(),
        })
    }

    /// Serialises to a document that reparses to an equal config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut push = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        push("dim", self.dim.to_string());
        push("m", self.m.to_string());
        push("grid_shape", join(self.grid_shape.iter()));
        push("a", format!("{}", self.a));
        push("alpha", format!("{}", self.alpha));
        push("n", self.n.to_string());
        push("T_final", format!("{}", self.t_final));
        push("dt", format!("{}", self.dt));
        push("method", self.method.to_string());
        push("ic", serialize_ic(&self.ic));
        push("force", serialize_force(&self.force));
        push("out_dir", self.out_dir.display().to_string());
        push("seed", self.seed.to_string());
        push("cadence", format!("{}", self.cadence));
        push("checkpoint_every", self.checkpoint_every.to_string());
        push("n_list", join(self.n_list.iter()));
        push("m_list", join(self.m_list.iter()));
        push("mms_amplitude", format!("{}", self.mms_amplitude));
        push("mms_omega", format!("{}", self.mms_omega));
        push("mms_m_ref", self.mms_m_ref.to_string());
        push("mms_dt_list", join(self.mms_dt_list.iter().map(|v| FloatToken(*v))));
        push("mms_dt_spatial", format!("{}", self.mms_dt_spatial));
        out
    }
}

struct FloatToken(f64);

impl std::fmt::Display for FloatToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn join<T: std::fmt::Display>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

fn serialize_ic(ic: &InitialSpec) -> String {
    match ic {
        InitialSpec::Zero => "zero".to_string(),
        InitialSpec::Random { c_star } => format!("random {}", c_star),
        InitialSpec::SingleMode { apply_to_velocity, mode, component, amplitude } => format!(
            "single_mode {} {} {} {} {} {}",
            if *apply_to_velocity { "v" } else { "u" },
            mode[0],
            mode[1],
            mode[2],
            component,
            amplitude
        ),
    }
}

fn serialize_force(force: &ForceConfig) -> String {
    match force {
        ForceConfig::Zero => "zero".to_string(),
        ForceConfig::SingleMode { mode, component, amplitude, omega } => format!(
            "single_mode {} {} {} {} {} {}",
            mode[0], mode[1], mode[2], component, amplitude, omega
        ),
        ForceConfig::Manufactured { amplitude, omega } => {
            format!("manufactured {} {}", amplitude, omega)
        }
        ForceConfig::Tabulated { path } => format!("tabulated {}", path.display()),
    }
}

struct RawEntry {
    line: usize,
    value: String,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    const KNOWN: &[&str] = &[
        "dim",
        "m",
        "grid_shape",
        "a",
        "alpha",
        "n",
        "T_final",
        "dt",
        "method",
        "ic",
        "force",
        "out_dir",
        "seed",
        "cadence",
        "checkpoint_every",
        "n_list",
        "m_list",
        "mms_amplitude",
        "mms_omega",
        "mms_m_ref",
        "mms_dt_list",
        "mms_dt_spatial",
    ];
    let mut entries: std::collections::BTreeMap<String, RawEntry> = Default::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(ConfigError::NotAnAssignment { line })?;
        let key = key.trim().to_string();
        if !KNOWN.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line, key });
        }
        entries.insert(key, RawEntry { line, value: value.trim().to_string() });
    }

    fn take<'a>(
        entries: &'a std::collections::BTreeMap<String, RawEntry>,
        key: &'static str,
    ) -> Option<&'a RawEntry> {
        entries.get(key)
    }

    fn parse_scalar<T: std::str::FromStr>(entry: &RawEntry, key: &'static str) -> Result<T, ConfigError> {
        entry.value.parse().map_err(|_| ConfigError::BadValue {
            line: entry.line,
            key: key.to_string(),
            value: entry.value.clone(),
        })
    }

    fn required<'a>(
        entries: &'a std::collections::BTreeMap<String, RawEntry>,
        key: &'static str,
    ) -> Result<&'a RawEntry, ConfigError> {
        take(entries, key).ok_or(ConfigError::Missing(key))
    }

    let dim: usize = parse_scalar(required(&entries, "dim")?, "dim")?;
    let m: usize = parse_scalar(required(&entries, "m")?, "m")?;
    let a: f64 = parse_scalar(required(&entries, "a")?, "a")?;
    let alpha: f64 = parse_scalar(required(&entries, "alpha")?, "alpha")?;
    let n_entry = required(&entries, "n")?;
    let n = if n_entry.value == "inf" || n_entry.value == "infinity" {
        Regularisation::Unregularised
    } else {
        Regularisation::Finite(parse_scalar(n_entry, "n")?)
    };
    let t_final: f64 = parse_scalar(required(&entries, "T_final")?, "T_final")?;
    let dt: f64 = parse_scalar(required(&entries, "dt")?, "dt")?;

    if !(a > 0.0) {
        return Err(ConfigError::Constraint { key: "a", constraint: "must be positive".into() });
    }
    if !(alpha > 0.0) {
        return Err(ConfigError::Constraint { key: "alpha", constraint: "must be positive".into() });
    }
    if let Regularisation::Finite(0) = n {
        return Err(ConfigError::Constraint { key: "n", constraint: "must be >= 1 when finite".into() });
    }
    if !(dt > 0.0) {
        return Err(ConfigError::Constraint { key: "dt", constraint: "must be positive".into() });
    }
    if t_final < 0.0 {
        return Err(ConfigError::Constraint { key: "T_final", constraint: "must be nonnegative".into() });
    }

    let grid_shape = match take(&entries, "grid_shape") {
        Some(entry) => parse_list::<usize>(entry, "grid_shape")?,
        None => vec![(2 * (m + 1)).next_power_of_two(); dim],
    };
    let method = match take(&entries, "method") {
        None => TimeIntegrator::Rk4,
        Some(entry) => match entry.value.as_str() {
            "rk4" => TimeIntegrator::Rk4,
            "midpoint" => TimeIntegrator::Midpoint,
            other => {
                return Err(ConfigError::BadValue {
                    line: entry.line,
                    key: "method".into(),
                    value: other.into(),
                })
            }
        },
    };
    let ic = match take(&entries, "ic") {
        None => InitialSpec::Zero,
        Some(entry) => parse_ic(entry)?,
    };
    let force = match take(&entries, "force") {
        None => ForceConfig::Zero,
        Some(entry) => parse_force(entry)?,
    };
    let out_dir = take(&entries, "out_dir").map(|e| PathBuf::from(&e.value)).unwrap_or_else(|| PathBuf::from("out"));
    let seed = match take(&entries, "seed") {
        None => 0,
        Some(entry) => parse_scalar(entry, "seed")?,
    };
    let cadence = match take(&entries, "cadence") {
        None => 10.0 * dt,
        Some(entry) => parse_scalar(entry, "cadence")?,
    };
    let checkpoint_every = match take(&entries, "checkpoint_every") {
        None => 0,
        Some(entry) => parse_scalar(entry, "checkpoint_every")?,
    };
    let n_list = match take(&entries, "n_list") {
        None => DEFAULT_N_LIST.to_vec(),
        Some(entry) => parse_list::<u32>(entry, "n_list")?,
    };
    let m_list = match take(&entries, "m_list") {
        None => DEFAULT_M_LIST.to_vec(),
        Some(entry) => parse_list::<usize>(entry, "m_list")?,
    };
    let mms_amplitude = match take(&entries, "mms_amplitude") {
        None => DEFAULT_MMS_AMPLITUDE,
        Some(entry) => parse_scalar(entry, "mms_amplitude")?,
    };
    let mms_omega = match take(&entries, "mms_omega") {
        None => DEFAULT_MMS_OMEGA,
        Some(entry) => parse_scalar(entry, "mms_omega")?,
    };
    let mms_m_ref = match take(&entries, "mms_m_ref") {
        None => DEFAULT_MMS_M_REF,
        Some(entry) => parse_scalar(entry, "mms_m_ref")?,
    };
    let mms_dt_list = match take(&entries, "mms_dt_list") {
        None => DEFAULT_MMS_DT_LIST.to_vec(),
        Some(entry) => parse_list::<f64>(entry, "mms_dt_list")?,
    };
    let mms_dt_spatial = match take(&entries, "mms_dt_spatial") {
        None => DEFAULT_MMS_DT_SPATIAL,
        Some(entry) => parse_scalar(entry, "mms_dt_spatial")?,
    };

    let config = RunConfig {
        dim,
        m,
        grid_shape,
        a,
        alpha,
        n,
        t_final,
        dt,
        method,
        ic,
        force,
        out_dir,
        seed,
        cadence,
        checkpoint_every,
        n_list,
        m_list,
        mms_amplitude,
        mms_omega,
        mms_m_ref,
        mms_dt_list,
        mms_dt_spatial,
    };
    // re-validate the numeric invariants of the underlying types
    config.spectral_config()?;
    if let InitialSpec::Random { c_star } = config.ic {
        if !(c_star > 0.0 && c_star < 1.0) {
            return Err(ConfigError::Constraint {
                key: "ic",
                constraint: "random C_* target must lie in (0, 1)".into(),
            });
        }
    }
    Ok(config)
}

fn parse_list<T: std::str::FromStr>(entry: &RawEntry, key: &'static str) -> Result<Vec<T>, ConfigError> {
    let items: Result<Vec<T>, _> = entry.value.split_whitespace().map(|tok| tok.parse::<T>()).collect();
    let items = items.map_err(|_| ConfigError::BadValue {
        line: entry.line,
        key: key.to_string(),
        value: entry.value.clone(),
    })?;
    if items.is_empty() {
        return Err(ConfigError::BadValue { line: entry.line, key: key.to_string(), value: entry.value.clone() });
    }
    Ok(items)
}

fn parse_mode(tokens: &[&str], entry: &RawEntry, key: &'static str) -> Result<[i64; 3], ConfigError> {
    let bad = || ConfigError::BadValue { line: entry.line, key: key.to_string(), value: entry.value.clone() };
    let mut mode = [0i64; 3];
    for (slot, tok) in mode.iter_mut().zip(tokens.iter()) {
        *slot = tok.parse().map_err(|_| bad())?;
    }
    Ok(mode)
}

fn parse_ic(entry: &RawEntry) -> Result<InitialSpec, ConfigError> {
    let bad = || ConfigError::BadValue { line: entry.line, key: "ic".into(), value: entry.value.clone() };
    let tokens: Vec<&str> = entry.value.split_whitespace().collect();
    match tokens.first() {
        Some(&"zero") => Ok(InitialSpec::Zero),
        Some(&"random") => {
            let c_star = tokens.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
            Ok(InitialSpec::Random { c_star })
        }
        Some(&"single_mode") => {
            // single_mode <u|v> <k1> <k2> <k3> <component> <amplitude>
            if tokens.len() != 7 {
                return Err(bad());
            }
            let apply_to_velocity = match tokens[1] {
                "u" => false,
                "v" => true,
                _ => return Err(bad()),
            };
            let mode = parse_mode(&tokens[2..5], entry, "ic")?;
            let component = tokens[5].parse().map_err(|_| bad())?;
            let amplitude = tokens[6].parse().map_err(|_| bad())?;
            Ok(InitialSpec::SingleMode { apply_to_velocity, mode, component, amplitude })
        }
        _ => Err(bad()),
    }
}

fn parse_force(entry: &RawEntry) -> Result<ForceConfig, ConfigError> {
    let bad = || ConfigError::BadValue { line: entry.line, key: "force".into(), value: entry.value.clone() };
    let tokens: Vec<&str> = entry.value.split_whitespace().collect();
    match tokens.first() {
        Some(&"zero") => Ok(ForceConfig::Zero),
        Some(&"single_mode") => {
            // single_mode <k1> <k2> <k3> <component> <amplitude> <omega>
            if tokens.len() != 7 {
                return Err(bad());
            }
            let mode = parse_mode(&tokens[1..4], entry, "force")?;
            let component = tokens[4].parse().map_err(|_| bad())?;
            let amplitude = tokens[5].parse().map_err(|_| bad())?;
            let omega = tokens[6].parse().map_err(|_| bad())?;
            Ok(ForceConfig::SingleMode { mode, component, amplitude, omega })
        }
        Some(&"manufactured") => {
            if tokens.len() != 3 {
                return Err(bad());
            }
            Ok(ForceConfig::Manufactured {
                amplitude: tokens[1].parse().map_err(|_| bad())?,
                omega: tokens[2].parse().map_err(|_| bad())?,
            })
        }
        Some(&"tabulated") => {
            if tokens.len() != 2 {
                return Err(bad());
            }
            Ok(ForceConfig::Tabulated { path: PathBuf::from(tokens[1]) })
        }
        _ => Err(bad()),
    }
}
