//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Every key must be known; values
//! are checked when a scenario reads them. All rates are in units of κ₁
//! except the ion-planner keys, whose units are part of the key name.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Known keys with their unit and meaning, printed by `--help`.
pub const KEYS: &[(&str, &str)] = &[
    ("scenario", "single | single-driven | two-coupled | meanfield | classical-ensemble | ion-plan | vdp-ode"),
    ("label", "output subdirectory name (default: unix time)"),
    ("out_dir", "output root (default: out)"),
    ("kappa2", "two-phonon loss rate, units of kappa1"),
    ("kappa2_list", "comma-separated kappa2 values for sweeps"),
    ("delta", "drive detuning, units of kappa1"),
    ("e", "drive strength E, units of kappa1"),
    ("v", "coupling strength V, units of kappa1"),
    ("v_values", "comma-separated couplings for sweeps"),
    ("v_min", "lower end of a threshold bracket, units of kappa1"),
    ("v_max", "upper end of a threshold bracket, units of kappa1"),
    ("rel_tol", "relative bisection tolerance for thresholds (default 0.02)"),
    ("boundary", "sweep: also bisect for the critical V (true/false)"),
    ("classical", "also run the matching Langevin ensemble (true/false)"),
    ("n", "number of classical oscillators (global coupling)"),
    ("n_max", "Fock truncation override (default: adaptive)"),
    ("dt", "time step, units of 1/kappa1"),
    ("t_final", "run length, units of 1/kappa1"),
    ("burn_in", "discarded initial time, units of 1/kappa1"),
    ("sample_interval", "time between recorded samples, units of 1/kappa1"),
    ("realizations", "number of independent Langevin realizations"),
    ("seed", "RNG seed (required for stochastic scenarios)"),
    ("extent", "Wigner grid half-width in |alpha|"),
    ("resolution", "Wigner grid points per axis (default 201)"),
    ("phase_points", "samples of phase distributions (default 360)"),
    ("records", "write the binary trajectory record file (true/false)"),
    ("x0", "vdp-ode initial position"),
    ("xdot0", "vdp-ode initial velocity"),
    ("omega0", "vdp-ode natural frequency"),
    ("epsilon", "vdp-ode nonlinearity"),
    ("wavelength_nm", "laser wavelength, nm"),
    ("trap_frequency_hz", "motional mode frequency, Hz"),
    ("beam_angle_deg", "beam angle to the mode axis, degrees"),
    ("mass_number", "ion mass number"),
    ("omega1_hz", "blue-sideband carrier strength, Hz"),
    ("omega2_hz", "double red-sideband carrier strength, Hz"),
    ("omega_c_hz", "coupling-drive carrier strength, Hz"),
    ("delta_c_hz", "coupling-drive detuning, Hz"),
    ("lamb_dicke_tolerance", "bound on eta^2(2n+1) (default 0.05)"),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type ConfigResult<T> = Result<T, ConfigError>;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> ConfigResult<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected key = value", lineno + 1)))?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> ConfigResult<()> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError(format!("unknown key `{key}`")));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    /// Applies a `key=value` override from the command line.
    pub fn apply_override(&mut self, assignment: &str) -> ConfigResult<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("override `{assignment}` is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn contains(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> ConfigResult<Option<T>> {
        self.raw(key)
            .map(|v| v.parse::<T>().map_err(|_| ConfigError(format!("invalid value for `{key}`: {v}"))))
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> ConfigResult<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> ConfigResult<T> {
        self.get(key)?.ok_or_else(|| ConfigError(format!("missing required key `{key}`")))
    }

    /// Positive finite number.
    pub fn positive(&self, key: &str, default: Option<f64>) -> ConfigResult<f64> {
        let v = match default {
            Some(d) => self.get_or(key, d)?,
            None => self.require(key)?,
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError(format!("`{key}` must be positive, got {v}")))
        }
    }

    pub fn list(&self, key: &str) -> ConfigResult<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<f64>()
                            .map_err(|_| ConfigError(format!("invalid number in `{key}`: {s}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Every key and value, for the manifest.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}
