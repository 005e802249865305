use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// External drive `H = Δa†a + (E/2)(a + a†)`, entering as `−iΔα − iE/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub delta: f64,
    pub e: f64,
}

/// Reactive coupling between oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Coupling {
    None,
    /// Two oscillators, `−iVα_other`.
    Pair { v: f64 },
    /// `N` oscillators, `−i(V/N)∑_{m≠n} α_m`.
    Global { v: f64 },
}

impl Coupling {
    pub fn strength(&self) -> f64 {
        match *self {
            Coupling::None => 0.0,
            Coupling::Pair { v } | Coupling::Global { v } => v,
        }
    }
}

/// `α̇ = α(κ₁ + 2κ₂ − 2κ₂|α|²) − iΔα − iE/2 + coupling + ξ`, with independent
/// real and imaginary white noise of intensity `3κ₁/2 + κ₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LangevinParams {
    pub kappa1: f64,
    pub kappa2: f64,
    pub drive: Option<Drive>,
    pub coupling: Coupling,
    pub n_oscillators: usize,
    /// Switching noise off turns the model into its deterministic drift.
    pub noise: bool,
}

impl LangevinParams {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(kappa1 > 0.0) || !(kappa2 > 0.0) {
            return Err(VdpError::InvalidParameter(format!(
                "rates must be positive, got kappa1 = {kappa1}, kappa2 = {kappa2}"
            )));
        }
        Ok(Self {
            kappa1,
            kappa2,
            drive: None,
            coupling: Coupling::None,
            n_oscillators: 1,
            noise: true,
        })
    }

    pub fn with_drive(mut self, delta: f64, e: f64) -> Self {
        self.drive = Some(Drive { delta, e });
        self
    }

    pub fn with_pair_coupling(mut self, v: f64) -> Self {
        self.coupling = Coupling::Pair { v };
        self.n_oscillators = 2;
        self
    }

    pub fn with_global_coupling(mut self, v: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(VdpError::InvalidParameter("need at least one oscillator".into()));
        }
        self.coupling = Coupling::Global { v };
        self.n_oscillators = n;
        Ok(self)
    }

    pub fn without_noise(mut self) -> Self {
        self.noise = false;
        self
    }

    /// Noise intensity per quadrature, `3κ₁/2 + κ₂` (zero with noise off).
    pub fn noise_variance(&self) -> f64 {
        if self.noise {
            1.5 * self.kappa1 + self.kappa2
        } else {
            0.0
        }
    }

    /// Deterministic limit-cycle amplitude `√(κ₁/2κ₂ + 1)`.
    pub fn classical_amplitude(&self) -> f64 {
        (self.kappa1 / (2.0 * self.kappa2) + 1.0).sqrt()
    }

    /// `0.01 / max(κ₁ + 2κ₂, |V|, |Δ|)`.
    pub fn max_dt(&self) -> f64 {
        let delta = self.drive.map_or(0.0, |d| d.delta.abs());
        let rate = (self.kappa1 + 2.0 * self.kappa2)
            .max(self.coupling.strength().abs())
            .max(delta);
        0.01 / rate
    }

    fn validate(&self) -> Result<()> {
        match self.coupling {
            Coupling::Pair { .. } if self.n_oscillators != 2 => Err(VdpError::InvalidParameter(
                "pair coupling needs exactly two oscillators".into(),
            )),
            _ if self.n_oscillators == 0 => Err(VdpError::InvalidParameter("need at least one oscillator".into())),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Origin,
    /// Every oscillator at `amplitude` with an independent uniform phase.
    RandomPhase { amplitude: f64 },
    /// Every oscillator at the real amplitude `amplitude`.
    Synchronized { amplitude: f64 },
    Fixed { alphas: Vec<Complex64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recording {
    /// Every oscillator's amplitude at every sample time.
    Oscillators,
    /// Only the ensemble mean `(1/N)∑α_n`.
    MeanField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub burn_in: f64,
    pub sample_interval: f64,
    pub recording: Recording,
    /// `None` starts at the limit-cycle amplitude with random phases.
    pub initial: Option<InitialCondition>,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            burn_in: 20.0,
            sample_interval: 1.0,
            recording: Recording::Oscillators,
            initial: None,
        }
    }
}

/// Sampled trajectories of all realizations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryEnsemble {
    pub dt: f64,
    pub burn_in: f64,
    pub n_realizations: usize,
    pub n_oscillators: usize,
    pub recording: Recording,
    pub times: Vec<f64>,
    /// `samples[(r * times.len() + t) * width + o]`.
    pub samples: Vec<Complex64>,
}

impl TrajectoryEnsemble {
    /// Values stored per sample time: `n_oscillators` or 1 for mean-field recording.
    pub fn width(&self) -> usize {
        match self.recording {
            Recording::Oscillators => self.n_oscillators,
            Recording::MeanField => 1,
        }
    }

    pub fn sample(&self, realization: usize, t: usize) -> &[Complex64] {
        let w = self.width();
        let start = (realization * self.times.len() + t) * w;
        &self.samples[start..start + w]
    }

    /// Indices of sample times at or after the burn-in.
    pub fn post_burn_in(&self) -> std::ops::Range<usize> {
        let first = self
            .times
            .iter()
            .position(|&t| t >= self.burn_in - 1e-9 * self.dt)
            .unwrap_or(self.times.len());
        first..self.times.len()
    }

    pub fn post_burn_in_count(&self) -> usize {
        self.post_burn_in().len() * self.n_realizations * self.width()
    }
}

fn initial_state(
    params: &LangevinParams,
    initial: &Option<InitialCondition>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Complex64>> {
    let n = params.n_oscillators;
    let random = |amp: f64, rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(amp, rng.random::<f64>() * std::f64::consts::TAU))
            .collect()
    };
    Ok(match initial {
        None => random(params.classical_amplitude(), rng),
        Some(InitialCondition::RandomPhase { amplitude }) => random(*amplitude, rng),
        Some(InitialCondition::Origin) => vec![Complex64::new(0.0, 0.0); n],
        Some(InitialCondition::Synchronized { amplitude }) => vec![Complex64::new(*amplitude, 0.0); n],
        Some(InitialCondition::Fixed { alphas }) => {
            if alphas.len() != n {
                return Err(VdpError::DimensionMismatch {
                    expected: n,
                    found: alphas.len(),
                });
            }
            alphas.clone()
        }
    })
}

fn run_realization(
    params: &LangevinParams,
    realization: usize,
    steps: usize,
    stride: usize,
    dt: f64,
    seed: u64,
    opts: &SampleOptions,
) -> Result<Vec<Complex64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization as u64);
    let n = params.n_oscillators;
    let mut alpha = initial_state(params, &opts.initial, &mut rng)?;
    let mut previous = alpha.clone();
    let gain = params.kappa1 + 2.0 * params.kappa2;
    let sat = 2.0 * params.kappa2;
    let (delta, half_e) = params.drive.map_or((0.0, 0.0), |d| (d.delta, 0.5 * d.e));
    let sigma = (params.noise_variance() * dt).sqrt();
    let limit = 1e4 * (1.0 + params.classical_amplitude().powi(2));
    let width = match opts.recording {
        Recording::Oscillators => n,
        Recording::MeanField => 1,
    };
    let mut out = Vec::with_capacity((steps / stride + 1) * width);
    let record = |alpha: &[Complex64], out: &mut Vec<Complex64>| match opts.recording {
        Recording::Oscillators => out.extend_from_slice(alpha),
        Recording::MeanField => out.push(alpha.iter().sum::<Complex64>() / n as f64),
    };
    record(&alpha, &mut out);
    for step in 1..=steps {
        previous.copy_from_slice(&alpha);
        let total: Complex64 = previous.iter().sum();
        for (k, a) in alpha.iter_mut().enumerate() {
            let old = previous[k];
            let field = match params.coupling {
                Coupling::None => Complex64::new(0.0, 0.0),
                Coupling::Pair { v } => v * previous[1 - k],
                Coupling::Global { v } => (v / n as f64) * (total - old),
            };
            let drift = old * (gain - sat * old.norm_sqr()) - I * (delta * old + half_e + field);
            let mut next = old + drift * dt;
            if sigma > 0.0 {
                let xr: f64 = rng.sample(StandardNormal);
                let xi: f64 = rng.sample(StandardNormal);
                next += Complex64::new(xr, xi) * sigma;
            }
            let mag = next.norm_sqr();
            if !(mag <= limit) {
                return Err(VdpError::Diverged {
                    magnitude: mag.sqrt(),
                    time: step as f64 * dt,
                    realization,
                });
            }
            *a = next;
        }
        if step % stride == 0 {
            record(&alpha, &mut out);
        }
    }
    Ok(out)
}

/// Euler–Maruyama ensemble of `n_realizations` independent runs.
///
/// Realization `r` draws from the ChaCha8 stream `r` of `seed`, so results do
/// not depend on how realizations are scheduled across threads.
pub fn simulate_langevin(
    params: &LangevinParams,
    n_realizations: usize,
    t_final: f64,
    dt: f64,
    seed: u64,
    opts: &SampleOptions,
) -> Result<TrajectoryEnsemble> {
    params.validate()?;
    if !(dt > 0.0) || dt > params.max_dt() * (1.0 + 1e-9) {
        return Err(VdpError::InvalidParameter(format!(
            "dt = {dt} exceeds the stability bound {:.3e}",
            params.max_dt()
        )));
    }
    if n_realizations == 0 || !(t_final > 0.0) || !(opts.sample_interval > 0.0) {
        return Err(VdpError::InvalidParameter(
            "need realizations > 0, t_final > 0 and sample_interval > 0".into(),
        ));
    }
    let steps = (t_final / dt).round() as usize;
    let stride = ((opts.sample_interval / dt).round() as usize).max(1);
    let runs = (0..n_realizations)
        .into_par_iter()
        .map(|r| run_realization(params, r, steps, stride, dt, seed, opts))
        .collect::<Result<Vec<_>>>()?;
    let times = (0..=steps / stride).map(|k| (k * stride) as f64 * dt).collect();
    Ok(TrajectoryEnsemble {
        dt,
        burn_in: opts.burn_in,
        n_realizations,
        n_oscillators: params.n_oscillators,
        recording: opts.recording,
        times,
        samples: runs.concat(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(kappa2: f64) -> LangevinParams {
        LangevinParams::new(1.0, kappa2).unwrap().without_noise()
    }

    #[test]
    fn deterministic_amplitude_reaches_the_limit_cycle() {
        for kappa2 in [0.05, 1.0, 10.0] {
            let p = quiet(kappa2);
            let opts = SampleOptions {
                initial: Some(InitialCondition::RandomPhase { amplitude: 0.2 }),
                ..Default::default()
            };
            let ens = simulate_langevin(&p, 3, 60.0, p.max_dt(), 1, &opts).unwrap();
            for r in 0..3 {
                let last = ens.sample(r, ens.times.len() - 1)[0].norm();
                assert!((last - p.classical_amplitude()).abs() < 1e-6, "kappa2 = {kappa2}: {last}");
            }
        }
    }

    #[test]
    fn noiseless_pair_locks_in_or_anti_phase() {
        let p = quiet(0.5).with_pair_coupling(1.0);
        let mut seen = [false, false];
        for (a1, a2) in [(0.3, 0.9), (0.2, 2.8), (1.0, -1.2), (0.0, 2.0)] {
            let opts = SampleOptions {
                initial: Some(InitialCondition::Fixed {
                    alphas: vec![Complex64::from_polar(1.0, a1), Complex64::from_polar(1.0, a2)],
                }),
                ..Default::default()
            };
            let ens = simulate_langevin(&p, 1, 200.0, p.max_dt(), 0, &opts).unwrap();
            let s = ens.sample(0, ens.times.len() - 1);
            let theta = (s[0].arg() - s[1].arg()).rem_euclid(std::f64::consts::TAU);
            let to_zero = theta.min(std::f64::consts::TAU - theta);
            let to_pi = (theta - std::f64::consts::PI).abs();
            assert!(to_zero < 1e-4 || to_pi < 1e-4, "theta = {theta}");
            seen[(to_pi < 1e-4) as usize] = true;
        }
        assert!(seen[0] && seen[1]);
    }

    #[test]
    fn short_time_variance_matches_noise_intensity() {
        // near the origin the drift is linear, dx = g·x dt + σ dW, so
        // Var[x(t)] = σ²(e^{2gt} − 1)/(2g) up to the small cubic correction
        let p = LangevinParams::new(1.0, 1.0).unwrap();
        let sigma2 = p.noise_variance();
        let opts = SampleOptions {
            burn_in: 0.0,
            sample_interval: 0.02,
            initial: Some(InitialCondition::Origin),
            ..Default::default()
        };
        let ens = simulate_langevin(&p, 20000, 0.02, 0.0005, 9, &opts).unwrap();
        let t = ens.times.len() - 1;
        let g = p.kappa1 + 2.0 * p.kappa2;
        let expected = sigma2 * ((2.0 * g * ens.times[t]).exp() - 1.0) / (2.0 * g);
        let n = ens.n_realizations as f64;
        // the variance estimator of a Gaussian has relative standard error √(2/n)
        let se = expected * (2.0 / n).sqrt();
        for part in [|z: Complex64| z.re, |z: Complex64| z.im] {
            let var = (0..ens.n_realizations).map(|r| part(ens.sample(r, t)[0]).powi(2)).sum::<f64>() / n;
            assert!((var - expected).abs() < 3.0 * se, "{var} vs {expected} ± {se}");
        }
        assert!((sigma2 - 2.5).abs() < 1e-12);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let p = LangevinParams::new(1.0, 1.0).unwrap().with_global_coupling(0.5, 5).unwrap();
        let opts = SampleOptions::default();
        let a = simulate_langevin(&p, 4, 5.0, 0.002, 42, &opts).unwrap();
        let b = simulate_langevin(&p, 4, 5.0, 0.002, 42, &opts).unwrap();
        let c = simulate_langevin(&p, 4, 5.0, 0.002, 43, &opts).unwrap();
        assert_eq!(a.samples, b.samples);
        assert_ne!(a.samples, c.samples);
        // a realization does not depend on how many others run
        let d = simulate_langevin(&p, 2, 5.0, 0.002, 42, &opts).unwrap();
        assert_eq!(&a.samples[..d.samples.len()], &d.samples[..]);
    }

    #[test]
    fn rejects_unstable_steps_and_reports_divergence() {
        let p = LangevinParams::new(1.0, 1.0).unwrap();
        assert!(simulate_langevin(&p, 1, 1.0, 0.01, 0, &SampleOptions::default()).is_err());
        let opts = SampleOptions {
            initial: Some(InitialCondition::Synchronized { amplitude: 1e3 }),
            ..Default::default()
        };
        let err = simulate_langevin(&p, 1, 1.0, p.max_dt(), 0, &opts).unwrap_err();
        assert!(matches!(err, VdpError::Diverged { .. }));
    }

    #[test]
    fn mean_field_recording_averages_oscillators() {
        let p = LangevinParams::new(1.0, 0.5).unwrap().with_global_coupling(1.0, 4).unwrap();
        let full = simulate_langevin(&p, 2, 2.0, 0.002, 3, &SampleOptions::default()).unwrap();
        let mean = simulate_langevin(
            &p,
            2,
            2.0,
            0.002,
            3,
            &SampleOptions {
                recording: Recording::MeanField,
                ..Default::default()
            },
        )
        .unwrap();
        for r in 0..2 {
            for t in 0..full.times.len() {
                let m: Complex64 = full.sample(r, t).iter().sum::<Complex64>() / 4.0;
                assert!((m - mean.sample(r, t)[0]).norm() < 1e-14);
            }
        }
    }
}
