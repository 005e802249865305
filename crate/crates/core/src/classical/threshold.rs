use serde::{Deserialize, Serialize};

use super::estimators::steady_order_parameter;
use super::langevin::{simulate_langevin, InitialCondition, LangevinParams, Recording, SampleOptions};
use crate::error::{Result, VdpError};

/// Settings of the synchronization test for globally coupled ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    pub n_oscillators: usize,
    /// `None` runs for ten phase-diffusion times, at least 30.
    pub t_final: Option<f64>,
    /// `None` uses the largest stable step.
    pub dt: Option<f64>,
    pub seed: u64,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
    /// Synchronized when the late-time `r` exceeds `baseline_factor · r_cl/√N`.
    pub baseline_factor: f64,
    /// Bracket doublings attempted before giving up.
    pub max_widen: usize,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            n_oscillators: 3000,
            t_final: None,
            dt: None,
            seed: 2013,
            rel_tol: 0.02,
            baseline_factor: 5.0,
            max_widen: 4,
        }
    }
}

impl ThresholdOptions {
    /// `10 · 2r_cl²/σ²`, ten times the phase-diffusion time of a free oscillator.
    pub fn run_time(&self, params: &LangevinParams) -> f64 {
        self.t_final.unwrap_or_else(|| {
            let diffusion = params.noise_variance() / (2.0 * params.classical_amplitude().powi(2));
            (10.0 / diffusion).max(30.0)
        })
    }
}

/// Runs one ensemble from the synchronized seed and returns `(synchronized, r)`,
/// with `r` averaged over the second half of the run.
pub fn is_synchronized(kappa1: f64, kappa2: f64, v: f64, opts: &ThresholdOptions) -> Result<(bool, f64)> {
    let params = LangevinParams::new(kappa1, kappa2)?.with_global_coupling(v, opts.n_oscillators)?;
    let dt = opts.dt.unwrap_or_else(|| params.max_dt());
    let t_final = opts.run_time(&params);
    let sample = SampleOptions {
        burn_in: 0.5 * t_final,
        sample_interval: (t_final / 200.0).max(dt),
        recording: Recording::MeanField,
        initial: Some(InitialCondition::Synchronized {
            amplitude: params.classical_amplitude(),
        }),
    };
    let ens = simulate_langevin(&params, 1, t_final, dt, opts.seed, &sample)?;
    let r = steady_order_parameter(&ens)?.mean;
    let baseline = params.classical_amplitude() / (opts.n_oscillators as f64).sqrt();
    Ok((r > opts.baseline_factor * baseline, r))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub kappa2: f64,
    /// Midpoint of the final bracket; `None` when no synchronized ensemble was found.
    pub v_critical: Option<f64>,
    /// Half-width of the final bracket.
    pub tolerance: f64,
    /// Largest coupling known to desynchronize.
    pub v_lower_bound: f64,
    /// `(v, r, synchronized)` for every ensemble run.
    pub evaluations: Vec<(f64, f64, bool)>,
    pub widened: bool,
}

/// Bisects the smallest coupling at which a synchronized ensemble stays
/// synchronized. The bracket is doubled outward while `[v_lo, v_hi]` fails to
/// straddle the transition; if no synchronized run appears after
/// `max_widen` doublings the result carries only a lower bound.
pub fn classical_sync_threshold(
    kappa1: f64,
    kappa2: f64,
    v_lo: f64,
    v_hi: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    if !(v_lo >= 0.0 && v_hi > v_lo) {
        return Err(VdpError::Bracket(format!("invalid bracket [{v_lo}, {v_hi}]")));
    }
    let mut evaluations = Vec::new();
    let mut test = |v: f64| -> Result<bool> {
        let (s, r) = is_synchronized(kappa1, kappa2, v, opts)?;
        evaluations.push((v, r, s));
        Ok(s)
    };
    let (mut lo, mut hi) = (v_lo, v_hi);
    let mut widened = false;
    let mut tries = 0;
    while !test(hi)? {
        tries += 1;
        lo = hi;
        if tries > opts.max_widen {
            return Ok(ThresholdResult {
                kappa2,
                v_critical: None,
                tolerance: 0.0,
                v_lower_bound: lo,
                evaluations,
                widened: true,
            });
        }
        hi *= 2.0;
        widened = true;
    }
    tries = 0;
    while lo > 0.0 && test(lo)? {
        tries += 1;
        if tries > opts.max_widen {
            return Err(VdpError::Bracket(format!(
                "still synchronized down to V = {lo} at kappa2 = {kappa2}"
            )));
        }
        hi = lo;
        lo *= 0.5;
        widened = true;
    }
    while hi - lo > opts.rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        if test(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        kappa2,
        v_critical: Some(0.5 * (lo + hi)),
        tolerance: 0.5 * (hi - lo),
        v_lower_bound: lo,
        evaluations,
        widened,
    })
}
