use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::langevin::{Recording, TrajectoryEnsemble};
use crate::error::{Result, VdpError};
use crate::wigner::WignerGrid;

/// Minimum post-burn-in sample count before a histogram is trusted.
pub const MIN_HISTOGRAM_SAMPLES: usize = 10_000;

/// Density histogram of all post-burn-in amplitudes.
///
/// Cells are centered on the grid points, so the result compares cell by cell
/// with a [`WignerGrid`] of the same extent and resolution. Values are counts
/// divided by (all samples × cell area); samples outside the window reduce the
/// mass below one.
pub fn ensemble_wigner_histogram(ens: &TrajectoryEnsemble, extent: f64, resolution: usize) -> Result<WignerGrid> {
    if ens.recording != Recording::Oscillators {
        return Err(VdpError::InvalidParameter(
            "histogram needs per-oscillator recording".into(),
        ));
    }
    if resolution < 2 || !(extent > 0.0) {
        return Err(VdpError::InvalidParameter("histogram needs extent > 0 and resolution >= 2".into()));
    }
    let h = 2.0 * extent / (resolution - 1) as f64;
    let mut counts = vec![0u64; resolution * resolution];
    let mut total = 0u64;
    for r in 0..ens.n_realizations {
        for t in ens.post_burn_in() {
            for a in ens.sample(r, t) {
                total += 1;
                let ix = ((a.re + extent) / h + 0.5).floor();
                let iy = ((a.im + extent) / h + 0.5).floor();
                if ix >= 0.0 && iy >= 0.0 && (ix as usize) < resolution && (iy as usize) < resolution {
                    counts[iy as usize * resolution + ix as usize] += 1;
                }
            }
        }
    }
    let mut warnings = Vec::new();
    if (total as usize) < MIN_HISTOGRAM_SAMPLES {
        warnings.push(format!("only {total} post-burn-in samples (< {MIN_HISTOGRAM_SAMPLES})"));
    }
    let norm = total.max(1) as f64 * h * h;
    let grid = WignerGrid {
        extent,
        resolution,
        values: counts.iter().map(|&c| c as f64 / norm).collect(),
        warnings,
    };
    let mass = grid.mass();
    let mut grid = grid;
    if mass < 0.999 {
        grid.warnings.push(format!("window captures {mass:.4} of the samples"));
    }
    Ok(grid)
}

/// `r(t) = |(1/N)∑α_n|` per realization, over all sample times.
pub fn order_parameter_series(ens: &TrajectoryEnsemble) -> Result<Vec<Vec<f64>>> {
    if ens.n_oscillators < 2 {
        return Err(VdpError::InvalidParameter("order parameter needs at least two oscillators".into()));
    }
    Ok((0..ens.n_realizations)
        .map(|r| {
            (0..ens.times.len())
                .map(|t| {
                    let s = ens.sample(r, t);
                    (s.iter().sum::<Complex64>() / s.len() as f64).norm()
                })
                .collect()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameter {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn std_error(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    (var / xs.len() as f64).sqrt()
}

/// Post-burn-in average of `r`. The error is taken across realizations, or
/// from ten batch means of a single realization.
pub fn steady_order_parameter(ens: &TrajectoryEnsemble) -> Result<OrderParameter> {
    let series = order_parameter_series(ens)?;
    let window = ens.post_burn_in();
    if window.is_empty() {
        return Err(VdpError::InvalidParameter("no samples after the burn-in".into()));
    }
    let per_run: Vec<f64> = series.iter().map(|s| mean(&s[window.clone()])).collect();
    let samples = window.len() * series.len();
    let err = if per_run.len() > 1 {
        std_error(&per_run)
    } else {
        let s = &series[0][window];
        let batch = (s.len() / 10).max(1);
        let means: Vec<f64> = s.chunks(batch).map(mean).collect();
        std_error(&means)
    };
    Ok(OrderParameter {
        mean: mean(&per_run),
        std_error: err,
        samples,
    })
}

/// Post-burn-in `θ = arg α_i − arg α_j` in `[0, 2π)`, all realizations.
pub fn phase_difference_samples(ens: &TrajectoryEnsemble, i: usize, j: usize) -> Result<Vec<f64>> {
    if ens.recording != Recording::Oscillators || i >= ens.n_oscillators || j >= ens.n_oscillators {
        return Err(VdpError::InvalidParameter(
            "phase difference needs per-oscillator recording of both oscillators".into(),
        ));
    }
    let mut out = Vec::with_capacity(ens.post_burn_in().len() * ens.n_realizations);
    for r in 0..ens.n_realizations {
        for t in ens.post_burn_in() {
            let s = ens.sample(r, t);
            out.push((s[i].arg() - s[j].arg()).rem_euclid(std::f64::consts::TAU));
        }
    }
    Ok(out)
}
