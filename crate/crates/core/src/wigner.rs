//! Wigner functions of truncated Fock-space states.
//!
//! The Wigner function of `|n⟩⟨m|` is
//!
//! ```text
//! W_nm(α) = (2/π) (−1)^p √(p!/(p+d)!) (2β)^d e^{−2|α|²} L_p^{(d)}(4|α|²),
//! ```
//!
//! with `p = min(n, m)`, `d = |n − m|`, `β = α*` when the ket index is the
//! larger one and `β = α` otherwise. Every state is expanded on these kernels,
//! so the only approximation is the Fock truncation itself. Angular marginals
//! follow from the radial integrals `∫ W_nm(r) r dr`, which turn the
//! integration over amplitudes into a Fourier series in the phase.

use std::f64::consts::{FRAC_2_PI, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};
use crate::fock::{make_ladder_operators, expectation, DensityMatrix, ZERO};
use crate::quadrature::integrate_vec;

/// Real field `W(α)` on the square `[−extent, extent]²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WignerGrid {
    pub extent: f64,
    pub resolution: usize,
    /// Row-major, `values[iy * resolution + ix]` at `α = x[ix] + i·x[iy]`.
    pub values: Vec<f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl WignerGrid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.resolution - 1) as f64
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    pub fn cell_area(&self) -> f64 {
        self.spacing().powi(2)
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.resolution + ix]
    }

    /// `α` of every grid point, in storage order.
    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        let n = self.resolution;
        (0..n * n).map(move |k| Complex64::new(self.coordinate(k % n), self.coordinate(k / n)))
    }

    /// `∑ W · ΔA`.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_area()
    }

    /// `∑ W·|α|²·ΔA − 1/2`, the phonon number implied by the grid.
    pub fn mean_number(&self) -> f64 {
        self.points()
            .zip(&self.values)
            .map(|(a, w)| a.norm_sqr() * w)
            .sum::<f64>()
            * self.cell_area()
            - 0.5
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Grid with the same geometry, values scaled to unit mass.
    pub fn normalized(&self) -> Self {
        let mass = self.mass();
        Self {
            values: self.values.iter().map(|v| v / mass).collect(),
            ..self.clone()
        }
    }

    /// Probability mass per cell, clipped at zero, for comparing with histograms.
    fn cell_probabilities(&self) -> Vec<f64> {
        let clipped: Vec<f64> = self.values.iter().map(|v| v.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        clipped.iter().map(|v| v / total).collect()
    }

    /// Total-variation distance `½ ∑ |p − q|` between the cell masses of two
    /// grids of identical geometry (negative values are clipped).
    pub fn total_variation(&self, other: &Self) -> Result<f64> {
        if self.resolution != other.resolution || (self.extent - other.extent).abs() > 1e-12 {
            return Err(VdpError::InvalidParameter(
                "total variation needs grids of identical geometry".into(),
            ));
        }
        let p = self.cell_probabilities();
        let q = other.cell_probabilities();
        Ok(0.5 * p.iter().zip(&q).map(|(a, b)| (a - b).abs()).sum::<f64>())
    }

    /// Shell averages of `W` on `bins` rings out to `extent`: `(radii, W̄)`.
    pub fn radial_profile(&self, bins: usize) -> (Vec<f64>, Vec<f64>) {
        let width = self.extent / bins as f64;
        let mut sum = vec![0.0; bins];
        let mut count = vec![0usize; bins];
        for (a, w) in self.points().zip(&self.values) {
            let b = (a.norm() / width) as usize;
            if b < bins {
                sum[b] += w;
                count[b] += 1;
            }
        }
        let centers = (0..bins).map(|b| (b as f64 + 0.5) * width).collect();
        let avg = sum
            .iter()
            .zip(&count)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        (centers, avg)
    }

    /// Radius of the largest value along the radial profile.
    pub fn radial_peak(&self, bins: usize) -> f64 {
        let (r, p) = self.radial_profile(bins);
        let k = argmax(&p);
        r[k]
    }
}

fn argmax(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc })
        .0
}

/// `ln k!` for `k ≤ n`.
fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Radial kernels `R_{p,d}(r) = (2/π)(−1)^p √(p!/(p+d)!) (2r)^d e^{−2r²} L_p^{(d)}(4r²)`
/// for one `d` and all `p ≤ p_max`, written into `out`.
fn radial_kernels(r: f64, d: usize, p_max: usize, ln_fact: &[f64], out: &mut [f64]) {
    let x = 4.0 * r * r;
    let first = if d == 0 {
        (-2.0 * r * r).exp()
    } else if r == 0.0 {
        0.0
    } else {
        (d as f64 * (2.0 * r).ln() - 2.0 * r * r - 0.5 * ln_fact[d]).exp()
    };
    // f_p = (−1)^p √(p!/(p+d)!) L_p^{(d)}(x), scaled by the common prefactor
    let mut prev = 0.0;
    let mut cur = first;
    out[0] = FRAC_2_PI * cur;
    for p in 0..p_max {
        let pf = p as f64;
        let df = d as f64;
        let next = ((x - 2.0 * pf - 1.0 - df) * cur - (pf * (pf + df)).sqrt() * prev)
            / ((pf + 1.0) * (pf + df + 1.0)).sqrt();
        prev = cur;
        cur = next;
        out[p + 1] = FRAC_2_PI * cur;
    }
}

/// `W(α)` at a single point.
pub fn wigner_at(rho: &DensityMatrix, alpha: Complex64) -> f64 {
    let dim = rho.space().dim();
    let ln_fact = ln_factorials(2 * dim);
    let mut kernels = vec![0.0; dim];
    wigner_point(rho, alpha, &ln_fact, &mut kernels)
}

fn wigner_point(rho: &DensityMatrix, alpha: Complex64, ln_fact: &[f64], kernels: &mut [f64]) -> f64 {
    let m = rho.matrix();
    let dim = m.nrows();
    let r = alpha.norm();
    let unit = if r > 0.0 { alpha.conj() / r } else { Complex64::new(1.0, 0.0) };
    let mut total = 0.0;
    let mut phase = Complex64::new(1.0, 0.0);
    for d in 0..dim {
        let p_max = dim - 1 - d;
        radial_kernels(r, d, p_max, ln_fact, kernels);
        let mut acc = ZERO;
        for p in 0..=p_max {
            // ket index p + d is the larger one: angular factor (α*/r)^d
            acc += m[(p + d, p)] * kernels[p];
        }
        if d == 0 {
            total += acc.re;
        } else {
            total += 2.0 * (acc * phase).re;
        }
        phase *= unit;
    }
    total
}

/// Angular average of `W` on the circle `|α| = r` (only the diagonal of ρ contributes).
pub fn angular_average(rho: &DensityMatrix, r: f64) -> Result<f64> {
    if rho.space().modes() != 1 {
        return Err(VdpError::InvalidSpace("angular average needs a single-mode state".into()));
    }
    let dim = rho.space().dim();
    let ln_fact = ln_factorials(2 * dim);
    let mut kernels = vec![0.0; dim];
    radial_kernels(r, 0, dim - 1, &ln_fact, &mut kernels);
    Ok(rho.populations().iter().zip(&kernels).map(|(p, k)| p * k).sum())
}

/// Radius maximizing the angular average of `W` on `[0, r_max]`.
pub fn radial_peak(rho: &DensityMatrix, r_max: f64) -> Result<f64> {
    let samples = 2000;
    let h = r_max / samples as f64;
    let values = (0..=samples)
        .map(|i| angular_average(rho, i as f64 * h))
        .collect::<Result<Vec<f64>>>()?;
    let k = argmax(&values);
    let lo = (k as f64 - 1.0).max(0.0) * h;
    let hi = (k as f64 + 1.0).min(samples as f64) * h;
    Ok(golden_max(|r| angular_average(rho, r).unwrap_or(f64::NEG_INFINITY), lo, hi))
}

/// Grid of cell averages of `f`, each cell sampled at `sub × sub` midpoints.
///
/// Cell `(ix, iy)` is the square of side `spacing` centered on the grid point,
/// which is the binning used by the classical histograms.
pub fn grid_from_fn<F>(extent: f64, resolution: usize, sub: usize, f: F) -> WignerGrid
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let h = 2.0 * extent / (resolution - 1) as f64;
    let sub = sub.max(1);
    let values = (0..resolution)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let f = &f;
            (0..resolution).map(move |ix| {
                let (x0, y0) = (-extent + ix as f64 * h - 0.5 * h, -extent + iy as f64 * h - 0.5 * h);
                let mut acc = 0.0;
                for sy in 0..sub {
                    for sx in 0..sub {
                        let x = x0 + (sx as f64 + 0.5) * h / sub as f64;
                        let y = y0 + (sy as f64 + 0.5) * h / sub as f64;
                        acc += f(Complex64::new(x, y));
                    }
                }
                acc / (sub * sub) as f64
            })
        })
        .collect();
    WignerGrid {
        extent,
        resolution,
        values,
        warnings: Vec::new(),
    }
}

/// Reusable evaluator of `W(α)` for one state.
pub struct WignerEvaluator<'a> {
    rho: &'a DensityMatrix,
    ln_fact: Vec<f64>,
}

impl<'a> WignerEvaluator<'a> {
    pub fn new(rho: &'a DensityMatrix) -> Result<Self> {
        if rho.space().modes() != 1 {
            return Err(VdpError::InvalidSpace("Wigner function needs a single-mode state".into()));
        }
        Ok(Self {
            rho,
            ln_fact: ln_factorials(2 * rho.space().dim()),
        })
    }

    pub fn eval(&self, alpha: Complex64) -> f64 {
        let mut kernels = vec![0.0; self.rho.space().dim()];
        wigner_point(self.rho, alpha, &self.ln_fact, &mut kernels)
    }
}

/// Default half-width of the plotting window, `2 + 2√(⟨n⟩+1)`.
pub fn default_extent(rho: &DensityMatrix) -> f64 {
    2.0 + 2.0 * (mean_number(rho) + 1.0).sqrt()
}

pub const DEFAULT_RESOLUTION: usize = 201;

fn mean_number(rho: &DensityMatrix) -> f64 {
    rho.populations()
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

/// Wigner function of a single-mode state sampled on a square grid.
///
/// A window smaller than `2√(⟨n⟩+1)` is accepted, but the grid carries a
/// warning with the captured mass.
pub fn wigner_single_mode(rho: &DensityMatrix, extent: f64, resolution: usize) -> Result<WignerGrid> {
    if rho.space().modes() != 1 {
        return Err(VdpError::InvalidSpace("single-mode Wigner function needs a single-mode state".into()));
    }
    if resolution < 2 || !(extent > 0.0) {
        return Err(VdpError::InvalidParameter(format!(
            "grid needs extent > 0 and resolution >= 2, got {extent}, {resolution}"
        )));
    }
    let dim = rho.space().dim();
    let ln_fact = ln_factorials(2 * dim);
    let h = 2.0 * extent / (resolution - 1) as f64;
    let values: Vec<f64> = (0..resolution)
        .into_par_iter()
        .flat_map_iter(|iy| {
            let mut kernels = vec![0.0; dim];
            let y = -extent + iy as f64 * h;
            (0..resolution)
                .map(|ix| {
                    let x = -extent + ix as f64 * h;
                    wigner_point(rho, Complex64::new(x, y), &ln_fact, &mut kernels)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut grid = WignerGrid {
        extent,
        resolution,
        values,
        warnings: Vec::new(),
    };
    let needed = 2.0 * (mean_number(rho) + 1.0).sqrt();
    if extent < needed {
        grid.warnings.push(format!(
            "extent {extent:.3} below 2*sqrt(<n>+1) = {needed:.3}; captured mass {:.4}",
            grid.mass()
        ));
    }
    Ok(grid)
}

/// Probability density over a phase on `[0, 2π)`, stored as Fourier
/// coefficients `P(φ) = ∑_k c_k e^{ikφ}` with `c_{−k} = c_k*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseDistribution {
    /// `c_0, c_1, …, c_K`.
    pub harmonics: Vec<Complex64>,
}

impl PhaseDistribution {
    pub fn uniform() -> Self {
        Self {
            harmonics: vec![Complex64::new(1.0 / TAU, 0.0)],
        }
    }

    /// Fourier coefficients estimated from angle samples, `c_k = ⟨e^{−ikφ}⟩/2π`,
    /// with the standard error of each coefficient's magnitude.
    pub fn from_samples(angles: &[f64], k_max: usize) -> (Self, Vec<f64>) {
        let n = angles.len() as f64;
        let mut harmonics = Vec::with_capacity(k_max + 1);
        let mut errors = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let (mut sc, mut ss, mut sc2, mut ss2) = (0.0, 0.0, 0.0, 0.0);
            for &phi in angles {
                let (s, c) = (k as f64 * phi).sin_cos();
                sc += c;
                ss += s;
                sc2 += c * c;
                ss2 += s * s;
            }
            let (mc, ms) = (sc / n, ss / n);
            harmonics.push(Complex64::new(mc, -ms) / TAU);
            let var = ((sc2 / n - mc * mc) + (ss2 / n - ms * ms)) / n;
            errors.push(var.max(0.0).sqrt() / TAU);
        }
        (Self { harmonics }, errors)
    }

    pub fn k_max(&self) -> usize {
        self.harmonics.len() - 1
    }

    pub fn density(&self, phi: f64) -> f64 {
        let mut total = self.harmonics[0].re;
        for (k, c) in self.harmonics.iter().enumerate().skip(1) {
            total += 2.0 * (c * Complex64::from_polar(1.0, k as f64 * phi)).re;
        }
        total
    }

    /// `∫₀^{2π} P dφ` (exactly `2π c_0`).
    pub fn integral(&self) -> f64 {
        TAU * self.harmonics[0].re
    }

    /// Amplitude `A` of the `A·cos(kφ)` component.
    pub fn cosine_amplitude(&self, k: usize) -> f64 {
        self.harmonics.get(k).map_or(0.0, |c| 2.0 * c.re)
    }

    pub fn sample(&self, points: usize) -> (Vec<f64>, Vec<f64>) {
        let angles: Vec<f64> = (0..points).map(|i| TAU * i as f64 / points as f64).collect();
        let dens = angles.iter().map(|&a| self.density(a)).collect();
        (angles, dens)
    }

    /// `(angle, value)` of the maximum on a fine grid, refined by golden section.
    pub fn peak(&self) -> (f64, f64) {
        let (a, d) = self.sample(4096);
        let k = argmax(&d);
        let h = TAU / 4096.0;
        let phi = golden_max(|x| self.density(x), a[k] - h, a[k] + h);
        (phi.rem_euclid(TAU), self.density(phi))
    }

    pub fn trough(&self) -> (f64, f64) {
        let (a, d) = self.sample(4096);
        let neg: Vec<f64> = d.iter().map(|v| -v).collect();
        let k = argmax(&neg);
        let h = TAU / 4096.0;
        let phi = golden_max(|x| -self.density(x), a[k] - h, a[k] + h);
        (phi.rem_euclid(TAU), self.density(phi))
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Radial integrals `R̄_{p,d} = ∫₀^∞ R_{p,d}(r) r dr` for `p + d ≤ n_max`,
/// indexed `[d][p]`, by adaptive Gauss–Kronrod quadrature to 1e-10.
pub fn radial_integrals(n_max: usize) -> Vec<Vec<f64>> {
    let ln_fact = ln_factorials(2 * n_max + 2);
    (0..=n_max)
        .map(|d| {
            let p_max = n_max - d;
            let r_max = ((p_max as f64) + 0.5 * d as f64 + 0.5).sqrt() + 6.0;
            let mut buf = vec![0.0; p_max + 1];
            integrate_vec(
                |r, out| {
                    radial_kernels(r, d, p_max, &ln_fact, &mut buf);
                    for (o, b) in out.iter_mut().zip(&buf) {
                        *o = b * r;
                    }
                },
                0.0,
                r_max,
                p_max + 1,
                1e-10,
            )
        })
        .collect()
}

/// Phase distribution of a single-mode state, `P(φ) = ∫ W(r e^{iφ}) r dr`.
pub fn phase_marginal(rho: &DensityMatrix) -> Result<PhaseDistribution> {
    if rho.space().modes() != 1 {
        return Err(VdpError::InvalidSpace("phase marginal needs a single-mode state".into()));
    }
    let n_max = rho.space().n_max();
    let radial = radial_integrals(n_max);
    let m = rho.matrix();
    // harmonic e^{ikφ} collects |p⟩⟨p+k| (bra index larger)
    let harmonics = (0..=n_max)
        .map(|k| {
            (0..=n_max - k)
                .map(|p| m[(p, p + k)] * radial[k][p])
                .sum::<Complex64>()
        })
        .collect();
    Ok(PhaseDistribution { harmonics })
}

/// Phase marginal of a grid by angular binning of `W·ΔA`; returns the bin
/// centers and densities.
pub fn phase_marginal_from_grid(grid: &WignerGrid, bins: usize) -> (Vec<f64>, Vec<f64>) {
    let width = TAU / bins as f64;
    let mut mass = vec![0.0; bins];
    for (a, w) in grid.points().zip(&grid.values) {
        if a.norm() == 0.0 {
            continue;
        }
        let b = ((a.arg().rem_euclid(TAU)) / width) as usize % bins;
        mass[b] += w;
    }
    let total: f64 = mass.iter().sum();
    let centers = (0..bins).map(|b| (b as f64 + 0.5) * width).collect();
    (centers, mass.iter().map(|m| m / (total * width)).collect())
}

/// Distribution of the phase difference `θ = φ₁ − φ₂` of a two-mode state,
/// with amplitudes and the phase sum integrated out.
///
/// Only elements `|n₁ n₂⟩⟨m₁ m₂|` with `m₁ − n₁ = n₂ − m₂ = k` feed the
/// harmonic `e^{ikθ}`.
pub fn phase_difference_distribution(rho: &DensityMatrix) -> Result<PhaseDistribution> {
    let space = rho.space();
    if space.modes() != 2 {
        return Err(VdpError::InvalidSpace("phase difference needs a two-mode state".into()));
    }
    let n_max = space.n_max();
    let radial = radial_integrals(n_max);
    let m = rho.matrix();
    let harmonics = (0..=n_max)
        .map(|k| {
            let mut acc = ZERO;
            for n1 in 0..=n_max - k {
                for m2 in 0..=n_max - k {
                    let row = space.index(n1, m2 + k);
                    let col = space.index(n1 + k, m2);
                    acc += m[(row, col)] * (radial[k][n1] * radial[k][m2]);
                }
            }
            acc * TAU
        })
        .collect();
    Ok(PhaseDistribution { harmonics })
}

/// Large-κ₂ Wigner function of the undriven oscillator,
/// `(2/3π)(4|α|²+1)e^{−2|α|²}`.
pub fn reference_wq_undriven(alpha: Complex64) -> f64 {
    let s = alpha.norm_sqr();
    2.0 / (3.0 * PI) * (4.0 * s + 1.0) * (-2.0 * s).exp()
}

/// Large-κ₂ Wigner function of the driven oscillator (unnormalized), in
/// polar coordinates `α = r e^{iφ}`.
pub fn reference_wq_driven(r: f64, phi: f64, delta: f64, e: f64, kappa1: f64) -> f64 {
    let k = kappa1;
    (2.0 * (delta * delta + 9.0 * k * k)
        + 2.0 * (4.0 * delta * delta + 3.0 * e * e + 36.0 * k * k) * r * r
        - 4.0 * e * r * (delta * phi.cos() + 3.0 * k * phi.sin()))
        * (-2.0 * r * r).exp()
}

/// Leading large-κ₂ phase-difference distribution of two coupled oscillators,
/// `1/2π + (V²/9πκ₂²) cos 2θ`.
pub fn reference_wq_phase_difference(theta: f64, v: f64, kappa2: f64) -> f64 {
    1.0 / TAU + v * v / (9.0 * PI * kappa2 * kappa2) * (2.0 * theta).cos()
}

/// `⟨a⟩` of a single-mode state.
pub fn mean_amplitude(rho: &DensityMatrix) -> Result<Complex64> {
    let l = make_ladder_operators(rho.space())?;
    expectation(rho, &l.a)
}
