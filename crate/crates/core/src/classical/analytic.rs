use num_complex::Complex64;

use crate::wigner::{grid_from_fn, WignerGrid};

fn exponent(alpha: Complex64, kappa1: f64, kappa2: f64, e: Option<f64>) -> f64 {
    let s = alpha.norm_sqr();
    if kappa2.is_infinite() {
        return 2.0 * s - s * s;
    }
    // −(E/2i)(α − α*) = −E·Im α
    let drive = e.map_or(0.0, |e| -e * alpha.im);
    2.0 / (3.0 * kappa1 + 2.0 * kappa2) * ((kappa1 + 2.0 * kappa2) * s - kappa2 * s * s + drive)
}

/// Stationary density of the single-oscillator Langevin equation (unnormalized),
/// `exp{(2/(3κ₁+2κ₂))[(κ₁+2κ₂)|α|² − κ₂|α|⁴ − (E/2i)(α − α*)]}`, drive at `Δ = 0`.
///
/// `kappa2 = f64::INFINITY` gives the limit `exp(2|α|² − |α|⁴)`.
pub fn analytic_wc(alpha: Complex64, kappa1: f64, kappa2: f64, e: Option<f64>) -> f64 {
    exponent(alpha, kappa1, kappa2, e).exp()
}

/// Radius of the maximum of the undriven density, `√((κ₁+2κ₂)/2κ₂)`.
pub fn analytic_wc_radial_peak(kappa1: f64, kappa2: f64) -> f64 {
    if kappa2.is_infinite() {
        1.0
    } else {
        ((kappa1 + 2.0 * kappa2) / (2.0 * kappa2)).sqrt()
    }
}

/// Cell-averaged density on a grid, normalized to unit mass on the grid.
pub fn analytic_wc_grid(
    extent: f64,
    resolution: usize,
    kappa1: f64,
    kappa2: f64,
    e: Option<f64>,
) -> WignerGrid {
    let peak = analytic_wc_radial_peak(kappa1, kappa2);
    // shift the exponent by its largest value on the undriven ring to avoid overflow
    let shift = exponent(Complex64::new(peak, 0.0), kappa1, kappa2, None);
    let grid = grid_from_fn(extent, resolution, 5, |a| (exponent(a, kappa1, kappa2, e) - shift).exp());
    grid.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use std::f64::consts::TAU;

    #[test]
    fn quantum_limit_peaks_on_the_unit_circle() {
        let f = |r: f64| analytic_wc(Complex64::new(r, 0.0), 1.0, f64::INFINITY, None);
        for r in [0.5, 0.9, 1.1, 1.5] {
            assert!(f(r) < f(1.0));
        }
        // the drive drops out of the limit
        let z = Complex64::new(0.3, -0.8);
        assert_eq!(
            analytic_wc(z, 1.0, f64::INFINITY, Some(2.0)),
            analytic_wc(z, 1.0, f64::INFINITY, None)
        );
        // and a large finite κ₂ approaches it
        let ratio = analytic_wc(z, 1.0, 1e9, None) / analytic_wc(z, 1.0, f64::INFINITY, None);
        assert!((ratio - 1.0).abs() < 1e-8);
    }

    #[test]
    fn classical_limit_peak_radius() {
        let peak = analytic_wc_radial_peak(1.0, 0.05);
        assert!((peak - 11f64.sqrt()).abs() < 1e-12);
        let f = |r: f64| analytic_wc(Complex64::new(r, 0.0), 1.0, 0.05, None);
        assert!(f(peak) > f(peak - 0.01) && f(peak) > f(peak + 0.01));
    }

    #[test]
    fn drive_tilts_toward_negative_imaginary_axis() {
        let up = analytic_wc(Complex64::new(0.0, 1.0), 1.0, 1.0, Some(1.0));
        let down = analytic_wc(Complex64::new(0.0, -1.0), 1.0, 1.0, Some(1.0));
        assert!(down > up);
    }

    #[test]
    fn grid_matches_radial_quadrature() {
        let (k1, k2) = (1.0, 1.0);
        let grid = analytic_wc_grid(4.0, 161, k1, k2, None);
        assert!((grid.mass() - 1.0).abs() < 1e-12);
        let norm = integrate(|r| TAU * r * analytic_wc(Complex64::new(r, 0.0), k1, k2, None), 0.0, 6.0, 1e-12);
        let i = 80 + 20; // α = 1 on the real axis
        let exact = analytic_wc(Complex64::new(grid.coordinate(i), 0.0), k1, k2, None) / norm;
        assert!((grid.at(i, 80) - exact).abs() < 1e-3 * exact);
    }
}
