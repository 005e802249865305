//! Mean-field theory of infinitely many globally coupled quantum oscillators.
//!
//! Each oscillator obeys the master equation with `H = V(α*a + αa†)`, where
//! `α = ⟨a⟩` is its own expectation value, which makes the equation nonlinear.
//! A synchronized solution rotates, `⟨a⟩ = r e^{−iμt}`. In the frame rotating
//! at `μ` it is the steady state of an ordinary driven oscillator with
//! detuning `−μ` and drive `E = 2Vr`, so the branch is found by solving the
//! two real conditions `Tr[ρ(r, μ) a] = r` for `(r, μ)` with Newton's method.
//! [`meanfield_evolve`] integrates the nonlinear equation directly and serves
//! as an independent check.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};
use crate::fock::{CMatrix, DensityMatrix, FockSpace, ONE, ZERO};
use crate::lindblad::{
    vec_trace, build_liouvillian, default_dt, initial_n_max, steady_state, top_population, unvectorize, vectorize,
    DissipatorSpec, HamiltonianSpec, KernelPlan, KernelSolver, Rk4Workspace, TOP_POPULATION_TOL,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Self-consistency residual below which a fixed point is accepted.
pub const SELF_CONSISTENCY_TOL: f64 = 1e-10;

/// A state counts as synchronized when `r` exceeds this fraction of the
/// classical amplitude `√(κ₁/2κ₂+1)`.
pub const SYNC_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldState {
    #[serde(skip)]
    pub rho: DensityMatrix,
    pub alpha_mf: Complex64,
    pub r: f64,
    /// Rotation frequency `μ` of `⟨a⟩ = r e^{−iμt}`.
    pub frequency: f64,
    /// `|Tr[ρa] − α_mf|`.
    pub residual: f64,
    pub n_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Synchronized,
    Unsynchronized,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Synchronized => "synchronized",
            Branch::Unsynchronized => "unsynchronized",
        }
    }
}

/// One steady state of the phase diagram. `seed` is the initial condition,
/// `branch` the state it ended on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub v: f64,
    pub kappa2: f64,
    pub seed: Branch,
    pub branch: Branch,
    pub r: f64,
    pub converged: bool,
}

fn sqrt_table(d: usize) -> Vec<f64> {
    (0..=d).map(|k| (k as f64).sqrt()).collect()
}

/// `Tr[ρa] = ∑ ρ_{j+1,j} √(j+1)` on a vectorized single-mode matrix.
fn vec_mean_a(x: &[Complex64], d: usize, sq: &[f64]) -> Complex64 {
    (0..d - 1).map(|j| x[(j + 1) * d + j] * sq[j + 1]).sum()
}

/// Adds `−iV(α*[a,ρ] + α[a†,ρ])` to `out`.
fn add_field_commutator(x: &[Complex64], d: usize, v: f64, alpha: Complex64, sq: &[f64], out: &mut [Complex64]) {
    let cm = -I * v * alpha.conj();
    let cp = -I * v * alpha;
    for i in 0..d {
        for j in 0..d {
            let mut a_comm = ZERO;
            if i + 1 < d {
                a_comm += x[(i + 1) * d + j] * sq[i + 1];
            }
            if j >= 1 {
                a_comm -= x[i * d + j - 1] * sq[j];
            }
            let mut ad_comm = ZERO;
            if i >= 1 {
                ad_comm += x[(i - 1) * d + j] * sq[i];
            }
            if j + 1 < d {
                ad_comm -= x[i * d + j + 1] * sq[j + 1];
            }
            out[i * d + j] += cm * a_comm + cp * ad_comm;
        }
    }
}

/// Result of integrating the nonlinear mean-field equation.
#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldEvolution {
    pub state: MeanFieldState,
    pub times: Vec<f64>,
    pub r_series: Vec<f64>,
    pub alpha_series: Vec<Complex64>,
    /// `r` constant within 1e-6 over the final 10% of the run.
    pub converged: bool,
}

/// Fixed-step RK4 integration of the mean-field master equation with `⟨a⟩`
/// recomputed at every stage.
pub fn meanfield_evolve(
    diss: DissipatorSpec,
    v: f64,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<MeanFieldEvolution> {
    let space = rho0.space();
    if space.modes() != 1 {
        return Err(VdpError::InvalidSpace("mean-field evolution needs a single-mode state".into()));
    }
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(VdpError::InvalidParameter(format!(
            "need dt > 0 and t_final > 0, got {dt}, {t_final}"
        )));
    }
    let d = space.dim();
    let l0 = build_liouvillian(space, diss, HamiltonianSpec::None)?;
    let sq = sqrt_table(d);
    let steps = (t_final / dt).ceil() as usize;
    let h = t_final / steps as f64;
    let record_every = (steps / 2000).max(1);
    let mut x = vectorize(rho0.matrix());
    let mut rk = Rk4Workspace::new(x.len());
    let mut times = vec![0.0];
    let first = vec_mean_a(&x, d, &sq);
    let mut alpha_series = vec![first];
    let mut r_series = vec![first.norm()];
    for step in 1..=steps {
        rk.step(&mut x, h, |y, out| {
            l0.matrix().mul_vec_into(y, out);
            let alpha = vec_mean_a(y, d, &sq);
            add_field_commutator(y, d, v, alpha, &sq, out);
        });
        if step % 100 == 0 || step == steps {
            crate::lindblad::symmetrize_vec(&mut x, d);
            crate::lindblad::check_stability(&x, d, step as f64 * h, h)?;
        }
        if step % record_every == 0 || step == steps {
            let alpha = vec_mean_a(&x, d, &sq);
            times.push(step as f64 * h);
            alpha_series.push(alpha);
            r_series.push(alpha.norm());
        }
    }
    let tail = &r_series[(r_series.len() as f64 * 0.9) as usize..];
    let (lo, hi) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let converged = hi - lo < 1e-6;
    let rho = DensityMatrix::from_matrix_unchecked(space, unvectorize(&x, d))?;
    let alpha = vec_mean_a(&x, d, &sq);
    // the frequency follows from the phase drift over the final tenth
    let k0 = (alpha_series.len() as f64 * 0.9) as usize;
    let frequency = if alpha_series[k0..].iter().all(|a| a.norm() > 1e-9) {
        // unwrapped: consecutive records are far less than half a turn apart
        let dphi: f64 = alpha_series[k0..].windows(2).map(|w| (w[1] / w[0]).arg()).sum();
        -dphi / (times[times.len() - 1] - times[k0]).max(f64::MIN_POSITIVE)
    } else {
        0.0
    };
    Ok(MeanFieldEvolution {
        state: MeanFieldState {
            rho,
            alpha_mf: alpha,
            r: alpha.norm(),
            frequency,
            residual: 0.0,
            n_max: space.n_max(),
        },
        times,
        r_series,
        alpha_series,
        converged,
    })
}

/// Largest stable RK4 step for [`meanfield_evolve`] with field strength `V·r`.
pub fn meanfield_dt(space: FockSpace, diss: DissipatorSpec, v: f64, r: f64) -> f64 {
    let field = 2.0 * v.abs() * r * (space.n_max() as f64).sqrt();
    default_dt(space, diss).min(0.2 / field.max(1e-12))
}

/// Co-rotating steady state for given `(r, μ)`, with derivatives of
/// `F = Tr[ρa] − r` with respect to `r` and `μ`.
struct Evaluation {
    rho: Vec<Complex64>,
    f: Complex64,
    df_dr: Complex64,
    df_dmu: Complex64,
}

fn evaluate(space: FockSpace, diss: DissipatorSpec, v: f64, r: f64, mu: f64, sq: &[f64]) -> Result<Evaluation> {
    evaluate_pinned(space, diss, v, r, mu, sq, None)
}

fn evaluate_pinned(space: FockSpace, diss: DissipatorSpec, v: f64, r: f64, mu: f64, sq: &[f64], pin: Option<usize>) -> Result<Evaluation> {
    let d = space.dim();
    let l = build_liouvillian(space, diss, HamiltonianSpec::Drive { delta: -mu, e: 2.0 * v * r })?;
    let solver = KernelSolver::new(KernelPlan::new(&l), pin)?;
    let x = solver.kernel();
    let t = vec_trace(x, d);
    let f = vec_mean_a(x, d, sq) / t - r;

    // ∂L/∂r·x = −iV[a + a†, x],  ∂L/∂μ·x = i[N, x]
    let xm = unvectorize(x, d);
    let a = CMatrix::from_fn(d, d, |i, j| if i + 1 == j { Complex64::new(sq[j], 0.0) } else { ZERO });
    let q = &a + a.adjoint();
    let dr = (&q * &xm - &xm * &q) * (-I * v);
    let dmu = CMatrix::from_fn(d, d, |i, j| I * (i as f64 - j as f64) * xm[(i, j)]);
    let derivative = |m: &CMatrix| -> Complex64 {
        let rhs: Vec<Complex64> = vectorize(m).iter().map(|c| -c).collect();
        let y = solver.solve(&rhs);
        let ty = vec_trace(&y, d);
        (vec_mean_a(&y, d, sq) - vec_mean_a(x, d, sq) * ty / t) / t
    };
    let df_dr = derivative(&dr) - ONE;
    let df_dmu = derivative(&dmu);
    let rho: Vec<Complex64> = x.iter().map(|c| c / t).collect();
    Ok(Evaluation { rho, f, df_dr, df_dmu })
}

/// Damped Newton (Levenberg–Marquardt) solve of the synchronized fixed
/// point at truncation `n_max`, starting from `(r, μ)`.
///
/// Near the fold of the branch the Jacobian is nearly singular along a
/// narrow valley and plain Newton steps overshoot, hence the damping.
/// Fails early once `r` drops below `r_floor` or the residual stalls.
fn newton(
    space: FockSpace,
    diss: DissipatorSpec,
    v: f64,
    guess: (f64, f64),
    r_floor: f64,
) -> Result<(f64, f64, Evaluation)> {
    let sq = sqrt_table(space.dim());
    let (mut r, mut mu) = guess;
    let mut ev = evaluate(space, diss, v, r, mu, &sq)?;
    let mut lambda = 1e-6;
    let mut checkpoint = ev.f.norm();
    for it in 1..=150 {
        if ev.f.norm() < SELF_CONSISTENCY_TOL {
            return Ok((r, mu, ev));
        }
        if r < r_floor {
            break;
        }
        if it % 10 == 0 {
            // a local minimum of |F| that is not a root: the branch has ended
            if ev.f.norm() > 0.5 * checkpoint {
                break;
            }
            checkpoint = ev.f.norm();
        }
        let (a11, a12, a21, a22) = (ev.df_dr.re, ev.df_dmu.re, ev.df_dr.im, ev.df_dmu.im);
        // normal equations JᵀJ δ = −JᵀF with Marquardt scaling
        let g = [a11 * ev.f.re + a21 * ev.f.im, a12 * ev.f.re + a22 * ev.f.im];
        let h11 = a11 * a11 + a21 * a21;
        let h22 = a12 * a12 + a22 * a22;
        let h12 = a11 * a12 + a21 * a22;
        let mut improved = false;
        while lambda < 1e12 {
            let (m11, m22) = (h11 * (1.0 + lambda), h22 * (1.0 + lambda));
            let det = m11 * m22 - h12 * h12;
            let dr = -(m22 * g[0] - h12 * g[1]) / det;
            let dmu = -(m11 * g[1] - h12 * g[0]) / det;
            let (r_new, mu_new) = (r + dr, mu + dmu);
            if det.is_finite() && det != 0.0 && r_new > 1e-8 {
                let trial = evaluate(space, diss, v, r_new, mu_new, &sq)?;
                if trial.f.norm() < ev.f.norm() {
                    r = r_new;
                    mu = mu_new;
                    ev = trial;
                    lambda = (lambda / 5.0).max(1e-12);
                    improved = true;
                    break;
                }
            }
            lambda = lambda.max(1e-6) * 8.0;
        }
        if !improved {
            break;
        }
    }
    if ev.f.norm() < SELF_CONSISTENCY_TOL {
        return Ok((r, mu, ev));
    }
    Err(VdpError::NoConvergence(format!(
        "mean-field Newton did not converge at V = {v}, r = {r} (residual {:.2e})",
        ev.f.norm()
    )))
}

/// Synchronized fixed point `(r > 0, μ)`, with the truncation grown until
/// the top levels are empty.
///
/// `guess` defaults to the noiseless classical solution `(√(κ₁/2κ₂+1), V)`.
pub fn solve_synchronized(
    diss: DissipatorSpec,
    v: f64,
    guess: Option<(f64, f64)>,
    n_max: Option<usize>,
) -> Result<MeanFieldState> {
    let classical = (diss.classical_occupation().sqrt(), v);
    let mut guess = guess.unwrap_or(classical);
    let mut n = n_max.unwrap_or_else(|| initial_n_max(diss));
    loop {
        let space = FockSpace::single(n)?;
        let (r, mu, ev) = newton(space, diss, v, guess, SYNC_FRACTION * classical.0)?;
        let rho = DensityMatrix::from_matrix_unchecked(space, unvectorize(&ev.rho, space.dim()))?.symmetrized();
        let top = top_population(&rho);
        if top < TOP_POPULATION_TOL || n_max.is_some() {
            return Ok(MeanFieldState {
                rho,
                alpha_mf: Complex64::new(r, 0.0),
                r,
                frequency: mu,
                residual: ev.f.norm(),
                n_max: n,
            });
        }
        guess = (r, mu);
        n = (n as f64 * 1.25).ceil() as usize + 2;
        if n > 400 {
            return Err(VdpError::NoConvergence(format!(
                "mean-field truncation exceeded 400 levels at V = {v}"
            )));
        }
    }
}

/// The `r = 0` fixed point: the undriven steady state.
pub fn unsynchronized_state(diss: DissipatorSpec, n_max: Option<usize>) -> Result<MeanFieldState> {
    let space = FockSpace::single(n_max.unwrap_or_else(|| initial_n_max(diss)))?;
    let rho = steady_state(&build_liouvillian(space, diss, HamiltonianSpec::None)?)?;
    let alpha = crate::fock::expectation(&rho, &crate::fock::make_ladder_operators(space)?.a)?;
    Ok(MeanFieldState {
        residual: alpha.norm(),
        alpha_mf: ZERO,
        r: 0.0,
        frequency: 0.0,
        n_max: space.n_max(),
        rho,
    })
}

/// Largest real part of the spectrum of the mean-field equation linearized
/// about `r = 0`; negative means the unsynchronized state is stable.
///
/// A small field `δα` only feeds the coherences `ρ_{j+1,j}`, which also carry
/// `⟨a⟩`, so the linearization closes on that `n_max`-dimensional block:
/// `M = L₀|₊ − iV·[a†, ρ₀]⟨a|`.
pub fn unsynchronized_growth_rate(diss: DissipatorSpec, v: f64, n_max: Option<usize>) -> Result<f64> {
    let state = unsynchronized_state(diss, n_max)?;
    let space = state.rho.space();
    let d = space.dim();
    let l0 = build_liouvillian(space, diss, HamiltonianSpec::None)?;
    let sq = sqrt_table(d);
    let block: Vec<usize> = (0..d - 1).map(|j| (j + 1) * d + j).collect();
    let n = block.len();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (bi, &row) in block.iter().enumerate() {
        for (col, val) in l0.matrix().row(row) {
            if let Ok(bj) = block.binary_search(&col) {
                m[(bi, bj)] += val;
            }
        }
    }
    let p = state.rho.populations();
    for bi in 0..n {
        // [a†, ρ₀]_{j+1,j} = √(j+1)(p_j − p_{j+1})
        let c = sq[bi + 1] * (p[bi] - p[bi + 1]);
        for bj in 0..n {
            m[(bi, bj)] += -I * v * c * sq[bj + 1];
        }
    }
    let eig = m.schur().eigenvalues().ok_or_else(|| {
        VdpError::NoConvergence("eigenvalues of the linearized mean-field operator".into())
    })?;
    Ok(eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// Both branches at each coupling in `v_values`.
///
/// The synchronized branch is continued from large to small `V`; where the
/// continuation fails a fresh start from the classical solution is tried
/// before the branch is declared absent.
pub fn hysteresis_scan(diss: DissipatorSpec, v_values: &[f64]) -> Result<Vec<(PhasePoint, PhasePoint)>> {
    let threshold = SYNC_FRACTION * diss.classical_occupation().sqrt();
    let mut order: Vec<usize> = (0..v_values.len()).collect();
    order.sort_by(|&a, &b| v_values[b].total_cmp(&v_values[a]));
    let mut out = vec![None; v_values.len()];
    let mut guess: Option<(f64, f64)> = None;
    for k in order {
        let v = v_values[k];
        let synced = if v > 0.0 { find_synchronized(diss, v, guess) } else { None };
        let sync_point = match &synced {
            Some(s) if s.r > threshold => {
                guess = Some((s.r, s.frequency));
                PhasePoint {
                    v,
                    kappa2: diss.kappa2,
                    seed: Branch::Synchronized,
                    branch: Branch::Synchronized,
                    r: s.r,
                    converged: true,
                }
            }
            _ => PhasePoint {
                v,
                kappa2: diss.kappa2,
                seed: Branch::Synchronized,
                branch: Branch::Unsynchronized,
                r: 0.0,
                converged: true,
            },
        };
        let rate = unsynchronized_growth_rate(diss, v, None)?;
        let unsync_point = PhasePoint {
            v,
            kappa2: diss.kappa2,
            seed: Branch::Unsynchronized,
            branch: Branch::Unsynchronized,
            r: 0.0,
            converged: rate < 0.0,
        };
        out[k] = Some((sync_point, unsync_point));
    }
    Ok(out.into_iter().map(|p| p.expect("every coupling visited")).collect())
}

/// The stable synchronized state at `v`, if any.
///
/// Above the fold the synchronized branch comes with an unstable partner at
/// smaller `r`. Starting from the classical amplitude selects the stable one;
/// `guess` (a neighbouring solution) is the fallback close to the fold.
fn find_synchronized(diss: DissipatorSpec, v: f64, guess: Option<(f64, f64)>) -> Option<MeanFieldState> {
    let threshold = SYNC_FRACTION * diss.classical_occupation().sqrt();
    let accept = |s: MeanFieldState| if s.r > threshold { Some(s) } else { None };
    if let Some(s) = solve_synchronized(diss, v, None, None).ok().and_then(accept) {
        return Some(s);
    }
    guess.and_then(|g| solve_synchronized(diss, v, Some(g), None).ok().and_then(accept))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub kappa2: f64,
    /// Midpoint of the final bracket.
    pub v_critical: f64,
    /// Half-width of the final bracket.
    pub tolerance: f64,
    /// Synchronized `r` at the upper end of the bracket.
    pub r_above: f64,
    /// `r` jumps from 0 to at least `0.1·√(κ₁/2κ₂+1)` across the bracket.
    pub first_order: bool,
    /// `(v, r or 0)` for every coupling tested.
    pub evaluations: Vec<(f64, f64)>,
    pub widened: bool,
}

/// Smallest coupling at which a synchronized branch exists, by bisection to
/// relative accuracy `rel_tol`, for every `κ₂` in `kappa2_list`.
///
/// If `[v_lo, v_hi]` does not bracket the transition the range is doubled
/// (halved) up to four times before a [`VdpError::Bracket`] is returned.
pub fn phase_boundary(
    kappa1: f64,
    kappa2_list: &[f64],
    v_range: (f64, f64),
    rel_tol: f64,
) -> Result<Vec<BoundaryPoint>> {
    kappa2_list
        .iter()
        .map(|&k2| boundary_for(DissipatorSpec::new(kappa1, k2)?, v_range, rel_tol))
        .collect()
}

fn boundary_for(diss: DissipatorSpec, v_range: (f64, f64), rel_tol: f64) -> Result<BoundaryPoint> {
    let (mut lo, mut hi) = v_range;
    if !(lo > 0.0 && hi > lo) {
        return Err(VdpError::Bracket(format!("invalid coupling range [{lo}, {hi}]")));
    }
    let mut evaluations = Vec::new();
    let mut widened = false;
    let mut above = None;
    for attempt in 0..=4 {
        let s = find_synchronized(diss, hi, None);
        evaluations.push((hi, s.as_ref().map_or(0.0, |s| s.r)));
        if let Some(s) = s {
            above = Some(s);
            break;
        }
        if attempt == 4 {
            return Err(VdpError::Bracket(format!(
                "no synchronized branch up to V = {hi} at kappa2 = {}",
                diss.kappa2
            )));
        }
        lo = hi;
        hi *= 2.0;
        widened = true;
    }
    let mut above = above.expect("loop exits with a solution");
    for attempt in 0..=4 {
        let s = find_synchronized(diss, lo, Some((above.r, above.frequency)));
        evaluations.push((lo, s.as_ref().map_or(0.0, |s| s.r)));
        match s {
            None => break,
            Some(s) => {
                if attempt == 4 {
                    return Err(VdpError::Bracket(format!(
                        "synchronized branch persists down to V = {lo} at kappa2 = {}",
                        diss.kappa2
                    )));
                }
                hi = lo;
                above = s;
                lo *= 0.5;
                widened = true;
            }
        }
    }
    while hi - lo > rel_tol * hi {
        let mid = 0.5 * (lo + hi);
        let s = find_synchronized(diss, mid, Some((above.r, above.frequency)));
        evaluations.push((mid, s.as_ref().map_or(0.0, |s| s.r)));
        match s {
            Some(s) => {
                hi = mid;
                above = s;
            }
            None => lo = mid,
        }
    }
    let threshold = SYNC_FRACTION * diss.classical_occupation().sqrt();
    Ok(BoundaryPoint {
        kappa2: diss.kappa2,
        v_critical: 0.5 * (lo + hi),
        tolerance: 0.5 * (hi - lo),
        r_above: above.r,
        first_order: above.r >= threshold,
        evaluations,
        widened,
    })
}
