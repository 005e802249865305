//! Liouvillian assembly, time evolution and steady states of the van der Pol
//! master equation
//!
//! ```text
//! ρ̇ = −i[H,ρ] + κ₁(2a†ρa − aa†ρ − ρaa†) + κ₂(2a²ρa†² − a†²a²ρ − ρa†²a²)
//! ```
//!
//! summed over modes for the two-oscillator system. Density matrices are
//! vectorized row-major, `vec(ρ)[i·D + j] = ρ_ij`, so `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Result, VdpError};
use crate::fock::{mode_ladder, CMatrix, DensityMatrix, FockSpace, ONE, ZERO};
use crate::sparse::{connected_component, CsrMatrix, TripletBuilder};

/// Dissipation rates in units of κ₁.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipatorSpec {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl DissipatorSpec {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self> {
        if !(kappa1 > 0.0 && kappa2 > 0.0) || !kappa1.is_finite() || !kappa2.is_finite() {
            return Err(VdpError::InvalidParameter(format!(
                "dissipation rates must be positive, got kappa1 = {kappa1}, kappa2 = {kappa2}"
            )));
        }
        Ok(Self { kappa1, kappa2 })
    }

    /// Rates that may individually be zero, for isolating one channel.
    pub fn channels(kappa1: f64, kappa2: f64) -> Result<Self> {
        if kappa1 < 0.0 || kappa2 < 0.0 || !kappa1.is_finite() || !kappa2.is_finite() {
            return Err(VdpError::InvalidParameter(
                "dissipation rates must be non-negative".into(),
            ));
        }
        Ok(Self { kappa1, kappa2 })
    }

    /// Noise-free limit-cycle occupation `κ₁/2κ₂ + 1`.
    pub fn classical_occupation(&self) -> f64 {
        self.kappa1 / (2.0 * self.kappa2) + 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum HamiltonianSpec {
    None,
    /// `Δa†a + (E/2)(a + a†)`.
    Drive { delta: f64, e: f64 },
    /// `V(a₁†a₂ + a₁a₂†)`, two modes only.
    Coupling { v: f64 },
    /// `V(α*a + αa†)` with the self-consistent field `α = ⟨a⟩`.
    MeanField { v: f64, alpha_mf: Complex64 },
}

impl HamiltonianSpec {
    fn name(&self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Drive { .. } => "drive",
            Self::Coupling { .. } => "coupling",
            Self::MeanField { .. } => "meanfield",
        }
    }

    fn required_modes(&self) -> Option<usize> {
        match self {
            Self::None => None,
            Self::Coupling { .. } => Some(2),
            _ => Some(1),
        }
    }

    /// Dense Hamiltonian on `space`, or `None` when it vanishes.
    pub fn matrix(&self, space: FockSpace) -> Result<Option<CMatrix>> {
        if let Some(modes) = self.required_modes() {
            if modes != space.modes() {
                return Err(VdpError::ModeMismatch {
                    variant: self.name(),
                    expected: modes,
                    found: space.modes(),
                });
            }
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        let h = match *self {
            Self::None => return Ok(None),
            Self::Drive { delta, e } => {
                let l = mode_ladder(space, 0)?;
                l.number.matrix() * c(delta) + (l.a.matrix() + l.a_dag.matrix()) * c(e / 2.0)
            }
            Self::Coupling { v } => {
                let l1 = mode_ladder(space, 0)?;
                let l2 = mode_ladder(space, 1)?;
                (l1.a_dag.matrix() * l2.a.matrix() + l1.a.matrix() * l2.a_dag.matrix()) * c(v)
            }
            Self::MeanField { v, alpha_mf } => {
                let l = mode_ladder(space, 0)?;
                (l.a.matrix() * alpha_mf.conj() + l.a_dag.matrix() * alpha_mf) * c(v)
            }
        };
        Ok(Some(h))
    }
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: FockSpace,
    matrix: CsrMatrix,
}

/// Nonzero entries of a dense matrix as `(row, col, value)`.
fn entries(m: &CMatrix) -> Vec<(usize, usize, Complex64)> {
    let mut out = Vec::new();
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != ZERO {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Adds `coeff · (A ⊗ Bᵀ)`, the superoperator of `ρ ↦ coeff·AρB`.
fn push_sandwich(
    builder: &mut TripletBuilder,
    d: usize,
    coeff: Complex64,
    left: &[(usize, usize, Complex64)],
    right: &[(usize, usize, Complex64)],
) {
    if coeff == ZERO {
        return;
    }
    for &(i, k, a) in left {
        for &(l, j, b) in right {
            builder.push(i * d + j, k * d + l, coeff * a * b);
        }
    }
}

/// Liouvillian of the master equation on `space`.
pub fn build_liouvillian(
    space: FockSpace,
    diss: DissipatorSpec,
    ham: HamiltonianSpec,
) -> Result<Liouvillian> {
    let d = space.dim();
    let id = entries(&CMatrix::identity(d, d));
    let mut builder = TripletBuilder::new(d * d, d * d);

    if let Some(h) = ham.matrix(space)? {
        let h = entries(&h);
        push_sandwich(&mut builder, d, Complex64::new(0.0, -1.0), &h, &id);
        push_sandwich(&mut builder, d, Complex64::new(0.0, 1.0), &id, &h);
    }

    let k1 = Complex64::new(diss.kappa1, 0.0);
    let k2 = Complex64::new(diss.kappa2, 0.0);
    for mode in 0..space.modes() {
        let l = mode_ladder(space, mode)?;
        let a = l.a.matrix();
        let ad = l.a_dag.matrix();
        // products of truncated matrices keep the generator trace preserving
        let a_ad = a * ad;
        let a2 = a * a;
        let ad2 = ad * ad;
        let ad2_a2 = &ad2 * &a2;

        push_sandwich(&mut builder, d, k1 * 2.0, &entries(ad), &entries(a));
        push_sandwich(&mut builder, d, -k1, &entries(&a_ad), &id);
        push_sandwich(&mut builder, d, -k1, &id, &entries(&a_ad));

        push_sandwich(&mut builder, d, k2 * 2.0, &entries(&a2), &entries(&ad2));
        push_sandwich(&mut builder, d, -k2, &entries(&ad2_a2), &id);
        push_sandwich(&mut builder, d, -k2, &id, &entries(&ad2_a2));
    }

    Ok(Liouvillian {
        space,
        matrix: builder.build(),
    })
}

pub fn vectorize(m: &CMatrix) -> Vec<Complex64> {
    let d = m.nrows();
    let mut v = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            v.push(m[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[Complex64], d: usize) -> CMatrix {
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

impl Liouvillian {
    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `L(ρ)` for an arbitrary operator `ρ`.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let d = self.space.dim();
        unvectorize(&self.matrix.mul_vec(&vectorize(rho)), d)
    }

    /// `‖L·vec(ρ)‖∞`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        self.matrix
            .mul_vec(&vectorize(rho.matrix()))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Time step `0.05/(κ₁ + κ₂·n_max²)`; the two-phonon loss at the truncation
/// edge is the stiffest rate.
pub fn default_dt(space: FockSpace, diss: DissipatorSpec) -> f64 {
    let n = space.n_max() as f64;
    0.05 / (diss.kappa1 + diss.kappa2 * n * n).max(1e-12)
}

/// Steps between Hermitian re-symmetrizations.
const SYMMETRIZE_EVERY: usize = 100;

/// Reusable RK4 stepper for `ẋ = f(x)` on vectorized matrices.
pub(crate) struct Rk4Workspace {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4Workspace {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            k1: vec![ZERO; n],
            k2: vec![ZERO; n],
            k3: vec![ZERO; n],
            k4: vec![ZERO; n],
            tmp: vec![ZERO; n],
        }
    }

    pub(crate) fn step<F>(&mut self, x: &mut [Complex64], dt: f64, mut rhs: F)
    where
        F: FnMut(&[Complex64], &mut [Complex64]),
    {
        let h = Complex64::new(dt, 0.0);
        rhs(x, &mut self.k1);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k1) {
            *t = xi + k * h * 0.5;
        }
        rhs(&self.tmp, &mut self.k2);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k2) {
            *t = xi + k * h * 0.5;
        }
        rhs(&self.tmp, &mut self.k3);
        for ((t, xi), k) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k3) {
            *t = xi + k * h;
        }
        rhs(&self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for i in 0..x.len() {
            x[i] += sixth * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// Derivative evaluated at the start of the last step.
    pub(crate) fn last_derivative(&self) -> &[Complex64] {
        &self.k1
    }
}

pub(crate) fn symmetrize_vec(x: &mut [Complex64], d: usize) {
    for i in 0..d {
        x[i * d + i].im = 0.0;
        for j in i + 1..d {
            let avg = (x[i * d + j] + x[j * d + i].conj()) * 0.5;
            x[i * d + j] = avg;
            x[j * d + i] = avg.conj();
        }
    }
}

pub(crate) fn vec_trace(x: &[Complex64], d: usize) -> Complex64 {
    (0..d).map(|i| x[i * d + i]).sum()
}

/// Checks the two symptoms of an unstable step: trace drift and entries
/// leaving the unit disk (impossible for a density matrix).
pub(crate) fn check_stability(x: &[Complex64], d: usize, t: f64, dt: f64) -> Result<()> {
    let drift = (vec_trace(x, d) - ONE).norm();
    let blowup = x
        .iter()
        .map(|c| c.norm())
        .fold(0.0, |m: f64, v| if v.is_nan() { f64::INFINITY } else { m.max(v) });
    if !(drift <= 1e-6) || !blowup.is_finite() || blowup > 1.0 + 1e-6 {
        return Err(VdpError::Unstable {
            drift: if blowup.is_finite() { drift.max(blowup - 1.0) } else { f64::INFINITY },
            time: t,
            suggested_dt: dt / 4.0,
        });
    }
    Ok(())
}

/// Integrates the master equation to `t_final` with fixed-step RK4.
pub fn evolve(
    l: &Liouvillian,
    rho0: &DensityMatrix,
    t_final: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    if rho0.space() != l.space {
        return Err(VdpError::DimensionMismatch {
            expected: l.space.dim(),
            found: rho0.space().dim(),
        });
    }
    if !(dt > 0.0) || t_final < 0.0 {
        return Err(VdpError::InvalidParameter(format!(
            "need dt > 0 and t_final >= 0, got dt = {dt}, t_final = {t_final}"
        )));
    }
    let d = l.space.dim();
    let steps = (t_final / dt).ceil() as usize;
    let h = if steps > 0 { t_final / steps as f64 } else { 0.0 };
    let mut x = vectorize(rho0.matrix());
    let mut rk = Rk4Workspace::new(x.len());
    for step in 1..=steps {
        rk.step(&mut x, h, |y, out| l.matrix.mul_vec_into(y, out));
        if step % SYMMETRIZE_EVERY == 0 || step == steps {
            symmetrize_vec(&mut x, d);
            check_stability(&x, d, step as f64 * h, h)?;
        }
    }
    DensityMatrix::from_matrix_unchecked(l.space, unvectorize(&x, d))
}

/// How a steady state was obtained.
#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateReport {
    pub method: String,
    pub unknowns: usize,
    pub residual: f64,
    pub liouvillian_scale: f64,
}

/// Number of unknowns above which the solver switches to time evolution.
pub const DIRECT_UNKNOWNS_LIMIT: usize = 4_000_000;

/// Exact steady state: `L·vec(ρ) = 0`, `Tr ρ = 1`.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    steady_state_with_report(l).map(|(rho, _)| rho)
}

pub fn steady_state_with_report(l: &Liouvillian) -> Result<(DensityMatrix, SteadyStateReport)> {
    let d = l.space.dim();
    let scale = l.matrix.max_abs();
    let plan = KernelPlan::new(l);
    if plan.kept.len() > DIRECT_UNKNOWNS_LIMIT {
        let rho = steady_state_by_evolution(l, None, 1e-9, 5e3)?;
        let residual = l.residual(&rho);
        return Ok((
            rho,
            SteadyStateReport {
                method: "time-evolution".into(),
                unknowns: plan.kept.len(),
                residual,
                liouvillian_scale: scale,
            },
        ));
    }
    let solver = KernelSolver::new(plan, None)?;
    let mut full = solver.kernel().to_vec();
    let trace = vec_trace(&full, d);
    for v in full.iter_mut() {
        *v /= trace;
    }
    symmetrize_vec(&mut full, d);
    let rho = DensityMatrix::from_matrix_unchecked(l.space, unvectorize(&full, d))?;
    let residual = l.residual(&rho);
    let report = SteadyStateReport {
        method: "sparse-lu".into(),
        unknowns: solver.plan.kept.len(),
        residual,
        liouvillian_scale: scale,
    };
    Ok((rho, report))
}

/// The block of a Liouvillian connected to the populations.
pub(crate) struct KernelPlan {
    d: usize,
    kept: Vec<usize>,
    sub: CsrMatrix,
}

impl KernelPlan {
    pub(crate) fn new(l: &Liouvillian) -> Self {
        let d = l.space.dim();
        let diagonal: Vec<usize> = (0..d).map(|i| i * d + i).collect();
        // Blocks of L not connected to the populations cannot carry the
        // (trace-one) kernel vector.
        let adj = l.matrix.symmetric_adjacency();
        let kept = connected_component(&adj, &diagonal);
        let sub = l.matrix.principal_submatrix(&kept);
        Self { d, kept, sub }
    }
}

/// Factorization of `L` with one population row replaced by `x_p = 1`.
///
/// [`KernelSolver::kernel`] is the unnormalized steady state; [`KernelSolver::solve`]
/// solves `L y = b` on the same block with `y_p = 0`, which is what
/// derivatives of the steady state with respect to parameters need.
pub(crate) struct KernelSolver {
    plan: KernelPlan,
    lu: Lu<usize, Complex64>,
    pinned: usize,
    kernel: Vec<Complex64>,
}

impl KernelSolver {
    /// `pin_level` fixes the pinned population; otherwise the vacuum is
    /// tried first and the most populated level used if the vacuum is nearly empty.
    pub(crate) fn new(plan: KernelPlan, pin_level: Option<usize>) -> Result<Self> {
        let d = plan.d;
        let position = |full: usize| plan.kept.binary_search(&full).ok();
        let populations: Vec<usize> = (0..d).filter_map(|i| position(i * d + i)).collect();
        let mut pinned = populations[pin_level.unwrap_or(0).min(populations.len() - 1)];
        let mut attempt = if pin_level.is_some() { 1 } else { 0 };
        loop {
            let lu = factorize_pinned(&plan.sub, pinned)?;
            let mut rhs = vec![ZERO; plan.sub.nrows()];
            rhs[pinned] = ONE;
            let x = lu_solve(&lu, &rhs);
            let (best, best_val) = populations
                .iter()
                .map(|&p| (p, x[p].norm()))
                .fold((pinned, 0.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if x[pinned].norm() < 1e-3 * best_val && attempt == 0 {
                pinned = best;
                attempt += 1;
                continue;
            }
            let mut kernel = vec![ZERO; d * d];
            for (k, &g) in plan.kept.iter().enumerate() {
                kernel[g] = x[k];
            }
            return Ok(Self {
                plan,
                lu,
                pinned,
                kernel,
            });
        }
    }

    pub(crate) fn kernel(&self) -> &[Complex64] {
        &self.kernel
    }

    /// Solves `L y = b` with the pinned entry of `y` set to zero. Entries of
    /// `b` outside the population block must vanish.
    pub(crate) fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let mut rhs: Vec<Complex64> = self.plan.kept.iter().map(|&g| b[g]).collect();
        rhs[self.pinned] = ZERO;
        let y = lu_solve(&self.lu, &rhs);
        let mut full = vec![ZERO; self.plan.d * self.plan.d];
        for (k, &g) in self.plan.kept.iter().enumerate() {
            full[g] = y[k];
        }
        full
    }
}

/// Factorizes `sub` with row `pinned` replaced by the unit row. The pinned
/// row is redundant: the population rows of a trace-preserving generator sum
/// to zero.
fn factorize_pinned(sub: &CsrMatrix, pinned: usize) -> Result<Lu<usize, Complex64>> {
    let n = sub.nrows();
    let mut entries = Vec::with_capacity(sub.nnz() + 1);
    for i in 0..n {
        if i == pinned {
            entries.push(Triplet::new(i, i, ONE));
        } else {
            entries.extend(sub.row(i).map(|(j, v)| Triplet::new(i, j, v)));
        }
    }
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &entries)
        .map_err(|e| VdpError::InvalidParameter(format!("sparse assembly: {e:?}")))?;
    a.sp_lu().map_err(|e| {
        VdpError::DegenerateKernel(format!("{e:?}; the Liouvillian kernel is not one-dimensional"))
    })
}

fn lu_solve(lu: &Lu<usize, Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let rhs = Mat::<Complex64>::from_fn(b.len(), 1, |i, _| b[i]);
    let x = lu.solve(&rhs);
    (0..b.len()).map(|i| x[(i, 0)]).collect()
}

/// Relaxes `seed` (vacuum if `None`) under `L` until `‖ρ̇‖∞ < tol`.
pub fn steady_state_by_evolution(
    l: &Liouvillian,
    seed: Option<&DensityMatrix>,
    tol: f64,
    t_max: f64,
) -> Result<DensityMatrix> {
    let d = l.space.dim();
    let mut x = match seed {
        Some(rho) => vectorize(rho.matrix()),
        None => {
            let mut v = vec![ZERO; d * d];
            v[0] = ONE;
            v
        }
    };
    let n = l.space.n_max() as f64;
    let rates = l.matrix.max_abs().max(1e-12);
    let dt = 0.05 / rates.max(n);
    let mut rk = Rk4Workspace::new(x.len());
    let mut t = 0.0;
    let mut step = 0usize;
    while t < t_max {
        rk.step(&mut x, dt, |y, out| l.matrix.mul_vec_into(y, out));
        t += dt;
        step += 1;
        if step % SYMMETRIZE_EVERY == 0 {
            symmetrize_vec(&mut x, d);
            check_stability(&x, d, t, dt)?;
            let rate = rk.last_derivative().iter().map(|c| c.norm()).fold(0.0, f64::max);
            if rate < tol {
                return DensityMatrix::from_matrix_unchecked(l.space, unvectorize(&x, d));
            }
        }
    }
    Err(VdpError::NoConvergence(format!(
        "steady state not reached by t = {t_max}"
    )))
}

/// Analytic `κ₂ → ∞` populations of `|0⟩` and `|1⟩`.
///
/// Only `|0⟩ → |1⟩` (rate 2κ₁), `|1⟩ → |2⟩` (rate 4κ₁) and the instantaneous
/// `|2⟩ → |0⟩` survive; stationarity of the cycle flux gives `p₀·2κ₁ = p₁·4κ₁`.
pub fn reference_populations_large_kappa2() -> (f64, f64) {
    let (up01, up12) = (2.0, 4.0);
    let p1 = up01 / (up01 + up12);
    (1.0 - p1, p1)
}

/// Starting truncation for a scenario: the classical occupation plus six
/// standard deviations of the phonon-number distribution, plus margin.
pub fn initial_n_max(diss: DissipatorSpec) -> usize {
    let mean = diss.classical_occupation();
    let var = (3.0 * diss.kappa1 + 2.0 * diss.kappa2) / (4.0 * diss.kappa2);
    ((mean + 6.0 * var.sqrt()).ceil() as usize + 5).max(6)
}

/// Threshold for the combined population of the two highest retained levels.
pub const TOP_POPULATION_TOL: f64 = 1e-6;

/// Population in the two highest levels (largest over modes).
pub fn top_population(rho: &DensityMatrix) -> f64 {
    (0..rho.space().modes())
        .map(|m| {
            let p = rho.mode_populations(m);
            let k = p.len();
            p[k - 1] + p[k - 2]
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct AdaptiveSolution {
    #[serde(skip)]
    pub rho: DensityMatrix,
    pub n_max: usize,
    pub top_population: f64,
    pub report: SteadyStateReport,
}

/// Steady state with the truncation grown until the top two levels hold
/// less than [`TOP_POPULATION_TOL`]. `n_start` overrides the initial level.
pub fn adaptive_steady_state(
    modes: usize,
    diss: DissipatorSpec,
    ham: HamiltonianSpec,
    n_start: Option<usize>,
) -> Result<AdaptiveSolution> {
    let mut n_max = n_start.unwrap_or_else(|| initial_n_max(diss));
    loop {
        let space = FockSpace::new(n_max, modes)?;
        let l = build_liouvillian(space, diss, ham)?;
        let (rho, report) = steady_state_with_report(&l)?;
        let top = top_population(&rho);
        if top < TOP_POPULATION_TOL || n_start.is_some() {
            return Ok(AdaptiveSolution {
                rho,
                n_max,
                top_population: top,
                report,
            });
        }
        n_max = (n_max as f64 * 1.25).ceil() as usize + 2;
        if n_max > 400 {
            return Err(VdpError::NoConvergence(format!(
                "truncation exceeded 400 levels with top population {top:.2e}"
            )));
        }
    }
}
