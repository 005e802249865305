//! Truncated Fock-space arithmetic.
//!
//! A [`FockSpace`] keeps the levels `|0⟩ … |n_max⟩` of one oscillator, or the
//! tensor product of two such ladders (mode 1 ⊗ mode 2, mode 1 being the
//! slow index). Operators and states are dense: the largest Hilbert spaces
//! used here are a few hundred levels, so sparse storage is only worth it at
//! the superoperator level (see [`crate::lindblad`]).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VdpError};

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FockSpace {
    n_max: usize,
    modes: usize,
}

impl FockSpace {
    pub fn new(n_max: usize, modes: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(VdpError::InvalidSpace(format!(
                "n_max must be at least 2, got {n_max}"
            )));
        }
        if modes != 1 && modes != 2 {
            return Err(VdpError::InvalidSpace(format!(
                "only one or two modes are supported, got {modes}"
            )));
        }
        Ok(Self { n_max, modes })
    }

    pub fn single(n_max: usize) -> Result<Self> {
        Self::new(n_max, 1)
    }

    pub fn two_mode(n_max: usize) -> Result<Self> {
        Self::new(n_max, 2)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Levels per mode, `n_max + 1`.
    pub fn mode_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.mode_dim().pow(self.modes as u32)
    }

    /// The single-mode space with the same truncation.
    pub fn mode_space(&self) -> Self {
        Self {
            n_max: self.n_max,
            modes: 1,
        }
    }

    /// Occupation numbers `(n1, n2)` of basis index `i` (`n2 = 0` for one mode).
    pub fn occupations(&self, i: usize) -> (usize, usize) {
        match self.modes {
            1 => (i, 0),
            _ => (i / self.mode_dim(), i % self.mode_dim()),
        }
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        match self.modes {
            1 => n1,
            _ => n1 * self.mode_dim() + n2,
        }
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(VdpError::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: CMatrix,
}

impl FockOperator {
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(VdpError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        space.check_dim(matrix.nrows())?;
        Ok(Self { space, matrix })
    }

    pub fn identity(space: FockSpace) -> Self {
        Self {
            space,
            matrix: CMatrix::identity(space.dim(), space.dim()),
        }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space,
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.space.check_dim(other.matrix.nrows())?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            space: self.space,
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.check_dim(other.matrix.nrows())?;
        Ok(Self {
            space: self.space,
            matrix: &self.matrix + &other.matrix,
        })
    }

    /// Action on a state vector.
    pub fn apply(&self, ket: &nalgebra::DVector<Complex64>) -> Result<nalgebra::DVector<Complex64>> {
        self.space.check_dim(ket.len())?;
        Ok(&self.matrix * ket)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermiticity_deviation(&self.matrix) <= tol
    }
}

/// `a`, `a†` and `a†a` of one mode.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub a: FockOperator,
    pub a_dag: FockOperator,
    pub number: FockOperator,
}

/// Ladder operators of a single-mode space: `a|n⟩ = √n |n−1⟩`.
pub fn make_ladder_operators(space: FockSpace) -> Result<Ladder> {
    if space.modes() != 1 {
        return Err(VdpError::InvalidSpace(
            "make_ladder_operators expects a single-mode space; use mode_ladder".into(),
        ));
    }
    let d = space.dim();
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    let a_dag = a.adjoint();
    let number = CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            Complex64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    });
    Ok(Ladder {
        a: FockOperator { space, matrix: a },
        a_dag: FockOperator {
            space,
            matrix: a_dag,
        },
        number: FockOperator {
            space,
            matrix: number,
        },
    })
}

/// Ladder operators of `mode` (0 or 1) embedded in `space`.
pub fn mode_ladder(space: FockSpace, mode: usize) -> Result<Ladder> {
    if mode >= space.modes() {
        return Err(VdpError::InvalidParameter(format!(
            "mode {mode} out of range for a {}-mode space",
            space.modes()
        )));
    }
    let single = make_ladder_operators(space.mode_space())?;
    if space.modes() == 1 {
        return Ok(single);
    }
    let id = FockOperator::identity(space.mode_space());
    let embed = |op: &FockOperator| -> Result<FockOperator> {
        if mode == 0 {
            tensor(op, &id)
        } else {
            tensor(&id, op)
        }
    };
    Ok(Ladder {
        a: embed(&single.a)?,
        a_dag: embed(&single.a_dag)?,
        number: embed(&single.number)?,
    })
}

/// Kronecker product `op1 ⊗ op2` of two single-mode operators.
pub fn tensor(op1: &FockOperator, op2: &FockOperator) -> Result<FockOperator> {
    if op1.space.modes() != 1 || op2.space.modes() != 1 {
        return Err(VdpError::InvalidSpace(
            "tensor expects two single-mode operators".into(),
        ));
    }
    if op1.space != op2.space {
        return Err(VdpError::DimensionMismatch {
            expected: op1.space.dim(),
            found: op2.space.dim(),
        });
    }
    Ok(FockOperator {
        space: FockSpace::two_mode(op1.space.n_max())?,
        matrix: op1.matrix.kronecker(&op2.matrix),
    })
}

/// Largest entry magnitude.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Largest elementwise `|M − M†|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Diagnostics for the density-matrix invariants.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StateDiagnostics {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = -1e-8;

    pub fn is_valid(&self) -> bool {
        self.hermiticity <= Self::HERMITICITY_TOL
            && self.trace_error <= Self::TRACE_TOL
            && self.min_eigenvalue >= Self::POSITIVITY_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: FockSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validated constructor: rejects matrices violating the state invariants.
    pub fn new(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(space, matrix)?;
        let diag = rho.diagnostics();
        if !diag.is_valid() {
            return Err(VdpError::InvalidParameter(format!(
                "not a density matrix: {diag:?}"
            )));
        }
        Ok(rho)
    }

    /// Only the dimension is checked. Used by solvers that enforce the
    /// invariants themselves.
    pub fn from_matrix_unchecked(space: FockSpace, matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(VdpError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        space.check_dim(matrix.nrows())?;
        Ok(Self { space, matrix })
    }

    pub fn fock(space: FockSpace, n: usize) -> Result<Self> {
        Self::diagonal(space, &{
            let mut p = vec![0.0; space.dim()];
            if n >= p.len() {
                return Err(VdpError::InvalidParameter(format!(
                    "level {n} outside the truncated space"
                )));
            }
            p[n] = 1.0;
            p
        })
    }

    /// Mixture of Fock states with the given populations.
    pub fn diagonal(space: FockSpace, populations: &[f64]) -> Result<Self> {
        space.check_dim(populations.len())?;
        let d = space.dim();
        let matrix = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                Complex64::new(populations[i], 0.0)
            } else {
                ZERO
            }
        });
        Self::new(space, matrix)
    }

    pub fn pure(space: FockSpace, ket: &nalgebra::DVector<Complex64>) -> Result<Self> {
        space.check_dim(ket.len())?;
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(VdpError::InvalidParameter("zero state vector".into()));
        }
        let ket = ket / Complex64::new(norm, 0.0);
        Ok(Self {
            space,
            matrix: &ket * ket.adjoint(),
        })
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.space.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }

    /// Populations of each level of one mode (reduced over the other).
    pub fn mode_populations(&self, mode: usize) -> Vec<f64> {
        let md = self.space.mode_dim();
        let mut p = vec![0.0; md];
        for i in 0..self.space.dim() {
            let (n1, n2) = self.space.occupations(i);
            let n = if mode == 0 { n1 } else { n2 };
            p[n] += self.matrix[(i, i)].re;
        }
        p
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        let herm = hermiticity_deviation(&self.matrix);
        let trace_error = (self.matrix.trace() - ONE).norm();
        let sym = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eigenvalue = sym
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        StateDiagnostics {
            hermiticity: herm,
            trace_error,
            min_eigenvalue,
        }
    }

    /// Reduced state of one mode of a two-mode state.
    pub fn partial_trace(&self, keep_mode: usize) -> Result<Self> {
        if self.space.modes() != 2 {
            return Err(VdpError::InvalidSpace(
                "partial trace needs a two-mode state".into(),
            ));
        }
        let md = self.space.mode_dim();
        let mut out = CMatrix::zeros(md, md);
        for n1 in 0..md {
            for m1 in 0..md {
                for k in 0..md {
                    let (row, col) = if keep_mode == 0 {
                        (self.space.index(n1, k), self.space.index(m1, k))
                    } else {
                        (self.space.index(k, n1), self.space.index(k, m1))
                    };
                    out[(n1, m1)] += self.matrix[(row, col)];
                }
            }
        }
        Ok(Self {
            space: self.space.mode_space(),
            matrix: out,
        })
    }

    /// `ρ₁ ⊗ ρ₂`.
    pub fn product(rho1: &Self, rho2: &Self) -> Result<Self> {
        if rho1.space != rho2.space || rho1.space.modes() != 1 {
            return Err(VdpError::InvalidSpace(
                "product state needs two single-mode states on the same truncation".into(),
            ));
        }
        Ok(Self {
            space: FockSpace::two_mode(rho1.space.n_max())?,
            matrix: rho1.matrix.kronecker(&rho2.matrix),
        })
    }

    /// Same state in a larger (or smaller) single-mode truncation; levels
    /// beyond the new cutoff are dropped and the trace renormalized.
    pub fn retruncate(&self, n_max: usize) -> Result<Self> {
        if self.space.modes() != 1 {
            return Err(VdpError::InvalidSpace(
                "retruncation is implemented for single-mode states".into(),
            ));
        }
        let space = FockSpace::single(n_max)?;
        let d = space.dim();
        let old = self.space.dim();
        let mut m = CMatrix::from_fn(d, d, |i, j| {
            if i < old && j < old {
                self.matrix[(i, j)]
            } else {
                ZERO
            }
        });
        let tr = m.trace();
        m /= tr;
        Ok(Self { space, matrix: m })
    }

    /// `(ρ + ρ†)/2`, trace rescaled to one.
    pub fn symmetrized(&self) -> Self {
        let mut m = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = m.trace().re;
        m /= Complex64::new(tr, 0.0);
        Self {
            space: self.space,
            matrix: m,
        }
    }

    /// Unitary frame rotation `e^{-iχ a†a} ρ e^{iχ a†a}` (both modes for
    /// two-mode states), which maps `⟨a⟩ → e^{-iχ}⟨a⟩`.
    pub fn phase_rotated(&self, chi: f64) -> Self {
        let d = self.space.dim();
        let total = |i: usize| {
            let (n1, n2) = self.space.occupations(i);
            (n1 + n2) as f64
        };
        let m = CMatrix::from_fn(d, d, |i, j| {
            self.matrix[(i, j)] * Complex64::from_polar(1.0, -chi * (total(i) - total(j)))
        });
        Self {
            space: self.space,
            matrix: m,
        }
    }
}

/// Coherent state `|α⟩` truncated to the space and renormalized.
pub fn coherent_state(space: FockSpace, alpha: Complex64) -> Result<DensityMatrix> {
    if space.modes() != 1 {
        return Err(VdpError::InvalidSpace(
            "coherent_state expects a single-mode space".into(),
        ));
    }
    let ket = coherent_amplitudes(space, alpha)?;
    DensityMatrix::pure(space, &ket)
}

pub(crate) fn coherent_amplitudes(
    space: FockSpace,
    alpha: Complex64,
) -> Result<nalgebra::DVector<Complex64>> {
    let norm_sq = alpha.norm_sqr();
    if norm_sq > space.n_max() as f64 / 4.0 {
        return Err(VdpError::TruncationUnsafe {
            norm_sq,
            n_max: space.n_max(),
            required: (4.0 * norm_sq).ceil() as usize,
        });
    }
    let d = space.dim();
    let mut ket = nalgebra::DVector::from_element(d, ZERO);
    let mut c = Complex64::new((-norm_sq / 2.0).exp(), 0.0);
    ket[0] = c;
    for n in 1..d {
        c = c * alpha / (n as f64).sqrt();
        ket[n] = c;
    }
    Ok(ket)
}

/// `Tr[ρ · op]`.
pub fn expectation(rho: &DensityMatrix, op: &FockOperator) -> Result<Complex64> {
    if rho.space != op.space {
        return Err(VdpError::DimensionMismatch {
            expected: rho.space.dim(),
            found: op.space.dim(),
        });
    }
    let d = rho.space.dim();
    let mut acc = ZERO;
    for i in 0..d {
        for k in 0..d {
            let o = op.matrix[(k, i)];
            if o != ZERO {
                acc += rho.matrix[(i, k)] * o;
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn basis(d: usize, n: usize) -> DVector<Complex64> {
        let mut v = DVector::from_element(d, ZERO);
        v[n] = ONE;
        v
    }

    #[test]
    fn space_rejects_bad_sizes() {
        assert!(FockSpace::single(1).is_err());
        assert!(FockSpace::new(4, 3).is_err());
        assert_eq!(FockSpace::two_mode(3).unwrap().dim(), 16);
    }

    #[test]
    fn annihilation_lowers_levels() {
        let space = FockSpace::single(5).unwrap();
        let l = make_ladder_operators(space).unwrap();
        let out = l.a.apply(&basis(6, 1)).unwrap();
        assert_abs_diff_eq!(out[0].re, 1.0, epsilon = 1e-15);
        let out = l.a.apply(&basis(6, 4)).unwrap();
        assert_abs_diff_eq!(out[3].re, 2.0, epsilon = 1e-15);
        assert_eq!(out.iter().filter(|c| c.norm() > 0.0).count(), 1);
    }

    #[test]
    fn number_operator_diagonal() {
        let l = make_ladder_operators(FockSpace::single(3).unwrap()).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| l.number.matrix()[(i, i)].re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(l.a_dag.matrix(), &l.a.matrix().adjoint());
    }

    #[test]
    fn commutator_is_identity_below_cutoff() {
        let space = FockSpace::single(8).unwrap();
        let l = make_ladder_operators(space).unwrap();
        let comm = l.a.matrix() * l.a_dag.matrix() - l.a_dag.matrix() * l.a.matrix();
        for i in 0..8 {
            for j in 0..8 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm[(i, j)].re, expect, epsilon = 1e-12);
                assert_abs_diff_eq!(comm[(i, j)].im, 0.0, epsilon = 1e-12);
            }
        }
        // top level carries the truncation defect
        assert_abs_diff_eq!(comm[(8, 8)].re, -8.0, epsilon = 1e-12);
    }

    #[test]
    fn tensor_products() {
        let space = FockSpace::single(3).unwrap();
        let id = FockOperator::identity(space);
        let idid = tensor(&id, &id).unwrap();
        assert_eq!(idid.matrix(), &CMatrix::identity(16, 16));

        let l = make_ladder_operators(space).unwrap();
        let two = FockSpace::two_mode(3).unwrap();
        let n1 = tensor(&l.number, &id).unwrap();
        let out = n1.apply(&basis(16, two.index(2, 0))).unwrap();
        assert_abs_diff_eq!(out[two.index(2, 0)].re, 2.0, epsilon = 1e-15);

        let hop = tensor(&l.a, &l.a_dag).unwrap();
        let out = hop.apply(&basis(16, two.index(1, 0))).unwrap();
        assert_abs_diff_eq!(out[two.index(0, 1)].re, 1.0, epsilon = 1e-15);

        let other = FockOperator::identity(FockSpace::single(4).unwrap());
        assert!(tensor(&id, &other).is_err());
    }

    #[test]
    fn coherent_state_moments() {
        let rho = coherent_state(FockSpace::single(6).unwrap(), ZERO).unwrap();
        assert_abs_diff_eq!(rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);

        let space = FockSpace::single(20).unwrap();
        let l = make_ladder_operators(space).unwrap();
        let rho = coherent_state(space, ONE).unwrap();
        let n = expectation(&rho, &l.number).unwrap();
        assert_abs_diff_eq!(n.re, 1.0, epsilon = 1e-6);

        let space = FockSpace::single(30).unwrap();
        let l = make_ladder_operators(space).unwrap();
        let alpha = Complex64::new(1.0, 1.0);
        let rho = coherent_state(space, alpha).unwrap();
        let a = expectation(&rho, &l.a).unwrap();
        assert_abs_diff_eq!(a.re, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(a.im, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn coherent_state_rejects_unsafe_amplitude() {
        let err = coherent_state(FockSpace::single(10).unwrap(), Complex64::new(3.0, 0.0))
            .unwrap_err();
        match err {
            VdpError::TruncationUnsafe { required, .. } => assert_eq!(required, 36),
            other => panic!("unexpected {other:?}"),
        }
        assert!(err_message_mentions_n_max());
    }

    fn err_message_mentions_n_max() -> bool {
        let err = coherent_state(FockSpace::single(10).unwrap(), Complex64::new(3.0, 0.0))
            .unwrap_err();
        err.to_string().contains("n_max >= 36")
    }

    #[test]
    fn expectation_examples() {
        let space = FockSpace::single(4).unwrap();
        let l = make_ladder_operators(space).unwrap();
        let one = DensityMatrix::fock(space, 1).unwrap();
        assert_abs_diff_eq!(expectation(&one, &l.number).unwrap().re, 1.0);
        let mixed = DensityMatrix::diagonal(space, &[2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            expectation(&mixed, &l.number).unwrap().re,
            1.0 / 3.0,
            epsilon = 1e-15
        );
        let other = make_ladder_operators(FockSpace::single(5).unwrap()).unwrap();
        assert!(expectation(&mixed, &other.number).is_err());
    }

    #[test]
    fn partial_trace_of_product() {
        let space = FockSpace::single(3).unwrap();
        let r1 = DensityMatrix::diagonal(space, &[0.5, 0.25, 0.25, 0.0]).unwrap();
        let r2 = coherent_state(space, Complex64::new(0.3, -0.2)).unwrap();
        let prod = DensityMatrix::product(&r1, &r2).unwrap();
        let back1 = prod.partial_trace(0).unwrap();
        let back2 = prod.partial_trace(1).unwrap();
        assert!(max_abs(&(back1.matrix() - r1.matrix())) < 1e-14);
        assert!(max_abs(&(back2.matrix() - r2.matrix())) < 1e-14);
    }

    fn random_state(space: FockSpace, seed: &[f64]) -> DensityMatrix {
        let d = space.dim();
        let g = CMatrix::from_fn(d, d, |i, j| {
            let k = (i * d + j) % seed.len();
            Complex64::new(seed[k] * (i as f64 + 1.0).sin(), seed[(k + 1) % seed.len()] * (j as f64).cos())
        });
        let m = &g * g.adjoint() + CMatrix::identity(d, d) * Complex64::new(1e-3, 0.0);
        let tr = m.trace();
        DensityMatrix::new(space, m / tr).unwrap()
    }

    proptest! {
        #[test]
        fn hermitian_expectations_are_real(seed in prop::collection::vec(-1.0f64..1.0, 8)) {
            let space = FockSpace::single(5).unwrap();
            let rho = random_state(space, &seed);
            let l = make_ladder_operators(space).unwrap();
            let x = l.a.add(&l.a_dag).unwrap();
            prop_assert!(expectation(&rho, &x).unwrap().im.abs() < 1e-10);
            prop_assert!(expectation(&rho, &l.number).unwrap().im.abs() < 1e-10);
        }

        #[test]
        fn tensor_preserves_hermiticity(seed in prop::collection::vec(-1.0f64..1.0, 6)) {
            let space = FockSpace::single(3).unwrap();
            let h1 = random_state(space, &seed);
            let h2 = random_state(space, &seed[1..]);
            let a = FockOperator::new(space, h1.matrix().clone()).unwrap();
            let b = FockOperator::new(space, h2.matrix().clone()).unwrap();
            let ab = tensor(&a, &b).unwrap();
            prop_assert!(ab.is_hermitian(1e-14));
            // (A ⊗ B)(C ⊗ D) = AC ⊗ BD
            let id = FockOperator::identity(space);
            let lhs = tensor(&a, &id).unwrap().mul(&tensor(&id, &b).unwrap()).unwrap();
            prop_assert!(max_abs(&(lhs.matrix() - ab.matrix())) < 1e-14);
        }
    }
}
